"""Model snapshots: checkpoint + config + sidecar data, swapped atomically."""

import json
import os
import shutil
import tempfile
import time

import numpy as np

from ..tensorcore import ParamStore, load_checkpoint, save_checkpoint
from .runconfig import RunConfig


class SnapshotError(RuntimeError):
    pass


class Snapshot:
    """One directory: config.json, params.bin, data.bin, snapshot.json,
    records.tsv, scalers.json."""

    def __init__(self, path):
        self.path = path

    @property
    def meta_path(self):
        return os.path.join(self.path, "snapshot.json")

    def read_meta(self):
        with open(self.meta_path, encoding="utf-8") as f:
            return json.load(f)

    def load(self):
        config = RunConfig.load(os.path.join(self.path, "config.json"))
        store, meta = ParamStore.load(os.path.join(self.path, "params.bin"))
        if meta.get("config_hash") != config.config_hash():
            raise SnapshotError(
                f"checkpoint hash {meta.get('config_hash')} does not match "
                f"config hash {config.config_hash()}")
        data = {}
        data_path = os.path.join(self.path, "data.bin")
        if os.path.exists(data_path):
            data, _ = load_checkpoint(data_path)
        scalers = {}
        sc_path = os.path.join(self.path, "scalers.json")
        if os.path.exists(sc_path):
            with open(sc_path, encoding="utf-8") as f:
                scalers = json.load(f)
        return config, store, data, scalers


def write_snapshot(path, config, store, data=None, scalers=None,
                   metrics=None, records_tsv=None):
    """Build the snapshot in a temp dir and atomically move into place."""
    parent = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=".snapshot-", dir=parent)
    try:
        config.save(os.path.join(tmp, "config.json"))
        store.save(os.path.join(tmp, "params.bin"),
                   meta={"config_hash": config.config_hash()})
        if data:
            save_checkpoint(os.path.join(tmp, "data.bin"),
                            {k: np.asarray(v, dtype=np.float64)
                             for k, v in data.items()},
                            meta={"config_hash": config.config_hash()})
        if scalers is not None:
            with open(os.path.join(tmp, "scalers.json"), "w",
                      encoding="utf-8") as f:
                json.dump(scalers, f, sort_keys=True, indent=2)
        if records_tsv is not None:
            with open(os.path.join(tmp, "records.tsv"), "w",
                      encoding="utf-8") as f:
                f.write(records_tsv)
        with open(os.path.join(tmp, "snapshot.json"), "w",
                  encoding="utf-8") as f:
            json.dump({"config_hash": config.config_hash(),
                       "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
                       "metrics": metrics or {}}, f, sort_keys=True,
                      indent=2)
        if os.path.isdir(path):
            shutil.rmtree(path)
        os.rename(tmp, path)
    except Exception:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return Snapshot(path)
