"""Schema-validated, namespaced run configuration."""

import hashlib
import json

DEFAULTS = {
    "seed": 0,
    "encoders": {
        "d_model": 64, "n_layers": 2, "n_heads": 4, "ffn_dim": 128,
        "rel_cap": 32, "max_seq_len": 128, "vocab_size": 265,
        "d_g": 32, "gnn_layers": 5,
        "d_s": 32, "interaction_layers": 6, "r_cut": 10.0,
        "max_neighbors": 64, "n_rbf": 32,
        "fp_embed_dim": 32, "fp_layers": 2, "fp_heads": 4, "fp_ffn": 64,
        "fp_seq_len": 256,
        "d_shared": 32, "z_table": 120,
    },
    "pretrain": {
        "p_mask": 0.15, "tau": 0.07, "lambda": 1.0, "epochs": 25,
        "patience": 10, "batch": 16, "accum": 4, "seed": 0,
        "lr": 1e-4, "weight_decay": 1e-2, "val_fraction": 0.1,
        "warmup_epochs": 1, "contrast_on_clean": True,
    },
    "regression": {
        "hidden": 64, "p_drop": 0.1, "lr": 1e-4, "weight_decay": 0.0,
        "epochs": 100, "patience": 10, "batch": 32, "val_fraction": 0.1,
        "seed": 0, "schedule": "cosine", "train_projection": True,
        "k_folds": 5,
    },
    "generation": {
        "top_p": 0.92, "temperature": 1.0, "repetition_penalty": 1.05,
        "max_len": 256, "min_len": 10, "sigma_train": 0.10,
        "sigma_gen": 0.15, "tau_s": 0.5, "n_seeds": 8, "n_per_seed": 16,
        "knn_k": 5, "d_model": 64, "n_layers": 2, "n_heads": 4,
        "ffn_dim": 128, "epochs": 60, "lr": 3e-3, "batch": 16,
    },
    "retrieval": {
        "embed_dim": 256, "m": 64, "ef_construction": 200,
        "ef_search": 128, "rerank_window": 50, "rerank_top": 5,
        "k1": 1.2, "b": 0.75, "now_year": 2026,
        "year_range": "2015..2025", "fp_novelty_bits": 2048,
    },
    "service": {"host": "127.0.0.1", "port": 8080},
}


class ConfigError(ValueError):
    pass


def _validate(data, defaults, path=""):
    merged = {}
    for key, default in defaults.items():
        here = f"{path}.{key}" if path else key
        if key not in data:
            merged[key] = default
            continue
        value = data[key]
        if isinstance(default, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here}: expected a table")
            merged[key] = _validate(value, default, here)
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{here}: expected a boolean")
            merged[key] = value
        elif isinstance(default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{here}: expected an integer")
            merged[key] = value
        elif isinstance(default, float):
            if isinstance(value, bool) or not isinstance(value, (int,
                                                                 float)):
                raise ConfigError(f"{here}: expected a number")
            merged[key] = float(value)
        else:
            if not isinstance(value, str):
                raise ConfigError(f"{here}: expected a string")
            merged[key] = value
    unknown = set(data) - set(defaults)
    if unknown:
        where = path or "top level"
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} at {where}")
    return merged


class RunConfig:
    def __init__(self, data=None):
        self.data = _validate(data or {}, DEFAULTS)

    def __getitem__(self, key):
        return self.data[key]

    def section(self, name):
        return dict(self.data[name])

    def to_json(self):
        return json.dumps(self.data, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls(json.loads(text))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())

    def config_hash(self):
        blob = json.dumps(self.data, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def encoder_config(self):
        from ..encoders import EncoderConfig

        return EncoderConfig(**self.section("encoders"))

    def pretrain_config(self):
        from ..pretrain import PretrainConfig

        section = self.section("pretrain")
        section["lam"] = section.pop("lambda")
        return PretrainConfig(**section)

    def regression_config(self):
        from ..propreg import RegressionConfig

        section = self.section("regression")
        section.pop("k_folds")
        return RegressionConfig(**section)
