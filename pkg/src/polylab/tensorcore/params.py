"""Namespaced parameter store shared by all trainable modules."""

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .diff import DiffArray


class ParamStore:
    """Maps dotted names (e.g. ``enc.D.tok_embed``) to trainable leaves."""

    def __init__(self):
        self._params = {}

    def __contains__(self, name):
        return name in self._params

    def __getitem__(self, name):
        return self._params[name]

    def add(self, name, value):
        if name in self._params:
            raise KeyError(f"parameter {name} already registered")
        leaf = DiffArray(np.asarray(value, dtype=np.float64),
                         requires_grad=True)
        self._params[name] = leaf
        return leaf

    def get_or_create(self, name, init_fn):
        if name not in self._params:
            self.add(name, init_fn())
        return self._params[name]

    def names(self, prefix=""):
        return sorted(n for n in self._params if n.startswith(prefix))

    def values(self):
        return {n: p.value for n, p in self._params.items()}

    def grads(self, names=None):
        names = names if names is not None else self.names()
        return {n: (self._params[n].grad
                    if self._params[n].grad is not None
                    else np.zeros_like(self._params[n].value))
                for n in names}

    def subset(self, prefixes):
        """Parameter arrays whose names fall under any given namespace."""
        out = {}
        for n, p in self._params.items():
            if any(n.startswith(pref) for pref in prefixes):
                out[n] = p.value
        return out

    def snapshot(self):
        return {n: p.value.copy() for n, p in self._params.items()}

    def restore(self, values):
        for n, arr in values.items():
            if n in self._params:
                self._params[n].value[...] = arr
            else:
                self.add(n, arr)

    def save(self, path, meta=None):
        save_checkpoint(path, self.values(), meta=meta)

    @classmethod
    def load(cls, path):
        values, meta = load_checkpoint(path)
        store = cls()
        for n, arr in values.items():
            store.add(n, arr)
        return store, meta


def glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def normal_embed(rng, count, dim, std=0.02):
    return rng.normal(0.0, std, size=(count, dim))
