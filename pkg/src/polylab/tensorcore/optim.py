"""Adam with decoupled weight decay and an optional cosine schedule."""

import math
from dataclasses import dataclass, field

import numpy as np

from .diff import ShapeMismatchError


@dataclass
class OptimizerState:
    lr: float = 1e-4
    weight_decay: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    schedule: str = "constant"          # "constant" | "cosine"
    horizon: int = 0                    # steps for the cosine ramp
    step_count: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def current_lr(self):
        if self.schedule == "constant" or self.horizon <= 0:
            return self.lr
        if self.schedule == "cosine":
            t = min(self.step_count, self.horizon)
            return self.lr * 0.5 * (1.0 + math.cos(math.pi * t /
                                                   self.horizon))
        raise ValueError(f"unknown schedule {self.schedule!r}")


def optimizer_step(params, grads, state, lr_scales=None):
    """One decoupled-weight-decay Adam update, in place on `params`.

    `params` and `grads` map names to same-shaped float64 arrays. The
    learning rate used is the scheduled rate at the pre-increment step
    count; decay shrinks parameters directly, independent of gradients.
    ``lr_scales`` maps name prefixes to per-namespace rate multipliers.
    """
    lr = state.current_lr()
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatchError(
                f"{name}: gradient {g.shape} vs parameter {p.shape}")
        lr_here = lr
        if lr_scales:
            for prefix, scale in lr_scales.items():
                if name.startswith(prefix):
                    lr_here = lr * scale
                    break
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        update = (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        p -= lr_here * update
        if state.weight_decay:
            p -= lr_here * state.weight_decay * p
    return params, state
