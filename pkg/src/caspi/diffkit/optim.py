"""Adam optimizer with bias correction."""

import numpy as np

from .tape import DiffkitError


class GradientError(DiffkitError):
    pass


class AdamState:
    def __init__(self, store, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.store = store
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(arr) for name, arr in store.items()}
        self.v = {name: np.zeros_like(arr) for name, arr in store.items()}


def adam_step(store, grads, state):
    """One Adam update over the given gradients; untouched params keep state.

    The whole step is aborted (no mutation at all) if any gradient is
    non-finite.
    """
    for name, g in grads.items():
        if name not in state.m:
            raise GradientError(f"gradient for unknown parameter {name!r}")
        if g.shape != store.get(name).shape:
            raise GradientError(
                f"gradient shape {g.shape} does not match parameter {name!r} "
                f"shape {store.get(name).shape}"
            )
        if not np.all(np.isfinite(g)):
            raise GradientError(f"non-finite gradient for parameter {name!r}")
    state.t += 1
    b1t = 1.0 - state.beta1**state.t
    b2t = 1.0 - state.beta2**state.t
    for name, g in grads.items():
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        update = (state.lr / b1t) * m / (np.sqrt(v / b2t) + state.eps)
        store.get(name)[...] -= update
    store.step += 1
