"""Central finite-difference verification of tape gradients."""

import numpy as np

from .tape import DiffkitError


class GradCheckError(DiffkitError):
    pass


def grad_check(fn, store, epsilon=1e-5, param_names=None, max_coords=None, rng=None):
    """Compare tape gradients of a scalar function against central differences.

    fn(store) must deterministically build a tape and return (tape, scalar
    node). Returns the max over checked coordinates of
    |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-8). max_coords, when set, caps
    the number of coordinates checked per parameter (sampled with rng).

    Central differences carry cancellation noise of about |f|*eps_mach/eps
    in absolute terms; coordinates where the analytic/numeric gap is below
    that floor are reported as exact, otherwise near-zero gradients would
    fail on float64 roundoff alone.
    """
    tape, out = fn(store)
    if not np.all(np.isfinite(out.value)):
        raise GradCheckError("function value is non-finite before perturbation")
    tape.backward(out)
    g_ad = {k: v.copy() for k, v in tape.grads.items()}
    names = param_names if param_names is not None else list(g_ad)
    if rng is None:
        rng = np.random.default_rng(0)
    noise_floor = 50.0 * max(abs(float(out.value)), 1.0) * np.finfo(float).eps / epsilon

    worst = 0.0
    for name in names:
        arr = store.get(name)
        flat = arr.reshape(-1)
        ga = g_ad.get(name, np.zeros(arr.shape)).reshape(-1)
        idxs = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            idxs = rng.choice(flat.size, size=max_coords, replace=False)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + epsilon
            _, up = fn(store)
            flat[i] = orig - epsilon
            _, dn = fn(store)
            flat[i] = orig
            if not (np.isfinite(up.value) and np.isfinite(dn.value)):
                raise GradCheckError(
                    f"non-finite output while perturbing parameter {name!r}"
                )
            g_fd = (float(up.value) - float(dn.value)) / (2.0 * epsilon)
            gap = abs(ga[i] - g_fd)
            if gap <= noise_floor:
                continue
            worst = max(worst, gap / max(abs(ga[i]), abs(g_fd), 1e-8))
    return worst
