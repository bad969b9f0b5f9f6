"""Hot recurrence kernels: gated recurrent scan, forward and backward.

Two interchangeable implementations live here. The numba path compiles the
per-timestep recurrence to machine code; the numpy path is a vectorized
fallback with identical semantics. Select with the CASPI_BACKEND env var
("numba" or "numpy"); default is numba when importable.

Layout conventions shared by both paths and by callers:
  - gx is the precomputed input projection x @ Wx + b, shape (B, T, 3H),
    gate order [r | z | n] along the last axis.
  - wh_rz (H, 2H) multiplies h_prev for the r and z gates; wh_n (H, H)
    multiplies (r * h_prev) for the candidate gate.
  - lengths (B,) int64 gives each row's valid prefix; for t >= lengths[b]
    the hidden state is carried through unchanged and stored gates are 0.

Recurrence (candidate gate applied to the reset-scaled previous state):
  r = sigmoid(gx_r + h @ Wh_r)
  z = sigmoid(gx_z + h @ Wh_z)
  n = tanh(gx_n + (r * h) @ Wh_n)
  h' = (1 - z) * n + z * h
"""

import os

import numpy as np

__all__ = [
    "backend_name",
    "gru_scan_fwd",
    "gru_scan_bwd",
    "gru_scan_fwd_numpy",
    "gru_scan_bwd_numpy",
]


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gru_scan_fwd_numpy(gx, wh_rz, wh_n, lengths):
    b, t, h3 = gx.shape
    h = h3 // 3
    hs = np.zeros((b, t, h))
    rg = np.zeros((b, t, h))
    zg = np.zeros((b, t, h))
    ng = np.zeros((b, t, h))
    hprev = np.zeros((b, h))
    for step in range(t):
        valid = (step < lengths)[:, None]
        arz = gx[:, step, : 2 * h] + hprev @ wh_rz
        r = _sigmoid(arz[:, :h])
        z = _sigmoid(arz[:, h:])
        q = r * hprev
        n = np.tanh(gx[:, step, 2 * h :] + q @ wh_n)
        hnew = (1.0 - z) * n + z * hprev
        hprev = np.where(valid, hnew, hprev)
        hs[:, step] = hprev
        rg[:, step] = np.where(valid, r, 0.0)
        zg[:, step] = np.where(valid, z, 0.0)
        ng[:, step] = np.where(valid, n, 0.0)
    return hs, rg, zg, ng


def gru_scan_bwd_numpy(dh_last, gx, wh_rz_t, wh_n_t, lengths, hs, rg, zg, ng):
    """Backward through the scan given the adjoint of the final state.

    wh_rz_t and wh_n_t are the transposed weight matrices. Returns the
    adjoint of gx; weight and input gradients are recovered by the caller
    from dgx via plain matrix products.
    """
    b, t, h3 = gx.shape
    h = h3 // 3
    dgx = np.zeros_like(gx)
    dh = dh_last.copy()
    for step in range(t - 1, -1, -1):
        valid = (step < lengths)[:, None]
        hprev = hs[:, step - 1] if step > 0 else np.zeros((b, h))
        r = rg[:, step]
        z = zg[:, step]
        n = ng[:, step]
        da_z = dh * (hprev - n) * z * (1.0 - z)
        da_n = dh * (1.0 - z) * (1.0 - n * n)
        dq = da_n @ wh_n_t
        da_r = dq * hprev * r * (1.0 - r)
        dhp = dh * z + dq * r
        dhp += np.concatenate((da_r, da_z), axis=1) @ wh_rz_t
        dgx[:, step, :h] = np.where(valid, da_r, 0.0)
        dgx[:, step, h : 2 * h] = np.where(valid, da_z, 0.0)
        dgx[:, step, 2 * h :] = np.where(valid, da_n, 0.0)
        dh = np.where(valid, dhp, dh)
    return dgx


def _build_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def fwd(gx, wh_rz, wh_n, lengths):
        b, t, h3 = gx.shape
        h = h3 // 3
        hs = np.zeros((b, t, h))
        rg = np.zeros((b, t, h))
        zg = np.zeros((b, t, h))
        ng = np.zeros((b, t, h))
        hprev = np.zeros((b, h))
        q = np.zeros((b, h))
        for step in range(t):
            prz = np.dot(hprev, wh_rz)
            for i in range(b):
                if step < lengths[i]:
                    for j in range(h):
                        r = 1.0 / (1.0 + np.exp(-(gx[i, step, j] + prz[i, j])))
                        rg[i, step, j] = r
                        q[i, j] = r * hprev[i, j]
                else:
                    for j in range(h):
                        q[i, j] = 0.0
            pn = np.dot(q, wh_n)
            for i in range(b):
                if step < lengths[i]:
                    for j in range(h):
                        z = 1.0 / (1.0 + np.exp(-(gx[i, step, h + j] + prz[i, h + j])))
                        n = np.tanh(gx[i, step, 2 * h + j] + pn[i, j])
                        zg[i, step, j] = z
                        ng[i, step, j] = n
                        hprev[i, j] = (1.0 - z) * n + z * hprev[i, j]
                for j in range(h):
                    hs[i, step, j] = hprev[i, j]
        return hs, rg, zg, ng

    @njit(cache=True)
    def bwd(dh_last, gx, wh_rz_t, wh_n_t, lengths, hs, rg, zg, ng):
        b, t, h3 = gx.shape
        h = h3 // 3
        dgx = np.zeros_like(gx)
        dh = dh_last.copy()
        da_rz = np.zeros((b, 2 * h))
        da_n = np.zeros((b, h))
        for step in range(t - 1, -1, -1):
            for i in range(b):
                if step < lengths[i]:
                    for j in range(h):
                        hp = hs[i, step - 1, j] if step > 0 else 0.0
                        z = zg[i, step, j]
                        n = ng[i, step, j]
                        da_rz[i, h + j] = dh[i, j] * (hp - n) * z * (1.0 - z)
                        da_n[i, j] = dh[i, j] * (1.0 - z) * (1.0 - n * n)
                else:
                    for j in range(h):
                        da_rz[i, h + j] = 0.0
                        da_n[i, j] = 0.0
            dq = np.dot(da_n, wh_n_t)
            for i in range(b):
                if step < lengths[i]:
                    for j in range(h):
                        hp = hs[i, step - 1, j] if step > 0 else 0.0
                        r = rg[i, step, j]
                        da_rz[i, j] = dq[i, j] * hp * r * (1.0 - r)
                else:
                    for j in range(h):
                        da_rz[i, j] = 0.0
            dhp = np.dot(da_rz, wh_rz_t)
            for i in range(b):
                if step < lengths[i]:
                    for j in range(h):
                        z = zg[i, step, j]
                        r = rg[i, step, j]
                        dgx[i, step, j] = da_rz[i, j]
                        dgx[i, step, h + j] = da_rz[i, h + j]
                        dgx[i, step, 2 * h + j] = da_n[i, j]
                        dh[i, j] = dh[i, j] * z + dq[i, j] * r + dhp[i, j]
        return dgx

    return fwd, bwd


def _select_backend():
    choice = os.environ.get("CASPI_BACKEND", "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"CASPI_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return "numpy", gru_scan_fwd_numpy, gru_scan_bwd_numpy
    try:
        fwd, bwd = _build_numba_kernels()
        return "numba", fwd, bwd
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", gru_scan_fwd_numpy, gru_scan_bwd_numpy


_BACKEND, gru_scan_fwd, gru_scan_bwd = _select_backend()


def backend_name():
    return _BACKEND
