"""Hot numeric kernels: planar-array steering, Ricean mixing, SUS selection,
zero-forcing effective gains.

Each kernel has a numba @njit build and a pure-numpy build. The backend is
picked at import time: numba when importable, unless WLANSIM_BACKEND=numpy
is set (WLANSIM_BACKEND=numba forces a failure if numba is missing).
`benchmarks/bench_kernels.py` compares both.
"""
from __future__ import annotations

import math
import os

import numpy as np

_BACKEND_ENV = os.environ.get("WLANSIM_BACKEND", "auto").lower()


# ---------------------------------------------------------------------------
# loop-style sources, compilable by numba


def _steering_rows_loop(ap_pos, rows, cols, spacing_wl, positions):
    """Unit-modulus array response of a planar array toward each position.

    Element (r, c) sits at (r*spacing, c*spacing, 0)*lambda in the array
    plane; only relative phases matter, so lambda cancels.
    """
    n = positions.shape[0]
    nt = rows * cols
    out = np.empty((n, nt), dtype=np.complex128)
    for i in range(n):
        dx = positions[i, 0] - ap_pos[0]
        dy = positions[i, 1] - ap_pos[1]
        dz = positions[i, 2] - ap_pos[2]
        d = math.sqrt(dx * dx + dy * dy + dz * dz)
        if d < 1e-9:
            ux = 0.0
            uy = 0.0
        else:
            ux = dx / d
            uy = dy / d
        k = 0
        for r in range(rows):
            for c in range(cols):
                phase = 2.0 * math.pi * spacing_wl * (r * ux + c * uy)
                out[i, k] = complex(math.cos(phase), math.sin(phase))
                k += 1
    return out


def _ricean_rows_loop(steer, gauss, k_lin):
    """H = sqrt(K/(K+1))*steer + sqrt(1/(K+1))*gauss, per row."""
    n, nt = steer.shape
    out = np.empty((n, nt), dtype=np.complex128)
    for i in range(n):
        k = k_lin[i]
        a = math.sqrt(k / (k + 1.0))
        b = math.sqrt(1.0 / (k + 1.0))
        for j in range(nt):
            out[i, j] = a * steer[i, j] + b * gauss[i, j]
    return out


def _sus_select_loop(rows_mat, eps, k_max):
    """Greedy semi-orthogonal pick in candidate order.

    First candidate always selected; each later one joins if the component
    orthogonal to the span of the selected rows keeps >= eps of its norm.
    Returns (selected candidate indices, count).
    """
    n, nt = rows_mat.shape
    sel = np.empty(n, dtype=np.int64)
    basis = np.empty((k_max, nt), dtype=np.complex128)
    n_sel = 0
    for i in range(n):
        if n_sel >= k_max:
            break
        h = rows_mat[i].copy()
        norm0 = 0.0
        for j in range(nt):
            norm0 += h[j].real * h[j].real + h[j].imag * h[j].imag
        norm0 = math.sqrt(norm0)
        if norm0 < 1e-12:
            continue
        for b in range(n_sel):
            dot = 0.0 + 0.0j
            for j in range(nt):
                dot += np.conj(basis[b, j]) * h[j]
            for j in range(nt):
                h[j] -= dot * basis[b, j]
        res = 0.0
        for j in range(nt):
            res += h[j].real * h[j].real + h[j].imag * h[j].imag
        res = math.sqrt(res)
        if n_sel == 0 or res >= eps * norm0:
            if res > 1e-12:
                for j in range(nt):
                    basis[n_sel, j] = h[j] / res
                sel[n_sel] = i
                n_sel += 1
            elif n_sel == 0:
                # keep the round-robin head even if degenerate
                sel[0] = i
                for j in range(nt):
                    basis[0, j] = rows_mat[i, j] / norm0
                n_sel = 1
    return sel[:n_sel], n_sel


def _zf_gains_loop(sel_rows):
    """Effective per-user power gain of zero forcing on the stacked rows.

    gain_i = 1 / [(H H^H)^-1]_ii; equals |h_i w_i|^2 for unit-norm ZF
    precoders in downlink and the inverse noise enhancement of the ZF
    receive filter in uplink.
    """
    k, nt = sel_rows.shape
    gram = np.empty((k, k), dtype=np.complex128)
    for a in range(k):
        for b in range(k):
            acc = 0.0 + 0.0j
            for j in range(nt):
                acc += sel_rows[a, j] * np.conj(sel_rows[b, j])
            gram[a, b] = acc
    inv = np.linalg.inv(gram)
    out = np.empty(k, dtype=np.float64)
    for a in range(k):
        out[a] = 1.0 / inv[a, a].real
    return out


# ---------------------------------------------------------------------------
# vectorized numpy fallbacks


def _steering_rows_np(ap_pos, rows, cols, spacing_wl, positions):
    d = positions - np.asarray(ap_pos, dtype=np.float64)
    dist = np.linalg.norm(d, axis=1)
    dist = np.where(dist < 1e-9, 1.0, dist)
    ux = d[:, 0] / dist
    uy = d[:, 1] / dist
    r_idx, c_idx = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    r_idx = r_idx.ravel()[None, :]
    c_idx = c_idx.ravel()[None, :]
    phase = 2.0 * np.pi * spacing_wl * (r_idx * ux[:, None] + c_idx * uy[:, None])
    return np.exp(1j * phase)


def _ricean_rows_np(steer, gauss, k_lin):
    a = np.sqrt(k_lin / (k_lin + 1.0))[:, None]
    b = np.sqrt(1.0 / (k_lin + 1.0))[:, None]
    return a * steer + b * gauss


def _sus_select_np(rows_mat, eps, k_max):
    n = rows_mat.shape[0]
    sel = []
    basis = []
    for i in range(n):
        if len(sel) >= k_max:
            break
        h = rows_mat[i].astype(np.complex128, copy=True)
        norm0 = np.linalg.norm(h)
        if norm0 < 1e-12:
            continue
        for b in basis:
            h -= np.vdot(b, h) * b
        res = np.linalg.norm(h)
        if not sel or res >= eps * norm0:
            if res > 1e-12:
                basis.append(h / res)
                sel.append(i)
            elif not sel:
                basis.append(rows_mat[i] / norm0)
                sel.append(i)
    return np.asarray(sel, dtype=np.int64), len(sel)


def _zf_gains_np(sel_rows):
    gram = sel_rows @ sel_rows.conj().T
    inv = np.linalg.inv(gram)
    return 1.0 / np.real(np.diag(inv))


NUMPY_IMPL = {
    "steering_rows": _steering_rows_np,
    "ricean_rows": _ricean_rows_np,
    "sus_select": _sus_select_np,
    "zf_gains": _zf_gains_np,
}


def _build_numba_impl():
    from numba import njit

    jit = njit(cache=True, fastmath=False)
    return {
        "steering_rows": jit(_steering_rows_loop),
        "ricean_rows": jit(_ricean_rows_loop),
        "sus_select": jit(_sus_select_loop),
        "zf_gains": jit(_zf_gains_loop),
    }


NUMBA_IMPL = None
if _BACKEND_ENV in ("auto", "numba"):
    try:
        NUMBA_IMPL = _build_numba_impl()
    except ImportError:
        if _BACKEND_ENV == "numba":
            raise

if NUMBA_IMPL is not None:
    BACKEND = "numba"
    _impl = NUMBA_IMPL
else:
    BACKEND = "numpy"
    _impl = NUMPY_IMPL

steering_rows = _impl["steering_rows"]
ricean_rows = _impl["ricean_rows"]
sus_select = _impl["sus_select"]
zf_gains = _impl["zf_gains"]
