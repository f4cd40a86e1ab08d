"""State-vector gate kernels.

Each kernel is a stride loop that touches every affected amplitude (or
amplitude pair) exactly once, with the loop index space partitioned
disjointly.  No kernel accumulates across iterations, so results are
bit-identical for any thread count.  A pure-numpy implementation of every
kernel is kept both as a fallback and as an independent cross-check.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def set_thread_count(n: int) -> None:
    """Cap kernel parallelism; results do not depend on the value."""
    if HAVE_NUMBA:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def default_thread_count() -> int:
    env = os.environ.get("CATREVERSE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _not_nb(a, q):
        half = a.size >> 1
        low = (1 << q) - 1
        bit = 1 << q
        for k in prange(half):
            i0 = ((k >> q) << (q + 1)) | (k & low)
            i1 = i0 | bit
            tmp = a[i0]
            a[i0] = a[i1]
            a[i1] = tmp

    @njit(parallel=True, cache=True)
    def _cnot_nb(a, c, t):
        quarter = a.size >> 2
        pa = c if c < t else t
        pb = t if c < t else c
        la = (1 << pa) - 1
        lb = (1 << pb) - 1
        cbit = 1 << c
        tbit = 1 << t
        for k in prange(quarter):
            i = ((k >> pa) << (pa + 1)) | (k & la)
            i = ((i >> pb) << (pb + 1)) | (i & lb)
            i0 = i | cbit
            i1 = i0 | tbit
            tmp = a[i0]
            a[i0] = a[i1]
            a[i1] = tmp

    @njit(parallel=True, cache=True)
    def _toffoli_nb(a, c1, c2, t, pa, pb, pc):
        eighth = a.size >> 3
        la = (1 << pa) - 1
        lb = (1 << pb) - 1
        lc = (1 << pc) - 1
        cbits = (1 << c1) | (1 << c2)
        tbit = 1 << t
        for k in prange(eighth):
            i = ((k >> pa) << (pa + 1)) | (k & la)
            i = ((i >> pb) << (pb + 1)) | (i & lb)
            i = ((i >> pc) << (pc + 1)) | (i & lc)
            i0 = i | cbits
            i1 = i0 | tbit
            tmp = a[i0]
            a[i0] = a[i1]
            a[i1] = tmp

    @njit(parallel=True, cache=True)
    def _single_qubit_nb(a, q, u00, u01, u10, u11):
        half = a.size >> 1
        low = (1 << q) - 1
        bit = 1 << q
        for k in prange(half):
            i0 = ((k >> q) << (q + 1)) | (k & low)
            i1 = i0 | bit
            z0 = a[i0]
            z1 = a[i1]
            a[i0] = u00 * z0 + u01 * z1
            a[i1] = u10 * z0 + u11 * z1


def _pair_view(a: np.ndarray, q: int) -> np.ndarray:
    """Reshape so axis 1 is qubit q: shape (high, 2, low)."""
    return a.reshape(-1, 2, 1 << q)


def _not_np(a: np.ndarray, q: int) -> None:
    v = _pair_view(a, q)
    v[:, [0, 1], :] = v[:, [1, 0], :]


def _cnot_np(a: np.ndarray, c: int, t: int) -> None:
    n = a.size.bit_length() - 1
    v = a.reshape((2,) * n)
    # Axis for qubit q is n-1-q (C order, qubit 0 = least significant bit).
    idx = [slice(None)] * n
    idx[n - 1 - c] = 1
    sub = v[tuple(idx)]
    m = sub.ndim
    tq = t if t < c else t - 1  # target axis inside the control slice
    sub.swapaxes(m - 1 - tq, 0)[[0, 1]] = sub.swapaxes(m - 1 - tq, 0)[[1, 0]]


def _toffoli_np(a: np.ndarray, c1: int, c2: int, t: int) -> None:
    n = a.size.bit_length() - 1
    v = a.reshape((2,) * n)
    idx = [slice(None)] * n
    idx[n - 1 - c1] = 1
    idx[n - 1 - c2] = 1
    sub = v[tuple(idx)]
    tq = t - sum(1 for c in (c1, c2) if c < t)
    m = sub.ndim
    sub.swapaxes(m - 1 - tq, 0)[[0, 1]] = sub.swapaxes(m - 1 - tq, 0)[[1, 0]]


def _single_qubit_np(a: np.ndarray, q: int, u00, u01, u10, u11) -> None:
    v = _pair_view(a, q)
    z0 = v[:, 0, :].copy()
    z1 = v[:, 1, :].copy()
    v[:, 0, :] = u00 * z0 + u01 * z1
    v[:, 1, :] = u10 * z0 + u11 * z1


def apply_not(a: np.ndarray, q: int) -> None:
    if HAVE_NUMBA:
        _not_nb(a, q)
    else:
        _not_np(a, q)


def apply_cnot(a: np.ndarray, c: int, t: int) -> None:
    if HAVE_NUMBA:
        _cnot_nb(a, c, t)
    else:
        _cnot_np(a, c, t)


def apply_toffoli(a: np.ndarray, c1: int, c2: int, t: int) -> None:
    if HAVE_NUMBA:
        pa, pb, pc = sorted((c1, c2, t))
        _toffoli_nb(a, c1, c2, t, pa, pb, pc)
    else:
        _toffoli_np(a, c1, c2, t)


def apply_single_qubit(a: np.ndarray, q: int, u: np.ndarray) -> None:
    """Apply a 2x2 unitary to qubit q."""
    u00, u01, u10, u11 = complex(u[0, 0]), complex(u[0, 1]), complex(u[1, 0]), complex(u[1, 1])
    if HAVE_NUMBA:
        _single_qubit_nb(a, q, u00, u01, u10, u11)
    else:
        _single_qubit_np(a, q, u00, u01, u10, u11)


def numpy_reference():
    """Expose the plain-numpy kernels for cross-checking."""
    return _not_np, _cnot_np, _toffoli_np, _single_qubit_np
