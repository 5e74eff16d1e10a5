"""Compiled RK4 loop for the resonance-driven amplitude equations.

State layout: ``a[0]`` is the initial level j, ``a[1:]`` the search set.
With phase rates ``w`` and coupling ``c`` the right-hand side is

    da[0]/dt   = -i c sum_m a[m] exp(-i w[m-1] t)
    da[n]/dt   = -i c a[0] exp(+i w[n-1] t)
"""

from __future__ import annotations

import numba
import numpy as np

# phase factors are advanced by multiplication; exact resync this often
RESYNC_EVERY = 1024


@numba.njit(cache=True, nogil=True, fastmath=True)
def _rhs(a, ph, mic, out):
    n = ph.shape[0]
    acc = 0j
    a0 = a[0]
    for m in range(n):
        p = ph[m]
        acc += a[m + 1] * p.conjugate()
        out[m + 1] = mic * a0 * p
    out[0] = mic * acc


@numba.njit(cache=True, nogil=True, fastmath=True)
def rk4_integrate(a0, w, c, t0, h, n_steps, stride, norm_tol):
    """Fixed-step RK4 from ``t0`` over ``n_steps`` steps of size ``h``.

    Returns ``(snapshots, step_index, failed)``. Snapshots are taken at step
    0, every ``stride`` steps and at the last step. If a snapshot's norm
    drifts by more than ``norm_tol`` the run stops there with ``failed``
    set.
    """
    dim = a0.shape[0]
    n = dim - 1
    n_snap = n_steps // stride + 2
    snaps = np.empty((n_snap, dim), dtype=np.complex128)
    index = np.empty(n_snap, dtype=np.int64)
    a = a0.copy()
    snaps[0] = a
    index[0] = 0
    k = 1
    half = np.exp(0.5j * h * w)
    p0 = np.empty(n, np.complex128)
    pm = np.empty(n, np.complex128)
    p1 = np.empty(n, np.complex128)
    tmp = np.empty(dim, np.complex128)
    k1 = np.empty(dim, np.complex128)
    k2 = np.empty(dim, np.complex128)
    k3 = np.empty(dim, np.complex128)
    k4 = np.empty(dim, np.complex128)
    mic = -1j * c
    failed = False
    for step in range(n_steps):
        if step % RESYNC_EVERY == 0:
            t = t0 + step * h
            for m in range(n):
                p0[m] = np.exp(1j * w[m] * t)
        for m in range(n):
            pm[m] = p0[m] * half[m]
            p1[m] = pm[m] * half[m]
        _rhs(a, p0, mic, k1)
        for q in range(dim):
            tmp[q] = a[q] + 0.5 * h * k1[q]
        _rhs(tmp, pm, mic, k2)
        for q in range(dim):
            tmp[q] = a[q] + 0.5 * h * k2[q]
        _rhs(tmp, pm, mic, k3)
        for q in range(dim):
            tmp[q] = a[q] + h * k3[q]
        _rhs(tmp, p1, mic, k4)
        for q in range(dim):
            a[q] += (h / 6.0) * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
        for m in range(n):
            p0[m] = p1[m]
        if (step + 1) % stride == 0 or step + 1 == n_steps:
            snaps[k] = a
            index[k] = step + 1
            k += 1
            norm = 0.0
            for q in range(dim):
                norm += a[q].real * a[q].real + a[q].imag * a[q].imag
            if abs(norm - 1.0) > norm_tol:
                failed = True
                break
    return snaps[:k], index[:k], failed
