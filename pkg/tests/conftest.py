"""Shared fixtures and independent oracles.

The oracles deliberately avoid the package's own integrator and matrix
builders so that they can check them.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from resonant_search.spectrum import SearchProblem, SpectrumModel

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    def _record(name: str, passed: bool, detail: str):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        return passed

    return _record


ROTOR = SpectrumModel("rotor")
HARMONIC = SpectrumModel("harmonic")


def rotor_problem(n_size: int, first: int = 2, **kw) -> SearchProblem:
    return SearchProblem.contiguous(ROTOR, first, n_size, **kw)


def co_rotating_oracle(problem: SearchProblem, times, a0=None, detuning: float = 0.0) -> np.ndarray:
    """Exact amplitudes from the time-independent co-rotating generator.

    With b_n = a_n exp(-i w_n t) the equations become autonomous; exponentiate
    and rotate back. Rows follow ``times``.
    """
    n = problem.n_size
    c = problem.v0 / math.sqrt(n)
    es = problem.spectrum.eigenvalue(problem.s)
    w = np.array([problem.spectrum.eigenvalue(m) - es + detuning for m in problem.search_set])
    h = np.zeros((n + 1, n + 1))
    h[0, 1:] = h[1:, 0] = c
    h[np.arange(1, n + 1), np.arange(1, n + 1)] = w
    if a0 is None:
        a0 = np.zeros(n + 1, complex)
        a0[0] = 1.0
    out = []
    for t in np.atleast_1d(times):
        b = expm(-1j * h * t) @ a0
        rot = np.concatenate(([1.0], np.exp(1j * w * t)))
        out.append(rot * b)
    return np.array(out)


def substep_oracle(problem: SearchProblem, t_end: float, a0, h: float) -> np.ndarray:
    """Product of exact exponentials of the instantaneous generator at substep midpoints.

    Richardson-combined with half the step (the midpoint product has an
    even error expansion).
    """

    def run(step):
        n_sub = max(1, math.ceil(t_end / step))
        step = t_end / n_sub
        n = problem.n_size
        c = problem.v0 / math.sqrt(n)
        es = problem.spectrum.eigenvalue(problem.s)
        w = np.array([problem.spectrum.eigenvalue(m) - es for m in problem.search_set])
        a = np.array(a0, dtype=complex)
        for k in range(n_sub):
            tm = (k + 0.5) * step
            v = np.zeros((n + 1, n + 1), complex)
            v[1:, 0] = c * np.exp(1j * w * tm)
            v[0, 1:] = v[1:, 0].conj()
            evals, evecs = np.linalg.eigh(v)
            a = evecs @ (np.exp(-1j * evals * step) * (evecs.conj().T @ a))
        return a

    coarse = run(h)
    fine = run(h / 2)
    return (4 * fine - coarse) / 3


def full_space_oracle(spectrum: SpectrumModel, levels, search_set, j, s, v0, t_end, a0_full):
    """Integrate the general amplitude equations over an enlarged basis.

    ``da_n/dt = -i sum_m <n|V(t)|m> a_m exp(-i (eps_m - eps_n) t)`` with the
    rank-two drive built explicitly over ``levels``. Uses an adaptive
    high-order integrator, independent of the package's RK4.
    """
    levels = list(levels)
    eps = np.array([spectrum.eigenvalue(m) for m in levels])
    dim = len(levels)
    pos = {m: i for i, m in enumerate(levels)}
    p = np.zeros(dim)
    for n in search_set:
        p[pos[n]] = 1.0 / math.sqrt(len(search_set))
    e_j = np.zeros(dim)
    e_j[pos[j]] = 1.0
    omega_sj = spectrum.eigenvalue(j) - spectrum.eigenvalue(s)
    bohr = eps[None, :] - eps[:, None]  # omega_nm = eps_m - eps_n

    def rhs(t, y):
        a = y[:dim] + 1j * y[dim:]
        vt = v0 * (np.outer(p, e_j) * np.exp(1j * omega_sj * t) + np.outer(e_j, p) * np.exp(-1j * omega_sj * t))
        da = -1j * (vt * np.exp(-1j * bohr * t)) @ a
        return np.concatenate((da.real, da.imag))

    y0 = np.concatenate((np.real(a0_full), np.imag(a0_full)))
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=1e-12, atol=1e-13)
    y = sol.y[:, -1]
    return y[:dim] + 1j * y[dim:]
