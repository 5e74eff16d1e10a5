"""Floquet construction of the discrete-time search operator.

The quasi-energies come from the secular equation

    x N = v0^2 sum_m 1 / (x + omega_sm),     omega_sm = eps_m - eps_s,

whose poles sit at ``-omega_sm``. Each root is stored as an anchor pole plus
a signed offset so that ``x + omega_sm`` is available to full relative
precision even when the root hugs a pole; plain floats lose most digits
there for wide spectra.

All vectors and matrices use the active-space ordering ``(j, search_set)``.
The operators built here act on Schrodinger-picture amplitudes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .spectrum import SearchProblem

ORTHONORMAL_TOL = 1e-10
_MAX_BISECTIONS = 400


@dataclass(frozen=True)
class CharacteristicSolution:
    roots_x: np.ndarray  # ascending
    quasi_energies: np.ndarray  # eps_j - x, Fourier index k = 0
    poles: np.ndarray  # ascending values of -omega_sm
    anchors: np.ndarray  # index into poles for each root
    offsets: np.ndarray  # root = poles[anchor] + offset, to full precision
    n_size: int
    v0: float = 1.0

    def shifts(self, targets) -> np.ndarray:
        """``x_i - targets_k`` for every root and target, pole-accurate.

        Row i, column k. ``targets`` must be pole values, each an entry of
        ``poles``, so the difference of anchors is exact in floating point
        whenever the level energies are.
        """
        targets = np.asarray(targets, dtype=float)
        return self.offsets[:, None] + (self.poles[self.anchors][:, None] - targets[None, :])

    def residuals(self) -> np.ndarray:
        """``x N - v0^2 sum 1/(x + omega_sm)`` per root."""
        return self.n_size * self.roots_x - self.v0 ** 2 * np.sum(1.0 / self.shifts(self.poles), axis=1)

    def residual_bounds(self) -> np.ndarray:
        return 1e-10 * (1.0 + np.abs(self.roots_x) * self.n_size)


def _poles_in_set_order(problem: SearchProblem) -> np.ndarray:
    return problem.spectrum.eigenvalue(problem.s) - problem.search_energies


def secular_function(problem: SearchProblem, x):
    """Left minus right side of the secular equation at plain float ``x``."""
    x = np.asarray(x, dtype=float)
    poles = _poles_in_set_order(problem)
    rhs = np.sum(1.0 / (x[..., None] - poles), axis=-1)
    return problem.n_size * x - problem.v0 ** 2 * rhs


def characteristic_roots(problem: SearchProblem) -> CharacteristicSolution:
    """All N + 1 real roots by bisection between consecutive poles.

    The secular function increases strictly between poles, running from
    -inf just above a pole to +inf just below the next. Interior roots are
    bracketed by pole pairs; the outer two by brackets grown geometrically
    from the extreme poles.
    """
    n = problem.n_size
    coupling2 = problem.v0 ** 2
    if coupling2 == 0:
        raise ValueError("secular equation needs v0 > 0")
    poles = np.sort(_poles_in_set_order(problem))
    if np.any(np.diff(poles) <= 0):
        raise ValueError("search-set energies are degenerate; poles must be distinct")

    def g(anchor, d):
        # secular function at x = poles[anchor] + d, vectorised over roots
        shift = d[:, None] + (poles[anchor][:, None] - poles[None, :])
        return n * (poles[anchor] + d) - coupling2 * np.sum(1.0 / shift, axis=1)

    anchors = np.empty(n + 1, dtype=np.int64)
    lo = np.empty(n + 1)
    hi = np.empty(n + 1)

    # below the smallest pole: x = poles[0] - D
    span = 1.0 + (poles[-1] - poles[0])
    reach = span
    while g(np.array([0]), np.array([-reach]))[0] >= 0:
        reach *= 2.0
    anchors[0], lo[0], hi[0] = 0, -reach, 0.0
    reach = span
    while g(np.array([n - 1]), np.array([reach]))[0] <= 0:
        reach *= 2.0
    anchors[n], lo[n], hi[n] = n - 1, 0.0, reach

    if n > 1:
        left = np.arange(n - 1)
        half = 0.5 * (poles[1:] - poles[:-1])
        # which pole is nearer to the root decides the anchor
        positive_mid = g(left, half) > 0
        anchors[1:n] = np.where(positive_mid, left, left + 1)
        lo[1:n] = np.where(positive_mid, 0.0, -half)
        hi[1:n] = np.where(positive_mid, half, 0.0)

    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        moving = (mid != lo) & (mid != hi)
        if not moving.any():
            break
        up = g(anchors, mid) > 0
        hi = np.where(moving & up, mid, hi)
        lo = np.where(moving & ~up, mid, lo)
    offsets = 0.5 * (lo + hi)
    if np.any(offsets == 0.0):
        raise ArithmeticError("a secular root collapsed onto a pole")

    roots = poles[anchors] + offsets
    sol = CharacteristicSolution(
        roots_x=roots,
        quasi_energies=problem.spectrum.eigenvalue(problem.j) - roots,
        poles=poles,
        anchors=anchors,
        offsets=offsets,
        n_size=n,
        v0=problem.v0,
    )
    bad = np.abs(sol.residuals()) > sol.residual_bounds()
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ArithmeticError(f"secular root {roots[i]!r} failed the residual check")
    return sol


def arrowhead_matrix(problem: SearchProblem) -> np.ndarray:
    """Time-independent generator of the dynamics in the frame co-rotating with the drive.

    Zero on the j diagonal, ``omega_sn`` on the search diagonal and
    ``v0/sqrt(N)`` in the j row and column. Its eigenvalues are minus the
    secular roots; it serves as an independent dense check.
    """
    m = np.diag(np.concatenate(([0.0], -_poles_in_set_order(problem))))
    m[0, 1:] = problem.coupling
    m[1:, 0] = problem.coupling
    return m


@dataclass(frozen=True)
class FloquetDecomposition:
    solution: CharacteristicSolution
    states: np.ndarray  # column i is <m|phi_i(0)> for root i
    period: float
    t0: float

    @property
    def quasi_energies(self) -> np.ndarray:
        return self.solution.quasi_energies

    def orthonormality_defect(self) -> float:
        v = self.states
        return float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max())


def floquet_states(solution: CharacteristicSolution, problem: SearchProblem) -> FloquetDecomposition:
    """Floquet states at t = 0 from the closed recursion for the Fourier amplitudes.

    Each state has component 1 on j and ``-(v0/sqrt(N)) / (x + omega_sn)`` on
    search level n, then is normalized.
    """
    if solution.n_size != problem.n_size:
        raise ValueError("solution and problem sizes differ")
    shifts = solution.shifts(_poles_in_set_order(problem))  # x + omega_sn
    if np.any(shifts == 0.0):
        raise ArithmeticError("root coincides with a pole")
    vecs = np.empty((problem.dim, problem.dim))
    vecs[0, :] = 1.0
    vecs[1:, :] = (-problem.coupling / shifts).T
    vecs /= np.linalg.norm(vecs, axis=0)
    omega = abs(problem.omega_sj)
    period = 2.0 * math.pi / omega
    decomp = FloquetDecomposition(solution, vecs, period, omega * period / 4.0)
    defect = decomp.orthonormality_defect()
    if defect > ORTHONORMAL_TOL:
        raise ArithmeticError(f"Floquet states not orthonormal (defect {defect:.2e})")
    return decomp


def decompose(problem: SearchProblem) -> FloquetDecomposition:
    return floquet_states(characteristic_roots(problem), problem)


def build_floquet_operator(decomp: FloquetDecomposition, duration: float) -> np.ndarray:
    """``sum_lambda exp(-i lambda duration) |phi_lambda(0)><phi_lambda(0)|``.

    ``duration = decomp.period`` gives the one-period operator U_F and
    ``duration = decomp.t0`` the discrete search step U_D.
    """
    defect = decomp.orthonormality_defect()
    if defect > ORTHONORMAL_TOL:
        raise ValueError(f"decomposition is not orthonormal (defect {defect:.2e})")
    v = decomp.states
    phases = np.exp(-1j * decomp.quasi_energies * duration)
    return (v * phases) @ v.conj().T


def discrete_operator(decomp: FloquetDecomposition, mode: str = "exact") -> np.ndarray:
    """U_D for a quarter of the drive frequency's worth of periods.

    ``exact`` evaluates the spectral sum at ``t0 = pi/2``. ``rounded`` takes
    the integer power ``round(|omega_sj|/4)`` of U_F instead.
    """
    if mode == "exact":
        return build_floquet_operator(decomp, decomp.t0)
    if mode == "rounded":
        power = round(2.0 * math.pi / decomp.period / 4.0)
        return np.linalg.matrix_power(build_floquet_operator(decomp, decomp.period), power)
    raise ValueError(f"unknown mode {mode!r}; use 'exact' or 'rounded'")


def discrete_search(problem: SearchProblem, steps: int, mode: str = "exact") -> np.ndarray:
    """Searched-level probability after 0, 1, ..., ``steps`` applications of U_D."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    u = discrete_operator(decompose(problem), mode)
    state = np.zeros(problem.dim, dtype=complex)
    state[0] = 1.0
    out = np.empty(steps + 1)
    out[0] = abs(state[problem.s_position]) ** 2
    for k in range(1, steps + 1):
        state = u @ state
        out[k] = abs(state[problem.s_position]) ** 2
    return out


def unitarity_defect(u) -> float:
    """``max |(U^dagger U - I)_ab|``."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("expected a square matrix")
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def write_matrix_csv(u, fh) -> None:
    """Row-major entries as ``row,col,re,im``."""
    u = np.asarray(u, dtype=complex)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(("row", "col", "re", "im"))
    for (r, c), z in np.ndenumerate(u):
        writer.writerow((r, c, repr(float(z.real)), repr(float(z.imag))))
