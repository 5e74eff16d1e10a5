"""Unperturbed spectra and search-problem instances.

Energies are dimensionless with hbar = 1. A level index ``m`` is a
nonnegative integer into the model's spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("harmonic", "rotor", "custom")


@dataclass(frozen=True)
class SpectrumModel:
    """Eigenvalues of a nondegenerate time-independent Hamiltonian H0.

    ``harmonic`` gives ``epsilon0 * (m + 1/2)``, ``rotor`` gives
    ``epsilon0 * m**2`` and ``custom`` looks the value up in
    ``custom_levels``.
    """

    kind: str
    epsilon0: float = 1.0
    custom_levels: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}; expected one of {KINDS}")
        if not math.isfinite(self.epsilon0) or self.epsilon0 <= 0:
            raise ValueError("epsilon0 must be finite and positive")
        levels = tuple(float(e) for e in self.custom_levels)
        object.__setattr__(self, "custom_levels", levels)
        if self.kind == "custom":
            if not levels:
                raise ValueError("custom spectrum needs at least one level")
            if not all(math.isfinite(e) for e in levels):
                raise ValueError("custom levels must be finite")
            if len(set(levels)) != len(levels):
                raise ValueError("custom spectrum is degenerate; only nondegenerate H0 is supported")
        elif levels:
            raise ValueError("custom_levels is only allowed for kind='custom'")

    @property
    def size(self) -> int | None:
        """Number of levels, or None for the unbounded built-in spectra."""
        return len(self.custom_levels) if self.kind == "custom" else None

    def eigenvalue(self, m: int) -> float:
        m = _as_index(m)
        if self.kind == "harmonic":
            return self.epsilon0 * (m + 0.5)
        if self.kind == "rotor":
            return self.epsilon0 * float(m * m)
        if m >= len(self.custom_levels):
            raise IndexError(f"level {m} out of range for custom spectrum of {len(self.custom_levels)} levels")
        return self.custom_levels[m]

    def eigenvalues(self, indices) -> np.ndarray:
        return np.array([self.eigenvalue(m) for m in indices], dtype=float)


def _as_index(m) -> int:
    if isinstance(m, bool) or int(m) != m:
        raise ValueError(f"level index must be an integer, got {m!r}")
    m = int(m)
    if m < 0:
        raise ValueError(f"level index must be nonnegative, got {m}")
    return m


def eigenvalue(model: SpectrumModel, m: int) -> float:
    return model.eigenvalue(m)


def bohr_frequency(model: SpectrumModel, n: int, m: int) -> float:
    """Bohr frequency with the convention ``omega_nm = eps_m - eps_n``."""
    return model.eigenvalue(m) - model.eigenvalue(n)


@dataclass(frozen=True)
class SearchProblem:
    """A search instance on the active space ``{j} + search_set``.

    The active-space ordering used by every array in this package is ``j``
    first, then ``search_set`` in the order given.
    """

    spectrum: SpectrumModel
    search_set: tuple[int, ...]
    j: int
    s: int
    v0: float = 1.0
    omega_sj: float = field(init=False, repr=False)

    def __post_init__(self):
        search_set = tuple(_as_index(n) for n in self.search_set)
        object.__setattr__(self, "search_set", search_set)
        object.__setattr__(self, "j", _as_index(self.j))
        object.__setattr__(self, "s", _as_index(self.s))
        if not search_set:
            raise ValueError("search set must contain at least one level")
        if len(set(search_set)) != len(search_set):
            raise ValueError("search set contains repeated levels")
        if self.j in search_set:
            raise ValueError(f"initial level j={self.j} must not belong to the search set")
        if self.s not in search_set:
            raise ValueError(f"searched level s={self.s} must belong to the search set")
        if not math.isfinite(self.v0) or self.v0 < 0:
            raise ValueError("v0 must be finite and nonnegative")
        # raises on indices outside a custom spectrum
        for m in (self.j, *search_set):
            self.spectrum.eigenvalue(m)
        object.__setattr__(
            self, "omega_sj", self.spectrum.eigenvalue(self.j) - self.spectrum.eigenvalue(self.s)
        )

    @classmethod
    def contiguous(cls, spectrum: SpectrumModel, first: int, n_size: int, *, j: int | None = None,
                   s: int | None = None, v0: float = 1.0) -> "SearchProblem":
        """Search set ``first, ..., first + n_size - 1``; ``s`` defaults to the middle element."""
        search_set = tuple(range(first, first + n_size))
        if j is None:
            j = first - 1
        if s is None:
            s = first + n_size // 2
        return cls(spectrum, search_set, j, s, v0)

    @property
    def n_size(self) -> int:
        return len(self.search_set)

    @property
    def dim(self) -> int:
        return self.n_size + 1

    @property
    def active_levels(self) -> tuple[int, ...]:
        return (self.j, *self.search_set)

    @property
    def s_position(self) -> int:
        """Position of ``s`` in the active-space ordering."""
        return 1 + self.search_set.index(self.s)

    @property
    def energies(self) -> np.ndarray:
        return self.spectrum.eigenvalues(self.active_levels)

    @property
    def search_energies(self) -> np.ndarray:
        return self.spectrum.eigenvalues(self.search_set)

    @property
    def rabi_frequency(self) -> float:
        return self.v0 / math.sqrt(self.n_size)

    @property
    def coupling(self) -> float:
        """Matrix element of the drive between j and each search level."""
        return self.v0 / math.sqrt(self.n_size)

    def phase_frequencies(self, detuning: float = 0.0) -> np.ndarray:
        """``omega_jn + omega_sj + detuning`` for each n in the search set.

        These are the rates of the phase factors multiplying ``a_j`` in the
        search-level equations; the entry at ``s`` equals ``detuning``.
        """
        return self.search_energies - self.spectrum.eigenvalue(self.s) + detuning

    def driving_vector(self) -> np.ndarray:
        """Uniform superposition of the search levels in active-space coordinates."""
        p = np.zeros(self.dim)
        p[1:] = 1.0 / math.sqrt(self.n_size)
        return p

    def transition_probabilities(self) -> np.ndarray:
        """``|<n|V|j>|^2`` for each search level (unit drive amplitude)."""
        return self.driving_vector()[1:] ** 2


def gap_ratio(search_energies, searched_energy: float, rabi: float) -> float:
    """Smallest off-resonant gap ``|eps_n - eps_s|`` divided by ``rabi``.

    The searched level itself is identified by its position being the one
    whose energy is ``searched_energy``; a single-element set has no
    off-resonant level and gives ``inf``.
    """
    e = np.asarray(search_energies, dtype=float)
    gaps = np.abs(e - searched_energy)
    # drop exactly one zero: the searched level
    idx = int(np.argmin(gaps))
    gaps = np.delete(gaps, idx)
    if gaps.size == 0:
        return math.inf
    return float(gaps.min() / rabi) if rabi > 0 else math.inf


def resonance_quality(problem: SearchProblem) -> float:
    """How well the off-resonant levels are separated from the Rabi frequency.

    Large values mean the two-level rotating-wave picture is accurate.
    """
    return gap_ratio(problem.search_energies, problem.spectrum.eigenvalue(problem.s),
                     problem.rabi_frequency)
