"""Experiment configuration: flat ``key=value`` files plus CLI overrides.

Recognised keys (``-`` and ``_`` are interchangeable)::

    spectrum      harmonic | rotor | custom            (default rotor)
    epsilon0      energy scale                          (default 1)
    levels        comma list of energies, custom only
    set           search set: ``a..b`` inclusive, or ``a,b,c``  (default 2..21)
    j             initial level                         (default: one below the set)
    s             searched level                        (default: middle of the set)
    v0            coupling strength                     (default 1)
    dt            RK4 step                              (default: 128 per fastest phase period)
    tmax          integration window for ``evolve``     (default 2.2 tau)
    out           output CSV path, ``-`` for stdout     (default -)
    n_list        search-set sizes for sweeps, ``a,b,c`` or ``a..b:step``
    delta_max     detuning grid half-width              (default 3x analytic width)
    delta_points  odd number of grid points             (default 201)
    steps         discrete steps for floquet-compare    (default round(4 sqrt N))
    mode          exact | rounded, U_D construction     (default exact)
    workers       threads for sweep members             (default 1)

Blank lines and text after ``#`` are ignored. For sweeps each size N uses
the set ``first, ..., first + N - 1`` where ``first`` is the start of
``set``; ``j`` and ``s`` follow the same defaults per member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .spectrum import KINDS, SearchProblem, SpectrumModel

COMMANDS = ("evolve", "sweep-n", "sweep-delta", "floquet-compare", "width-fit")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    command: str = "evolve"
    spectrum: str = "rotor"
    epsilon0: float = 1.0
    levels: tuple[float, ...] = ()
    set: tuple[int, ...] = tuple(range(2, 22))
    j: int | None = None
    s: int | None = None
    v0: float = 1.0
    dt: float | None = None
    tmax: float | None = None
    out: str = "-"
    n_list: tuple[int, ...] = ()
    delta_max: float | None = None
    delta_points: int = 201
    steps: int | None = None
    mode: str = "exact"
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.spectrum not in KINDS:
            raise ConfigError(f"spectrum must be one of {KINDS}")
        if not self.set:
            raise ConfigError("search set is empty")
        if self.command in ("sweep-n", "width-fit") and not self.n_list:
            raise ConfigError(f"{self.command} needs a nonempty n_list")
        if any(n < 1 for n in self.n_list):
            raise ConfigError("n_list entries must be >= 1")
        if self.delta_points < 3 or self.delta_points % 2 == 0:
            raise ConfigError("delta_points must be odd and >= 3 so the grid is symmetric and contains 0")
        if self.delta_max is not None and not self.delta_max > 0:
            raise ConfigError("delta_max must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.tmax is not None and not self.tmax > 0:
            raise ConfigError("tmax must be positive")
        if self.steps is not None and self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if self.mode not in ("exact", "rounded"):
            raise ConfigError("mode must be 'exact' or 'rounded'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def spectrum_model(self) -> SpectrumModel:
        try:
            return SpectrumModel(self.spectrum, self.epsilon0, self.levels)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def problem(self) -> SearchProblem:
        """The instance defined by ``set``, ``j`` and ``s``."""
        search_set = self.set
        j = min(search_set) - 1 if self.j is None else self.j
        s = search_set[len(search_set) // 2] if self.s is None else self.s
        try:
            return SearchProblem(self.spectrum_model(), search_set, j, s, self.v0)
        except (ValueError, IndexError) as exc:
            raise ConfigError(str(exc)) from exc

    def problem_for_size(self, n_size: int) -> SearchProblem:
        """Sweep member: contiguous set of ``n_size`` levels starting where ``set`` starts."""
        first = min(self.set)
        j = first - 1 if self.j is None else self.j
        try:
            return SearchProblem.contiguous(self.spectrum_model(), first, n_size, j=j, v0=self.v0)
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"N={n_size}: {exc}") from exc


def parse_index_list(text: str) -> tuple[int, ...]:
    """``a..b`` (inclusive), ``a..b:step`` or a comma list of integers."""
    text = text.strip()
    try:
        if ".." in text:
            rng, _, step = text.partition(":")
            a, b = rng.split("..")
            step_i = int(step) if step else 1
            if step_i < 1:
                raise ValueError
            values = tuple(range(int(a), int(b) + 1, step_i))
        else:
            values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse index list {text!r}") from None
    if not values:
        raise ConfigError(f"index list {text!r} is empty")
    return values


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


_CONVERTERS = {
    "command": str,
    "spectrum": str,
    "epsilon0": float,
    "levels": _parse_floats,
    "set": parse_index_list,
    "j": int,
    "s": int,
    "v0": float,
    "dt": float,
    "tmax": float,
    "out": str,
    "n_list": parse_index_list,
    "delta_max": float,
    "delta_points": int,
    "steps": int,
    "mode": str,
    "workers": int,
}


def _normalise_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def convert(key: str, value: str):
    key = _normalise_key(key)
    if key not in _CONVERTERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        result = _CONVERTERS[key](value.strip())
    except ValueError:
        raise ConfigError(f"bad value {value!r} for {key}") from None
    if isinstance(result, float) and not math.isfinite(result):
        raise ConfigError(f"{key} must be finite")
    return result


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key = _normalise_key(key)
        values[key] = convert(key, value)
    return values


def build_spec(command: str, file_values: dict | None = None, overrides: dict | None = None) -> ExperimentSpec:
    """Defaults, then config-file values, then explicit overrides."""
    known = {f.name for f in fields(ExperimentSpec)}
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    merged["command"] = command
    try:
        return ExperimentSpec(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def with_overrides(spec: ExperimentSpec, **changes) -> ExperimentSpec:
    return replace(spec, **changes)
