"""Experiment drivers behind the CLI.

Each ``run_*`` function takes an :class:`ExperimentSpec` and returns a result
object that knows how to write its CSV. Sweep members are independent and
may run on a thread pool (the RK4 kernel releases the GIL); rows are always
ordered by the sweep variable.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic, floquet
from .config import ConfigError, ExperimentSpec
from .dynamics import (
    IntegratorConfig,
    Peak,
    Trajectory,
    default_dt,
    evolve,
    find_first_peak,
    write_trajectory_csv,
)
from .spectrum import SearchProblem, resonance_quality

UNITARITY_TOL = 1e-8
TMAX_FACTOR = 2.2


class SweepError(RuntimeError):
    """A sweep member could not produce its measurement."""


class NoPeakError(SweepError):
    pass


class WidthBracketError(SweepError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_rows(fh, header, rows, comments=()):
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(v) for v in row) + "\n")
    for line in comments:
        fh.write(f"# {line}\n")


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float

    @property
    def passed(self) -> bool:
        return self.value <= self.limit

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"check {self.name}: {self.value!r} <= {self.limit!r} {status}"


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float

    def line(self, y: str, x: str) -> str:
        return (f"fit {y} = slope*{x} + intercept: slope={self.slope!r} "
                f"intercept={self.intercept!r} r_squared={self.r_squared!r}")


def linear_fit(x, y) -> FitResult | None:
    """Ordinary least squares with free intercept; None for fewer than two distinct x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.unique(x).size < 2:
        return None
    design = np.column_stack((x, np.ones_like(x)))
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(float(slope), float(intercept), min(1.0, max(0.0, r2)))


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def nominal_tau(problem: SearchProblem) -> float:
    """Optimal time; unit coupling is assumed when ``v0 = 0``."""
    return analytic.optimal_time(problem.n_size, problem.v0 if problem.v0 > 0 else 1.0)


# -- evolve -----------------------------------------------------------------

@dataclass
class EvolveResult:
    trajectory: Trajectory
    peak: Peak | None
    tau: float
    quality: float
    checks: list[Check] = field(default_factory=list)

    def summary(self) -> list[str]:
        lines = []
        if self.peak is None:
            lines.append("peak none")
        else:
            lines.append(f"peak t_peak={self.peak.t!r} p_peak={self.peak.p!r}")
        lines.append(f"tau={self.tau!r} resonance_quality={self.quality!r}")
        return lines + [c.line() for c in self.checks]

    def write_csv(self, fh):
        write_trajectory_csv(self.trajectory, fh, self.summary())


def run_evolve(spec: ExperimentSpec) -> EvolveResult:
    problem = spec.problem()
    tau = nominal_tau(problem)
    t_max = spec.tmax if spec.tmax is not None else TMAX_FACTOR * tau
    config = IntegratorConfig.for_problem(problem, t_max, dt=spec.dt)
    traj = evolve(problem, config)
    peak = find_first_peak(traj, problem.s)
    checks = [Check("norm_error_max", float(traj.norm_error.max()), config.norm_tolerance)]
    return EvolveResult(traj, peak, tau, resonance_quality(problem), checks)


# -- sweep over N -----------------------------------------------------------

@dataclass
class SweepNResult:
    rows: list[tuple]  # (N, sqrtN, t_peak, p_peak)
    fit: FitResult | None
    reference_slope: float
    checks: list[Check] = field(default_factory=list)

    def comments(self) -> list[str]:
        lines = []
        if self.fit is not None:
            lines.append(self.fit.line("t_peak", "sqrtN"))
        else:
            lines.append("fit none (fewer than two sizes)")
        lines.append(f"reference slope pi/(2 v0) = {self.reference_slope!r}")
        return lines + [c.line() for c in self.checks]

    def write_csv(self, fh):
        _write_rows(fh, ("N", "sqrtN", "t_peak", "p_peak"), self.rows, self.comments())


def run_sweep_n(spec: ExperimentSpec) -> SweepNResult:
    sizes = sorted(set(spec.n_list))
    problems = [spec.problem_for_size(n) for n in sizes]

    def member(problem: SearchProblem):
        tau = nominal_tau(problem)
        t_max = spec.tmax if spec.tmax is not None else TMAX_FACTOR * tau
        config = IntegratorConfig.for_problem(problem, t_max, dt=spec.dt)
        traj = evolve(problem, config)
        return find_first_peak(traj, problem.s), float(traj.norm_error.max()), config.norm_tolerance

    outcomes = _map(member, problems, spec.workers)
    rows, norm_errors = [], []
    for n, (peak, norm_err, tol) in zip(sizes, outcomes):
        if peak is None:
            raise NoPeakError(f"N={n}: no local maximum of P_s within tmax; increase --tmax")
        rows.append((n, math.sqrt(n), peak.t, peak.p))
        norm_errors.append(norm_err)
    fit = linear_fit([r[1] for r in rows], [r[2] for r in rows])
    v0 = spec.v0 if spec.v0 > 0 else 1.0
    checks = [Check("norm_error_max", max(norm_errors), tol)]
    return SweepNResult(rows, fit, math.pi / (2.0 * v0), checks)


# -- detuning sweep ---------------------------------------------------------

def delta_grid(delta_max: float, points: int) -> np.ndarray:
    """Symmetric grid with an exact zero in the middle."""
    grid = np.linspace(-delta_max, delta_max, points)
    grid[points // 2] = 0.0
    return grid


def measure_width(deltas, probs) -> float:
    """Half-height width from a symmetric grid containing zero.

    On each side of zero, walk outward to the first point below half the
    zero-detuning value and interpolate linearly with its inner neighbour;
    return the mean of the two crossing distances.
    """
    d = np.asarray(deltas, dtype=float)
    p = np.asarray(probs, dtype=float)
    zero = np.flatnonzero(d == 0.0)
    if zero.size != 1:
        raise WidthBracketError("detuning grid must contain delta = 0 exactly once")
    c = int(zero[0])
    half = 0.5 * p[c]
    crossings = []
    for direction in (1, -1):
        i = c
        while 0 <= i + direction < d.size and p[i + direction] >= half:
            i += direction
        k = i + direction
        if not 0 <= k < d.size:
            raise WidthBracketError(
                "detuning grid does not reach half height; widen --delta-max or add --delta-points"
            )
        if i == c:
            raise WidthBracketError("detuning grid too coarse to bracket half height; add --delta-points")
        frac = (p[i] - half) / (p[i] - p[k])
        crossings.append(abs(d[i] + frac * (d[k] - d[i])))
    return 0.5 * (crossings[0] + crossings[1])


def searched_probability_at_tau(problem: SearchProblem, delta: float, dt: float | None = None) -> tuple[float, float]:
    """``(P_s(tau), norm error)`` with the drive detuned by ``delta``; tau is the undetuned optimum."""
    tau = nominal_tau(problem)
    if dt is None:
        dt = default_dt(problem, delta)
    config = IntegratorConfig(dt=dt, t_max=tau, sample_stride=max(1, math.ceil(tau / dt)))
    traj = evolve(problem, config, detuning=delta)
    return float(traj.p_searched[-1]), float(traj.norm_error[-1])


@dataclass
class SweepDeltaResult:
    n_size: int
    deltas: np.ndarray
    p_numeric: np.ndarray
    p_analytic: np.ndarray
    width: float
    analytic_width: float
    v0: float = 1.0
    checks: list[Check] = field(default_factory=list)

    def comments(self) -> list[str]:
        lines = [
            f"width measured={self.width!r} width_times_sqrtN={self.width * math.sqrt(self.n_size)!r}",
            f"width analytic={self.analytic_width!r}",
        ]
        if self.v0 != 1.0:
            lines.append("P_s_analytic assumes unit coupling")
        return lines + [c.line() for c in self.checks]

    def write_csv(self, fh):
        rows = zip(self.deltas, self.p_numeric, self.p_analytic)
        _write_rows(fh, ("delta", "P_s_tau", "P_s_analytic"), rows, self.comments())


def _sweep_delta_problem(problem: SearchProblem, spec: ExperimentSpec) -> SweepDeltaResult:
    n = problem.n_size
    width_an = analytic.resonance_width(n)
    delta_max = spec.delta_max if spec.delta_max is not None else 3.0 * width_an
    deltas = delta_grid(delta_max, spec.delta_points)
    outcomes = _map(lambda d: searched_probability_at_tau(problem, d, spec.dt), list(deltas), spec.workers)
    p_num = np.array([o[0] for o in outcomes])
    norm_err = max(o[1] for o in outcomes)
    width = measure_width(deltas, p_num)
    return SweepDeltaResult(
        n, deltas, p_num, analytic.detuned_peak_probability(n, deltas), width, width_an, problem.v0,
        [Check("norm_error_max", norm_err, 1e-9)],
    )


def run_sweep_delta(spec: ExperimentSpec) -> SweepDeltaResult:
    return _sweep_delta_problem(spec.problem(), spec)


# -- width vs N -------------------------------------------------------------

@dataclass
class WidthFitResult:
    rows: list[tuple]  # (N, inv_sqrtN, width)
    fit: FitResult | None
    analytic_fit: FitResult | None
    checks: list[Check] = field(default_factory=list)

    def comments(self) -> list[str]:
        lines = [self.fit.line("width", "inv_sqrtN") if self.fit else "fit none (fewer than two sizes)"]
        if self.analytic_fit:
            lines.append("analytic " + self.analytic_fit.line("width", "inv_sqrtN"))
        return lines + [c.line() for c in self.checks]

    def write_csv(self, fh):
        _write_rows(fh, ("N", "inv_sqrtN", "width"), self.rows, self.comments())


def run_width_fit(spec: ExperimentSpec) -> WidthFitResult:
    sizes = sorted(set(spec.n_list))
    rows, checks = [], []
    for n in sizes:
        try:
            member = _sweep_delta_problem(spec.problem_for_size(n), spec)
        except WidthBracketError as exc:
            raise WidthBracketError(f"N={n}: {exc}") from exc
        rows.append((n, 1.0 / math.sqrt(n), member.width))
        checks.extend(member.checks)
    inv = [r[1] for r in rows]
    fit = linear_fit(inv, [r[2] for r in rows])
    analytic_fit = linear_fit(inv, [analytic.resonance_width(n) for n in sizes])
    worst = max(checks, key=lambda c: c.value)
    return WidthFitResult(rows, fit, analytic_fit, [worst])


# -- continuous vs discrete -------------------------------------------------

@dataclass
class FloquetCompareResult:
    rows: list[tuple]  # (step, t, P_s_discrete, P_s_continuous, abs_diff)
    u_floquet: np.ndarray
    u_discrete: np.ndarray
    checks: list[Check]

    def comments(self) -> list[str]:
        return [c.line() for c in self.checks]

    def write_csv(self, fh):
        _write_rows(fh, ("step", "t", "P_s_discrete", "P_s_continuous", "abs_diff"), self.rows, self.comments())


def run_floquet_compare(spec: ExperimentSpec) -> FloquetCompareResult:
    problem = spec.problem()
    steps = spec.steps if spec.steps is not None else round(4 * math.sqrt(problem.n_size))
    decomp = floquet.decompose(problem)
    u_f = floquet.build_floquet_operator(decomp, decomp.period)
    u_d = floquet.discrete_operator(decomp, spec.mode)
    if spec.mode == "exact":
        step_time = decomp.t0
    else:
        step_time = round(abs(problem.omega_sj) / 4.0) * decomp.period

    state = np.zeros(problem.dim, dtype=complex)
    state[0] = 1.0
    p_disc = [abs(state[problem.s_position]) ** 2]
    for _ in range(steps):
        state = u_d @ state
        p_disc.append(abs(state[problem.s_position]) ** 2)

    p_cont = [0.0]
    norm_err = 0.0
    if steps > 0 and step_time > 0:
        dt = spec.dt if spec.dt is not None else default_dt(problem)
        per_step = max(1, math.ceil(step_time / dt - 1e-9))
        config = IntegratorConfig(dt=step_time / per_step, t_max=steps * step_time, sample_stride=per_step)
        traj = evolve(problem, config)
        p_cont = list(traj.p_searched)
        norm_err = float(traj.norm_error.max())
    elif steps > 0:
        p_cont = [0.0] * (steps + 1)

    rows = [(k, k * step_time, pd, pc, abs(pd - pc)) for k, (pd, pc) in enumerate(zip(p_disc, p_cont))]
    sol = decomp.solution
    checks = [
        Check("unitarity_defect_U_F", floquet.unitarity_defect(u_f), UNITARITY_TOL),
        Check("unitarity_defect_U_D", floquet.unitarity_defect(u_d), UNITARITY_TOL),
        Check("root_residual_over_bound_max", float(np.max(np.abs(sol.residuals()) / sol.residual_bounds())), 1.0),
        Check("norm_error_max", norm_err, 1e-9),
    ]
    return FloquetCompareResult(rows, u_f, u_d, checks)


RUNNERS = {
    "evolve": run_evolve,
    "sweep-n": run_sweep_n,
    "sweep-delta": run_sweep_delta,
    "width-fit": run_width_fit,
    "floquet-compare": run_floquet_compare,
}


def run(spec: ExperimentSpec):
    runner = RUNNERS.get(spec.command)
    if runner is None:
        raise ConfigError(f"unknown command {spec.command!r}")
    return runner(spec)
