"""
Theorem-level experiments.

Exponent calculators, decay-rate fits against the continuum oracle, lifespan
sweeps in the data size, scans across the critical power, and the space-time
functional of the test-function blow-up argument.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .grid import Grid, ProblemParams, SpectralField, fft_inverse
from .oracle import RadialProfile, fit_decay_slope, linear_sobolev_norm, power_indicator
from .parallel import ordered_map
from .solver import RunResult, RunStatus, SolverConfig, run

log = logging.getLogger(__name__)

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------


def p_crit(n: int, q: float, gamma: float) -> float:
    """Critical power 1 + (2 + gamma)/(n - q)."""
    if not (gamma >= 0 and 0 < q < n / 2):
        log.warning("p_crit evaluated outside 0 <= gamma, 0 < q < n/2 (n=%s q=%s gamma=%s)", n, q, gamma)
    return 1.0 + (2.0 + gamma) / (n - q)


def lifespan_exponent(n: int, q: float, gamma: float, p: float) -> float:
    """Positive rate a in T_eps ~ eps^-a, or inf at and above the critical power."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    denom = 2.0 + gamma - (p - 1.0) * (n - q)
    if p >= p_crit(n, q, gamma) or denom <= 0:
        return math.inf
    return 2.0 * (p - 1.0) / denom


def decay_target(n: int, q: float, s: float, j: int) -> float:
    """Exponent -(n/4 + (s - q)/2 + j) of the linear decay rate."""
    return -(n / 4 + (s - q) / 2 + j)


# ---------------------------------------------------------------------------
# linear decay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayReport:
    n: int
    q: float
    s: float
    j: int
    times: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residual: float
    target: float

    @property
    def gap(self) -> float:
        return self.slope - self.target


def linear_decay_experiment(
    n: int,
    q: float,
    s: float,
    j: int,
    profile: RadialProfile | None = None,
    times: Sequence[float] | None = None,
) -> DecayReport:
    """Fit the decay of the linear flow's homogeneous H^s norm.

    The default profile is r^-q on [0, 1]; the default times are 24
    log-spaced points on [10, 10^4].
    """
    if s <= q - n / 2:
        raise ValueError(
            f"s = {s} must exceed q - n/2 = {q - n / 2}: the data is not in the claimed "
            "class (decay estimate hypothesis)"
        )
    if profile is None:
        profile = power_indicator(q)
    t = np.logspace(1, 4, 24) if times is None else np.asarray(times, dtype=float)
    vals = np.array([linear_sobolev_norm(float(ti), profile, n, s, j) for ti in t])
    fit = fit_decay_slope(list(zip(t, vals)))
    return DecayReport(n, q, s, j, t, vals, fit.slope, fit.intercept, fit.residual, decay_target(n, q, s, j))


# ---------------------------------------------------------------------------
# lifespan sweep
# ---------------------------------------------------------------------------


class SweepStatus(Enum):
    FITTED = "fitted"
    UNDERDETERMINED = "underdetermined"


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    t_low: float | None
    t_high: float | None
    status: RunStatus

    @property
    def t_mid(self) -> float | None:
        if self.t_low is None:
            return None
        return 0.5 * (self.t_low + self.t_high)


@dataclass
class SweepResult:
    rows: list[SweepRow]
    status: SweepStatus
    theory_exponent: float
    fitted_exponent: float | None = None
    intercept: float | None = None
    exponent_uncertainty: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def relative_gap(self) -> float | None:
        if self.fitted_exponent is None or not math.isfinite(self.theory_exponent):
            return None
        return abs(self.fitted_exponent - self.theory_exponent) / abs(self.theory_exponent)

    @property
    def monotone(self) -> bool:
        """Smaller data never blows up earlier, up to bracket width."""
        blown = [r for r in self.rows if r.t_low is not None]
        for a, b in zip(blown[:-1], blown[1:]):  # ascending epsilon
            if b.t_high > a.t_high + (a.t_high - a.t_low) + (b.t_high - b.t_low):
                return False
        return True

    @property
    def strictly_monotone(self) -> bool:
        mids = [r.t_mid for r in self.rows]
        if any(m is None for m in mids):
            return False
        return all(x > y for x, y in zip(mids[:-1], mids[1:]))


@dataclass(frozen=True)
class _RunJob:
    u0: SpectralField
    u1: SpectralField
    config: SolverConfig
    data_radius: float | None


def _run_job(job: _RunJob) -> RunResult:
    res = run(job.u0, job.u1, job.config, data_radius=job.data_radius)
    # snapshots and final state are not needed by sweeps and are costly to ship
    res.snapshots, res.snapshot_times, res.final_state = [], [], None
    return res


def fit_lifespan(eps: Sequence[float], t_low: Sequence[float], t_high: Sequence[float]):
    """Slope of log T_mid against log eps, with the slope spread over bracket ends."""
    le = np.log(np.asarray(eps, dtype=float))
    lo = np.asarray(t_low, dtype=float)
    hi = np.asarray(t_high, dtype=float)
    slope, intercept = np.polyfit(le, np.log(0.5 * (lo + hi)), 1)
    # extreme slopes obtainable by moving every T within its bracket
    alt = [np.polyfit(le, np.log(np.where(le > le.mean(), a, b)), 1)[0] for a, b in ((lo, hi), (hi, lo))]
    unc = max(abs(a - slope) for a in alt)
    return float(slope), float(intercept), float(unc)


def lifespan_sweep(
    u0: SpectralField,
    u1: SpectralField,
    eps_list: Sequence[float],
    template: SolverConfig,
    max_workers: int | None = None,
    data_radius: float | None = None,
) -> SweepResult:
    """One run per data size; fit log T_mid = a log eps + b over the blown-up rows."""
    params = template.params
    theory = -lifespan_exponent(params.n, params.q, params.gamma, params.p)
    eps_sorted = sorted(float(e) for e in eps_list)
    jobs = [
        _RunJob(u0, u1, _with_epsilon(template, e), data_radius)
        for e in eps_sorted
    ]
    results = ordered_map(_run_job, jobs, max_workers)
    rows = []
    warns = []
    for e, r in zip(eps_sorted, results):
        lo, hi = r.blowup_bracket if r.blew_up else (None, None)
        rows.append(SweepRow(e, lo, hi, r.status))
        warns.extend(w for w in r.warnings if w not in warns)
    blown = [r for r in rows if r.t_low is not None]
    result = SweepResult(rows, SweepStatus.UNDERDETERMINED, theory, warnings=warns)
    if len(blown) < 4:
        return result
    slope, icpt, unc = fit_lifespan(
        [r.epsilon for r in blown], [r.t_low for r in blown], [r.t_high for r in blown]
    )
    result.status = SweepStatus.FITTED
    result.fitted_exponent = slope
    result.intercept = icpt
    result.exponent_uncertainty = unc
    return result


def _with_epsilon(cfg: SolverConfig, eps: float) -> SolverConfig:
    p = cfg.params
    params = ProblemParams(n=p.n, p=p.p, gamma=p.gamma, q=p.q, epsilon=eps, s=p.s)
    return _replace(cfg, params=params)


def _with_power(cfg: SolverConfig, power: float) -> SolverConfig:
    p = cfg.params
    params = ProblemParams(n=p.n, p=power, gamma=p.gamma, q=p.q, epsilon=p.epsilon, s=p.s)
    return _replace(cfg, params=params)


def _replace(cfg, **kw):
    return replace(cfg, **kw)


# ---------------------------------------------------------------------------
# critical scan
# ---------------------------------------------------------------------------


class ScanClass(Enum):
    BLOWN_UP = "BlownUp"
    DECAYING = "Completed-with-decaying-tail"
    INCONCLUSIVE = "Inconclusive"


def decaying_tail(l2: np.ndarray) -> bool:
    """True when the last quarter of the series is strictly decreasing."""
    tail = np.asarray(l2)[-max(2, len(l2) // 4):]
    return bool(len(tail) >= 2 and np.all(np.diff(tail) < 0))


def classify(result: RunResult) -> ScanClass:
    if result.blew_up:
        return ScanClass.BLOWN_UP
    if decaying_tail(result.column("l2")):
        return ScanClass.DECAYING
    return ScanClass.INCONCLUSIVE


@dataclass(frozen=True)
class ScanRow:
    p: float
    label: ScanClass
    t_num: float | None
    l2_final: float
    flagged: bool = False


@dataclass
class ScanResult:
    rows: list[ScanRow]
    p_crit: float

    @property
    def monotone(self) -> bool:
        return not any(r.flagged for r in self.rows)

    @property
    def flip_bracket(self) -> tuple[float, float] | None:
        """(largest blown-up p, smallest decaying p above it)."""
        blown = [r.p for r in self.rows if r.label is ScanClass.BLOWN_UP]
        if not blown:
            return None
        lo = max(blown)
        above = [r.p for r in self.rows if r.label is ScanClass.DECAYING and r.p > lo]
        if not above:
            return None
        return (lo, min(above))

    @property
    def brackets_p_crit(self) -> bool:
        b = self.flip_bracket
        return b is not None and b[0] < self.p_crit < b[1]


def critical_scan(
    u0: SpectralField,
    u1: SpectralField,
    p_list: Sequence[float],
    template: SolverConfig,
    max_workers: int | None = None,
    data_radius: float | None = None,
) -> ScanResult:
    """One run per power at fixed data size and horizon, classified by outcome.

    A blown-up row above a decaying row contradicts the expected ordering and
    is relabeled Inconclusive with ``flagged`` set.
    """
    ps = sorted(float(p) for p in p_list)
    jobs = [_RunJob(u0, u1, _with_power(template, p), data_radius) for p in ps]
    results = ordered_map(_run_job, jobs, max_workers)
    rows = [
        ScanRow(p, classify(r), r.t_num, float(r.column("l2")[-1]))
        for p, r in zip(ps, results)
    ]
    seen_decay = False
    for i, r in enumerate(rows):
        if r.label is ScanClass.DECAYING:
            seen_decay = True
        elif r.label is ScanClass.BLOWN_UP and seen_decay:
            rows[i] = ScanRow(r.p, ScanClass.INCONCLUSIVE, r.t_num, r.l2_final, flagged=True)
    prm = template.params
    return ScanResult(rows, p_crit(prm.n, prm.q, prm.gamma))


# ---------------------------------------------------------------------------
# test-function functional
# ---------------------------------------------------------------------------


def smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


@dataclass(frozen=True)
class TestFunctionConfig:
    """Cutoffs phi_R(x) = <x/R>^{-n-1} and chi_R(t) = chi(t/R^2)."""

    __test__ = False  # keep pytest from collecting this as a test class

    R: float
    p: float
    n: int = 1
    kappa: int | None = None

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if self.kappa is None:
            object.__setattr__(self, "kappa", math.ceil(2 * self.p_prime) + 2)
        if self.kappa < 2 * self.p_prime:
            raise ValueError(f"kappa must be at least 2p' = {2 * self.p_prime}")

    @property
    def p_prime(self) -> float:
        return self.p / (self.p - 1.0)

    def chi(self, t):
        """1 on [0, 1/2], (1 - w(2t - 1))^kappa on (1/2, 1], 0 beyond."""
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0.5, 1.0, (1.0 - smoothstep(2.0 * t - 1.0)) ** self.kappa)

    def chi_derivatives(self, t):
        """(chi', chi'') on (1/2, 1)."""
        t = np.asarray(t, dtype=float)
        s = np.clip(2.0 * t - 1.0, 0.0, 1.0)
        a = 1.0 - smoothstep(s)
        da = -12.0 * s * (1.0 - s)  # d/dt of (1 - w(2t-1)): chain factor 2 included
        dda = -24.0 * (1.0 - 2.0 * s)
        k = self.kappa
        d1 = k * a ** (k - 1) * da
        d2 = k * (k - 1) * a ** (k - 2) * da**2 + k * a ** (k - 1) * dda
        return d1, d2

    def chi_bound_quantity(self, t):
        """chi^{-p'/p} (|chi'|^{p'} + |chi''|^{p'}), which must stay bounded."""
        pp = self.p_prime
        c = self.chi(t)
        d1, d2 = self.chi_derivatives(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            return c ** (-pp / self.p) * (np.abs(d1) ** pp + np.abs(d2) ** pp)

    def phi(self, radius):
        return (1.0 + (np.asarray(radius) / self.R) ** 2) ** (-(self.n + 1) / 2)


@dataclass(frozen=True)
class BlowupFunctionals:
    R: float
    J: float
    data_term: float
    rhs_term: float


def _physical(grid: Grid, f) -> np.ndarray:
    if isinstance(f, SpectralField):
        return fft_inverse(grid, f.coeffs).real
    return np.asarray(f, dtype=float)


def blowup_functionals(
    grid: Grid,
    times: Sequence[float],
    snapshots: Sequence[np.ndarray],
    u0,
    u1,
    params: ProblemParams,
    tf: TestFunctionConfig,
) -> BlowupFunctionals:
    """J_R = int int |u|^p phi_R chi_R, data term int (u0 + u1) phi_R, and J_R^{1/p} R^{-2+(n+2)/p'}.

    ``snapshots`` are physical fields at ``times``; ``u0`` and ``u1`` are the
    (already scaled) data. The time integral uses the trapezoidal rule.
    """
    R = tf.R
    T_end = R * R
    times = np.asarray(times, dtype=float)
    if len(times) != len(snapshots):
        raise ValueError("times and snapshots differ in length")
    if grid.L < 4 * R:
        raise ValueError(f"box half-width L = {grid.L} must be at least 4R = {4 * R}")
    if len(times) < 2 or times[0] > 0 or times[-1] < T_end:
        raise ValueError(
            f"snapshots must cover [0, R^2] = [0, {T_end:g}], got "
            f"[{times[0] if len(times) else float('nan'):g}, {times[-1] if len(times) else float('nan'):g}]"
        )
    inside = times <= T_end + 1e-12
    cadence = float(np.max(np.diff(times[inside]), initial=0.0))
    if cadence > T_end / 32 * (1 + 1e-9):
        raise ValueError(f"snapshot cadence {cadence:g} exceeds R^2/32 = {T_end / 32:g}")

    if tf.n != grid.n:
        raise ValueError(f"test function dimension {tf.n} differs from grid dimension {grid.n}")
    phi = tf.phi(grid.radius)
    vol = grid.dx**grid.n
    t_in = times[inside]
    space = np.array(
        [np.sum(np.abs(snapshots[i]) ** params.p * phi) * vol for i in np.flatnonzero(inside)]
    )
    J = float(_trapezoid(space * tf.chi(t_in / T_end), t_in))
    data = float(np.sum((_physical(grid, u0) + _physical(grid, u1)) * phi) * vol)
    rhs = J ** (1.0 / params.p) * R ** (-2.0 + (grid.n + 2) / tf.p_prime)
    return BlowupFunctionals(R, J, data, rhs)


@dataclass(frozen=True)
class FunctionalTrend:
    rows: list[BlowupFunctionals]
    data_exponent: float
    constant: float
    deficits: list[float]


def functional_trend(rows: Sequence[BlowupFunctionals], params: ProblemParams) -> FunctionalTrend:
    """Fit data_term ~ R^a and evaluate eps R^{q-gamma} - C J^{1/p} R^{-2-gamma+(n+2)/p'}.

    C is fixed so the deficit vanishes at the smallest R; negative values at
    larger R show the balance tipping against small data.
    """
    rows = sorted(rows, key=lambda r: r.R)
    R = np.array([r.R for r in rows])
    data = np.array([r.data_term for r in rows])
    if np.any(data <= 0):
        raise ValueError("data terms must be positive for a power-law fit")
    a = float(np.polyfit(np.log(R), np.log(data), 1)[0]) if len(rows) >= 2 else math.nan
    n, p, q, g, eps = params.n, params.p, params.q, params.gamma, params.epsilon
    pp = p / (p - 1)
    e = -2.0 - g + (n + 2) / pp

    def lhs(r):
        return eps * r.R ** (q - g)

    def rhs_unit(r):
        return r.J ** (1.0 / p) * r.R**e

    C = lhs(rows[0]) / rhs_unit(rows[0]) if rhs_unit(rows[0]) > 0 else math.inf
    deficits = [float(lhs(r) - C * rhs_unit(r)) for r in rows]
    return FunctionalTrend(list(rows), a, float(C), deficits)


__all__ = [
    "BlowupFunctionals",
    "DecayReport",
    "FunctionalTrend",
    "ScanClass",
    "ScanResult",
    "ScanRow",
    "SweepResult",
    "SweepRow",
    "SweepStatus",
    "TestFunctionConfig",
    "blowup_functionals",
    "classify",
    "critical_scan",
    "decay_target",
    "decaying_tail",
    "fit_lifespan",
    "functional_trend",
    "lifespan_exponent",
    "lifespan_sweep",
    "linear_decay_experiment",
    "p_crit",
]
