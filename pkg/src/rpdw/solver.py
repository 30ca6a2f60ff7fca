"""
Time integration of u_tt - Lap u + u_t = I_gamma(|u|^p).

The linear part is propagated exactly per Fourier mode; the Duhamel integral of
the nonlinearity is handled by a two-stage exponential integrator (ETD2
predictor-corrector) that interpolates the nonlinear term linearly across the
step:

    u* = g0 u + k v + phi0 N(u)
    u+ = g0 u + k v + phi1 N(u) + (phi0 - phi1) N(u*)
    v+ = dg0 u + dk v + psi1 N(u) + (psi0 - psi1) N(u*)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .grid import (
    Grid,
    InfiniteNormError,
    ProblemParams,
    SpectralField,
    fft_inverse,
    l2_norm,
    pseudo_measure_norm,
    sobolev_norm,
)
from .kernel import lattice_weights
from .riesz import EXACT_ZERO, RieszMode, nonlinear_array, riesz_multiplier

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimState:
    u_hat: SpectralField
    v_hat: SpectralField
    t: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.u_hat.grid


@dataclass(frozen=True)
class SolverConfig:
    h: float
    T: float
    params: ProblemParams
    riesz: RieszMode = EXACT_ZERO
    blowup_factor: float = 1e8
    record_every: int = 1
    linear_only: bool = False
    # steps between stored physical snapshots; None stores none
    snapshot_every: int | None = None
    oversample: bool = False

    def __post_init__(self):
        problems = []
        if not self.h > 0:
            problems.append(f"step h must be positive, got {self.h}")
        if not self.T >= self.h:
            problems.append(f"horizon T must be at least h, got T={self.T}, h={self.h}")
        if not self.blowup_factor > 1:
            problems.append(f"blowup_factor must exceed 1, got {self.blowup_factor}")
        if self.record_every < 1:
            problems.append("record_every must be >= 1")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            problems.append("snapshot_every must be >= 1")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.T / self.h - 1e-9))


class RunStatus(Enum):
    COMPLETED = "completed"
    BLOWN_UP = "blown_up"
    NON_FINITE = "non_finite"


@dataclass(frozen=True)
class Sample:
    t: float
    l2: float
    h1: float
    hneg: float
    linf: float
    yq: float


SERIES_COLUMNS = ("t", "l2", "h1", "hneg", "linf", "yq")


@dataclass
class RunResult:
    series: list[Sample]
    status: RunStatus
    step_count: int
    t_last_finite: float
    t_first_bad: float | None = None
    warnings: list[str] = field(default_factory=list)
    max_imag_ratio: float = 0.0
    snapshot_times: list[float] = field(default_factory=list)
    snapshots: list[np.ndarray] = field(default_factory=list)
    final_state: SimState | None = None

    @property
    def blew_up(self) -> bool:
        return self.status is not RunStatus.COMPLETED

    @property
    def blowup_bracket(self) -> tuple[float, float] | None:
        if not self.blew_up:
            return None
        return (self.t_last_finite, self.t_first_bad)

    @property
    def t_num(self) -> float | None:
        """Midpoint of the blow-up bracket, used for lifespan fits."""
        if not self.blew_up:
            return None
        lo, hi = self.blowup_bracket
        return 0.5 * (lo + hi)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.series])


def init_state(u0: SpectralField, u1: SpectralField, epsilon: float) -> SimState:
    if u0.grid != u1.grid:
        raise ValueError("u0 and u1 live on different grids")
    return SimState(u0 * epsilon, u1 * epsilon, 0.0)


class _Stepper:
    """Array-level integrator bound to one grid, step size and problem."""

    def __init__(self, grid: Grid, config: SolverConfig):
        self.grid = grid
        self.config = config
        self.p = config.params.p
        self.multiplier = (
            None
            if config.linear_only
            else riesz_multiplier(grid, config.params.gamma, config.riesz)
        )

    def nonlinear(self, u_hat):
        return nonlinear_array(
            self.grid, u_hat, self.p, self.multiplier, self.config.oversample
        )

    def step(self, u_hat, v_hat, h, n0=None):
        """One step of size h. Returns (u, v) arrays or None on a non-finite value."""
        W = lattice_weights(self.grid, h)
        lin_u = W.g0 * u_hat + W.k * v_hat
        lin_v = W.dg0 * u_hat + W.dk * v_hat
        if self.config.linear_only:
            return lin_u, lin_v
        if n0 is None:
            n0, _ = self.nonlinear(u_hat)
            if n0 is None:
                return None
        u_pred = lin_u + W.phi0 * n0
        n1, _ = self.nonlinear(u_pred)
        if n1 is None:
            return None
        u_new = lin_u + W.phi1 * n0 + (W.phi0 - W.phi1) * n1
        v_new = lin_v + W.psi1 * n0 + (W.psi0 - W.psi1) * n1
        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
            return None
        return u_new, v_new


def step(state: SimState, config: SolverConfig) -> SimState | None:
    """Advance one step of size config.h; None signals a non-finite result."""
    stepper = _Stepper(state.grid, config)
    out = stepper.step(state.u_hat.coeffs, state.v_hat.coeffs, config.h)
    if out is None:
        return None
    return SimState(
        SpectralField(state.grid, out[0]),
        SpectralField(state.grid, out[1]),
        state.t + config.h,
    )


def _hneg(u: SpectralField, s: float) -> float:
    try:
        return sobolev_norm(u, -s, homogeneous=True)
    except InfiniteNormError:
        return math.inf


def sample_norms(u: SpectralField, t: float, params: ProblemParams, u_phys=None) -> Sample:
    if u_phys is None:
        u_phys = fft_inverse(u.grid, u.coeffs)
    return Sample(
        t=float(t),
        l2=l2_norm(u),
        h1=sobolev_norm(u, 1.0, homogeneous=True),
        hneg=_hneg(u, params.s),
        linf=float(np.max(np.abs(u_phys.real))),
        yq=pseudo_measure_norm(u, params.q),
    )


def support_radius(grid: Grid, *fields: SpectralField, rel_tol: float = 1e-12) -> float:
    """Radius beyond which every field is below rel_tol times its maximum."""
    r = grid.radius
    out = 0.0
    for f in fields:
        a = np.abs(fft_inverse(grid, f.coeffs).real)
        peak = a.max()
        if peak == 0:
            continue
        big = a > rel_tol * peak
        out = max(out, float(r[big].max()))
    return out


def run(
    u0: SpectralField,
    u1: SpectralField,
    config: SolverConfig,
    data_radius: float | None = None,
) -> RunResult:
    """Integrate from (eps u0, eps u1) to T or until blow-up.

    Blow-up is declared when max|u| exceeds blowup_factor times its initial
    value, or when a step stays non-finite after one retry with two half steps.
    """
    grid = u0.grid
    params = config.params
    state = init_state(u0, u1, params.epsilon)
    u_hat = np.array(state.u_hat.coeffs)
    v_hat = np.array(state.v_hat.coeffs)
    stepper = _Stepper(grid, config)

    warnings = []
    if data_radius is None:
        data_radius = support_radius(grid, u0, u1)
    if config.T + data_radius >= grid.L:
        msg = (
            f"causality window violated: T + data radius = {config.T + data_radius:.6g} "
            f">= L = {grid.L:.6g}; periodic images may interact"
        )
        warnings.append(msg)
        log.warning(msg)

    series: list[Sample] = []
    snap_t: list[float] = []
    snaps: list[np.ndarray] = []
    max_imag = 0.0

    def record(t, uh, u_c):
        nonlocal max_imag
        field_ = SpectralField(grid, uh)
        s = sample_norms(field_, t, params, u_c)
        if s.linf > 0:
            max_imag = max(max_imag, float(np.max(np.abs(u_c.imag))) / s.linf)
        series.append(s)

    u_c = fft_inverse(grid, u_hat)
    linf0 = float(np.max(np.abs(u_c.real)))
    threshold = config.blowup_factor * linf0
    record(0.0, u_hat, u_c)
    if config.snapshot_every is not None:
        snap_t.append(0.0)
        snaps.append(u_c.real.copy())

    h = config.h
    n_steps = config.n_steps
    status = RunStatus.COMPLETED
    t_last = 0.0
    t_bad = None
    steps_done = 0
    n0 = None
    if not config.linear_only:
        n0, u_c = stepper.nonlinear(u_hat)
        if n0 is None:
            status, t_bad = RunStatus.NON_FINITE, 0.0

    for i in range(1, n_steps + 1):
        if status is not RunStatus.COMPLETED:
            break
        t_new = i * h
        out = stepper.step(u_hat, v_hat, h, n0)
        if out is None:
            half = stepper.step(u_hat, v_hat, 0.5 * h)
            if half is not None:
                out = stepper.step(half[0], half[1], 0.5 * h)
        if out is None:
            status, t_bad = RunStatus.NON_FINITE, t_new
            break
        u_hat, v_hat = out
        steps_done = i

        need_record = i % config.record_every == 0 or i == n_steps
        need_snap = config.snapshot_every is not None and i % config.snapshot_every == 0
        if config.linear_only:
            if not (need_record or need_snap):
                t_last = t_new
                continue
            u_c = fft_inverse(grid, u_hat)
        else:
            # the next step's nonlinear term also supplies the physical field
            n0, u_c = stepper.nonlinear(u_hat)
            if n0 is None:
                status, t_bad = RunStatus.NON_FINITE, t_new
                break
            linf = float(np.max(np.abs(u_c.real)))
            if linf0 > 0 and linf > threshold:
                status, t_bad = RunStatus.BLOWN_UP, t_new
                record(t_new, u_hat, u_c)
                break
        if need_record:
            record(t_new, u_hat, u_c)
        if need_snap:
            snap_t.append(t_new)
            snaps.append(u_c.real.copy())
        t_last = t_new

    final = SimState(SpectralField(grid, u_hat), SpectralField(grid, v_hat), t_last)
    return RunResult(
        series=series,
        status=status,
        step_count=steps_done,
        t_last_finite=t_last,
        t_first_bad=t_bad,
        warnings=warnings,
        max_imag_ratio=max_imag,
        snapshot_times=snap_t,
        snapshots=snaps,
        final_state=final,
    )
