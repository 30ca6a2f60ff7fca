"""
Grid-free radial quadrature in frequency space over R^n.

These routines do not touch the periodic lattice: they integrate radial
Fourier profiles against the exact kernel with adaptive Gauss-Kronrod
quadrature (QUADPACK via scipy), and serve as ground truth for decay rates
and the auxiliary inequalities used by the global theory.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .bessel import bessel_jtilde, bessel_zeros
from .errors import DivergentIntegralError, QuadratureError
from .grid import Grid, fft_forward, fft_inverse
from .kernel import dk_hat, k_hat
from .riesz import EXACT_ZERO, riesz_multiplier

REL_TOL = 1e-8


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n, 2 pi^{n/2} / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class RadialProfile:
    """Amplitude r -> g(r) of a radial Fourier transform.

    ``r_max`` is the support end, or None for unbounded support.
    """

    func: Callable[[float], float]
    r_max: float | None = None
    label: str = ""

    def __call__(self, r):
        return self.func(r)


def power_indicator(q: float, r_max: float = 1.0) -> RadialProfile:
    """r^-q on (0, r_max]: the extremal profile of the pseudo-measure class."""
    return RadialProfile(lambda r: r ** (-q), r_max, f"r^-{q} 1[0,{r_max}]")


def indicator(r_max: float = 1.0) -> RadialProfile:
    return RadialProfile(lambda r: 1.0, r_max, f"1[0,{r_max}]")


def _quad(f, a, b, points=None, epsrel=1e-10):
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=400, points=points)
        except IntegrationWarning:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IntegrationWarning)
                val, err = quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=400, points=points)
    return val, err


def _integrate_panels(f, edges, tail_from=None):
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        v, e = _quad(f, a, b)
        total += v
        err += e
    if tail_from is not None:
        v, e = _quad(f, tail_from, np.inf)
        total += v
        err += e
    return total, err


def _local_exponent(f, r1, r2):
    """d log f / d log r estimated from two samples (None when f vanishes)."""
    f1, f2 = abs(f(r1)), abs(f(r2))
    if f1 == 0 or f2 == 0 or not (math.isfinite(f1) and math.isfinite(f2)):
        return None
    return math.log(f1 / f2) / math.log(r1 / r2)


def _check_integrable_at_zero(f, condition: str):
    a = _local_exponent(f, 1e-12, 1e-10)
    if a is not None and a <= -1 + 1e-3:
        raise DivergentIntegralError(
            f"integrand behaves like r^{a:.3f} at r -> 0 and is not integrable; "
            f"violated condition: {condition}"
        )


def _check_integrable_at_infinity(f, condition: str):
    a = _local_exponent(f, 1e8, 1e10)
    if a is not None and a >= -1 - 1e-3:
        raise DivergentIntegralError(
            f"integrand behaves like r^{a:.3f} at r -> infinity and is not integrable; "
            f"violated condition: {condition}"
        )


def _kernel_breakpoints(t: float, r_hi: float) -> list[float]:
    pts = {0.5}
    if t > 0:
        scale = 1.0 / math.sqrt(t)
        for k in range(-12, 8):
            pts.add(scale * 2.0**k)
        # zeros of sin(w t) in the oscillatory regime, w^2 = r^2 - 1/4; once
        # e^{-t/2} has damped that regime below roundoff it needs no resolution
        kmax = 0 if t > 80 else min(400, int(t * max(r_hi, 0.5) / math.pi) + 1)
        for k in range(1, kmax + 1):
            w = k * math.pi / t
            pts.add(math.sqrt(w * w + 0.25))
    return sorted(p for p in pts if 0 < p < r_hi)


def linear_sobolev_norm(t: float, profile: RadialProfile, n: int, s: float, j: int) -> float:
    """Homogeneous H^s norm of d_t^j K(t) * phi for radial phi_hat = profile.

    Computes (|S^{n-1}| int_0^inf r^{2s} |d_t^j K(t,r) g(r)|^2 r^{n-1} dr)^{1/2}.
    """
    if n not in (1, 2, 3, 4):
        raise ValueError(f"n must be in 1..4, got {n}")
    if j not in (0, 1):
        raise ValueError(f"j must be 0 or 1, got {j}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    kern = k_hat if j == 0 else dk_hat

    def integrand(r):
        return r ** (2 * s) * (kern(t, r) * profile(r)) ** 2 * r ** (n - 1)

    cond = "s > q - n/2 for a profile of pseudo-measure index q"
    _check_integrable_at_zero(integrand, cond)
    if profile.r_max is None:
        _check_integrable_at_infinity(integrand, "enough decay of the profile at infinity")
        r_hi = max(50.0, 10.0 / math.sqrt(max(t, 1e-12)))
        edges = [0.0, *_kernel_breakpoints(t, r_hi), r_hi]
        total, err = _integrate_panels(integrand, edges, tail_from=r_hi)
    else:
        edges = [0.0, *_kernel_breakpoints(t, profile.r_max), profile.r_max]
        total, err = _integrate_panels(integrand, edges)
    if total < 0 or err > REL_TOL * max(total, 1e-300) and err > 1e-300:
        raise QuadratureError(
            f"linear_sobolev_norm quadrature error {err:.3e} exceeds tolerance for value {total:.3e}"
        )
    return math.sqrt(sphere_area(n) * total)


class DecayFit(NamedTuple):
    slope: float
    intercept: float
    residual: float


def fit_decay_slope(samples: Sequence[tuple[float, float]]) -> DecayFit:
    """Least squares of log(value) against log(1 + t).

    ``residual`` is the root-mean-square deviation of the log-values.
    """
    if len(samples) < 5:
        raise ValueError(f"need at least 5 samples, got {len(samples)}")
    t = np.array([s[0] for s in samples], dtype=float)
    v = np.array([s[1] for s in samples], dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("decay fit needs positive finite values")
    if np.any(np.diff(t) <= 0):
        raise ValueError("sample times must be strictly increasing")
    x = np.log1p(t)
    y = np.log(v)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return DecayFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


# ---------------------------------------------------------------------------
# auxiliary lemmas
# ---------------------------------------------------------------------------


def gaussian_low_norm(t: float, gamma: float, c: float, eps_cut: float, n: int) -> float:
    """L2 norm of |xi|^gamma exp(-c |xi|^2 t) over the ball |xi| <= eps_cut."""
    if gamma <= -n / 2:
        raise DivergentIntegralError(
            f"|xi|^{2 * gamma} is not integrable near 0 in R^{n}; violated condition: gamma > -n/2"
        )

    def integrand(r):
        return r ** (2 * gamma + n - 1) * math.exp(-2.0 * c * r * r * t)

    edges = [0.0, *_kernel_breakpoints(t, eps_cut), eps_cut]
    edges = sorted(set(e for e in edges if e <= eps_cut))
    total, _ = _integrate_panels(integrand, edges)
    return math.sqrt(sphere_area(n) * total)


def lemma_b1_ratio(t: float, gamma: float, c: float, eps_cut: float, n: int) -> float:
    """Low-frequency Gaussian norm divided by (1 + t)^{-n/4 - gamma/2}."""
    norm = gaussian_low_norm(t, gamma, c, eps_cut, n)
    return norm / (1.0 + t) ** (-n / 4 - gamma / 2)


class ConvolutionBound(NamedTuple):
    integral: float
    bound: float
    branch: str

    @property
    def ratio(self) -> float:
        return self.integral / self.bound


def convolution_bound(alpha: float, beta: float, t: float) -> tuple[float, str]:
    """Right side of the time-convolution inequality, without its constant."""
    m = max(alpha, beta)
    if m > 1:
        return (1.0 + t) ** (-min(alpha, beta)), "max>1"
    if m == 1:
        return (1.0 + t) ** (-min(alpha, beta)) * math.log(math.e + t), "max=1"
    return (1.0 + t) ** (1.0 - alpha - beta), "max<1"


def lemma_b2_check(alpha: float, beta: float, t: float) -> ConvolutionBound:
    """int_0^t (1+t-s)^-alpha (1+s)^-beta ds and the matching bound branch."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    bound, branch = convolution_bound(alpha, beta, t)
    if t == 0:
        return ConvolutionBound(0.0, bound, branch)
    if alpha == 0 and beta == 0:
        return ConvolutionBound(float(t), bound, branch)

    def f(s):
        return (1.0 + t - s) ** (-alpha) * (1.0 + s) ** (-beta)

    pts = sorted({p for p in (1.0, t / 2, t - 1.0) if 0 < p < t})
    edges = [0.0, *pts, t]
    total, _ = _integrate_panels(f, edges)
    return ConvolutionBound(total, bound, branch)


# ---------------------------------------------------------------------------
# radial Fourier transform of <x>^{-n+q}
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _gauss_panels(f, edges: np.ndarray) -> np.ndarray:
    """Integral of f over each [edges[i], edges[i+1]] by 24-point Gauss-Legendre."""
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    x = a + half * (_GL_NODES[None, :] + 1.0)
    return np.sum(f(x) * _GL_WEIGHTS[None, :], axis=1) * half[:, 0]


def euler_sum(terms: np.ndarray) -> tuple[float, float]:
    """Euler-accelerated sum of an alternating series (repeated averaging of partial sums).

    Returns (value, change versus the estimate with the last few terms dropped).
    """
    def accelerate(t):
        s = np.cumsum(t)
        while s.size > 1:
            s = 0.5 * (s[:-1] + s[1:])
        return float(s[0])

    full = accelerate(terms)
    shorter = accelerate(terms[:-8]) if terms.size > 16 else full
    return full, abs(full - shorter)


class HankelSample(NamedTuple):
    xi: float
    value: float
    fhat: float
    error: float
    converged: bool


def radial_transform(g, n: int, xi: float, head_radius: float = 60.0, tail_terms: int = 48):
    """Unitary Fourier transform of a radial function g(|x|) at |xi| = xi.

    f_hat(xi) = int_0^inf g(r) r^{n-1} J~_{n/2-1}(r xi) dr, with the range cut at
    zeros of the Bessel factor: Gauss-Legendre on every panel, the alternating
    tail summed with Euler acceleration.
    """
    nu = n / 2 - 1
    r_head = max(head_radius, 1.0 / xi)
    n_head = int(r_head * xi / math.pi) + 2
    zeros = bessel_zeros(nu, n_head + tail_terms) / xi
    head = np.concatenate([[0.0], zeros[: n_head + 1]])
    # refine near the origin, where g varies on the unit scale, and geometrically
    # beyond it, where the power-law profile varies on the scale r
    r_end = head[-1]
    geo = np.geomspace(8.0, r_end, max(2, int(8 * math.log10(r_end / 8.0)) + 2)) if r_end > 8.0 else []
    fine = np.unique(np.concatenate([head, np.linspace(0.0, min(r_end, 8.0), 65), geo]))

    def f(r):
        return g(r) * r ** (n - 1) * bessel_jtilde(nu, r * xi)

    head_val = float(np.sum(_gauss_panels(f, fine)))
    tail_terms_arr = _gauss_panels(f, zeros[n_head:])
    tail_val, tail_err = euler_sum(tail_terms_arr)
    return head_val + tail_val, tail_err


def japanese_power(n: int, q: float):
    """g(r) = <r>^{-n+q}."""
    return lambda r: (1.0 + r * r) ** ((-n + q) / 2)


def hankel_pm_norm_samples(q: float, n: int, xi_list, tol: float = 1e-6) -> list[HankelSample]:
    """Samples of |xi|^q |f_hat(xi)| for f(x) = <x>^{-n+q}.

    Each sample carries the tail error estimate; ``converged`` is False when the
    estimate exceeds ``tol`` times the head scale.
    """
    if not 0 < q < n / 2:
        raise ValueError(f"q must satisfy 0 < q < n/2, got q={q}, n={n}")
    g = japanese_power(n, q)
    out = []
    for xi in xi_list:
        xi = float(xi)
        if not xi > 0:
            raise ValueError("frequencies must be positive")
        fhat, err = radial_transform(g, n, xi)
        scale = xi**q
        out.append(
            HankelSample(xi, scale * abs(fhat), fhat, scale * err, bool(err <= tol * max(abs(fhat), 1e-300) or err < 1e-14))
        )
    return out


# ---------------------------------------------------------------------------
# empirical Gagliardo-Nirenberg and Hardy-Littlewood-Sobolev constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalConstants:
    ratios: np.ndarray
    max_ratio: float
    spread: float

    @classmethod
    def from_ratios(cls, ratios):
        r = np.asarray(ratios, dtype=float)
        return cls(r, float(r.max()), float(r.max() / r.min()))


def lp_norm(grid: Grid, u: np.ndarray, p: float) -> float:
    """(sum |u|^p dx^n)^{1/p} on the lattice."""
    return float((np.sum(np.abs(u) ** p) * grid.dx**grid.n) ** (1.0 / p))


def _homog_derivative(grid: Grid, u: np.ndarray, order: float) -> np.ndarray:
    xi = grid.xi_mag
    w = np.zeros_like(xi)
    w[xi > 0] = xi[xi > 0] ** order
    if order == 0:
        w[:] = 1.0
    return fft_inverse(grid, fft_forward(grid, u) * w).real


def sample_fields(grid: Grid, count: int = 50, seed: int = 0) -> list[np.ndarray]:
    """Real test fields: half random Gaussians, half random band-limited wave packets."""
    rng = np.random.default_rng(seed)
    coords = grid.coords()
    out = []
    for i in range(count):
        width = rng.uniform(0.5, 3.0)
        centre = rng.uniform(-0.2 * grid.L, 0.2 * grid.L, size=grid.n)
        r2 = sum((c - x0) ** 2 for c, x0 in zip(coords, centre))
        envelope = np.exp(-0.5 * r2 / width**2) * rng.uniform(0.5, 2.0)
        if i % 2 == 0:
            out.append(np.broadcast_to(envelope, grid.shape).copy())
        else:
            kmax = rng.uniform(0.5, 3.0)
            phase = 0.0
            for c in coords:
                phase = phase + rng.uniform(-kmax, kmax) * c
            out.append(np.broadcast_to(envelope * np.cos(phase + rng.uniform(0, 2 * np.pi)), grid.shape).copy())
    return out


def gn_exponent(n: int, p: float, theta: float, a: float, p0: float, p1: float) -> float:
    """Interpolation weight of the fractional Gagliardo-Nirenberg inequality."""
    return (1 / p0 - 1 / p + theta / n) / (1 / p0 - 1 / p1 + a / n)


def gn_check(
    grid: Grid,
    fields: Sequence[np.ndarray],
    p: float,
    theta: float,
    a: float = 1.0,
    p0: float = 2.0,
    p1: float = 2.0,
) -> EmpiricalConstants:
    """Ratios ||u||_{H^theta_p} / (||u||_{L^p0}^{1-w} ||u||_{H^a_p1}^w) over ``fields``."""
    for name, val in (("p", p), ("p0", p0), ("p1", p1)):
        if not 1 < val < math.inf:
            raise ValueError(f"{name} must lie in (1, inf), got {val}")
    if not (a > 0 and 0 <= theta <= a):
        raise ValueError(f"need a > 0 and 0 <= theta <= a, got theta={theta}, a={a}")
    w = gn_exponent(grid.n, p, theta, a, p0, p1)
    if not (theta / a - 1e-12 <= w <= 1 + 1e-12):
        raise ValueError(f"interpolation weight {w:.6g} outside [theta/a, 1]")
    ratios = []
    for u in fields:
        lhs = lp_norm(grid, _homog_derivative(grid, u, theta), p)
        rhs = lp_norm(grid, u, p0) ** (1 - w) * lp_norm(grid, _homog_derivative(grid, u, a), p1) ** w
        ratios.append(lhs / rhs)
    return EmpiricalConstants.from_ratios(ratios)


def hls_check(grid: Grid, fields: Sequence[np.ndarray], gamma: float, eta2: float) -> EmpiricalConstants:
    """Ratios ||I_gamma f||_{L^eta1} / ||f||_{L^eta2} with 1/eta1 = 1/eta2 - gamma/n."""
    n = grid.n
    if not 0 < gamma < n:
        raise ValueError(f"Hardy-Littlewood-Sobolev needs 0 < gamma < n, got {gamma}")
    inv1 = 1 / eta2 - gamma / n
    if not (eta2 > 1 and inv1 > 0):
        raise ValueError(f"need 1 < eta2 < n/gamma, got eta2={eta2}")
    eta1 = 1 / inv1
    m = riesz_multiplier(grid, gamma, EXACT_ZERO)
    ratios = []
    for f in fields:
        If = fft_inverse(grid, fft_forward(grid, f) * m).real
        ratios.append(lp_norm(grid, If, eta1) / lp_norm(grid, f, eta2))
    return EmpiricalConstants.from_ratios(ratios)


__all__ = [
    "ConvolutionBound",
    "DecayFit",
    "EmpiricalConstants",
    "HankelSample",
    "RadialProfile",
    "convolution_bound",
    "euler_sum",
    "fit_decay_slope",
    "gn_check",
    "hankel_pm_norm_samples",
    "hls_check",
    "indicator",
    "japanese_power",
    "lemma_b1_ratio",
    "lemma_b2_check",
    "linear_sobolev_norm",
    "power_indicator",
    "radial_transform",
    "sample_fields",
    "sphere_area",
]

