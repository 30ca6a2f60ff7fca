"""
Linear propagator of u_tt - Lap u + u_t = 0 in Fourier space.

Each Fourier mode of frequency magnitude r obeys y'' + y' + r^2 y = 0, whose
characteristic roots are

    lambda_pm = -1/2 +- mu,    mu^2 = 1/4 - r^2.

K(t, r) is the solution with K(0) = 0, K'(0) = 1:

    K = exp(-t/2) sinh(t mu)/mu     (r < 1/2)
    K = exp(-t/2) sin(t w)/w        (r > 1/2, w^2 = r^2 - 1/4)
    K = t exp(-t/2)                 (r = 1/2)

Two places lose precision if evaluated naively:

* r near 1/2, where mu -> 0 and sinh(t mu)/mu is 0/0. Inside the band
  |r - 1/2| <= BRANCH_BAND the even series in mu^2 is used instead.
* r near 0, where lambda_+ = -1/2 + mu cancels. lambda_+ is computed as
  -r^2 / (1/2 + mu), and the exponential-integrator weights use the series of
  (e^z - 1)/z and its relatives for small |z|.

All functions broadcast over numpy arrays of t and r.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.special import gammainc

from .grid import Grid

BRANCH_BAND = 1e-3
# series in x = t^2 mu^2 is used while |x| stays below this
SERIES_LIMIT = 10.0
_N_SERIES = 24
_N_BAND = 14
_SMALL_Z = 1.0


class Regime(Enum):
    LOW = "low"
    NEAR_BRANCH = "near_branch"
    HIGH = "high"


@dataclass(frozen=True)
class ModeRates:
    lambda_plus: complex
    lambda_minus: complex
    regime: Regime


def mode_rates(r: float) -> ModeRates:
    """Decay rates lambda_pm for one frequency magnitude."""
    if r < 0:
        raise ValueError(f"frequency magnitude must be >= 0, got {r}")
    mu = np.sqrt(complex((0.5 - r) * (0.5 + r)))
    lp = -r * r / (0.5 + mu)
    lm = -0.5 - mu
    if abs(r - 0.5) <= BRANCH_BAND:
        regime = Regime.NEAR_BRANCH
    elif r < 0.5:
        regime = Regime.LOW
    else:
        regime = Regime.HIGH
    return ModeRates(complex(lp), complex(lm), regime)


def _prepare(t, r):
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    if np.any(r < 0):
        raise ValueError("frequency magnitude must be nonnegative")
    t, r = np.broadcast_arrays(t, r)
    return t, r


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _sinh_series(x):
    """sum_k x^k/(2k+1)!  (sinh(sqrt x)/sqrt x for either sign of x)."""
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, _N_SERIES):
        term = term * x / ((2 * k) * (2 * k + 1))
        total = total + term
    return total


def _cosh_series(x):
    """sum_k x^k/(2k)!."""
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, _N_SERIES):
        term = term * x / ((2 * k - 1) * (2 * k))
        total = total + term
    return total


def _masks(t, r):
    mu2 = (0.5 - r) * (0.5 + r)
    band = (np.abs(r - 0.5) <= BRANCH_BAND) & (t * t * np.abs(mu2) <= SERIES_LIMIT)
    low = ~band & (r < 0.5)
    high = ~band & ~low
    return mu2, band, low, high


def _k_and_dk(t, r):
    mu2, band, low, high = _masks(t, r)
    k = np.empty_like(t)
    dk = np.empty_like(t)

    if band.any():
        tb = t[band]
        x = tb * tb * mu2[band]
        s = tb * _sinh_series(x)
        c = _cosh_series(x)
        e = np.exp(-0.5 * tb)
        k[band] = e * s
        dk[band] = e * (c - 0.5 * s)

    if low.any():
        tl, rl = t[low], r[low]
        mu = np.sqrt(mu2[low])
        lp = -rl * rl / (0.5 + mu)
        lm = -0.5 - mu
        # sinh form rewritten without overflow: e^{lp t} (1 - e^{-2 mu t}) / (2 mu)
        ratio = -np.expm1(-2.0 * mu * tl) / (2.0 * mu)
        e = np.exp(lp * tl)
        k[low] = e * ratio
        dk[low] = e * (1.0 + lm * ratio)

    if high.any():
        th = t[high]
        w = np.sqrt(-mu2[high])
        e = np.exp(-0.5 * th)
        sn = np.sin(w * th) / w
        k[high] = e * sn
        dk[high] = e * (np.cos(w * th) - 0.5 * sn)

    return k, dk


def k_hat(t, r):
    """K(t, r): Fourier symbol of the linear kernel."""
    t, r = _prepare(t, r)
    return _out(_k_and_dk(t, r)[0])


def dk_hat(t, r):
    """Time derivative of K(t, r)."""
    t, r = _prepare(t, r)
    return _out(_k_and_dk(t, r)[1])


def g0_hat(t, r):
    """Propagator of the initial displacement, K + dK/dt."""
    t, r = _prepare(t, r)
    k, dk = _k_and_dk(t, r)
    return _out(k + dk)


def dg0_hat(t, r):
    """Time derivative of g0_hat; equals -r^2 K by the mode equation."""
    t, r = _prepare(t, r)
    k, _ = _k_and_dk(t, r)
    return _out(-r * r * k)


def eigen_form(t, r):
    """(e^{lambda_+ t} - e^{lambda_- t}) / (lambda_+ - lambda_-) in plain complex arithmetic.

    Independent check on k_hat; inaccurate inside the branch band.
    """
    t, r = _prepare(t, r)
    mu = np.sqrt((0.25 - r * r).astype(complex))
    lp = -0.5 + mu
    lm = -0.5 - mu
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (np.exp(lp * t) - np.exp(lm * t)) / (lp - lm)
    return _out(np.where(t == 0, 0.0, val.real))


# ---------------------------------------------------------------------------
# exponential-integrator weights
# ---------------------------------------------------------------------------


def _phi1(z):
    """(e^z - 1)/z, series for small |z|."""
    out = np.empty_like(z)
    small = np.abs(z) < _SMALL_Z
    zs = z[small]
    term = np.ones_like(zs)
    total = term.copy()
    for k in range(1, 30):
        term = term * zs / (k + 1)
        total = total + term
    out[small] = total
    zl = z[~small]
    out[~small] = (np.exp(zl) - 1.0) / zl
    return out


def _g(z):
    """int_0^1 s e^{zs} ds = (e^z (z - 1) + 1)/z^2, series for small |z|."""
    out = np.empty_like(z)
    small = np.abs(z) < _SMALL_Z
    zs = z[small]
    # sum_k z^k / (k! (k+2))
    fact = np.ones_like(zs)
    total = fact / 2.0
    for k in range(1, 30):
        fact = fact * zs / k
        total = total + fact / (k + 2)
    out[small] = total
    zl = z[~small]
    out[~small] = (np.exp(zl) * (zl - 1.0) + 1.0) / (zl * zl)
    return out


@dataclass(frozen=True)
class PropagatorWeights:
    """Per-mode coefficients of one exponential-integrator step of size h.

    phi0 = int_0^h K,  phi1 = (1/h) int_0^h s K(s) ds,
    psi0 = K(h),       psi1 = (1/h) int_0^h s K'(s) ds.
    """

    h: float
    k: np.ndarray
    dk: np.ndarray
    g0: np.ndarray
    dg0: np.ndarray
    phi0: np.ndarray
    phi1: np.ndarray
    psi0: np.ndarray
    psi1: np.ndarray

    def take(self, index: np.ndarray) -> "PropagatorWeights":
        """Broadcast a radial table onto a lattice through an index array."""
        return PropagatorWeights(
            self.h,
            *(getattr(self, name)[index] for name in _WEIGHT_FIELDS),
        )


_WEIGHT_FIELDS = ("k", "dk", "g0", "dg0", "phi0", "phi1", "psi0", "psi1")


def _band_weights(h, mu2):
    """Weights from the mu^2 expansion of K; every coefficient is an incomplete gamma."""
    a = 0.5 * h
    phi0 = np.zeros_like(mu2)
    s_phi1 = np.zeros_like(mu2)
    s_psi1 = np.zeros_like(mu2)
    for k in range(_N_BAND):
        pw = mu2**k * 4.0**k
        p2 = gammainc(2 * k + 2, a)
        p3 = gammainc(2 * k + 3, a)
        phi0 = phi0 + pw * 4.0 * p2
        s_phi1 = s_phi1 + pw * 8.0 * (2 * k + 2) * p3
        s_psi1 = s_psi1 + pw * 4.0 * ((2 * k + 1) * p2 - (2 * k + 2) * p3)
    return phi0, s_phi1 / h, s_psi1 / h


def weights(h: float, r) -> PropagatorWeights:
    """Exponential-integrator weights for step ``h`` at frequency magnitudes ``r``."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ValueError("frequency magnitude must be nonnegative")
    hh = np.full_like(r, h)
    k, dk = _k_and_dk(hh, r)

    mu2 = (0.5 - r) * (0.5 + r)
    band = (np.abs(r - 0.5) <= BRANCH_BAND) & (h * h * np.abs(mu2) <= SERIES_LIMIT)
    phi0 = np.empty_like(r)
    phi1 = np.empty_like(r)
    psi1 = np.empty_like(r)

    if band.any():
        phi0[band], phi1[band], psi1[band] = _band_weights(h, mu2[band])

    rest = ~band
    if rest.any():
        rr = r[rest]
        mu = np.sqrt(mu2[rest].astype(complex))
        lp = -rr * rr / (0.5 + mu)
        lm = -0.5 - mu
        zp, zm = lp * h, lm * h
        two_mu = 2.0 * mu
        gp, gm = _g(zp), _g(zm)
        phi0[rest] = (h * (_phi1(zp) - _phi1(zm)) / two_mu).real
        phi1[rest] = (h * (gp - gm) / two_mu).real
        psi1[rest] = ((zp * gp - zm * gm) / two_mu).real

    return PropagatorWeights(
        h=float(h),
        k=k,
        dk=dk,
        g0=k + dk,
        dg0=-r * r * k,
        phi0=phi0,
        phi1=phi1,
        psi0=k.copy(),
        psi1=psi1,
    )


@lru_cache(maxsize=32)
def lattice_weights(grid: Grid, h: float) -> PropagatorWeights:
    """Weights on every lattice mode, evaluated once per distinct |xi|."""
    r, inverse = grid.radial_table
    return weights(h, r).take(inverse)


def kernel_table(t_values, r_values) -> list[tuple[float, float, float, float, float]]:
    """Rows (t, r, k_hat, dk_hat, g0_hat) over the Cartesian product, t outermost."""
    rows = []
    for t in t_values:
        for r in r_values:
            k = k_hat(t, r)
            dk = dk_hat(t, r)
            rows.append((float(t), float(r), k, dk, k + dk))
    return rows


def decay_envelope(t, r):
    """2 (e^{-t/4} + e^{-r^2 t / 2}): an explicit bound on |K| for t >= 1."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    return 2.0 * (np.exp(-t / 4.0) + np.exp(-r * r * t / 2.0))


__all__ = [
    "BRANCH_BAND",
    "ModeRates",
    "PropagatorWeights",
    "Regime",
    "decay_envelope",
    "dg0_hat",
    "dk_hat",
    "eigen_form",
    "g0_hat",
    "k_hat",
    "kernel_table",
    "lattice_weights",
    "mode_rates",
    "weights",
]
