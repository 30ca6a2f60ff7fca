"""Riesz potential as a Fourier multiplier and the nonlinearity u -> I_gamma(|u|^p)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.special import gamma as gamma_fn

from .grid import Grid, SpectralField, fft_forward, fft_inverse, make_grid

log = logging.getLogger(__name__)


class RieszKind(Enum):
    EXACT_ZERO = "exact_zero"
    REGULARIZED = "regularized"


@dataclass(frozen=True)
class RieszMode:
    """How the singular multiplier |xi|^-gamma is discretized at xi = 0.

    EXACT_ZERO annihilates the zero mode; REGULARIZED uses
    (|xi|^2 + mu^2)^(-gamma/2) on every mode.
    """

    kind: RieszKind = RieszKind.EXACT_ZERO
    mu: float | None = None

    def __post_init__(self):
        if self.kind is RieszKind.REGULARIZED:
            if self.mu is None or not self.mu > 0:
                raise ValueError("REGULARIZED Riesz mode needs a softening frequency mu > 0")
        elif self.mu is not None:
            raise ValueError("EXACT_ZERO Riesz mode takes no softening frequency")

    @classmethod
    def exact_zero(cls) -> "RieszMode":
        return cls(RieszKind.EXACT_ZERO)

    @classmethod
    def regularized(cls, mu: float) -> "RieszMode":
        return cls(RieszKind.REGULARIZED, float(mu))

    @classmethod
    def default_regularized(cls, grid: Grid) -> "RieszMode":
        """Softening at half the lowest nonzero lattice frequency, pi/(2L)."""
        return cls.regularized(math.pi / (2.0 * grid.L))


EXACT_ZERO = RieszMode.exact_zero()


def riesz_constant(n: int, gamma: float) -> float:
    """Normalization of the physical-space kernel c |x|^-(n - gamma)."""
    if gamma == 0:
        raise ValueError("Riesz constant is undefined at gamma = 0 (I_0 is the identity)")
    if not 0 < gamma < n:
        raise ValueError(f"gamma must satisfy 0 < gamma < n = {n}, got {gamma}")
    return float(
        gamma_fn((n - gamma) / 2) / (2**gamma * math.pi ** (n / 2) * gamma_fn(gamma / 2))
    )


def _check_gamma(n, gamma):
    if not 0 <= gamma < n:
        raise ValueError(f"gamma must satisfy 0 <= gamma < n = {n}, got {gamma}")


@lru_cache(maxsize=32)
def riesz_multiplier(grid: Grid, gamma: float, mode: RieszMode = EXACT_ZERO) -> np.ndarray:
    """Lattice array of the Riesz symbol; all ones when gamma = 0."""
    _check_gamma(grid.n, gamma)
    xi = grid.xi_mag
    if gamma == 0:
        m = np.ones(grid.shape)
    elif mode.kind is RieszKind.EXACT_ZERO:
        m = np.zeros(grid.shape)
        nz = xi > 0
        m[nz] = xi[nz] ** (-gamma)
    else:
        m = (xi * xi + mode.mu**2) ** (-gamma / 2)
    m.setflags(write=False)
    return m


def riesz_apply(f: SpectralField, gamma: float, mode: RieszMode = EXACT_ZERO) -> SpectralField:
    _check_gamma(f.grid.n, gamma)
    if gamma == 0:
        return f
    return SpectralField(f.grid, f.coeffs * riesz_multiplier(f.grid, gamma, mode))


def power_abs(u: np.ndarray, p: float) -> np.ndarray:
    """|u|^p with 0 -> 0 for any real p > 0."""
    return np.abs(u) ** p


def _embed(coeffs: np.ndarray, M: int) -> np.ndarray:
    """Zero-pad FFT-ordered coefficients from N to M points per axis (Nyquist split)."""
    out = coeffs
    for axis in range(coeffs.ndim):
        N = out.shape[axis]
        h = N // 2
        shape = list(out.shape)
        shape[axis] = M
        big = np.zeros(shape, dtype=complex)
        src = np.moveaxis(out, axis, 0)
        dst = np.moveaxis(big, axis, 0)
        dst[:h] = src[:h]
        dst[M - h + 1 :] = src[h + 1 :]
        dst[h] = 0.5 * src[h]
        dst[M - h] = 0.5 * src[h]
        out = big
    return out


def _truncate(coeffs: np.ndarray, N: int) -> np.ndarray:
    """Inverse of _embed: keep |k| < N/2 and fold the two Nyquist halves together."""
    out = coeffs
    for axis in range(coeffs.ndim):
        M = out.shape[axis]
        h = N // 2
        src = np.moveaxis(out, axis, 0)
        shape = list(out.shape)
        shape[axis] = N
        small = np.empty(shape, dtype=complex)
        dst = np.moveaxis(small, axis, 0)
        dst[:h] = src[:h]
        dst[h + 1 :] = src[M - h + 1 :]
        dst[h] = src[h] + src[M - h]
        out = small
    return out


@dataclass(frozen=True)
class NonlinearResult:
    """Outcome of one nonlinearity evaluation.

    ``field`` is None when the physical field was not finite (blow-up signal).
    """

    field: SpectralField | None
    finite: bool
    input_imag: float
    u_physical: np.ndarray | None = None


def nonlinear_array(
    grid: Grid,
    u_hat: np.ndarray,
    p: float,
    multiplier: np.ndarray,
    oversample: bool = False,
):
    """Array kernel of :func:`nonlinearity`.

    Returns (N_hat or None, u_physical complex).
    """
    u_c = fft_inverse(grid, u_hat)
    u = u_c.real
    if not np.all(np.isfinite(u)):
        return None, u_c
    # overflow past blow-up is expected; it is caught by the finiteness check
    with np.errstate(over="ignore", invalid="ignore"):
        if oversample:
            fine = make_grid(grid.n, 2 * grid.N, grid.L)
            uf = fft_inverse(fine, _embed(u_hat, fine.N)).real
            w_hat = _truncate(fft_forward(fine, power_abs(uf, p)), grid.N)
        else:
            w_hat = fft_forward(grid, power_abs(u, p))
    if not np.all(np.isfinite(w_hat)):
        return None, u_c
    return w_hat * multiplier, u_c


def nonlinearity(
    u: SpectralField,
    p: float,
    gamma: float,
    mode: RieszMode = EXACT_ZERO,
    oversample: bool = False,
) -> NonlinearResult:
    """I_gamma(|u|^p) for a real field ``u``.

    The physical field is taken as the real part of the inverse transform, so
    the output is the transform of a real function and conjugate-symmetric by
    construction. The discarded imaginary part is reported as ``input_imag``.
    """
    if not p > 0:
        raise ValueError(f"power p must be positive, got {p}")
    m = riesz_multiplier(u.grid, gamma, mode)
    n_hat, u_c = nonlinear_array(u.grid, u.coeffs, p, m, oversample)
    imag = float(np.max(np.abs(u_c.imag), initial=0.0))
    if imag > 0:
        log.debug("nonlinearity input imaginary part %.3e discarded", imag)
    if n_hat is None:
        return NonlinearResult(None, False, imag, u_c.real)
    return NonlinearResult(SpectralField(u.grid, n_hat), True, imag, u_c.real)
