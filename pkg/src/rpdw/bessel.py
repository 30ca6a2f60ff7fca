"""
Bessel functions J_nu and J~_nu(z) = z^-nu J_nu(z) for the radial Fourier transform.

Power series below SWITCH_Z, Hankel's large-argument expansion above it. The
expansion is summed until its terms stop decreasing, which at z > 12 leaves an
error near 1e-11 or better; for half-integer orders it terminates and is exact.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma as gamma_fn

SWITCH_Z = 12.0
_SERIES_TERMS = 45
_ASYMPTOTIC_TERMS = 40


def _series_jtilde(nu: float, z: np.ndarray) -> np.ndarray:
    # 2^-nu sum_k (-1)^k (z/2)^{2k} / (k! Gamma(k + nu + 1))
    x = -(0.5 * z) ** 2
    term = np.full_like(z, 1.0 / gamma_fn(nu + 1.0))
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * x / (k * (k + nu))
        total = total + term
    return total * 2.0**-nu


def _asymptotic_j(nu: float, z: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    omega = z - (0.5 * nu + 0.25) * math.pi
    P = np.ones_like(z)
    Q = np.zeros_like(z)
    a = np.ones_like(z)  # a_k(nu) / z^k with running sign handled below
    prev = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, _ASYMPTOTIC_TERMS):
        a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        mag = np.abs(a)
        # stop each point once terms start growing (optimal truncation)
        active &= mag < prev
        prev = np.where(active, mag, prev)
        contrib = np.where(active, a, 0.0)
        if k % 2 == 1:
            Q = Q + (1 if (k // 2) % 2 == 0 else -1) * contrib
        else:
            P = P + (1 if (k // 2) % 2 == 0 else -1) * contrib
        if not active.any() or float(np.max(np.where(active, mag, 0.0))) < 1e-18:
            break
    return np.sqrt(2.0 / (math.pi * z)) * (P * np.cos(omega) - Q * np.sin(omega))


def bessel_j(nu: float, z) -> np.ndarray:
    """J_nu(z) for real z >= 0 (nu > -1)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z <= SWITCH_Z
    if small.any():
        zs = z[small]
        with np.errstate(divide="ignore"):
            # J_nu(0) is +inf for -1 < nu < 0; the product would be inf * finite
            scale = np.where(zs > 0, zs**nu, np.inf if nu < 0 else float(nu == 0))
        out[small] = _series_jtilde(nu, zs) * scale
    if (~small).any():
        out[~small] = _asymptotic_j(nu, z[~small])
    return out


def bessel_jtilde(nu: float, z) -> np.ndarray:
    """z^-nu J_nu(z); entire in z, finite at z = 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z <= SWITCH_Z
    if small.any():
        out[small] = _series_jtilde(nu, z[small])
    if (~small).any():
        zl = z[~small]
        out[~small] = _asymptotic_j(nu, zl) * zl**-nu
    return out


def bessel_zeros(nu: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros of J_nu.

    Exact for nu = -1/2, 1/2; McMahon's expansion polished by Newton otherwise.
    """
    m = np.arange(1, count + 1, dtype=float)
    if nu == -0.5:
        return (m - 0.5) * math.pi
    if nu == 0.5:
        return m * math.pi
    mu = 4.0 * nu * nu
    b = (m + 0.5 * nu - 0.25) * math.pi
    z = b - (mu - 1) / (8 * b) - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * b) ** 3)
    for _ in range(8):
        j = bessel_j(nu, z)
        # J_nu' = (nu/z) J_nu - J_{nu+1}
        dj = (nu / z) * j - bessel_j(nu + 1.0, z)
        z = z - j / dj
    return z
