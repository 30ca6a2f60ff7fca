"""
Periodic lattice, spectral transforms and norms.

The whole space R^n is replaced by the box [-L, L)^n sampled with N points
per axis. Spectral coefficients are stored in FFT ordering and are samples
of the continuum unitary Fourier transform

    f_hat(xi) = (2 pi)^(-n/2) * integral f(x) exp(-i x.xi) dx

approximated by the Riemann sum over the lattice, so that

    coeffs[k] = dx^n (2 pi)^(-n/2) * sum_j f(x_j) exp(-i xi_k . x_j).

With this convention every discrete norm is a Riemann sum over the frequency
lattice with cell volume (pi/L)^n, and converges to its R^n counterpart as
L, N grow. ``CONVERSION`` below is the only place the constant lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import InfiniteNormError

# single-threaded FFTs keep runs bit-reproducible; parallelism lives at the run level
_FFT_WORKERS = 1

MAX_TOTAL_POINTS = 2**28


@dataclass(frozen=True)
class Grid:
    """Truncated periodic lattice on [-L, L)^n and its frequency lattice.

    Frequencies are xi_k = (pi/L) * k with integer k in [-N/2, N/2) per axis.
    """

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2, 3, 4):
            raise ValueError(f"dimension n must be in 1..4, got {self.n}")
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 4, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"half-width L must be positive, got {self.L}")
        if self.N**self.n > MAX_TOTAL_POINTS:
            raise ValueError(
                f"grid of {self.N}^{self.n} points exceeds the 2^28 memory gate"
            )

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dk(self) -> float:
        """Frequency spacing pi/L."""
        return math.pi / self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    @cached_property
    def x1d(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @cached_property
    def k1d(self) -> np.ndarray:
        """Integer frequency indices in FFT ordering."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)

    @cached_property
    def xi1d(self) -> np.ndarray:
        return self.dk * self.k1d

    def coords(self) -> list[np.ndarray]:
        """Physical coordinate arrays, one per axis, broadcast to the grid shape."""
        return np.meshgrid(*([self.x1d] * self.n), indexing="ij", sparse=True)

    @cached_property
    def radius(self) -> np.ndarray:
        """|x| on the physical lattice."""
        r2 = sum(c * c for c in self.coords())
        return np.sqrt(np.broadcast_to(r2, self.shape))

    @cached_property
    def k_sq(self) -> np.ndarray:
        """Integer |k|^2 on the frequency lattice (exact, used for radial tables)."""
        ks = np.meshgrid(*([self.k1d] * self.n), indexing="ij", sparse=True)
        return np.broadcast_to(sum(k * k for k in ks), self.shape)

    @cached_property
    def xi_mag(self) -> np.ndarray:
        return self.dk * np.sqrt(self.k_sq.astype(float))

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(-i xi_k (-L)) = (-1)^k per axis, from the box starting at -L
        s = np.where(self.k1d % 2 == 0, 1.0, -1.0)
        out = s
        for _ in range(self.n - 1):
            out = np.multiply.outer(out, s)
        return out

    @cached_property
    def radial_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique |xi| values and the inverse index mapping them back onto the lattice."""
        uniq, inv = np.unique(self.k_sq, return_inverse=True)
        return self.dk * np.sqrt(uniq.astype(float)), inv.reshape(self.shape)

    @property
    def forward_scale(self) -> float:
        """CONVERSION: coeffs = forward_scale * phase * fftn(samples)."""
        return self.dx**self.n * (2.0 * math.pi) ** (-self.n / 2)

    @property
    def cell_volume(self) -> float:
        return self.dk**self.n


def make_grid(n: int, N: int, L: float) -> Grid:
    return Grid(n=int(n), N=int(N), L=float(L))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a field on ``grid``, FFT ordering."""

    grid: Grid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {c.shape} does not match grid {self.grid.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __mul__(self, c):
        return SpectralField(self.grid, self.coeffs * c)

    __rmul__ = __mul__

    def __add__(self, other: "SpectralField"):
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField"):
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    @property
    def zero_mode(self) -> complex:
        return complex(self.coeffs[(0,) * self.grid.n])

    def to_physical(self) -> np.ndarray:
        return inverse_transform(self)


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def fft_forward(grid: Grid, samples: np.ndarray) -> np.ndarray:
    """Array-level forward transform (no validation, no wrapping)."""
    return grid.forward_scale * grid._phase * scipy.fft.fftn(samples, workers=_FFT_WORKERS)


def fft_inverse(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Array-level inverse transform; returns a complex array."""
    return scipy.fft.ifftn(grid._phase * coeffs, workers=_FFT_WORKERS) / grid.forward_scale


def forward_transform(grid: Grid, samples) -> SpectralField:
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise ValueError(f"sample shape {samples.shape} does not match grid {grid.shape}")
    return SpectralField(grid, fft_forward(grid, samples))


def inverse_transform(f: SpectralField, real: bool = True) -> np.ndarray:
    """Physical samples of ``f``. With ``real`` the (roundoff) imaginary part is dropped."""
    out = fft_inverse(f.grid, f.coeffs)
    return out.real.copy() if real else out


def reflect(coeffs: np.ndarray) -> np.ndarray:
    """coeffs evaluated at -k (indices taken modulo N)."""
    axes = tuple(range(coeffs.ndim))
    return np.roll(np.flip(coeffs, axis=axes), 1, axis=axes)


def conjugate_asymmetry(coeffs: np.ndarray) -> float:
    """max |c(-k) - conj(c(k))|; zero for the transform of a real field."""
    return float(np.max(np.abs(reflect(coeffs) - np.conj(coeffs)), initial=0.0))


def symmetrize(coeffs: np.ndarray) -> np.ndarray:
    return 0.5 * (coeffs + np.conj(reflect(coeffs)))


def l2_norm(f: SpectralField) -> float:
    return math.sqrt(f.grid.cell_volume * float(np.sum(np.abs(f.coeffs) ** 2)))


def _power_weight(xi: np.ndarray, a: float) -> np.ndarray:
    """|xi|^a with the zero mode weighted 0 (callers handle a < 0)."""
    w = np.zeros_like(xi)
    nz = xi > 0
    w[nz] = xi[nz] ** a
    return w


def sobolev_norm(f: SpectralField, s: float, homogeneous: bool = True) -> float:
    """Homogeneous (|xi|^s) or inhomogeneous (<xi>^s) weighted L2 norm.

    Raises InfiniteNormError for a homogeneous norm of negative order when the
    zero mode is nonzero.
    """
    if s == 0:
        return l2_norm(f)
    xi = f.grid.xi_mag
    if homogeneous:
        if s < 0 and f.zero_mode != 0:
            raise InfiniteNormError(
                f"homogeneous H^{s} norm is infinite: zero mode is {f.zero_mode}"
            )
        w = _power_weight(xi, s)
    else:
        w = (1.0 + xi * xi) ** (s / 2)
    return math.sqrt(f.grid.cell_volume * float(np.sum((w * np.abs(f.coeffs)) ** 2)))


def pseudo_measure_norm(f: SpectralField, q: float) -> float:
    """sup over the lattice of |xi|^q |f_hat(xi)|; zero mode counts only when q = 0."""
    if q < 0:
        raise ValueError(f"pseudo-measure index q must be >= 0, got {q}")
    a = np.abs(f.coeffs)
    if q == 0:
        return float(a.max())
    return float(np.max(_power_weight(f.grid.xi_mag, q) * a))


@dataclass(frozen=True)
class ProblemParams:
    """Exponents and data size of the Cauchy problem."""

    n: int
    p: float
    gamma: float = 0.0
    q: float = 0.0
    epsilon: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        problems = []
        if self.n not in (1, 2, 3, 4):
            problems.append(f"n must be in 1..4, got {self.n}")
        if not self.p > 1:
            problems.append(f"p must exceed 1, got {self.p}")
        if not 0 <= self.gamma < self.n:
            problems.append(f"gamma must satisfy 0 <= gamma < n, got {self.gamma}")
        if not 0 < self.q < self.n / 2:
            problems.append(f"q must satisfy 0 < q < n/2, got {self.q}")
        if not self.epsilon > 0:
            problems.append(f"epsilon must be positive, got {self.epsilon}")
        if problems:
            raise ValueError("; ".join(problems))
