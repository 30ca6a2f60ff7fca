"""Initial data families on a grid."""

from __future__ import annotations

import numpy as np

from .grid import Grid, SpectralField, forward_transform, l2_norm


def smooth_cutoff(r: np.ndarray, r_start: float, r_end: float) -> np.ndarray:
    """1 for r <= r_start, 0 for r >= r_end, C^1 smoothstep in between."""
    if not 0 < r_start < r_end:
        raise ValueError("need 0 < r_start < r_end")
    s = np.clip((r - r_start) / (r_end - r_start), 0.0, 1.0)
    return 1.0 - s * s * (3.0 - 2.0 * s)


def japanese_bracket_data(grid: Grid, q: float, cutoff: float = 0.8, l2: float | None = 1.0) -> SpectralField:
    """C <x>^{-n+q}, cut off smoothly to vanish at |x| = cutoff * L.

    The tail of this profile is what makes its transform behave like |xi|^-q
    at low frequency, so the cutoff is pushed as far out as the box allows; the
    transition occupies [cutoff - 0.1, cutoff] * L. C normalizes the L2 norm to
    ``l2`` (None keeps C = 1).
    """
    if not 0.1 < cutoff <= 1.0:
        raise ValueError("cutoff must lie in (0.1, 1]")
    r = grid.radius
    f = (1.0 + r * r) ** ((-grid.n + q) / 2) * smooth_cutoff(r, (cutoff - 0.1) * grid.L, cutoff * grid.L)
    field = forward_transform(grid, f)
    if l2 is not None:
        field = field * (l2 / l2_norm(field))
    return field


def gaussian_data(grid: Grid, width: float = 1.0, amplitude: float = 1.0) -> SpectralField:
    """amplitude * exp(-|x|^2 / (2 width^2))."""
    r = grid.radius
    return forward_transform(grid, amplitude * np.exp(-0.5 * (r / width) ** 2))


def zero_data(grid: Grid) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.shape, dtype=complex))


DATA_KINDS = ("bracket", "gaussian", "zero")


def make_data(grid: Grid, kind: str, q: float = 0.0, **kw) -> SpectralField:
    """Dispatch by name: 'bracket', 'gaussian' or 'zero'."""
    if kind == "bracket":
        return japanese_bracket_data(grid, q, **kw)
    if kind == "gaussian":
        return gaussian_data(grid, **kw)
    if kind == "zero":
        return zero_data(grid)
    raise ValueError(f"unknown data kind {kind!r}; expected one of {DATA_KINDS}")
