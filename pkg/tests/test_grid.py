import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpdw.errors import InfiniteNormError
from rpdw.grid import (
    ProblemParams,
    SpectralField,
    conjugate_asymmetry,
    forward_transform,
    inverse_transform,
    l2_norm,
    make_grid,
    pseudo_measure_norm,
    sobolev_norm,
    symmetrize,
)


def unit_mode(grid, k):
    c = np.zeros(grid.shape, dtype=complex)
    c[k] = 1.0
    return SpectralField(grid, c)


class TestMakeGrid:
    def test_one_dimensional_lattice(self):
        g = make_grid(1, 8, math.pi)
        assert g.dx == pytest.approx(math.pi / 4)
        assert sorted(g.xi1d) == pytest.approx(list(range(-4, 4)))

    def test_two_dimensional_counts(self):
        g = make_grid(2, 4, 1.0)
        assert g.size == 16
        assert g.dk == pytest.approx(math.pi)

    def test_large_grid_spacing(self):
        g = make_grid(1, 4096, 512.0)
        assert g.dx == 0.25
        assert np.max(np.abs(g.xi1d)) == pytest.approx(4 * math.pi)

    def test_dx_times_n_is_box_length(self):
        g = make_grid(3, 16, 2.5)
        assert g.dx * g.N == 2 * g.L

    def test_frequency_magnitude_symmetric(self):
        g = make_grid(2, 8, 3.0)
        flipped = np.roll(np.flip(g.xi_mag), 1, axis=(0, 1))
        assert np.array_equal(flipped, g.xi_mag)

    @pytest.mark.parametrize("args", [(1, 7, 1.0), (0, 8, 1.0), (5, 8, 1.0), (1, 8, 0.0), (1, 8, -2.0), (1, 2, 1.0)])
    def test_rejects_bad_arguments(self, args):
        with pytest.raises(ValueError):
            make_grid(*args)

    def test_memory_gate(self):
        with pytest.raises(ValueError, match="memory"):
            make_grid(4, 256, 1.0)


class TestTransforms:
    def test_constant_has_only_zero_mode(self):
        g = make_grid(2, 8, 2.0)
        f = forward_transform(g, np.ones(g.shape))
        c = np.abs(f.coeffs)
        assert c[0, 0] > 0
        c[0, 0] = 0
        assert c.max() < 1e-13

    def test_zero_mode_normalization(self):
        # coefficient at xi = 0 equals the integral of f divided by (2 pi)^{n/2}
        g = make_grid(1, 64, 3.0)
        f = forward_transform(g, np.full(g.shape, 2.0))
        assert f.zero_mode.real == pytest.approx(2.0 * 2 * g.L / math.sqrt(2 * math.pi))

    def test_cosine_two_modes(self):
        g = make_grid(1, 32, 4.0)
        x = g.x1d
        f = forward_transform(g, np.cos(math.pi * x / g.L))
        c = np.abs(f.coeffs)
        big = np.flatnonzero(c > 1e-10)
        assert sorted(g.k1d[big]) == [-1, 1]
        assert c[big[0]] == pytest.approx(c[big[1]], rel=1e-14)

    def test_round_trip(self):
        g = make_grid(2, 32, 5.0)
        rng = np.random.default_rng(1)
        u = rng.standard_normal(g.shape)
        back = inverse_transform(forward_transform(g, u))
        assert np.max(np.abs(back - u)) <= 1e-12 * np.max(np.abs(u))

    def test_shape_mismatch(self):
        g = make_grid(1, 16, 1.0)
        with pytest.raises(ValueError, match="shape"):
            forward_transform(g, np.zeros(8))

    def test_real_input_is_conjugate_symmetric(self):
        g = make_grid(3, 8, 2.0)
        u = np.random.default_rng(2).standard_normal(g.shape)
        f = forward_transform(g, u)
        assert conjugate_asymmetry(f.coeffs) <= 1e-12 * np.abs(f.coeffs).max()
        assert conjugate_asymmetry(symmetrize(f.coeffs * (1 + 1e-3j))) < 1e-15

    def test_coefficients_are_read_only(self):
        g = make_grid(1, 8, 1.0)
        f = forward_transform(g, np.ones(8))
        with pytest.raises(ValueError):
            f.coeffs[0] = 3.0


class TestNorms:
    def test_zero_field(self):
        g = make_grid(1, 16, 1.0)
        assert l2_norm(SpectralField(g, np.zeros(16, dtype=complex))) == 0.0

    def test_single_mode_unit_cell(self):
        g = make_grid(1, 16, math.pi)
        assert l2_norm(unit_mode(g, 3)) == pytest.approx(1.0)

    def test_gaussian_matches_continuum(self):
        g = make_grid(1, 4096, 40.0)
        f = forward_transform(g, np.exp(-g.x1d**2 / 2))
        assert l2_norm(f) == pytest.approx(math.pi**0.25, rel=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 2**31 - 1))
    def test_discrete_parseval(self, n, seed):
        g = make_grid(n, 8 if n == 3 else 16, 1.7)
        u = np.random.default_rng(seed).standard_normal(g.shape)
        phys = math.sqrt(np.sum(u**2) * g.dx**n)
        assert l2_norm(forward_transform(g, u)) == pytest.approx(phys, rel=1e-10)

    def test_sobolev_zero_order_is_l2_exactly(self):
        g = make_grid(2, 16, 3.0)
        f = forward_transform(g, np.random.default_rng(3).standard_normal(g.shape))
        assert sobolev_norm(f, 0.0) == l2_norm(f)
        assert sobolev_norm(f, 0.0, homogeneous=False) == l2_norm(f)

    def test_sobolev_single_mode(self):
        g = make_grid(1, 16, math.pi)
        assert sobolev_norm(unit_mode(g, 2), 1.0) == pytest.approx(2.0)

    def test_negative_order_with_mean_is_infinite(self):
        g = make_grid(1, 16, math.pi)
        with pytest.raises(InfiniteNormError):
            sobolev_norm(unit_mode(g, 0), -1.0)

    def test_positive_order_ignores_zero_mode(self):
        g = make_grid(1, 16, math.pi)
        assert sobolev_norm(unit_mode(g, 0), 1.0) == 0.0

    def test_inhomogeneous_weight(self):
        g = make_grid(1, 16, math.pi)
        assert sobolev_norm(unit_mode(g, 2), 1.0, homogeneous=False) == pytest.approx(math.sqrt(5))


class TestPseudoMeasure:
    def test_indicator_profile(self):
        g = make_grid(1, 64, math.pi)
        c = (g.xi_mag <= 1.0).astype(complex)
        assert pseudo_measure_norm(SpectralField(g, c), 0.5) == pytest.approx(1.0)

    def test_exact_power_cancels(self):
        g = make_grid(2, 32, 5.0)
        xi = g.xi_mag
        band = (xi >= 1.0) & (xi <= 3.0)
        c = np.zeros(g.shape, dtype=complex)
        c[band] = xi[band] ** -0.7
        assert pseudo_measure_norm(SpectralField(g, c), 0.7) == pytest.approx(1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-50, 50, allow_nan=False), st.floats(0, 1.5))
    def test_homogeneity(self, c, q):
        g = make_grid(1, 32, 2.0)
        f = forward_transform(g, np.exp(-g.x1d**2))
        assert pseudo_measure_norm(f * c, q) == pytest.approx(abs(c) * pseudo_measure_norm(f, q), rel=1e-13, abs=1e-300)

    def test_zero_mode_only_counts_at_q_zero(self):
        g = make_grid(1, 16, math.pi)
        f = unit_mode(g, 0)
        assert pseudo_measure_norm(f, 0.0) == 1.0
        assert pseudo_measure_norm(f, 0.3) == 0.0

    def test_negative_index_rejected(self):
        g = make_grid(1, 16, 1.0)
        with pytest.raises(ValueError):
            pseudo_measure_norm(unit_mode(g, 0), -0.1)


class TestProblemParams:
    def test_valid(self):
        p = ProblemParams(n=2, p=3.0, gamma=0.25, q=0.5, epsilon=0.1)
        assert p.s == 0.0

    @pytest.mark.parametrize(
        "kw",
        [
            dict(n=1, p=1.0, q=0.2),
            dict(n=1, p=2.0, gamma=1.0, q=0.2),
            dict(n=1, p=2.0, q=0.5),
            dict(n=1, p=2.0, q=0.2, epsilon=0.0),
            dict(n=5, p=2.0, q=0.2),
        ],
    )
    def test_rejects_hypothesis_violations(self, kw):
        with pytest.raises(ValueError):
            ProblemParams(**kw)

    def test_reports_every_violation(self):
        with pytest.raises(ValueError) as exc:
            ProblemParams(n=1, p=0.5, q=0.9, epsilon=-1)
        assert str(exc.value).count(";") == 2
