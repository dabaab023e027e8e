import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from genstab import FamilyParams, GridSpec, cdf_grid, cgf, chf, cumulant, tilt
from genstab.chf import chf_geometric
from genstab.errors import EfficiencyError, InvalidMemberError, RegimeError
from genstab.family import geometric
from genstab.inversion import geometric_series_cdf, oracle_cdf, pdf_fft
from genstab.sampler import (
    SampleBatch,
    empirical_chf,
    inverse_cdf_table,
    ks_statistic,
    sample,
    sample_geometric,
    sample_geometric_compound,
    sample_positive_stable,
    sample_tilted_stable,
)

CP = FamilyParams(-1, -1, 1)
IG = FamilyParams(0.5, 2, 1)
NORMAL = FamilyParams(2, -1, 1)
EXTREME = FamilyParams(1.5, -1, -1)
N = 100_000
KS_1PCT = 1.63  # Kolmogorov critical value at the 1% level, times sqrt(n)


def assert_moments(values, params, k=3.0):
    n = values.size
    k1, k2 = cumulant(params, 1), cumulant(params, 2)
    k4 = cumulant(params, 4)
    assert abs(values.mean() - k1) <= k * math.sqrt(k2 / n)
    se_var = math.sqrt((k4 + 2 * k2**2) / n)
    assert abs(values.var(ddof=1) - k2) <= k * se_var


def ks_against(batch, member, atoms=None):
    return ks_statistic(batch, lambda v: cdf_grid(member, v), atoms)


class TestDispatch:
    def test_constant(self):
        b = sample(FamilyParams(1, 3, 2), 5, seed=0)
        np.testing.assert_array_equal(b.values, [6, 6, 6, 6, 6])
        assert b.method == "constant"

    def test_methods(self):
        assert sample(CP, 10).method == "compound-poisson-gamma"
        assert sample(IG, 10).method == "tilted-stable-rejection"
        assert sample(FamilyParams(0.5, 20, 1), 10).method == "inverse-cdf-table"
        assert sample(NORMAL, 10).method == "gaussian"

    def test_invalid(self):
        with pytest.raises(InvalidMemberError):
            sample(FamilyParams(1.5, 1, -1), 10)

    def test_frozen_streams(self):
        np.testing.assert_array_equal(
            sample(CP, 6, seed=42).values,
            [0.09157726739019154, 0.7099463765997177, 2.58596603848254, 0.22357637221232038, 5.202712928333405, 0.0],
        )
        np.testing.assert_array_equal(
            sample(IG, 4, seed=42).values, [0.8200732416093249, 0.4770720542310466, 0.624535496159012, 0.7947665779549722]
        )
        np.testing.assert_array_equal(
            sample(NORMAL, 3, seed=42).values, [-1.5690649731245592, -3.4707596276977704, -0.9387017409914009]
        )


class TestReproducibility:
    @pytest.mark.parametrize("member", [CP, IG, NORMAL, FamilyParams(0.5, 20, 1)])
    def test_workers_do_not_change_output(self, member):
        one = sample(member, 140_000, seed=3).values
        four = sample(member, 140_000, seed=3, workers=4).values
        assert one.tobytes() == four.tobytes()

    def test_seed_changes_output(self):
        assert not np.array_equal(sample(CP, 100, seed=1).values, sample(CP, 100, seed=2).values)


class TestMoments:
    def test_case_a_mean(self):
        v = sample(CP, N, seed=1).values
        assert abs(v.mean() - 1.0) <= 3 * math.sqrt(2.0 / N)
        assert abs(np.mean(v == 0) - math.exp(-1)) <= 3 * math.sqrt(math.exp(-1) * (1 - math.exp(-1)) / N)

    def test_gaussian_variance(self):
        v = sample(NORMAL, N, seed=1).values
        assert abs(v.var(ddof=1) - 2.0) <= 3 * math.sqrt(2 * 4.0 / N)

    @pytest.mark.parametrize(
        "params",
        [(-1, -1, 1), (-2.5, -3, -0.5), (0.5, 2, 1), (0.3, 1, -2), (0.7, 25, 0.5), (1.5, -1, -1), (1.3, -2, 0.7), (2, -1, 1)],
    )
    def test_every_regime(self, params):
        p = FamilyParams(*params)
        assert_moments(sample(p, N, seed=11).values, p)


class TestPositiveStable:
    def test_laplace_transform(self):
        s = sample_positive_stable(0.7, N, seed=2).values
        w = np.exp(-s)
        assert abs(w.mean() - math.exp(-1)) <= 3 * w.std() / math.sqrt(N)

    def test_half_is_levy(self):
        b = sample_positive_stable(0.5, 20_000, seed=2)
        assert ks_statistic(b, lambda v: oracle_cdf("levy", v, scale=0.5)) < KS_1PCT / math.sqrt(20_000)
        median = 0.5 / (2 * special.erfcinv(0.5) ** 2)
        np.testing.assert_allclose(np.median(b.values), median, rtol=0.05)

    def test_index_range(self):
        with pytest.raises(Exception):
            sample_positive_stable(1.0, 10, 0)


class TestTiltedStable:
    @pytest.mark.parametrize("a", [0.5, 2.0, 5.0])
    def test_acceptance_rate(self, a):
        b = sample_tilted_stable(FamilyParams(0.5, a, 1), 10_000, seed=4)
        n = b.diagnostics["proposals"]
        p = math.exp(-a)
        assert abs(b.diagnostics["acceptance_rate"] - p) <= 3 * math.sqrt(p * (1 - p) / n)

    def test_mean(self):
        v = sample_tilted_stable(IG, N, seed=4).values
        assert abs(v.mean() - 1.0) <= 3 * math.sqrt(0.5 / N)

    def test_ks_against_inversion(self):
        b = sample_tilted_stable(IG, 10_000, seed=4)
        assert ks_against(b, IG) < KS_1PCT / math.sqrt(10_000)

    def test_negative_c_mirrors(self):
        b = sample(FamilyParams(0.5, 2, -1), 1000, seed=4)
        assert np.all(b.values < 0)

    def test_efficiency_guard(self):
        with pytest.raises(EfficiencyError):
            sample_tilted_stable(FamilyParams(0.5, 14, 1), 10, 0)

    def test_regime_guard(self):
        with pytest.raises(RegimeError):
            sample_tilted_stable(NORMAL, 10, 0)

    def test_large_a_uses_table(self):
        p = FamilyParams(0.5, 20, 1)
        b = sample(p, 20_000, seed=4)
        assert ks_against(b, p) < KS_1PCT / math.sqrt(20_000)


class TestExtremeStable:
    def test_table_accuracy(self):
        t = inverse_cdf_table(EXTREME)
        assert t.knots_x.size > 2000
        assert t.max_error < 1e-8

    def test_ks_against_inversion(self):
        b = sample(EXTREME, 20_000, seed=6)
        assert b.method == "inverse-cdf-table"
        assert ks_against(b, EXTREME) < KS_1PCT / math.sqrt(20_000)


class TestTiltingConsistency:
    def test_sampled_tilt_matches_reweighted_base(self):
        theta = 0.3
        tilted = tilt(IG, theta).member
        y, f = pdf_fft(IG)
        keep = y >= 0
        y, f = y[keep], f[keep]
        F = integrate.cumulative_trapezoid(f * np.exp(theta * y - cgf(IG, theta)), y, initial=0.0)
        b = sample(tilted, 10_000, seed=8)
        assert ks_statistic(b, lambda v: np.interp(v, y, F)) < KS_1PCT / math.sqrt(10_000)


class TestGeometric:
    def test_zero_fraction(self):
        v = sample_geometric(geometric(CP), N, seed=1).values
        assert abs(np.mean(v == 0) - 0.5) <= 3 * math.sqrt(0.25 / N)

    def test_series_oracle(self):
        gv = geometric(CP)
        b = sample_geometric(gv, N, seed=1)
        cdf = np.vectorize(lambda v: geometric_series_cdf(gv, v) if v >= 0 else 0.0)
        assert ks_statistic(b, cdf, atoms={0.0: 0.5}) < KS_1PCT / math.sqrt(N)

    def test_constructions_agree(self):
        gv = geometric(FamilyParams(-1.5, -2, 0.7))
        a = sample_geometric(gv, N, seed=2).values
        b = sample_geometric_compound(gv, N, seed=3).values
        assert stats.ks_2samp(a, b).pvalue > 0.01

    @pytest.mark.parametrize("params", [(0.5, 2, 1), (2, -1, 1), (-1, -1, 1), (0.5, 20, 1)])
    def test_empirical_chf(self, params):
        gv = geometric(FamilyParams(*params))
        b = sample_geometric(gv, N, seed=9)
        grid = GridSpec(-3, 3, 64)
        err = np.max(np.abs(empirical_chf(b, grid) - chf_geometric(gv, grid.points())))
        assert err < 5 / math.sqrt(N)

    def test_case_f_not_sampled(self):
        with pytest.raises(InvalidMemberError):
            sample_geometric(geometric(FamilyParams(3, 2, 1)), 10)

    def test_compound_needs_case_a(self):
        with pytest.raises(RegimeError):
            sample_geometric_compound(geometric(IG), 10)

    @pytest.mark.slow
    def test_case_d_table(self):
        gv = geometric(EXTREME)
        b = sample_geometric(gv, 20_000, seed=9)
        grid = GridSpec(-3, 3, 64)
        err = np.max(np.abs(empirical_chf(b, grid) - chf_geometric(gv, grid.points())))
        assert err < 5 / math.sqrt(20_000)


class TestEmpiricalChf:
    def test_origin(self):
        b = sample(IG, 500, seed=1)
        assert empirical_chf(b, [0.0])[0] == 1.0

    def test_constant(self):
        b = sample(FamilyParams(1, 3, 2), 200)
        t = np.linspace(-4, 4, 9)
        np.testing.assert_allclose(empirical_chf(b, t), np.exp(6j * t), atol=1e-14)

    def test_normal(self):
        b = sample(NORMAL, N, seed=1)
        grid = GridSpec(-3, 3, 64)
        assert np.max(np.abs(empirical_chf(b, grid) - chf(NORMAL, grid.points()))) < 5 / math.sqrt(N)


class TestKsStatistic:
    def test_same_law(self):
        assert ks_against(sample(NORMAL, N, seed=12), NORMAL) < 0.01

    def test_shifted_law(self):
        shifted = FamilyParams(2, -1, 1)
        b = sample(shifted, 10_000, seed=12)
        b.values = b.values + math.sqrt(2)
        assert ks_against(b, NORMAL) > 0.1

    def test_degenerate(self):
        b = SampleBatch(np.array([6.0]), None, 0, "constant")
        assert ks_statistic(b, lambda v: (np.asarray(v) >= 6).astype(float), atoms={6.0: 1.0}) == 0.0

    def test_atom_aware(self):
        b = sample(CP, N, seed=13)
        atom = math.exp(-1)
        assert ks_against(b, CP, atoms={0.0: atom}) < 0.01
