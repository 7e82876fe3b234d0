import math

import numpy as np
import pytest

from bsdpi import (
    BadBeta,
    Diverging,
    SingularState,
    SupportMismatch,
    bs_entropy,
    bs_entropy_quadrature,
    family_from_tag,
    maximal_f,
    neg_log,
    neg_power,
    random_density,
    regularized_divergence,
    relative_entropy,
    renyi2_trace,
    square_family,
    standard_f,
    xlogx,
)
from bsdpi.campaigns import sample_pair

# classical value for sigma=diag(1/2,1/2), rho=diag(1/4,3/4) under x log x
KL_CANONICAL = 0.5 * math.log(0.5 / 0.25) + 0.5 * math.log(0.5 / 0.75)

SIGMA_C = np.diag([0.5, 0.5]).astype(complex)
RHO_C = np.diag([0.25, 0.75]).astype(complex)


def classical_f(sig_diag, rho_diag, f):
    return float(sum(m * f(l / m) for l, m in zip(sig_diag, rho_diag)))


class TestFamilies:
    @pytest.mark.parametrize(
        "fam", [xlogx(), neg_log(), neg_power(0.25), neg_power(0.5), neg_power(0.75), square_family()]
    )
    def test_transpose_identity(self, fam):
        xs = np.array([0.2, 0.5, 1.0, 1.7, 3.2, 10.0])
        lhs = fam.f_transpose(xs)
        rhs = xs * fam.f(1.0 / xs)
        assert np.abs(lhs - rhs).max() <= 1e-12

    def test_measure_constants(self):
        fam = neg_power(0.5)
        assert fam.measure_c == pytest.approx(math.pi, abs=1e-12)
        assert fam.measure_alpha == pytest.approx(0.25, abs=1e-15)
        assert xlogx().measure_c == 1.0
        assert xlogx().measure_alpha == 0.0
        assert square_family().measure_c is None

    def test_bad_beta(self):
        with pytest.raises(BadBeta):
            neg_power(1.0)
        with pytest.raises(BadBeta):
            neg_power(0.0)

    def test_tag_parsing(self):
        assert family_from_tag("xlogx").tag == "xlogx"
        assert family_from_tag("neg_power:0.5").tag == "neg_power(0.5)"
        assert family_from_tag("neg_power(0.25)").tag == "neg_power(0.25)"
        with pytest.raises(ValueError):
            family_from_tag("nope")


class TestStandardF:
    def test_equal_states(self):
        rho = random_density(3, 3, 1)
        assert standard_f(rho, rho, xlogx()) == pytest.approx(0.0, abs=1e-12)

    def test_classical_oracle(self):
        assert standard_f(SIGMA_C, RHO_C, xlogx()) == pytest.approx(KL_CANONICAL, abs=1e-12)

    def test_square_matches_direct_trace(self):
        for seed in range(20):
            sigma, rho = sample_pair(3, seed)
            direct = float(np.trace(sigma.mat @ sigma.mat @ np.linalg.inv(rho.mat)).real)
            assert standard_f(sigma, rho, square_family()) == pytest.approx(direct, abs=1e-10 * max(1.0, direct))

    def test_singular_raises(self):
        with pytest.raises(SingularState):
            standard_f(random_density(3, 2, 0), random_density(3, 3, 1), xlogx())


class TestRelativeEntropy:
    def test_equal_states(self):
        rho = random_density(4, 4, 2)
        assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_classical_oracle(self):
        assert relative_entropy(SIGMA_C, RHO_C) == pytest.approx(KL_CANONICAL, abs=1e-12)

    def test_matches_standard_f(self):
        plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        sigma = 0.5 * plus + 0.5 * np.eye(2) / 2.0
        rho = np.diag([0.25, 0.75]).astype(complex)
        assert relative_entropy(sigma, rho) == pytest.approx(
            standard_f(sigma, rho, xlogx()), abs=1e-9
        )

    def test_support_violation_is_infinite(self):
        sigma = np.diag([0.5, 0.5]).astype(complex)
        rho = np.diag([1.0, 0.0]).astype(complex)
        assert relative_entropy(sigma, rho) == math.inf

    def test_singular_sigma_inside_support(self):
        sigma = np.diag([1.0, 0.0]).astype(complex)
        rho = np.diag([0.5, 0.5]).astype(complex)
        assert relative_entropy(sigma, rho) == pytest.approx(math.log(2.0), abs=1e-12)


class TestMaximalF:
    def test_equal_states_zero_for_xlogx(self):
        rho = random_density(3, 3, 3)
        assert maximal_f(rho, rho, xlogx()) == pytest.approx(0.0, abs=1e-12)

    def test_commuting_classical(self):
        assert maximal_f(SIGMA_C, RHO_C, xlogx()) == pytest.approx(KL_CANONICAL, abs=1e-12)

    def test_square_degree_two_identity(self):
        for seed in range(20):
            sigma, rho = sample_pair(3, 100 + seed)
            s_val = standard_f(sigma, rho, square_family())
            m_val = maximal_f(sigma, rho, square_family())
            assert abs(s_val - m_val) <= 1e-10 * max(1.0, abs(s_val))

    def test_renyi2_trace_helper(self):
        sigma, rho = sample_pair(3, 7)
        direct = float(np.trace(sigma.mat @ sigma.mat @ np.linalg.inv(rho.mat)).real)
        assert renyi2_trace(sigma, rho) == pytest.approx(direct, abs=1e-10 * direct)


class TestBsEntropy:
    def test_equal_states(self):
        rho = random_density(4, 4, 4)
        assert bs_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_commuting_classical(self):
        assert bs_entropy(SIGMA_C, RHO_C) == pytest.approx(KL_CANONICAL, abs=1e-12)

    def test_matches_maximal_xlogx(self):
        for seed in range(20):
            sigma, rho = sample_pair(3, 200 + seed)
            assert bs_entropy(sigma, rho) == pytest.approx(
                maximal_f(sigma, rho, xlogx()), abs=1e-9
            )

    def test_dominates_relative_entropy(self):
        for seed in range(100):
            sigma, rho = sample_pair(2, 300 + seed)
            assert bs_entropy(sigma, rho) >= relative_entropy(sigma, rho) - 1e-9

    def test_support_mismatch(self):
        with pytest.raises(SupportMismatch):
            bs_entropy(np.diag([1.0, 0.0]), np.diag([0.5, 0.5]))

    def test_scaling_identity(self):
        sigma, rho = sample_pair(3, 11)
        base = bs_entropy(sigma, rho)
        for a in (0.5, 2.0):
            for b in (0.5, 2.0):
                value = bs_entropy(a * sigma.mat, b * rho.mat)
                assert value == pytest.approx(a * base + a * math.log(a / b), abs=1e-9)


class TestTransposeSymmetry:
    def test_standard(self):
        for seed in range(20):
            sigma, rho = sample_pair(3, 400 + seed)
            lhs = standard_f(sigma, rho, xlogx())
            rhs = standard_f(rho, sigma, neg_log())
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))
            lhs = standard_f(sigma, rho, neg_power(0.3))
            rhs = standard_f(rho, sigma, neg_power(0.7))
            assert abs(lhs - rhs) <= 1e-9

    def test_maximal(self):
        for seed in range(20):
            sigma, rho = sample_pair(3, 500 + seed)
            lhs = maximal_f(sigma, rho, xlogx())
            rhs = maximal_f(rho, sigma, neg_log())
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))
            lhs = maximal_f(sigma, rho, neg_power(0.3))
            rhs = maximal_f(rho, sigma, neg_power(0.7))
            assert abs(lhs - rhs) <= 1e-9


class TestOrdering:
    @pytest.mark.parametrize("fam", [xlogx(), neg_power(0.5)])
    def test_standard_below_maximal(self, fam):
        for seed in range(60):
            d = 2 + seed % 3
            sigma, rho = sample_pair(d, 600 + seed)
            assert standard_f(sigma, rho, fam) <= maximal_f(sigma, rho, fam) + 1e-9


class TestRegularizedDivergence:
    def test_full_rank_matches_direct(self):
        sigma, rho = sample_pair(3, 13)
        direct = maximal_f(sigma, rho, xlogx())
        reg = regularized_divergence(sigma, rho, xlogx(), kind="maximal")
        assert abs(reg.value - direct) <= 1e-6

    def test_equal_singular_states(self):
        sigma = np.diag([0.6, 0.4, 0.0]).astype(complex)
        reg = regularized_divergence(sigma, sigma, xlogx(), kind="maximal")
        assert abs(reg.value) <= 1e-8

    def test_classical_on_support(self):
        sigma = np.diag([0.3, 0.7, 0.0]).astype(complex)
        rho = np.diag([0.5, 0.5, 0.0]).astype(complex)
        expected = classical_f([0.3, 0.7], [0.5, 0.5], lambda x: x * math.log(x))
        for kind in ("maximal", "standard"):
            reg = regularized_divergence(sigma, rho, xlogx(), kind=kind)
            assert abs(reg.value - expected) <= 1e-6

    def test_diverges_on_support_mismatch(self):
        sigma = np.diag([1.0, 0.0]).astype(complex)
        rho = np.diag([0.0, 1.0]).astype(complex)
        with pytest.raises(Diverging):
            regularized_divergence(sigma, rho, xlogx(), kind="maximal")

    def test_bad_kind(self):
        sigma, rho = sample_pair(2, 14)
        with pytest.raises(ValueError):
            regularized_divergence(sigma, rho, xlogx(), kind="other")


class TestQuadratureOracle:
    def test_equal_states(self):
        rho = random_density(3, 3, 15)
        assert abs(bs_entropy_quadrature(rho, rho, tol=1e-8)) <= 1e-8

    def test_commuting_classical(self):
        value = bs_entropy_quadrature(SIGMA_C, RHO_C, tol=1e-7)
        assert value == pytest.approx(KL_CANONICAL, abs=1e-6)

    def test_cross_method_agreement(self):
        for seed in range(50):
            d = 2 + seed % 2
            sigma, rho = sample_pair(d, 700 + seed)
            spectral = bs_entropy(sigma, rho)
            quad = bs_entropy_quadrature(sigma, rho, tol=1e-7)
            assert abs(spectral - quad) <= 1e-6

    def test_explicit_t_max(self):
        sigma, rho = sample_pair(2, 16)
        spectral = bs_entropy(sigma, rho)
        quad = bs_entropy_quadrature(sigma, rho, t_max=1e9, tol=1e-8)
        assert abs(spectral - quad) <= 1e-6

    def test_singular_raises(self):
        with pytest.raises(SingularState):
            bs_entropy_quadrature(random_density(3, 2, 0), random_density(3, 3, 1))


class TestDataProcessing:
    def test_bs_dpi_smoke(self):
        from bsdpi import random_cptp

        for seed in range(40):
            d = 2 + seed % 3
            sigma, rho = sample_pair(d, 800 + seed)
            channel = random_cptp(d, d, 2, seed=900 + seed)
            gap = bs_entropy(sigma, rho) - bs_entropy(
                channel.apply(sigma), channel.apply(rho)
            )
            assert gap >= -1e-9
