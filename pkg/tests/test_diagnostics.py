import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_mixed_matrix
from ctrlscore.diagnostics import (
    baseline_centralities,
    controllability_matrix,
    controllability_rank,
    diagnose,
    theta_prime_check,
    uniqueness_certificates,
    uniqueness_matrices,
)
from ctrlscore.scoring import score_infinite
from ctrlscore.spectral import block_diagonalize

EXAMPLE1 = np.array([[0.0, 1.0], [1.0, 0.0]])


class TestUniqueness:
    def test_example1_not_certified(self):
        cert = uniqueness_certificates(block_diagonalize(EXAMPLE1))
        assert cert.rank_aecs == 1 and not cert.aecs_certified
        assert not cert.vcs_certified

    def test_fixture_certified(self, fig2_A):
        split = block_diagonalize(fig2_A)
        M_vcs, M_aecs = uniqueness_matrices(split)
        assert M_vcs.shape == (8 * 8 + 2 * 2, 10) and M_aecs.shape == (64, 10)
        cert = uniqueness_certificates(split)
        assert (cert.rank_vcs, cert.rank_aecs) == (10, 10)
        assert cert.vcs_certified and cert.aecs_certified

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**32 - 1))
    def test_rank_ordering(self, n_m, n_0, n_p, seed):
        A = random_mixed_matrix(np.random.default_rng(seed), n_m, n_0, n_p)
        cert = uniqueness_certificates(block_diagonalize(A))
        assert cert.rank_aecs <= cert.rank_vcs <= A.shape[0]


class TestThetaPrime:
    @pytest.mark.parametrize("T", [0.5, 1.0, 10.0])
    def test_example1_empty(self, T):
        assert theta_prime_check(np.linalg.eigvals(EXAMPLE1), T) is None

    def test_rotation_hits(self):
        eigs = np.linalg.eigvals(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        hit = theta_prime_check(eigs, math.pi)
        assert hit is not None and hit.ell == 1 and hit.theta == pytest.approx(2.0)
        assert theta_prime_check(eigs, 2 * math.pi).ell == 2
        assert theta_prime_check(eigs, 1.0) is None

    def test_stable_real_spectrum_empty(self):
        assert theta_prime_check([-1.0, -2.0, -3.0], 2 * math.pi) is None

    def test_shifted_pair_sum(self):
        # -1 + 2i and 1 + 2i sum to 4i
        hit = theta_prime_check([-1 + 2j, -1 - 2j, 1 + 2j, 1 - 2j], math.pi / 2)
        assert hit is not None and hit.theta == pytest.approx(4.0)

    def test_bad_horizon(self):
        with pytest.raises(ValueError):
            theta_prime_check([-1.0], 0.0)


class TestBaselines:
    @pytest.mark.parametrize("T", [0.1, 1.0, 5.0])
    def test_scalar_stable(self, T):
        b = baseline_centralities([[-1.0]], T)
        assert b.ac[0] == pytest.approx((1 - math.exp(-2 * T)) / 2)

    def test_scalar_integrator(self):
        b = baseline_centralities([[0.0]], 2.0)
        assert b.ac[0] == pytest.approx(2.0)
        assert b.vce[0] == pytest.approx(math.log(2.0))
        assert b.ace[0] == pytest.approx(-0.5)

    def test_fixture_node7_first(self, fig2_A):
        b = baseline_centralities(fig2_A, 10.0)
        assert int(np.argmax(b.ac)) == 6

    def test_small_horizon_slope(self, fig2_A):
        T = 1e-6
        b = baseline_centralities(fig2_A, T)
        assert np.allclose(b.ac / T, 1.0, atol=1e-5)


class TestControllability:
    def test_interior_full_rank(self, fig2_A):
        assert controllability_rank(fig2_A, np.full(10, 0.1)) == 10

    def test_decoupled(self):
        assert controllability_rank(np.diag([-1.0, -2.0]), [1.0, 0.0]) == 1

    def test_matrix_shape(self):
        C = controllability_matrix(np.diag([1.0, 2.0]), np.eye(2))
        assert C.shape == (2, 4)

    def test_fixture_aecs_optimum_uncontrollable(self, fig2_A):
        p = score_infinite(fig2_A, "aecs").allocation
        assert p[8] <= 1e-10
        assert controllability_rank(fig2_A, p) == 9


class TestDiagnose:
    def test_fixture(self, fig2_A):
        rep = diagnose(fig2_A, 1.0)
        assert rep.assumption1 and rep.assumption2
        assert (rep.n_minus, rep.n_zero, rep.n_plus) == (8, 2, 0)
        assert rep.vcs_unique_certified and rep.aecs_unique_certified
        assert rep.theta_prime_hit is None and rep.baseline_scores is not None

    def test_rotation(self):
        rep = diagnose(np.array([[0.0, 1.0], [-1.0, 0.0]]), math.pi)
        assert not rep.assumption2 and rep.rank_vcs is None
        assert rep.theta_prime_hit is not None
        assert any("imaginary" in m for m in rep.violations)
