import math

import numpy as np
import pytest

from affine_bernstein.isovector import (CaseTag, IsovectorSolution, auxiliary_residual,
                                        canonical_basis_d0, classify, dimension_table,
                                        model_isovector_dimension, solve_auxiliary)
from affine_bernstein.model import ModelParams, Potential

T = np.linspace(0.0, 2.0, 41)
Q = np.linspace(0.5, 3.0, 26)
CASES = {"1a": Potential(0.5, 0.25), "1b": Potential(0.5, 0.0),
         "1c": Potential(0.5, -0.25), "2": Potential(0.0, 0.25), "2-flat": Potential(0.0, 0.0),
         "2-neg": Potential(0.0, -0.3)}


class TestClassify:
    def test_examples(self):
        assert classify(Potential(0, 0)) == classify(Potential(0, 0))
        assert classify(Potential(0, 0)).dimension == 6
        c = classify(Potential(1, 1))
        assert (c.tag, c.dimension) == (CaseTag.C_NONZERO_D_POS, 4)
        assert c.epsilon == pytest.approx(math.sqrt(8))
        c = classify(Potential(1, -1))
        assert c.tag is CaseTag.C_NONZERO_D_NEG and c.epsilon == pytest.approx(math.sqrt(8))
        assert classify(Potential(1, 0)).tag is CaseTag.C_NONZERO_D_ZERO
        c = classify(Potential(-0.0078125, 0.125))
        assert (c.tag, c.dimension, c.epsilon) == (CaseTag.C_NONZERO_D_POS, 4, 1.0)

    def test_lattice(self):
        cs = [k / 10 for k in range(-10, 11)]
        table = dimension_table(cs, cs)
        assert table.shape == (21, 21)
        assert np.all(table[10] == 6)
        assert np.all(np.delete(table, 10, axis=0) == 4)

    def test_model_dimensions(self):
        assert model_isovector_dimension(ModelParams(2, 0, 1.5, 1, 0)) == 6
        assert model_isovector_dimension(ModelParams(1, 0, 0.25, 0, 1)) == 6
        assert model_isovector_dimension(ModelParams(1, 0, 0.5, 1, 1)) == 4


def fd(f, t, k, h=1e-3):
    """k-th derivative by nested central differences (independent of the closed forms)."""
    if k == 0:
        return f(t)
    return (fd(f, t + h, k - 1, h) - fd(f, t - h, k - 1, h)) / (2 * h)


class TestAuxiliary:
    @pytest.mark.parametrize("name", list(CASES))
    def test_random_tuples_pass(self, name):
        pot = CASES[name]
        rng = np.random.default_rng(0)
        dim = classify(pot).dimension
        for _ in range(50):
            theta = rng.uniform(0.1, 2.0)
            sol = solve_auxiliary(pot, theta, rng.uniform(-1, 1, dim))
            rep = auxiliary_residual(sol, pot, theta, T, Q)
            assert rep.passed, rep.to_dict()

    @pytest.mark.parametrize("name", list(CASES))
    def test_odes_by_finite_differences(self, name):
        pot = CASES[name]
        dim = classify(pot).dimension
        sol = solve_auxiliary(pot, 0.7, np.linspace(0.3, -0.8, dim))
        t = np.linspace(0.1, 1.5, 15)
        tn = lambda s: sol.tn(s)
        assert np.allclose(fd(tn, t, 3), 8 * pot.d * fd(tn, t, 1), atol=1e-4)
        assert np.allclose(fd(sol.sigma, t, 1), 0.7 ** 2 / 4 * fd(tn, t, 2), atol=1e-6)
        assert np.allclose(fd(sol.l, t, 2), 2 * pot.d * sol.l(t), atol=1e-5)
        for k in (1, 2, 3):
            assert np.allclose(sol.tn(t, k), fd(tn, t, k), atol=1e-4)

    def test_wrong_coefficient_count(self):
        with pytest.raises(ValueError):
            solve_auxiliary(Potential(1, 0), 1.0, [1, 2, 3, 4, 5, 6])
        with pytest.raises(ValueError):
            solve_auxiliary(Potential(0, 0), 1.0, [1, 2, 3, 4])

    def test_nonzero_l_fails_when_c_nonzero(self):
        pot = Potential(0.5, 0.25)
        sol = IsovectorSolution(classify(pot), (0.1, 0.2, 0.3, 0.4), (1.0, 0.0), 1.0, pot.d)
        assert not auxiliary_residual(sol, pot, 1.0, T, Q).passed

    def test_mismatched_family_fails(self):
        sol = solve_auxiliary(Potential(0.5, 0.25), 1.0, [1, 0.5, 0, 0])
        assert not auxiliary_residual(sol, Potential(0.5, 0.5), 1.0, T, Q).passed

    @pytest.mark.parametrize("name", list(CASES))
    def test_parametrization_injective(self, name):
        pot = CASES[name]
        dim = classify(pot).dimension
        t = np.linspace(0.0, 2.0, 30)
        cols = []
        for i in range(dim):
            sol = solve_auxiliary(pot, 0.9, np.eye(dim)[i])
            cols.append(np.concatenate([sol.tn(t), sol.sigma(t), sol.l(t)]))
        assert np.linalg.matrix_rank(np.array(cols).T) == dim

    @pytest.mark.parametrize("d", [1e-10, -1e-10])
    def test_near_zero_d_stable(self, d):
        pot = Potential(0.5, d)
        sol = solve_auxiliary(pot, 1.0, [0.3, 0.3, 0.1, 0.2], zero_tol=0.0)
        assert sol.case.tag is not CaseTag.C_NONZERO_D_ZERO
        assert auxiliary_residual(sol, pot, 1.0, T, Q).passed

    def test_zero_q_rejected(self):
        sol = solve_auxiliary(Potential(0, 0), 1.0, [1] * 6)
        with pytest.raises(ValueError):
            auxiliary_residual(sol, Potential(0, 0), 1.0, T, np.array([0.0, 1.0]))


class TestCanonicalBasis:
    def test_matches_general_form(self):
        # N_t = T_N, N_q = T_N' q / 2, N_S = sigma - q^2 T_N'' / 4 (l = 0)
        pot, theta = Potential(0.5, 0.0), 0.8
        t, q = np.meshgrid(np.linspace(0, 2, 9), np.linspace(0.5, 3, 7), indexing="ij")
        for i, m in enumerate(canonical_basis_d0(pot, theta)):
            sol = solve_auxiliary(pot, theta, np.eye(4)[i])
            assert m.index == i + 1
            assert np.allclose(m.nt(t, q), sol.tn(t))
            assert np.allclose(m.nq(t, q), sol.tn(t, 1) * q / 2)
            assert np.allclose(m.ns(t, q), sol.sigma(t) - q ** 2 * sol.tn(t, 2) / 4)

    def test_examples(self):
        m1, m2, m3, m4 = canonical_basis_d0(Potential(1, 0), 1.0)
        assert m1.nt(2.0, 1.0) == 4.0 and m1.nq(2.0, 3.0) == 6.0 and m1.ns(2.0, 1.0) == 0.5
        assert m2.nq(5.0, 3.0) == 1.5 and m3.nt(7.0, 1.0) == 1.0 and m4.ns(0.0, 9.0) == 1.0

    def test_only_for_d_zero(self):
        with pytest.raises(ValueError):
            canonical_basis_d0(Potential(1, 0.5), 1.0)
