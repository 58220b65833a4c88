import numpy as np
import pytest

from gbmsim import Grid, Params, ScalarField
from gbmsim.spectral import check_rho_condition, lambda1

from oracles import dense_schroedinger


class TestLambda1:
    @pytest.mark.parametrize("c", [0.0, 0.03, 1.0, 5.0])
    def test_constant_field_exact(self, c):
        g = Grid(32, 32)
        result = lambda1(ScalarField.constant(g, c), tol=1e-10)
        assert abs(result.lambda1 - c) <= 1e-8
        # ground mode is constant
        assert np.ptp(result.eigenfield.values) <= 1e-8

    def test_step_field_matches_dense_oracle(self):
        g = Grid(8, 8)
        b = np.where(g.centers()[0] < 0.0, 0.5, 2.0)
        result = lambda1(ScalarField(g, b), tol=1e-10)
        ref = np.linalg.eigvalsh(dense_schroedinger(g, b))[0]
        assert abs(result.lambda1 - ref) <= 1e-8

    @pytest.mark.parametrize("n", [6, 10, 12])
    def test_random_fields_match_dense_oracle(self, n, rng):
        g = Grid(n, n)
        b = rng.uniform(0.0, 3.0, size=(n, n))
        result = lambda1(ScalarField(g, b), tol=1e-10)
        ref = np.linalg.eigvalsh(dense_schroedinger(g, b))[0]
        assert abs(result.lambda1 - ref) <= 1e-8

    def test_variational_sandwich(self, rng):
        g = Grid(16, 16)
        for _ in range(5):
            b = rng.uniform(0.0, 4.0, size=(16, 16))
            result = lambda1(ScalarField(g, b), tol=1e-10)
            assert b.min() - 1e-8 <= result.lambda1 <= b.max() + 1e-8

    def test_eigenfield_normalized_nonnegative(self, rng):
        g = Grid(10, 10)
        b = rng.uniform(0.0, 2.0, size=(10, 10))
        result = lambda1(ScalarField(g, b), tol=1e-10)
        v = result.eigenfield.values
        assert np.abs(v).max() == pytest.approx(1.0, abs=1e-12)
        assert v.min() >= -1e-10
        assert result.residual <= 1e-10 * (1.0 + abs(result.lambda1))

    def test_monotone_in_potential_scale(self, rng):
        g = Grid(12, 12)
        b = rng.uniform(0.1, 1.0, size=(12, 12))
        values = [lambda1(ScalarField(g, s * b), tol=1e-10).lambda1
                  for s in (0.5, 1.0, 2.0, 4.0)]
        assert all(a <= b_ + 1e-12 for a, b_ in zip(values, values[1:]))

    def test_rejects_bad_inputs(self):
        g = Grid(8, 8)
        with pytest.raises(ValueError):
            lambda1(ScalarField.constant(g, 1.0), tol=0.0)
        bad = ScalarField.constant(g, 1.0)
        bad.values[0, 0] = np.inf
        with pytest.raises(ValueError):
            lambda1(bad)


class TestRhoCondition:
    def test_constant_case_margin(self):
        g = Grid(16, 16)
        p = Params.delta_dominant(beta1=2.0)  # rho = 1
        res = check_rho_condition(p, ScalarField.constant(g, 1.0))
        assert res.satisfied
        assert res.margin == pytest.approx(1.0, abs=1e-8)

    def test_weak_conversion_fails_gate(self):
        g = Grid(16, 16)
        res = check_rho_condition(Params.delta_dominant(),
                                  ScalarField.constant(g, 1.0))
        assert not res.satisfied
        assert res.lambda1 == pytest.approx(0.03, abs=1e-8)

    def test_margin_grows_with_beta1(self, rng):
        g = Grid(12, 12)
        n0 = ScalarField(g, rng.uniform(0.5, 1.5, size=(12, 12)))
        margins = [check_rho_condition(Params.delta_dominant(beta1=b1), n0).margin
                   for b1 in (0.5, 1.0, 2.0, 4.0)]
        assert all(a <= b + 1e-12 for a, b in zip(margins, margins[1:]))

    def test_rejects_negative_necrosis(self):
        g = Grid(8, 8)
        bad = ScalarField.constant(g, 1.0)
        bad.values[2, 2] = -0.5
        with pytest.raises(ValueError):
            check_rho_condition(Params.delta_dominant(), bad)
