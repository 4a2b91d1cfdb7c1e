import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bzdos import reference
from bzdos.iai import (NODES, W_GAUSS, W_KRONROD, AdaptiveConfig, BudgetExceeded,
                       adaptive_1d, iai_dos)
from bzdos.models import TightBindingModel
from bzdos.ptr import ptr_dos
from bzdos.study import loglog_slope


class TestRule:
    def test_exactness(self):
        # Kronrod part is exact to degree 22, Gauss part to degree 13
        for deg in range(23):
            exact = (1 + (-1) ** deg) / (deg + 1)
            assert W_KRONROD @ NODES**deg == pytest.approx(exact, abs=1e-14)
            if deg <= 13:
                assert W_GAUSS @ NODES**deg == pytest.approx(exact, abs=1e-14)

    def test_polynomial_single_panel(self):
        res = adaptive_1d(lambda x: x**2, 0, 1)
        assert res.value == pytest.approx(1 / 3, rel=1e-15)
        assert res.n_evals == 15 and res.converged

    def test_constant(self):
        res = adaptive_1d(lambda x: np.full_like(x, 2.5), -1, 3)
        assert res.value == pytest.approx(10.0) and res.n_intervals == 1

    def test_lorentzian_arctan(self):
        eta = 0.01
        f = lambda k: (eta / np.pi) / (k * k + eta * eta)
        res = adaptive_1d(f, -0.5, 0.5, AdaptiveConfig(1e-12))
        assert res.value == pytest.approx(2 / np.pi * np.arctan(1 / (2 * eta)), abs=1e-11)
        assert res.value == pytest.approx(0.98727, abs=1e-5)

    def test_budget(self):
        f = lambda x: 1 / np.sqrt(np.abs(x) + 1e-30)
        with pytest.warns(BudgetExceeded):
            res = adaptive_1d(f, -1, 1, AdaptiveConfig(1e-14, max_subdivisions=5))
        assert not res.converged and np.isfinite(res.value)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AdaptiveConfig(abs_tol=0)
        with pytest.raises(ValueError):
            AdaptiveConfig(rel_tol=-1)
        with pytest.raises(ValueError):
            AdaptiveConfig(max_subdivisions=0)


def test_error_estimate_is_reliable():
    rng = np.random.default_rng(7)
    hits = 0
    for _ in range(100):
        c, eta = rng.uniform(-0.4, 0.4), 10 ** rng.uniform(-3, -1)
        tol = 10 ** rng.uniform(-10, -5)
        f = lambda x: (eta / np.pi) / ((x - c) ** 2 + eta**2)
        loose = adaptive_1d(f, -0.5, 0.5, AdaptiveConfig(tol))
        tight = adaptive_1d(f, -0.5, 0.5, AdaptiveConfig(tol / 10))
        hits += abs(loose.value - tight.value) <= loose.error
    assert hits >= 95


class TestDos:
    def test_chain_matches_converged_grid(self, chain):
        a = iai_dos(chain.model, 0.0, 0.1, AdaptiveConfig(1e-10)).value
        assert a == pytest.approx(ptr_dos(chain.model, 0.0, 0.1, 4096).value, abs=1e-9)

    def test_flat_band(self):
        m = TightBindingModel.from_terms({(0, 0): [[0.2]]})
        v = iai_dos(m, 0.2, 0.05, AdaptiveConfig(1e-10)).value
        assert v == pytest.approx(1 / (0.05 * np.pi), abs=1e-10)

    def test_graphene_cost_grows_slowly(self, graphene):
        counts = [iai_dos(graphene.model, 2.0, eta, AdaptiveConfig(1e-8)).n_evals
                  for eta in (0.1, 0.01)]
        assert counts[1] / counts[0] < 10

    # free gas and the open toy are not smooth periodic integrands, so grid sums converge slowly
    @pytest.mark.parametrize("name,E,N,tol", [("chain", 0.3, 4096, 1e-9), ("graphene", 0.5, 256, 1e-9),
                                              ("free-gas-2d", 0.1, 1024, 1e-7),
                                              ("two-block", 0.0, 4096, 1e-8)])
    def test_agrees_with_grid(self, name, E, N, tol):
        model = reference.get_system(name).model
        eta = 0.1
        a = iai_dos(model, E, eta, AdaptiveConfig(1e-10)).value
        b = ptr_dos(model, E, eta, N).value
        assert a == pytest.approx(b, abs=tol * max(1.0, model.volume))

    def test_cost_sublinear_in_inverse_eta(self, chain):
        etas = [0.1, 0.03, 0.01, 0.003, 0.001]
        counts = [iai_dos(chain.model, 0.0, eta, AdaptiveConfig(1e-8)).n_evals for eta in etas]
        assert -loglog_slope(etas, counts) < 0.3

    def test_budget_propagates(self, graphene):
        with pytest.warns(BudgetExceeded):
            est = iai_dos(graphene.model, 0.5, 0.001, AdaptiveConfig(1e-12, max_subdivisions=3))
        assert est.meta["converged"] is False

    def test_rejects_high_dimension(self):
        m = TightBindingModel.from_terms({(1, 0, 0, 0): [[1.0]]})
        with pytest.raises(ValueError):
            iai_dos(m, 0.0, 0.1)


@given(st.floats(-1, 1), st.floats(0.01, 1))
def test_integral_of_smooth_function(a, w):
    b = a + w
    res = adaptive_1d(np.cos, a, b, AdaptiveConfig(1e-13))
    assert res.value == pytest.approx(np.sin(b) - np.sin(a), abs=1e-12)
