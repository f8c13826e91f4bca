import math
from fractions import Fraction

import numpy as np
import pytest

from hypwalk import spectral as sp
from hypwalk.groups import hecke
from hypwalk.walks import WalkConfig, simulate_drift, vertex_type_frequencies


def test_h3_fixed_point_and_drifts():
    res = sp.graph_drift(3)
    assert np.allclose(res.rho_fixed_point, (0.4, 0.6), atol=1e-9)
    assert math.isclose(res.backbone_drift, 1 / 15, abs_tol=1e-10)
    assert math.isclose(res.graph_drift, 2 / 15, abs_tol=1e-10)
    assert res.diagnostics["fd_discrepancy"] < 1e-8


def test_root_at_zero_is_one():
    for q in (3, 4, 5, 8):
        s = sp.smallest_root(q, 0.0, sp.uniform_rho(q))
        assert abs(s - 1) < 1e-10


def test_step_operator_columns_are_probabilities():
    # at x = 0 every column of A_q sums to 1/s at s = 1, i.e. probability is conserved
    for q in (3, 4, 5, 6, 9):
        rho = sp.uniform_rho(q)
        a = sp.step_operator(q, 0.0, rho)
        assert np.allclose(a.sum(axis=0), 1.0)


def test_implicit_derivative_matches_finite_difference():
    for q in (4, 5, 7):
        rho = sp.uniform_rho(q)
        _, diag = sp.backbone_drift_details(q, rho)
        assert diag["fd_discrepancy"] < 1e-7


def test_backbone_variance_h3():
    assert math.isclose(sp.backbone_variance(3, (0.4, 0.6)), 214 / 1125, rel_tol=1e-5)
    mean, var = sp.h3_gaussian_profile(1125)
    assert mean == 75 and var == 214


def test_rho_bar_normalised_null_vector():
    rb = sp.rho_bar(5, sp.uniform_rho(5))
    assert math.isclose(rb.sum(), 1.0)
    assert np.all(rb >= 0)


def test_drifts_ordered_and_nonnegative():
    for q in range(3, 9):
        res = sp.graph_drift(q)
        assert res.graph_drift >= res.backbone_drift >= 0
        assert res.diagnostics["residual"] < 1e-10


@pytest.mark.parametrize("q", [4, 5])
def test_fixed_point_matches_monte_carlo(q):
    res = sp.graph_drift(q)
    cfg = WalkConfig(hecke(q), 2000, 2000, seed=q)
    freq = vertex_type_frequencies(cfg)
    assert np.allclose(freq, res.rho_fixed_point, atol=0.03)
    est = simulate_drift(cfg)
    # finite-n offset of order 1/n on top of the statistical error
    assert abs(est.mean - res.graph_drift) < 4 * est.standard_error + 5 / cfg.steps


def test_invalid_weights():
    with pytest.raises(ValueError):
        sp.TransferMatrixSpec(3, (0.5, 0.6))
    with pytest.raises(sp.SingularWeights):
        sp.TransferMatrixSpec(3, (1.0, 0.0))
    with pytest.raises(ValueError):
        sp.TransferMatrixSpec(2, (1.0,))


def test_sigma_chain_closed_form():
    for x in np.linspace(-0.4, 0.4, 9):
        s = sp.track_root(lambda y: sp.sigma_step_operator(y), float(x))
        assert abs(s - sp.sigma_smallest_root_closed_form(float(x))) < 1e-9
    drift, diag = sp.sigma_backbone_drift()
    assert math.isclose(drift, 0.25, abs_tol=1e-12)
    assert abs(diag["ds_implicit"] + 0.25j) < 1e-12


def test_honeycomb_exact_iteration_equals_path_count():
    exact = sp.honeycomb_return_profile(10, exact=True)
    for n in range(0, 11):
        assert exact[n] == sp.honeycomb_path_enumeration(n)
    assert exact[2] == Fraction(3, 8)


def test_honeycomb_profile_float_matches_exact():
    flt = sp.honeycomb_return_profile(20)
    ex = sp.honeycomb_return_profile(20, exact=True)
    assert np.allclose(flt, [float(x) for x in ex], rtol=1e-12)


def test_honeycomb_conserves_probability():
    dist = sp.honeycomb_distribution(200)
    assert math.isclose(dist.sum(), 1.0, rel_tol=1e-12)


def test_honeycomb_lattice_too_small():
    with pytest.raises(sp.LatticeTooSmall):
        sp.honeycomb_return_profile(100, lattice=10)


def test_fit_recovers_synthetic_law():
    n = np.arange(0, 3000)
    prof = 0.7 * 0.95 ** n / np.maximum(n, 1) ** 1.5
    fit = sp.fit_return_profile(list(prof), 500, 2000)
    assert math.isclose(fit.lam, 0.95, rel_tol=1e-9)
    assert math.isclose(fit.C, 0.7, rel_tol=1e-6)


def test_honeycomb_decay_rate():
    fit = sp.fit_return_profile(sp.honeycomb_return_profile(2000), 500, 2000)
    assert abs(fit.lam - sp.LAMBDA_PSL) < 1e-3


def test_transfer_matrix_at_origin():
    m = sp.build_transfer_matrix(3, 0.0, 0.0, (0.4, 0.6))
    assert np.allclose(m, -np.eye(2))
    assert sp.build_transfer_matrix(4, 0.0, 0.0, sp.uniform_rho(4)).shape == (3, 3)
    assert sp.TransferMatrixSpec(7, sp.uniform_rho(7)).dimension == 4


def test_h3_both_roots():
    roots = sorted(sp.roots_of(sp.step_operator(3, 0.0, (0.4, 0.6))).real)
    assert np.allclose(roots, [-1.5, 1.0])
