import math

import numpy as np
import pytest

from hypwalk import hyperbolic as hyp
from hypwalk.groups import (
    T_HAT,
    Word,
    free_group,
    free_idempotent,
    hecke,
    matrix_of_word,
    psl2z_sigma,
)


def _random_sl2(rng):
    m = rng.normal(size=(2, 2))
    if np.linalg.det(m) < 0:
        m[0] *= -1
    return m / math.sqrt(np.linalg.det(m))


def test_upper_half_plane_only():
    with pytest.raises(hyp.GeometryError):
        hyp.HyperbolicPoint(1 - 1j)
    with pytest.raises(hyp.GeometryError):
        hyp.normalize_det(np.zeros((2, 2)))


def test_mobius_maps_are_isometries(rng):
    for _ in range(50):
        m = _random_sl2(rng)
        z1 = complex(rng.normal(), abs(rng.normal()) + 0.1)
        z2 = complex(rng.normal(), abs(rng.normal()) + 0.1)
        d = hyp.point_distance(z1, z2)
        d2 = hyp.point_distance(hyp.mobius_apply(m, z1), hyp.mobius_apply(m, z2))
        assert math.isclose(d, d2, rel_tol=1e-9, abs_tol=1e-12)


def test_distance_invariant_under_rotations(rng):
    for _ in range(50):
        m = _random_sl2(rng)
        r1, r2 = hyp.rotation(rng.uniform(0, 6.3)), hyp.rotation(rng.uniform(0, 6.3))
        d = hyp.hyperbolic_distance_of_word(m)
        assert math.isclose(d, hyp.hyperbolic_distance_of_word(r1 @ m @ r2), rel_tol=1e-9, abs_tol=1e-12)
        # the stabiliser of i is the rotation group
        assert math.isclose(hyp.distance_by_points(r1 @ m @ r2), hyp.distance_by_points(m @ r2),
                            rel_tol=1e-9, abs_tol=1e-12)


def test_trace_formula_values():
    assert hyp.hyperbolic_distance_of_word(np.eye(2)) == 0.0
    assert math.isclose(hyp.hyperbolic_distance_of_word(np.array(T_HAT, dtype=float)), math.acosh(1.5))
    # scaling does not change the distance
    assert math.isclose(hyp.hyperbolic_distance_of_word(3 * np.array(T_HAT, dtype=float)), math.acosh(1.5))


def test_trace_and_points_agree_on_words(rng, random_letters):
    fr = free_group(2)
    for _ in range(100):
        w = Word(random_letters(rng, 2, int(rng.integers(1, 60))), fr)
        d1 = hyp.hyperbolic_distance_of_word(matrix_of_word(w, "exact"))
        d2 = hyp.distance_by_points(matrix_of_word(w, "exact"))
        assert math.isclose(d1, d2, rel_tol=1e-9, abs_tol=1e-9)


def test_angle_step_composes_to_matrix_growth(rng):
    mats = [_random_sl2(rng) for _ in range(20)]
    theta = 0.3
    total = 0.0
    for h in mats:
        theta, g = hyp.angle_step(theta, h)
        total += g
    prod = np.eye(2)
    for h in mats:
        prod = prod @ h
    v = np.array([math.cos(0.3), math.sin(0.3)])
    w = prod.T @ v
    assert math.isclose(total, math.log(w @ w), rel_tol=1e-9)
    assert -math.pi / 2 < theta <= math.pi / 2


def test_density_grid_helpers():
    g = hyp.DensityGrid(np.full(512, 1 / 512))
    assert np.allclose(g.density, 1 / np.pi)
    assert g.coarsen(8).shape == (8,)
    with pytest.raises(ValueError):
        g.coarsen(7)
    assert g.to_csv().startswith("theta,density\n")


def test_measure_independent_of_start():
    gens = hyp.generator_set(psl2z_sigma())
    a = hyp.iterate_invariant_measure(gens, 1024, init="uniform")
    b = hyp.iterate_invariant_measure(gens, 1024, init="bump")
    assert a.converged and b.converged
    assert np.abs(a.weights - b.weights).sum() < 1e-6


def test_measure_not_converged_is_reported():
    gens = hyp.generator_set(psl2z_sigma())
    with pytest.raises(hyp.MeasureNotConverged) as err:
        hyp.iterate_invariant_measure(gens, 512, tol=1e-30, max_sweeps=5, strict=True)
    assert not err.value.grid.converged
    with pytest.raises(ValueError):
        hyp.iterate_invariant_measure(gens, 16)


def test_rotation_invariant_measure_for_rotations():
    # a set closed under conjugation by a rotation of pi/4 has a measure with the same symmetry
    gens = [hyp.rotation(0.4), hyp.rotation(-0.4)]
    mu = hyp.iterate_invariant_measure(gens, 1024, tol=1e-10, max_sweeps=200)
    assert np.allclose(mu.density, 1 / np.pi, atol=1e-6)


def test_lyapunov_measure_against_monte_carlo():
    fr = psl2z_sigma()
    gens = hyp.generator_set(fr)
    mu = hyp.iterate_invariant_measure(gens, 8192)
    g_int = hyp.lyapunov_from_measure(gens, mu)
    g_mc = hyp.lyapunov_mc(fr, "simple", 2000, 400, seed=1)
    assert abs(g_int.gamma1 - g_mc.gamma1) < 4 * g_mc.standard_error + 2e-3
    assert g_int.sigma2 > 0


def test_lyapunov_deterministic_across_workers():
    fr = free_group(2)
    a = hyp.lyapunov_mc(fr, "simple", 300, 600, seed=5)
    b = hyp.lyapunov_mc(fr, "simple", 300, 600, seed=5, workers=2)
    assert a.gamma1 == b.gamma1


def test_matrix_walk_matches_direct_product():
    fr = hecke(3)
    res = hyp.matrix_walk(fr, "simple", 40, 10, seed=2)
    from hypwalk.walks import block_moves

    moves = fr.moves("simple")
    mv = block_moves(2, 0, 10, 40, len(moves))
    for row, lt in zip(mv, res.log_trace[:, -1]):
        w = Word(tuple(moves[i] for i in row), fr)
        assert math.isclose(lt, math.log(hyp.trace_form(matrix_of_word(w))), rel_tol=1e-9)


def test_backbones_are_free():
    for spec in hyp.backbone_specs().values():
        assert hyp.check_backbone_free(spec, 8)


def test_table1_small_run():
    rows = hyp.table1(n=1000, samples=200, seed=3, rows=["F3", "F4"])
    assert [r.name for r in rows] == ["F3", "F4"]
    for r in rows:
        assert abs(r.ratio - r.graph_drift) < 0.02
    assert "ratio" in hyp.format_table1(rows)


def test_relation_report_small_run():
    rep = hyp.check_length_trace_relation("F3", n=2000, samples=200, seed=4)
    assert rep.ratio_ci[0] < rep.ratio < rep.ratio_ci[1]
    assert abs(rep.ratio - 1) < 0.05


def test_word_length_and_distance():
    fr = free_idempotent(3)
    length, dist = hyp.word_length_and_distance(Word((1, 2, 3, 1), fr))
    assert length == 4
    assert dist > 0
