import math
from fractions import Fraction

import numpy as np
import pytest

from hypwalk.groups import (
    NormalForm,
    Word,
    b3_length_bounds,
    b3_sigma,
    free_idempotent,
    hecke,
    irreducible_length,
    psl2z_sigma,
    reduce_word,
)
from hypwalk.walks import (
    FLUX_STEP_VARIANCE,
    ConfigError,
    InsufficientSamples,
    WalkConfig,
    block_moves,
    drift_profile,
    estimate_return_probability,
    exact_distribution,
    exact_return_probabilities,
    flux_of_word,
    functional_values,
    simulate_drift,
    simulate_flux,
    vertex_type_frequencies,
    walk_statistics,
)


def _sample_words(cfg):
    """Rebuild the words walked by the first block of ``cfg``."""
    moves = cfg.moves
    mv = block_moves(cfg.seed, 0, cfg.samples, cfg.steps, len(moves))
    return [Word(tuple(moves[i] for i in row), cfg.framing) for row in mv]


@pytest.mark.parametrize("fr", [hecke(3), hecke(5), free_idempotent(3)])
def test_kernel_length_matches_reduction(fr):
    cfg = WalkConfig(fr, 60, 100, seed=7)
    stats = walk_statistics(cfg)
    lengths = functional_values(stats, fr, "graph-L")
    for w, l in zip(_sample_words(cfg), lengths):
        assert l == irreducible_length(reduce_word(w), fr)


def test_kernel_backbone_generation():
    fr = hecke(4)
    cfg = WalkConfig(fr, 50, 100, seed=3)
    k = functional_values(walk_statistics(cfg), fr, "backbone-k")
    for w, x in zip(_sample_words(cfg), k):
        assert x == reduce_word(w).count(0)


def test_kernel_sigma_length_matches_reduction():
    fr = psl2z_sigma()
    cfg = WalkConfig(fr, 80, 100, seed=11)
    lengths = functional_values(walk_statistics(cfg), fr, "graph-L")
    for w, l in zip(_sample_words(cfg), lengths):
        assert l == irreducible_length(reduce_word(w), fr)


def test_kernel_b3_bounds_match_reference():
    fr = b3_sigma()
    cfg = WalkConfig(fr, 80, 100, seed=5)
    stats = walk_statistics(cfg)
    lo = functional_values(stats, fr, "b3-lower")
    hi = functional_values(stats, fr, "b3-upper")
    for w, a, b in zip(_sample_words(cfg), lo, hi):
        assert (a, b) == b3_length_bounds(w)


def test_results_independent_of_worker_count():
    cfg = WalkConfig(hecke(3), 200, 1000, seed=42)
    one = simulate_drift(cfg)
    two = simulate_drift(WalkConfig(hecke(3), 200, 1000, seed=42, workers=2))
    assert one.mean == two.mean
    assert one.variance == two.variance
    other = simulate_drift(WalkConfig(hecke(3), 200, 1000, seed=43))
    assert other.mean != one.mean


def test_monte_carlo_matches_exact_law():
    fr = hecke(3)
    n = 10
    dist = exact_distribution(fr, n, exact=True)
    mean = sum(p * irreducible_length(NormalForm(fr.group, st), fr) for (st, _), p in dist.items())
    assert sum(dist.values()) == 1
    est = simulate_drift(WalkConfig(fr, n, 20_000, seed=1))
    assert abs(est.mean * n - float(mean)) < 4 * est.standard_error * n


def test_drift_profile_shares_paths():
    cfg = WalkConfig(hecke(3), 400, 300, seed=9)
    prof = drift_profile(cfg, "graph-L", [100, 400])
    assert set(prof) == {100, 400}
    assert prof[400].mean == simulate_drift(cfg).mean


def test_exact_return_probabilities_agree_with_full_law():
    for fr in (psl2z_sigma(), b3_sigma()):
        pr = exact_return_probabilities(fr, 8)
        for n in range(0, 9):
            dist = exact_distribution(fr, n)
            ref = sum(v for (st, es), v in dist.items() if not st and (es == 0 or not fr.is_braid))
            assert math.isclose(pr[n], ref, abs_tol=1e-14)


def test_return_estimate_within_interval():
    fr = psl2z_sigma()
    exact = exact_return_probabilities(fr, 6)
    rows = estimate_return_probability(fr, [2, 4, 6], 20_000, seed=3)
    for r in rows:
        assert r.lo <= exact[r.n] <= r.hi or abs(r.p_hat - exact[r.n]) < 0.01


def test_b3_odd_returns_are_zero():
    rows = estimate_return_probability(b3_sigma(), [3, 4], 500, seed=0)
    assert rows[0].p_hat == 0.0 and rows[0].hits == 0


def test_flux_of_word():
    assert flux_of_word((1, 1, 2)) == Fraction(4, 3)
    assert flux_of_word((1, -2, 2, -1)) == 0
    assert flux_of_word((1, 2, -1), "sigma") == Fraction(1, 6)


@pytest.mark.parametrize("basis", ["ab", "sigma"])
def test_free_flux_variance(basis):
    res = simulate_flux(WalkConfig(psl2z_sigma(), 50, 20_000, seed=4), basis)
    target = float(FLUX_STEP_VARIANCE[basis])
    assert abs(res.variance_per_step - target) < 4 * res.variance_standard_error()
    assert res.acceptance_rate == 1.0


def test_closed_flux_needs_closed_paths():
    cfg = WalkConfig(psl2z_sigma(), 999, 50, seed=0, closure_filter="projection-closed")
    with pytest.raises(InsufficientSamples):
        simulate_flux(cfg)


def test_vertex_type_frequencies_h3():
    freq = vertex_type_frequencies(WalkConfig(hecke(3), 400, 4000, seed=2))
    assert freq.shape == (2,)
    assert np.allclose(freq, [0.4, 0.6], atol=0.03)


def test_config_validation():
    with pytest.raises(ConfigError):
        WalkConfig(hecke(3), 0, 10)
    with pytest.raises(ConfigError):
        WalkConfig(hecke(3), 10, 10, walk_kind="lazy")
    with pytest.raises(ConfigError):
        WalkConfig(hecke(3), 10**6, 10**6, budget=10**9)
    stats = walk_statistics(WalkConfig(b3_sigma(), 10, 10))
    with pytest.raises(ConfigError):
        functional_values(stats, b3_sigma(), "graph-L")
    with pytest.raises(ConfigError):
        walk_statistics(WalkConfig(hecke(3), 10, 10), [20])


def test_directed_walk_never_backtracks():
    cfg = WalkConfig(hecke(5), 40, 50, seed=8, walk_kind="directed")
    table_moves = cfg.moves
    from hypwalk.walks import move_table

    inv = move_table(cfg.framing, table_moves).inverse_of
    mv = block_moves(cfg.seed, 0, cfg.samples, cfg.steps, len(table_moves), True, inv)
    assert np.all(mv[:, 1:] != inv[mv[:, :-1]])


@pytest.mark.parametrize("fr", [hecke(3), hecke(6), psl2z_sigma(), free_idempotent(3)])
def test_single_step_drift_is_one(fr):
    assert simulate_drift(WalkConfig(fr, 1, 200, seed=0)).mean == 1.0


def test_single_step_b3_bounds():
    cfg = WalkConfig(b3_sigma(), 1, 100, seed=0)
    assert simulate_drift(cfg, "b3-lower").mean == 1.0
    assert simulate_drift(cfg, "b3-upper").mean == 1.0
