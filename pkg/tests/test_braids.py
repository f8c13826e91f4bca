import json
import math
from fractions import Fraction

import numpy as np
import pytest

from hypwalk import braids
from hypwalk.groups import Word, b3_sigma
from hypwalk.laurent import LaurentPoly


def test_trivial_braid_and_generators():
    fr = b3_sigma()
    assert braids.alexander_polynomial(Word((), fr)).is_zero()
    t = LaurentPoly.t()
    # closure of s1 s2 is the unknot: numerator det(M - I) = 1 + t + t^2
    assert braids.alexander_polynomial(Word((1, 2), fr)) == LaurentPoly.const(1)
    # closure of (s1 s2)^3: (t - 1)^2 (t^2 + t + 1)
    assert braids.alexander_polynomial(Word((1, 2) * 3, fr)) == (t - 1) * (t - 1) * (t * t + t + 1)


def test_divisibility_on_random_braids():
    assert braids.check_divisibility(300, 30, seed=1) == 0


def test_conjugation_invariance(random_braid_word):
    for _ in range(40):
        w = random_braid_word(20)
        c = random_braid_word(6)
        conj = c + w + c.inverse()
        assert braids.alexander_polynomial(conj) == braids.alexander_polynomial(w)


def test_cyclic_rotation_invariance(random_braid_word):
    w = random_braid_word(25)
    k = 7
    rotated = Word(w.letters[k:] + w.letters[:k], w.framing)
    assert braids.alexander_polynomial(rotated) == braids.alexander_polynomial(w)


def test_laurent_result_matches_direct_evaluation(random_braid_word):
    for t in (Fraction(2), Fraction(-1, 3), Fraction(5, 7)):
        for _ in range(15):
            w = random_braid_word(18)
            assert braids.alexander_polynomial(w)(t) == braids.evaluate_directly(w, t)


@pytest.mark.parametrize("f", [-2, -1, 1, 2, 3])
def test_central_powers(f):
    fr = b3_sigma()
    letters = ((1, 2) * 3 if f > 0 else (-1, -2) * 3) * abs(f)
    assert braids.alexander_polynomial(Word(letters, fr)) == braids.nabla_of_central_power(f)


def test_float_evaluation_at_real_u(random_braid_word):
    for u in (0.8, 1.0, 1.2):
        for _ in range(10):
            w = random_braid_word(15)
            exact = braids.alexander_polynomial(w)(Fraction(-u * u))
            assert math.isclose(braids.nabla_at_u(w.letters, u), float(exact), rel_tol=1e-8, abs_tol=1e-8)


def test_exponent_sum_and_record(random_braid_word):
    w = random_braid_word(12)
    rec = braids.alexander_record(w)
    assert rec.p == sum(1 if s > 0 else -1 for s in w.letters)
    data = json.loads(json.dumps(rec.to_json()))
    assert LaurentPoly.from_json(data["nabla"]) == rec.nabla


def test_non_braid_word_rejected():
    from hypwalk.groups import hecke

    with pytest.raises(ValueError):
        braids.alexander_polynomial(Word((1, 2), hecke(3)))


def test_statistics_reproducible_and_consistent():
    a = braids.alexander_statistics([20, 40], 300, 1.2, seed=6)
    b = braids.alexander_statistics([20, 40], 300, 1.2, seed=6, workers=2)
    assert np.array_equal(a.p, b.p)
    assert np.array_equal(a.log_nabla, b.log_nabla, equal_nan=True)
    # p has the parity of n and variance close to n
    assert np.all(a.p[:, 0] % 2 == 0)
    assert abs(a.p_variance(40).variance / 40 - 1) < 0.25
    h, _, _ = a.histogram(40, bins=10)
    assert h.sum() == np.isfinite(a.log_nabla[:, 1]).sum()


def test_statistics_match_exact_polynomials():
    st = braids.alexander_statistics([12], 20, 1.2, seed=2)
    from hypwalk.stats import block_rng

    rng = block_rng(2, 0)
    codes = np.array([1, -1, 2, -2])[rng.integers(0, 4, size=(20, 12))]
    for row, ln in zip(codes, st.log_nabla[:, 0]):
        val = float(braids.alexander_polynomial(Word(tuple(row), b3_sigma()))(Fraction(-36, 25)))
        if val == 0:
            assert not np.isfinite(ln)
        else:
            assert math.isclose(ln, math.log(abs(val)), rel_tol=1e-8, abs_tol=1e-8)


def test_asymptotic_form():
    from hypwalk.hyperbolic import LyapunovResult

    g = LyapunovResult(0.1, 0.02, "fixed", 0.001)
    res = braids.asymptotic_alexander(20, 1.2, g)
    assert math.isclose(res.value, (1 - math.exp(1.0)) / (1 - 1.44 + 1.2 ** 4))
    with pytest.raises(ValueError):
        braids.asymptotic_alexander(20, -1.0, g)
