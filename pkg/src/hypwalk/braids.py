"""Alexander polynomials of closed 3-braids from the Magnus representation.

For a braid w with Magnus matrix M(t), (1 + t + t^2) nabla(t) = det(M - I)
= det M + 1 - Tr M.  At real u = sqrt(-t) the normalized generators have
determinant one, which links nabla to the hyperbolic length of w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .groups import (
    Word,
    b3_sigma,
    det2,
    exponent_sum,
    identity2,
    magnus_generator,
    matrix_of_word,
    mul2,
    trace2,
    _inverse2,
)
from .hyperbolic import LyapunovResult, lyapunov_mc
from .laurent import LaurentPoly, NonExactDivision
from .stats import Estimate, block_rng, block_sizes, run_blocks

CYCLOTOMIC = LaurentPoly({0: 1, 1: 1, 2: 1})  # 1 + t + t^2


class RepresentationBug(AssertionError):
    """(1 + t + t^2) failed to divide det(M - I); this indicates wrong generator matrices."""


class PoleError(ValueError):
    pass


def _require_b3(w: Word) -> None:
    if not w.framing.is_braid or w.framing.letters[0] != "sigma1":
        raise ValueError("expected a braid word over sigma1, sigma2")


_GENS = {}


def _generator(s: int):
    g = _GENS.get(s)
    if g is None:
        m = magnus_generator(abs(s), "laurent")
        g = _GENS[s] = m if s > 0 else _inverse2(m)
    return g


def magnus_matrix(w: Word):
    """Magnus product of ``w`` over Laurent polynomials."""
    _require_b3(w)
    m = identity2("laurent")
    for s in w.letters:
        m = mul2(m, _generator(s))
    return m


def alexander_numerator(w: Word) -> LaurentPoly:
    m = magnus_matrix(w)
    return det2(m) + 1 - trace2(m)


def alexander_polynomial(w: Word) -> LaurentPoly:
    """nabla(t) = (det M + 1 - Tr M) / (1 + t + t^2), with exact division enforced."""
    num = alexander_numerator(w)
    try:
        return num.exact_div(CYCLOTOMIC)
    except NonExactDivision as exc:
        raise RepresentationBug(str(exc)) from exc


def exponent_sum_p(w: Word) -> int:
    """p(w) = (# positive letters) - (# negative letters)."""
    _require_b3(w)
    return exponent_sum(w)


@dataclass(frozen=True)
class AlexanderRecord:
    word: tuple[int, ...]
    nabla: LaurentPoly
    p: int
    trace_log: float

    def to_json(self) -> dict:
        return {"word": list(self.word), "nabla": self.nabla.to_json(), "p": self.p,
                "trace_log": self.trace_log}


def alexander_record(w: Word, u: float = 1.0) -> AlexanderRecord:
    from .groups import b3_sigma as _b3

    mu = matrix_of_word(Word(w.letters, _b3(u)), "float")
    tr = float((mu * mu).sum())
    return AlexanderRecord(w.letters, alexander_polynomial(w), exponent_sum_p(w), math.log(tr))


def nabla_of_central_power(f: int) -> LaurentPoly:
    """nabla of Delta^(2f): the Magnus image is t^(3f) I, so nabla = (t^(3f) - 1)^2 / (1 + t + t^2)."""
    x = LaurentPoly.monomial(3 * f) - 1
    return (x * x).exact_div(CYCLOTOMIC)


# ---------------------------------------------------------------------------
# asymptotics at real u


def _pole_check(u: float) -> float:
    den = 1 - u * u + u ** 4
    if abs(den) < 1e-12:
        raise PoleError(f"1 - u^2 + u^4 vanishes at u = {u}")
    return den


@dataclass
class AsymptoticAlexander:
    n: int
    u: float
    value: float
    gamma: LyapunovResult
    value_error: float

    def to_dict(self) -> dict:
        return {"n": self.n, "u": self.u, "value": self.value, "value_error": self.value_error,
                "gamma1": self.gamma.gamma1, "gamma1_se": self.gamma.standard_error}


def asymptotic_alexander(n: int, u: float, gamma: LyapunovResult | None = None,
                         walk_n: int = 10_000, samples: int = 500, seed: int = 0) -> AsymptoticAlexander:
    """Typical value (1 - exp(n gamma_1(u) / 2)) / (1 - u^2 + u^4)."""
    from .groups import psl2z_sigma

    if u <= 0:
        raise ValueError("u must be positive")
    den = _pole_check(u)
    if gamma is None:
        gamma = lyapunov_mc(psl2z_sigma(u), "simple", walk_n, samples, seed)
    e = math.exp(n * gamma.gamma1 / 2)
    value = (1 - e) / den
    err = abs(n / 2 * e / den) * (gamma.standard_error or 0.0)
    return AsymptoticAlexander(n, u, value, gamma, err)


def nabla_at_u(letters: Sequence[int], u: float) -> float:
    """nabla(t = -u^2) evaluated in floating point from the determinant-one product."""
    den = _pole_check(u)
    m = np.eye(2)
    g = {1: np.array([[u, 1 / u], [0, 1 / u]]), 2: np.array([[1 / u, 0], [-u, u]])}
    g[-1] = np.linalg.inv(g[1])
    g[-2] = np.linalg.inv(g[2])
    p = 0
    for s in letters:
        m = m @ g[s]
        p += 1 if s > 0 else -1
    return (u ** (2 * p) - u ** p * (m[0, 0] + m[1, 1]) + 1) / den


def _stats_block(seed, block, size, checkpoints, u):
    rng = block_rng(seed, block)
    n = int(checkpoints[-1])
    moves = rng.integers(0, 4, size=(size, n))
    codes = np.array([1, -1, 2, -2])[moves]
    g1 = np.array([[u, 1 / u], [0, 1 / u]])
    g2 = np.array([[1 / u, 0], [-u, u]])
    mats = {1: g1, -1: np.linalg.inv(g1), 2: g2, -2: np.linalg.inv(g2)}
    stack = np.stack([mats[c] for c in (1, -1, 2, -2)])
    m = np.tile(np.eye(2), (size, 1, 1))
    p = np.zeros(size, dtype=np.int64)
    den = 1 - u * u + u ** 4
    out_p = np.empty((size, len(checkpoints)), dtype=np.int64)
    out_l = np.empty((size, len(checkpoints)))
    c = 0
    for t in range(n):
        m = np.einsum("sij,sjk->sik", m, stack[moves[:, t]])
        p += np.sign(codes[:, t])
        while c < len(checkpoints) and checkpoints[c] == t + 1:
            tr = m[:, 0, 0] + m[:, 1, 1]
            terms = u ** (2.0 * p) - u ** (1.0 * p) * tr + 1
            # cancellation to round-off means nabla(u) = 0 exactly
            scale = u ** (2.0 * p) + u ** (1.0 * p) * np.abs(tr) + 1
            val = np.where(np.abs(terms) <= 1e-9 * scale, 0.0, terms / den)
            out_p[:, c] = p
            with np.errstate(divide="ignore"):
                out_l[:, c] = np.log(np.abs(val))
            c += 1
    return out_p, out_l


@dataclass
class AlexanderStatistics:
    u: float
    checkpoints: list
    p: np.ndarray  # (samples, checkpoints)
    log_nabla: np.ndarray
    seed: int
    slope: float = field(default=math.nan)
    slope_error: float = field(default=math.nan)

    def p_variance(self, n: int) -> Estimate:
        c = self.checkpoints.index(n)
        return Estimate.from_samples(self.p[:, c].astype(float), self.seed)

    def mean_log_nabla(self) -> list[Estimate]:
        out = []
        for c in range(len(self.checkpoints)):
            x = self.log_nabla[:, c]
            out.append(Estimate.from_samples(x[np.isfinite(x)], self.seed))
        return out

    def histogram(self, n: int, bins: int = 50) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = self.checkpoints.index(n)
        x = self.log_nabla[:, c]
        ok = np.isfinite(x)
        return np.histogram2d(self.p[ok, c], x[ok], bins=bins)


def alexander_statistics(checkpoints: Sequence[int], samples: int, u: float, seed: int = 0,
                         workers: int = 1) -> AlexanderStatistics:
    """Joint samples of (p, ln |nabla(u)|) for uniform random braids at several lengths.

    The slope of <ln |nabla(u)|> against n is fitted by least squares over the checkpoints.
    """
    _pole_check(u)
    cps = sorted(set(int(c) for c in checkpoints))
    args = [(seed, b, size, np.array(cps), float(u)) for b, size in enumerate(block_sizes(samples))]
    res = run_blocks(_stats_block, args, workers)
    p = np.concatenate([r[0] for r in res])
    ln = np.concatenate([r[1] for r in res])
    st = AlexanderStatistics(float(u), cps, p, ln, seed)
    if len(cps) >= 2:
        means = st.mean_log_nabla()
        y = np.array([e.mean for e in means])
        w = np.array([1 / max(e.standard_error, 1e-12) ** 2 for e in means])
        x = np.array(cps, dtype=float)
        coef, cov = np.polyfit(x, y, 1, w=np.sqrt(w), cov="unscaled")
        st.slope = float(coef[0])
        st.slope_error = float(math.sqrt(cov[0, 0]))
    return st


def random_braid(rng: np.random.Generator, length: int) -> Word:
    codes = np.array([1, -1, 2, -2])[rng.integers(0, 4, size=length)]
    return Word(tuple(int(c) for c in codes), b3_sigma())


def check_divisibility(samples: int, max_len: int = 40, seed: int = 0) -> int:
    """Number of random braids (lengths uniform in 0..max_len) where the exact division fails."""
    rng = block_rng(seed, 0)
    failures = 0
    for _ in range(samples):
        w = random_braid(rng, int(rng.integers(0, max_len + 1)))
        _, r = alexander_numerator(w).divmod(CYCLOTOMIC)
        if not r.is_zero():
            failures += 1
    return failures


def evaluate_directly(w: Word, t: Fraction) -> Fraction:
    """det(M(t) - I) / (1 + t + t^2) computed over the rationals at a fixed t."""
    m = matrix_of_word(w, "exact", t)
    num = (m[0][0] - 1) * (m[1][1] - 1) - m[0][1] * m[1][0]
    return num / (1 + t + t * t)
