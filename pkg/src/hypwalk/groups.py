"""Framings, free-product normal forms, word lengths and the B3 central extension.

Every group handled here is either a free product of cyclic groups
(``Z2 * Zq`` for Hecke groups, ``Z2 * Z2 * Z2`` for the idempotent free framing,
``Z * Z`` for the free group) or the braid group B3, which is carried as a pair
(normal form of its image in PSL(2,Z) = Z2 * Z3, power of the central element).

Letters of a word are signed 1-based indices into ``Framing.letters``;
``-i`` is the formal inverse of letter ``i``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .laurent import LaurentPoly

INFINITE = 0  # order code for an infinite cyclic factor

Syllable = tuple[int, int]  # (factor index, exponent)


class MalformedWord(ValueError):
    pass


class UnsupportedMode(ValueError):
    pass


class ResourceLimit(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# free products of cyclic groups


@dataclass(frozen=True)
class FreeProduct:
    orders: tuple[int, ...]
    names: tuple[str, ...]

    def norm(self, factor: int, exp: int) -> int:
        m = self.orders[factor]
        return exp % m if m else exp

    def push(self, stack: list[Syllable], factor: int, exp: int) -> None:
        """Right-multiply the reduced syllable list ``stack`` in place."""
        exp = self.norm(factor, exp)
        if exp == 0:
            return
        if stack and stack[-1][0] == factor:
            e = self.norm(factor, stack[-1][1] + exp)
            stack.pop()
            if e:
                stack.append((factor, e))
        else:
            stack.append((factor, exp))

    def reduce(self, syllables: Iterable[Syllable]) -> "NormalForm":
        stack: list[Syllable] = []
        for f, e in syllables:
            self.push(stack, f, e)
        return NormalForm(self, tuple(stack))

    def inverse(self, syllables: Sequence[Syllable]) -> tuple[Syllable, ...]:
        return tuple((f, self.norm(f, -e)) for f, e in reversed(syllables))

    def syllable_cost(self, factor: int, exp: int) -> int:
        m = self.orders[factor]
        if m:
            return min(exp, m - exp)
        return abs(exp)


@dataclass(frozen=True)
class NormalForm:
    """Alternating reduced form of a free-product element."""

    group: FreeProduct
    syllables: tuple[Syllable, ...] = ()

    def __len__(self) -> int:
        return len(self.syllables)

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        stack = list(self.syllables)
        for f, e in other.syllables:
            self.group.push(stack, f, e)
        return NormalForm(self.group, tuple(stack))

    def inverse(self) -> "NormalForm":
        return NormalForm(self.group, self.group.inverse(self.syllables))

    def count(self, factor: int) -> int:
        return sum(1 for f, _ in self.syllables if f == factor)

    def __str__(self) -> str:
        if not self.syllables:
            return "e"
        out = []
        for f, e in self.syllables:
            name = self.group.names[f]
            out.append(name if e == 1 else f"{name}^{e}")
        return " ".join(out)


def hecke_group(q: int) -> FreeProduct:
    if not 3 <= q <= 64:
        raise ValueError(f"Hecke q must lie in 3..64, got {q}")
    return FreeProduct((2, q), ("a", "b"))


PSL2Z = hecke_group(3)
A, B = 0, 1  # factor indices in Z2 * Zq


# ---------------------------------------------------------------------------
# framings


def _mat(rows) -> np.ndarray:
    return np.array(rows, dtype=float)


@dataclass(frozen=True)
class Framing:
    """A generating set for one of the supported groups.

    ``images[i]`` is the syllable word of letter ``i+1`` in ``group`` (for B3
    framings, the image under the quotient map to PSL(2,Z)); ``weights`` is
    the exponent-sum weight of each letter in B3 (zero elsewhere).
    """

    group_id: str
    letters: tuple[str, ...]
    group: FreeProduct
    images: tuple[tuple[Syllable, ...], ...]
    orders: tuple[int, ...]
    weights: tuple[int, ...] = ()
    metric: str = "syllable"
    q: int | None = None
    u: float | None = None
    _index: dict = field(default=None, compare=False, hash=False, repr=False)

    @property
    def is_braid(self) -> bool:
        return self.group_id == "B3"

    @property
    def n_letters(self) -> int:
        return len(self.letters)

    def check_letter(self, s: int) -> None:
        if not isinstance(s, (int, np.integer)) or s == 0 or abs(s) > len(self.letters):
            raise MalformedWord(f"letter {s!r} not in framing {self.group_id} {self.letters}")

    def image(self, s: int) -> tuple[Syllable, ...]:
        self.check_letter(s)
        img = self.images[abs(s) - 1]
        return img if s > 0 else self.group.inverse(img)

    def weight(self, s: int) -> int:
        if not self.weights:
            return 0
        w = self.weights[abs(s) - 1]
        return w if s > 0 else -w

    def moves(self, kind: str = "simple") -> tuple[int, ...]:
        """Signed letters available to a walk.

        ``simple`` drops the formal inverse of order-2 letters (a2 = a2^-1),
        ``magnetic`` keeps every formal letter since the flux tells them apart.
        """
        out = []
        for i, m in enumerate(self.orders, start=1):
            out.append(i)
            if kind == "magnetic" or m != 2:
                out.append(-i)
        return tuple(out)

    def letter_name(self, s: int) -> str:
        self.check_letter(s)
        name = self.letters[abs(s) - 1]
        return name if s > 0 else name + "^-1"

    # matrix representations -------------------------------------------------

    def letter_matrix(self, s: int, mode: str = "float", t=None):
        """Matrix of a signed letter; see :func:`matrix_of_word` for modes."""
        self.check_letter(s)
        m = _generator_matrix(self, abs(s), mode, t)
        if s > 0:
            return m
        return _inverse2(m)

    # index table for JSON serialization
    def index_table(self) -> dict[str, int]:
        table = {}
        for i, name in enumerate(self.letters, start=1):
            table[name] = i
            table[name + "^-1"] = -i
        return table


def _hecke_letters(q: int) -> Framing:
    g = hecke_group(q)
    return Framing(
        group_id="PSL2Z" if q == 3 else f"H{q}",
        letters=("a", "b"),
        group=g,
        images=(((A, 1),), ((B, 1),)),
        orders=(2, q),
        q=q,
    )


def hecke(q: int) -> Framing:
    """H_q = Z2 * Zq in the framing {a2, b_q, b_q^-1}."""
    return _hecke_letters(q)


def psl2z_st() -> Framing:
    """PSL(2,Z) in the framing {S, T, T^-1} with S = a2, T = a2 b3."""
    return Framing(
        group_id="PSL2Z_ST",
        letters=("S", "T"),
        group=PSL2Z,
        images=(((A, 1),), ((A, 1), (B, 1))),
        orders=(2, INFINITE),
        metric="none",
        q=3,
    )


def psl2z_sigma(u: float | None = None) -> Framing:
    """PSL(2,Z) (or its deformation PSL(2,Z)_u) in the framing of projected braid generators.

    sigma1_bar = a2 b3 and sigma2_bar = b3 a2.
    """
    return Framing(
        group_id="PSL2Z_sigma" if u is None else "PSL2Z_u",
        letters=("s1", "s2"),
        group=PSL2Z,
        images=(((A, 1), (B, 1)), ((B, 1), (A, 1))),
        orders=(INFINITE, INFINITE),
        weights=(1, 1),
        metric="sigma",
        q=3,
        u=u,
    )


def b3_sigma(u: float | None = None) -> Framing:
    """Braid group B3 with the Artin generators sigma1, sigma2."""
    return Framing(
        group_id="B3",
        letters=("sigma1", "sigma2"),
        group=PSL2Z,
        images=(((A, 1), (B, 1)), ((B, 1), (A, 1))),
        orders=(INFINITE, INFINITE),
        weights=(1, 1),
        metric="braid",
        q=3,
        u=u,
    )


def b3_ab() -> Framing:
    """B3 with a~ = sigma1 sigma2 sigma1 and b~ = sigma1^-1 sigma2^-1."""
    return Framing(
        group_id="B3",
        letters=("a~", "b~"),
        group=PSL2Z,
        images=(((A, 1),), ((B, 1),)),
        orders=(INFINITE, INFINITE),
        weights=(3, -2),
        metric="braid",
        q=3,
    )


def free_idempotent(n: int = 3) -> Framing:
    """Z2 * ... * Z2 (n factors) with idempotent generators g_1..g_n."""
    names = tuple(f"g{i}" for i in range(1, n + 1))
    return Framing(
        group_id=f"F{n}_idem",
        letters=names,
        group=FreeProduct((2,) * n, names),
        images=tuple(((i, 1),) for i in range(n)),
        orders=(2,) * n,
        q=n,
    )


def free_group(n: int = 2) -> Framing:
    """Free group on h_1..h_n; the walk uses h_i and h_i^-1."""
    names = tuple(f"h{i}" for i in range(1, n + 1))
    return Framing(
        group_id=f"F{n}",
        letters=names,
        group=FreeProduct((INFINITE,) * n, names),
        images=tuple(((i, 1),) for i in range(n)),
        orders=(INFINITE,) * n,
    )


def backbone_framing(q: int) -> Framing:
    """Backbone free subgroup of H_q: g_i = b^-i a b^i, i = 1..q, as letters over H_q."""
    g = hecke_group(q)
    images = tuple(g.reduce([(B, -i), (A, 1), (B, i)]).syllables for i in range(1, q + 1))
    return Framing(
        group_id=f"H{q}_backbone",
        letters=tuple(f"g{i}" for i in range(1, q + 1)),
        group=g,
        images=images,
        orders=(2,) * q,
        q=q,
    )


FRAMINGS = {
    "H3": lambda: hecke(3),
    "PSL2Z": lambda: hecke(3),
    "PSL2Z_ST": psl2z_st,
    "PSL2Z_sigma": psl2z_sigma,
    "B3": b3_sigma,
    "B3_ab": b3_ab,
    "F3_idem": lambda: free_idempotent(3),
    "F2": lambda: free_group(2),
}


def get_framing(name: str) -> Framing:
    """Look up a framing by its CLI name; ``H<q>`` selects a Hecke group."""
    if name in FRAMINGS:
        return FRAMINGS[name]()
    if name.startswith("H") and name[1:].isdigit():
        return hecke(int(name[1:]))
    if name.startswith("F") and name.endswith("_idem") and name[1:-5].isdigit():
        return free_idempotent(int(name[1:-5]))
    if name.startswith("F") and name[1:].isdigit():
        return free_group(int(name[1:]))
    raise KeyError(f"unknown framing {name!r}")


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    letters: tuple[int, ...]
    framing: Framing

    def __post_init__(self):
        letters = tuple(int(s) for s in self.letters)
        for s in letters:
            self.framing.check_letter(s)
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: "Word") -> "Word":
        if other.framing != self.framing:
            raise MalformedWord("cannot concatenate words over different framings")
        return Word(self.letters + other.letters, self.framing)

    def inverse(self) -> "Word":
        return Word(tuple(-s for s in reversed(self.letters)), self.framing)

    def to_json(self) -> list[int]:
        return list(self.letters)

    @classmethod
    def from_json(cls, data: Sequence[int], framing: Framing) -> "Word":
        return cls(tuple(data), framing)


def word(framing: Framing, *letters: int) -> Word:
    return Word(tuple(letters), framing)


# ---------------------------------------------------------------------------
# reduction and lengths


def reduce_word(w: Word) -> NormalForm:
    """Normal form of the image of ``w`` in the framing's free product."""
    g = w.framing.group
    stack: list[Syllable] = []
    for s in w.letters:
        for f, e in w.framing.image(s):
            g.push(stack, f, e)
    return NormalForm(g, tuple(stack))


def reduce_free_product(w: Word) -> NormalForm:
    if w.framing.is_braid:
        raise MalformedWord("use project_b3 for braid words")
    return reduce_word(w)


def irreducible_length(nf: NormalForm, framing: Framing | None = None) -> int:
    """Word length of ``nf`` in the framing's generators.

    Syllable framings ({a2, b_q, b_q^-1}, idempotent and free framings) cost
    min(e, m - e) per syllable; the projected-braid framing of PSL(2,Z) uses
    :func:`sigma_bar_length`.
    """
    metric = framing.metric if framing is not None else "syllable"
    if metric == "syllable":
        return sum(nf.group.syllable_cost(f, e) for f, e in nf.syllables)
    if metric in ("sigma", "braid"):
        return sigma_bar_length(nf)
    raise UnsupportedMode(f"no closed-form length for framing {framing.group_id}")


def backbone_generation(nf: NormalForm) -> int:
    """Number of a2-syllables: distance between root cell and element cell on the backbone tree."""
    return nf.count(A)


def _eps(e: int) -> int:
    # b3 exponent 1 -> +1, exponent 2 (= b3^-1) -> -1
    return 1 if e == 1 else -1


_PAIR_AB = {1: 1, -1: -2}  # a b^eps   -> s1 | s2^-1
_PAIR_BA = {1: 2, -1: -1}  # b^eps a   -> s2 | s1^-1


def sigma_bar_geodesic(nf: NormalForm) -> tuple[int, ...]:
    """A shortest word in {s1, s2, s1^-1, s2^-1} (codes 1, 2, -1, -2) for a PSL(2,Z) element.

    Each projected braid letter contributes exactly one a2, so the a-syllable
    count A bounds the length from below; the exponent-sum class mod 2 and the
    b-syllable count fix the boundary corrections (length A, A+2 when the form
    starts and ends with b3, and 3 for a2 itself).
    """
    if nf.group.orders != (2, 3):
        raise UnsupportedMode("sigma-bar framing is defined on PSL(2,Z) = Z2 * Z3")
    syl = nf.syllables
    if not syl:
        return ()
    first, last = syl[0][0], syl[-1][0]
    out: list[int] = []
    if first == A and last == B:
        for i in range(0, len(syl), 2):
            out.append(_PAIR_AB[_eps(syl[i + 1][1])])
    elif first == B and last == A:
        for i in range(0, len(syl), 2):
            out.append(_PAIR_BA[_eps(syl[i][1])])
    elif first == A:  # a ... a
        if len(syl) == 1:
            return (1, 2, 1)
        e1 = _eps(syl[1][1])
        out.append(_PAIR_AB[-e1])
        out.append(_PAIR_BA[-e1])
        for i in range(3, len(syl), 2):
            out.append(_PAIR_BA[_eps(syl[i][1])])
    else:  # b ... b
        e0 = _eps(syl[0][1])
        out.append(_PAIR_BA[-e0])
        out.append(_PAIR_AB[-e0])
        for i in range(2, len(syl), 2):
            out.append(_PAIR_AB[_eps(syl[i][1])])
    return tuple(out)


def sigma_bar_length(nf: NormalForm) -> int:
    syl = nf.syllables
    if not syl:
        return 0
    n_a = nf.count(A)
    if syl[0][0] == B and syl[-1][0] == B:
        return n_a + 2
    if len(syl) == 1 and syl[0][0] == A:
        return 3
    return n_a


# ---------------------------------------------------------------------------
# B3 as a central extension of PSL(2,Z)


@dataclass(frozen=True)
class NormalFormB3:
    projection: NormalForm
    center_exponent: int  # power of Delta^2 relative to the section lift

    @property
    def is_identity(self) -> bool:
        return self.projection.is_identity and self.center_exponent == 0


def exponent_sum(w: Word) -> int:
    """Image of ``w`` under the abelianization B3 -> Z (sigma_i^{+-1} -> +-1)."""
    return sum(w.framing.weight(s) for s in w.letters)


def section_exponent(nf: NormalForm) -> int:
    """Exponent sum of the section lift a2 -> s1 s2 s1, b3^e -> (s1^-1 s2^-1)^e."""
    total = 0
    for f, e in nf.syllables:
        total += 3 if f == A else -2 * e
    return total


def _require_braid(w: Word) -> None:
    if not w.framing.is_braid:
        raise MalformedWord(f"expected a B3 word, got framing {w.framing.group_id}")


def project_b3(w: Word) -> NormalForm:
    _require_braid(w)
    return reduce_word(w)


def b3_normal_form(w: Word) -> NormalFormB3:
    proj = project_b3(w)
    diff = exponent_sum(w) - section_exponent(proj)
    assert diff % 6 == 0, f"center exponent not integral for {w.letters}"
    return NormalFormB3(proj, diff // 6)


def b3_is_trivial(w: Word) -> bool:
    return b3_normal_form(w).is_identity


def geodesic_center_exponent(w: Word) -> int:
    """Power f of Delta^2 with w = Delta^(2f) * (letterwise lift of a shortest projected word)."""
    proj = project_b3(w)
    diff = exponent_sum(w) - sum(1 if c > 0 else -1 for c in sigma_bar_geodesic(proj))
    assert diff % 6 == 0
    return diff // 6


def b3_length_bounds(w: Word) -> tuple[int, int]:
    """Lower and upper bounds on the sigma-length of a braid.

    lower: length of the projection in PSL(2,Z); upper: length of the explicit
    word Delta^(2f) * lift(geodesic), i.e. 6|f| + lower.
    """
    proj = project_b3(w)
    lower = sigma_bar_length(proj)
    f = geodesic_center_exponent(w)
    return lower, lower + 6 * abs(f)


# ---------------------------------------------------------------------------
# matrix representations


def _inverse2(m):
    a, b = m[0][0], m[0][1]
    c, d = m[1][0], m[1][1]
    if isinstance(m, np.ndarray):
        det = a * d - b * c
        return np.array([[d, -b], [-c, a]]) / det
    det = a * d - b * c
    if isinstance(det, LaurentPoly):
        inv = det ** -1  # determinants of generator matrices are monomials
        return [[d * inv, -b * inv], [-c * inv, a * inv]]
    return [[d / det, -b / det], [-c / det, a / det]]


def mul2(x, y):
    if isinstance(x, np.ndarray):
        return x @ y
    return [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]


def det2(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def trace2(m):
    return m[0][0] + m[1][1]


def identity2(mode: str):
    if mode == "float":
        return np.eye(2)
    if mode == "exact":
        return [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    if mode == "laurent":
        return [[LaurentPoly.const(1), LaurentPoly()], [LaurentPoly(), LaurentPoly.const(1)]]
    raise UnsupportedMode(f"unknown arithmetic mode {mode!r}")


S_HAT = ((0, 1), (-1, 0))
T_HAT = ((1, 1), (0, 1))


def _convert(rows, mode):
    if mode == "float":
        return _mat(rows)
    if mode == "exact":
        return [[Fraction(x) for x in r] for r in rows]
    raise UnsupportedMode(mode)


def _hecke_gen(which: str, q: int, mode: str):
    lam = 2 * math.cos(math.pi / q)
    if mode == "exact":
        if q != 3:
            raise UnsupportedMode(f"2cos(pi/{q}) is irrational; use float mode")
        lam = 1
    elif mode != "float":
        raise UnsupportedMode(f"mode {mode!r} not available for Hecke framings")
    if which == "a":
        return _convert(S_HAT, mode)
    # b_q = S T_q
    return _convert(((0, 1), (-1, -lam)), mode)


def magnus_generator(i: int, mode: str = "laurent", t=None):
    """Magnus matrices sigma1 = [[-t, 1], [0, 1]], sigma2 = [[1, 0], [t, -t]]."""
    if mode == "laurent":
        tt = LaurentPoly.t()
        one, zero = LaurentPoly.const(1), LaurentPoly()
    elif mode == "exact":
        if t is None:
            raise UnsupportedMode("exact Magnus matrices need a rational t")
        tt, one, zero = Fraction(t), Fraction(1), Fraction(0)
    elif mode == "float":
        if t is None:
            raise UnsupportedMode("float Magnus matrices need a numeric t")
        return _mat([[-t, 1], [0, 1]] if i == 1 else [[1, 0], [t, -t]])
    else:
        raise UnsupportedMode(mode)
    if i == 1:
        return [[-tt, one], [zero, one]]
    return [[one, zero], [tt, -tt]]


def normalized_braid_generator(i: int, u, mode: str = "float"):
    """Determinant-one generators at u = sqrt(-t): [[u, 1/u], [0, 1/u]] and [[1/u, 0], [-u, u]]."""
    if mode == "exact":
        u = Fraction(u)
        rows = [[u, 1 / u], [0, 1 / u]] if i == 1 else [[1 / u, 0], [-u, u]]
        return [[Fraction(x) for x in r] for r in rows]
    if mode != "float":
        raise UnsupportedMode(mode)
    u = float(u)
    return _mat([[u, 1 / u], [0, 1 / u]] if i == 1 else [[1 / u, 0], [-u, u]])


_SANOV = (((1, 2), (0, 1)), ((1, 0), (2, 1)))


def _generator_matrix(fr: Framing, i: int, mode: str, t):
    gid = fr.group_id
    if gid in ("PSL2Z", ) or (gid.startswith("H") and gid[1:].isdigit()):
        return _hecke_gen("a" if i == 1 else "b", fr.q, mode)
    if gid == "PSL2Z_ST":
        return _convert(S_HAT if i == 1 else T_HAT, mode)
    if gid in ("PSL2Z_sigma", "PSL2Z_u"):
        return normalized_braid_generator(i, 1 if fr.u is None else fr.u, mode)
    if gid == "B3":
        if fr.letters[0] == "a~":
            s1 = _generator_matrix(b3_sigma(fr.u), 1, mode, t)
            s2 = _generator_matrix(b3_sigma(fr.u), 2, mode, t)
            if i == 1:
                return mul2(mul2(s1, s2), s1)
            return mul2(_inverse2(s1), _inverse2(s2))
        if fr.u is not None and mode != "laurent" and t is None:
            return normalized_braid_generator(i, fr.u, mode)
        return magnus_generator(i, mode, t)
    if gid.endswith("_backbone") or gid.endswith("_idem"):
        # g_i = b^-i a b^i inside H_q; the idempotent free framing reuses it
        q = fr.q
        a = _hecke_gen("a", q, mode)
        b = _hecke_gen("b", q, mode)
        binv = _inverse2(b)
        m = a
        for _ in range(i):
            m = mul2(mul2(binv, m), b)
        return m
    if gid == "F2":
        return _convert(_SANOV[i - 1], mode)
    if gid.startswith("F") and gid[1:].isdigit():
        # free group of rank n inside Z2^{*(n+1)}: h_i = g_1 g_{i+1}
        n = int(gid[1:])
        idem = free_idempotent(n + 1)
        return mul2(_generator_matrix(idem, 1, mode, t), _generator_matrix(idem, i + 1, mode, t))
    raise UnsupportedMode(f"no matrix representation for {gid}")


def matrix_of_word(w: Word, mode: str = "float", t=None):
    """Product of generator matrices in word order.

    ``mode`` is ``float`` (numpy array), ``exact`` (nested lists of Fraction)
    or ``laurent`` (nested lists of LaurentPoly in t, B3 only). ``t`` fixes the
    Magnus parameter for B3 words in exact/float mode.
    """
    m = identity2(mode)
    fr = w.framing
    if mode == "laurent" and not fr.is_braid:
        raise UnsupportedMode("laurent mode is only defined for the Magnus representation")
    cache = {}
    for s in w.letters:
        g = cache.get(s)
        if g is None:
            g = cache[s] = fr.letter_matrix(s, mode, t)
        m = mul2(m, g)
    return m


def matrices_equal(x, y) -> bool:
    return all(x[i][j] == y[i][j] for i in range(2) for j in range(2))


# ---------------------------------------------------------------------------
# brute-force Cayley ball


DEFAULT_MAX_RADIUS = 12


def element_key(fr: Framing, stack: tuple[Syllable, ...], exp_sum: int):
    if fr.is_braid:
        nf = NormalForm(fr.group, stack)
        return (stack, (exp_sum - section_exponent(nf)) // 6)
    return stack


@dataclass
class CayleyBall:
    framing: Framing
    radius: int
    distance: dict  # element key -> BFS distance
    edges: list  # (src index, dst index, signed letter)
    vertices: list  # element keys in BFS order

    def __len__(self) -> int:
        return len(self.vertices)

    def sphere_sizes(self) -> list[int]:
        sizes = [0] * (self.radius + 1)
        for d in self.distance.values():
            sizes[d] += 1
        return sizes

    def to_csv(self) -> str:
        lines = ["src,dst,generator"]
        for s, d, g in self.edges:
            lines.append(f"{s},{d},{g}")
        return "\n".join(lines) + "\n"


def cayley_ball(fr: Framing, radius: int, max_radius: int = DEFAULT_MAX_RADIUS,
                moves: Sequence[int] | None = None, max_vertices: int | None = None) -> CayleyBall:
    """Breadth-first ball of the Cayley graph; vertices are normal forms.

    For B3 framings a vertex is the pair (projection syllables, center exponent).
    """
    if radius > max_radius:
        raise ResourceLimit(f"radius {radius} exceeds limit {max_radius}")
    if moves is None:
        moves = fr.moves("simple")
    g = fr.group
    images = {s: fr.image(s) for s in moves}
    start = ((), 0)
    key0 = element_key(fr, (), 0)
    distance = {key0: 0}
    index = {key0: 0}
    vertices = [key0]
    edges = []
    queue = deque([start])
    while queue:
        stack, es = queue.popleft()
        src = element_key(fr, stack, es)
        d = distance[src]
        if d == radius:
            continue
        for s in moves:
            st = list(stack)
            for f, e in images[s]:
                g.push(st, f, e)
            new = (tuple(st), es + fr.weight(s))
            key = element_key(fr, new[0], new[1])
            if key not in distance:
                distance[key] = d + 1
                index[key] = len(vertices)
                vertices.append(key)
                queue.append(new)
                if max_vertices is not None and len(vertices) > max_vertices:
                    raise ResourceLimit(f"ball exceeds {max_vertices} vertices")
            edges.append((index[src], index[key], s))
    return CayleyBall(fr, radius, distance, edges, vertices)
