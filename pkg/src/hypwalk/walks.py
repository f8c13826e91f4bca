"""Monte Carlo random walks on the supported framings.

Simple walks pick each available move with probability 1/n_g; directed walks
never undo the previous move; magnetic walks keep a2 and a2^-1 apart so the
flux through closed paths can be accumulated.  All randomness comes from
:func:`hypwalk.stats.block_rng`, so a run is reproducible from its seed and
independent of the number of workers.
"""

from __future__ import annotations

import dataclasses
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels as K
from .groups import (
    Framing,
    hecke,
    irreducible_length,
    NormalForm,
    psl2z_sigma,
)
from .stats import Estimate, block_rng, block_sizes, run_blocks, wilson_interval

WALK_KINDS = ("simple", "directed", "magnetic")
CLOSURE_FILTERS = ("none", "projection-closed", "fully-trivial")
FUNCTIONALS = ("graph-L", "backbone-k", "b3-lower", "b3-upper")
DEFAULT_BUDGET = 2 * 10**10


class ConfigError(ValueError):
    pass


class InsufficientSamples(RuntimeError):
    pass


@dataclass(frozen=True)
class WalkConfig:
    framing: Framing
    steps: int
    samples: int
    seed: int = 0
    walk_kind: str = "simple"
    closure_filter: str = "none"
    workers: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if self.walk_kind not in WALK_KINDS:
            raise ConfigError(f"unknown walk kind {self.walk_kind!r}")
        if self.closure_filter not in CLOSURE_FILTERS:
            raise ConfigError(f"unknown closure filter {self.closure_filter!r}")
        if self.walk_kind == "directed" and len(self.moves) < 3:
            raise ConfigError("a directed walk needs at least two moves left after excluding the inverse")
        if self.steps * self.samples > self.budget:
            raise ConfigError(f"steps*samples = {self.steps * self.samples} exceeds budget {self.budget}")

    @property
    def moves(self) -> tuple[int, ...]:
        kind = "magnetic" if self.walk_kind == "magnetic" else "simple"
        return self.framing.moves(kind)


@dataclass(frozen=True)
class MoveTable:
    moves: tuple[int, ...]
    img_f: np.ndarray
    img_e: np.ndarray
    img_len: np.ndarray
    weights: np.ndarray
    orders: np.ndarray
    inverse_of: np.ndarray


def move_table(fr: Framing, moves: Sequence[int]) -> MoveTable:
    images = [fr.image(s) for s in moves]
    width = max(1, max(len(im) for im in images))
    img_f = np.zeros((len(moves), width), dtype=np.int64)
    img_e = np.zeros((len(moves), width), dtype=np.int64)
    img_len = np.zeros(len(moves), dtype=np.int64)
    for i, im in enumerate(images):
        img_len[i] = len(im)
        for j, (f, e) in enumerate(im):
            img_f[i, j] = f
            img_e[i, j] = e
    inverse_of = np.empty(len(moves), dtype=np.int64)
    for i, s in enumerate(moves):
        if -s in moves:
            inverse_of[i] = moves.index(-s)
        else:  # involution kept as a single move
            inverse_of[i] = i
    return MoveTable(
        tuple(moves), img_f, img_e, img_len,
        np.array([fr.weight(s) for s in moves], dtype=np.int64),
        np.array(fr.group.orders, dtype=np.int64),
        inverse_of,
    )


def block_moves(seed: int, block: int, size: int, steps: int, n_moves: int,
                directed: bool = False, inverse_of: np.ndarray | None = None) -> np.ndarray:
    """Move indices for one block; identical for every caller with the same arguments."""
    rng = block_rng(seed, block)
    if directed:
        u = rng.random((size, steps))
        return K.directed_moves(u, n_moves, inverse_of)
    return rng.integers(0, n_moves, size=(size, steps), dtype=np.uint8)


def _walk_block(table: MoveTable, seed: int, block: int, size: int, steps: int,
                checkpoints: np.ndarray, directed: bool, track_sigma: bool,
                braid_identity: bool, record_identity: bool):
    mv = block_moves(seed, block, size, steps, len(table.moves), directed, table.inverse_of)
    counts = np.zeros(steps if record_identity else 0, dtype=np.int64)
    out = K.walk_free_product(mv, table.img_f, table.img_e, table.img_len, table.weights,
                              table.orders, checkpoints, track_sigma, braid_identity, counts)
    return out, counts


@dataclass
class WalkStats:
    checkpoints: np.ndarray
    data: np.ndarray  # (samples, checkpoints, K.N_COLS)
    identity_counts: np.ndarray
    seed: int

    def column(self, col: int, n: int | None = None) -> np.ndarray:
        c = -1 if n is None else int(np.searchsorted(self.checkpoints, n))
        return self.data[:, c, col]


def _track_sigma(fr: Framing) -> bool:
    return fr.group.orders == (2, 3)


def walk_statistics(cfg: WalkConfig, checkpoints: Sequence[int] | None = None,
                    record_identity: bool = False, moves: Sequence[int] | None = None) -> WalkStats:
    """Run ``cfg.samples`` walks and collect per-sample statistics at the checkpoints."""
    fr = cfg.framing
    if checkpoints is None:
        checkpoints = [cfg.steps]
    cps = np.array(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if cps[0] < 1 or cps[-1] > cfg.steps:
        raise ConfigError("checkpoints must lie in 1..steps")
    table = move_table(fr, moves if moves is not None else cfg.moves)
    sizes = block_sizes(cfg.samples)
    args = [(table, cfg.seed, b, size, cfg.steps, cps, cfg.walk_kind == "directed",
             _track_sigma(fr), fr.is_braid, record_identity)
            for b, size in enumerate(sizes)]
    results = run_blocks(_walk_block, args, cfg.workers)
    data = np.concatenate([r[0] for r in results], axis=0)
    counts = np.sum([r[1] for r in results], axis=0) if record_identity else np.zeros(0, np.int64)
    return WalkStats(cps, data, counts, cfg.seed)


def functional_values(stats: WalkStats, fr: Framing, functional: str, n: int | None = None) -> np.ndarray:
    if functional not in FUNCTIONALS:
        raise ConfigError(f"unknown functional {functional!r}")
    if functional == "graph-L":
        if fr.is_braid:
            raise ConfigError("exact word length in B3 is not computed; use b3-lower or b3-upper")
        if fr.metric == "sigma":
            return stats.column(K.COL_LSIG, n)
        if fr.metric != "syllable":
            raise ConfigError(f"no length functional for framing {fr.group_id}")
        return stats.column(K.COL_LEN, n)
    if functional == "backbone-k":
        if fr.group.orders[0] != 2 or len(fr.group.orders) != 2:
            raise ConfigError("backbone generation is defined for Z2 * Zq framings")
        return stats.column(K.COL_NA, n)
    if not fr.is_braid:
        raise ConfigError(f"{functional} needs a B3 framing")
    lower = stats.column(K.COL_LSIG, n)
    if functional == "b3-lower":
        return lower
    gap = np.abs(stats.column(K.COL_EXPSUM, n) - stats.column(K.COL_EGEO, n))
    assert np.all(gap % 6 == 0)
    return lower + gap  # 6|f| with f = (e(w) - e(geodesic lift)) / 6


def simulate_drift(cfg: WalkConfig, functional: str = "graph-L") -> Estimate:
    """Estimate of <functional>/n after cfg.steps steps."""
    return drift_profile(cfg, functional, [cfg.steps])[cfg.steps]


def drift_profile(cfg: WalkConfig, functional: str, checkpoints: Sequence[int]) -> dict[int, Estimate]:
    """Drift estimates at several n from the same sample paths."""
    stats = walk_statistics(cfg, checkpoints)
    out = {}
    for n in stats.checkpoints:
        vals = functional_values(stats, cfg.framing, functional, int(n)) / float(n)
        out[int(n)] = Estimate.from_samples(vals, cfg.seed)
    return out


def simulate_directed_walk(cfg: WalkConfig) -> Estimate:
    if cfg.walk_kind != "directed":
        cfg = dataclasses.replace(cfg, walk_kind="directed")
    return simulate_drift(cfg, "graph-L")


def vertex_type_frequencies(cfg: WalkConfig) -> np.ndarray:
    """Fraction of samples at each vertex type of their current q-gon after cfg.steps steps.

    Type i (1-based) is the vertex at polygon distance i-1 from the vertex
    closest to the root.
    """
    q = cfg.framing.group.orders[1]
    stats = walk_statistics(cfg)
    tail = stats.column(K.COL_TAIL)
    depth = stats.column(K.COL_DEPTH)
    types = np.where(depth == 0, 0, tail)  # the root cell counts like any other
    counts = np.bincount(types, minlength=q // 2 + 1)[: q // 2 + 1]
    return counts / counts.sum()


# ---------------------------------------------------------------------------
# flux


def flux_framing(basis: str) -> Framing:
    """PSL(2,Z) walk framings carrying flux weights in units of h/6.

    ``ab``: a2^{+-1} -> +-3, b3^{+-1} -> +-2; ``sigma``: every projected braid letter -> +-1.
    """
    if basis == "ab":
        return dataclasses.replace(hecke(3), weights=(3, 2), group_id="PSL2Z_flux")
    if basis == "sigma":
        return psl2z_sigma()
    raise ConfigError(f"unknown flux basis {basis!r}")


FLUX_STEP_VARIANCE = {"ab": Fraction(13, 72), "sigma": Fraction(1, 36)}


@dataclass
class FluxResult:
    basis: str
    steps: int
    histogram: dict  # Phi/h in units of 1/6 -> count
    estimate: Estimate  # of Phi/h
    accepted: int
    proposals: int
    seed: int

    @property
    def variance_per_step(self) -> float:
        return self.estimate.variance / self.steps

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals

    def variance_standard_error(self) -> float:
        """Standard error of the sample variance, from the fourth central moment."""
        keys = np.array(list(self.histogram), dtype=float) / 6.0
        cnt = np.array(list(self.histogram.values()), dtype=float)
        n = cnt.sum()
        mu = (keys * cnt).sum() / n
        m2 = (((keys - mu) ** 2) * cnt).sum() / n
        m4 = (((keys - mu) ** 4) * cnt).sum() / n
        return math.sqrt(max(m4 - m2 * m2, 0.0) / n) / self.steps


def _flux_from_counts(rng, steps, size, basis):
    counts = rng.multinomial(steps, [0.25] * 4, size=size)
    if basis == "ab":
        # moves a, a^-1, b, b^-1
        return 3 * (counts[:, 0] - counts[:, 1]) + 2 * (counts[:, 2] - counts[:, 3])
    return (counts[:, 0] + counts[:, 2]) - (counts[:, 1] + counts[:, 3])


def _flux_block(seed, block, size, steps, basis):
    return _flux_from_counts(block_rng(seed, block), steps, size, basis)


def simulate_flux(cfg: WalkConfig, basis: str = "ab") -> FluxResult:
    """Flux Phi/h accumulated by PSL(2,Z) walks, optionally conditioned on closure.

    Without a closure filter the increments are iid, so each sample draws the
    four move counts from a multinomial law.  With ``projection-closed`` every
    proposal is walked on the group and only closed paths are kept.
    """
    fr = flux_framing(basis)
    if cfg.closure_filter == "none":
        sizes = block_sizes(cfg.samples)
        args = [(cfg.seed, b, size, cfg.steps, basis) for b, size in enumerate(sizes)]
        flux6 = np.concatenate(run_blocks(_flux_block, args, cfg.workers))
        accepted = proposals = cfg.samples
    else:
        wcfg = dataclasses.replace(cfg, framing=fr, walk_kind="magnetic", closure_filter="none")
        stats = walk_statistics(wcfg)
        closed = stats.column(K.COL_DEPTH) == 0
        flux6 = stats.column(K.COL_EXPSUM)[closed]
        accepted, proposals = int(closed.sum()), cfg.samples
        if accepted == 0:
            raise InsufficientSamples(
                f"no closed paths among {proposals} proposals at n={cfg.steps} (acceptance rate 0)")
    values, counts = np.unique(flux6, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(values, counts)}
    est = Estimate.from_samples(flux6 / 6.0, cfg.seed)
    return FluxResult(basis, cfg.steps, hist, est, accepted, proposals, cfg.seed)


def flux_of_word(letters: Sequence[int], basis: str = "ab") -> Fraction:
    """Phi/h of a word accumulated step by step (units of h)."""
    step = {"ab": {1: Fraction(1, 2), -1: Fraction(-1, 2), 2: Fraction(1, 3), -2: Fraction(-1, 3)},
            "sigma": {1: Fraction(1, 6), 2: Fraction(1, 6), -1: Fraction(-1, 6), -2: Fraction(-1, 6)}}[basis]
    total = Fraction(0)
    for s in letters:
        total += step[s]
    return total


# ---------------------------------------------------------------------------
# return probability


@dataclass(frozen=True)
class ReturnRow:
    n: int
    p_hat: float
    hits: int
    samples: int
    lo: float
    hi: float
    seed: int


def estimate_return_probability(fr: Framing, n_list: Sequence[int], samples: int,
                                seed: int = 0, workers: int = 1) -> list[ReturnRow]:
    """Fraction of walks sitting at the identity after n steps, for every n in n_list.

    All n share the same sample paths.  For B3 odd n is reported as an exact 0
    (the exponent sum has the parity of n).
    """
    if fr.group_id not in ("PSL2Z_sigma", "B3"):
        raise ConfigError("return probabilities are estimated on the projected-braid PSL(2,Z) framing or on B3")
    n_max = max(n_list)
    cfg = WalkConfig(fr, n_max, samples, seed, workers=workers)
    stats = walk_statistics(cfg, record_identity=True)
    rows = []
    for n in sorted(set(n_list)):
        if fr.is_braid and n % 2:
            rows.append(ReturnRow(n, 0.0, 0, samples, 0.0, 0.0, seed))
            continue
        k = int(stats.identity_counts[n - 1])
        lo, hi = wilson_interval(k, samples)
        rows.append(ReturnRow(n, k / samples, k, samples, lo, hi, seed))
    return rows


# ---------------------------------------------------------------------------
# exact enumeration (oracles)


def exact_distribution(fr: Framing, n: int, moves: Sequence[int] | None = None,
                       exact: bool = False) -> dict:
    """Law of the walk after n steps, keyed by (normal-form syllables, exponent sum).

    Probabilities are Fractions when ``exact`` is set.  Cost grows with the
    ball size, so this is meant for n up to about 12.
    """
    if moves is None:
        moves = fr.moves("simple")
    g = fr.group
    images = {s: fr.image(s) for s in moves}
    p = Fraction(1, len(moves)) if exact else 1.0 / len(moves)
    dist = {((), 0): Fraction(1) if exact else 1.0}
    for _ in range(n):
        new: dict = defaultdict(lambda: Fraction(0) if exact else 0.0)
        for (stack, es), pr in dist.items():
            w = pr * p
            for s in moves:
                st = list(stack)
                for f, e in images[s]:
                    g.push(st, f, e)
                new[(tuple(st), es + fr.weight(s))] += w
        dist = dict(new)
    return dist


def exact_return_probabilities(fr: Framing, n_max: int) -> list[float]:
    """Exact P(w_n = e) for n = 0..n_max, pruning states that cannot come back in time."""
    moves = fr.moves("simple")
    g = fr.group
    images = {s: fr.image(s) for s in moves}
    p = 1.0 / len(moves)
    braid = fr.is_braid

    def dist_to_e(stack, es):
        d = irreducible_length(NormalForm(g, stack), fr)
        if braid:
            d = max(d, abs(es))
        return d

    dist = {((), 0): 1.0}
    out = [1.0]
    for t in range(1, n_max + 1):
        left = n_max - t
        new: dict = defaultdict(float)
        for (stack, es), pr in dist.items():
            w = pr * p
            for s in moves:
                st = list(stack)
                for f, e in images[s]:
                    g.push(st, f, e)
                key = (tuple(st), es + fr.weight(s) if braid else 0)
                new[key] += w
        dist = {k: v for k, v in new.items() if dist_to_e(*k) <= left}
        if braid:
            out.append(dist.get(((), 0), 0.0))
        else:
            out.append(sum(v for (st, _), v in dist.items() if not st))
    return out
