"""Groups acting on the upper half-plane: distances, angle process, Lyapunov exponents.

A word w is identified with the product of its generator matrices (right
multiplication in word order).  Its hyperbolic length is d(i, w(i)), which for
a determinant-one matrix satisfies 2 cosh d = Tr(w w^T).  Tracking the first
row r of the running product, r_n = r_{n-1} h, i.e. the direction of r moves
by the linear map h^T; the stationary law of that direction is the invariant
measure used for the measure-integral route to the Lyapunov exponent.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .groups import (
    Framing,
    Word,
    backbone_framing,
    free_group,
    free_idempotent,
    hecke,
    irreducible_length,
    psl2z_sigma,
    reduce_word,
)
from .stats import Estimate, block_sizes, run_blocks
from .walks import ConfigError, block_moves, move_table, _track_sigma


class GeometryError(ValueError):
    pass


class PointAtInfinity(GeometryError):
    pass


# ---------------------------------------------------------------------------
# points and distances


@dataclass(frozen=True)
class HyperbolicPoint:
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not z.imag > 0:
            raise GeometryError(f"{z} is not in the upper half-plane")
        object.__setattr__(self, "z", z)


def _as_array(m) -> np.ndarray:
    return np.array([[float(m[0][0]), float(m[0][1])], [float(m[1][0]), float(m[1][1])]])


def normalize_det(m) -> np.ndarray:
    """Scale a real 2x2 matrix to determinant +-1.

    Products of determinant-one generators can have entries so large that
    ad - bc is lost to cancellation; such matrices are returned unscaled when
    the computed determinant is within rounding error of +-1.
    """
    m = _as_array(m)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    size = float((m * m).sum())
    if abs(abs(det) - 1) <= 1e-9 * max(size, 1.0):
        return m
    if det == 0:
        raise GeometryError("singular matrix")
    return m / math.sqrt(abs(det))


def mobius_apply(m, z: HyperbolicPoint | complex) -> HyperbolicPoint:
    """z -> (a z + b)/(c z + d)."""
    z = z.z if isinstance(z, HyperbolicPoint) else complex(z)
    a, b, c, d = float(m[0][0]), float(m[0][1]), float(m[1][0]), float(m[1][1])
    if a * d - b * c == 0:
        raise GeometryError("singular matrix")
    den = c * z + d
    if den == 0:
        raise PointAtInfinity(f"{z} is mapped to infinity")
    return HyperbolicPoint((a * z + b) / den)


def point_distance(z1: HyperbolicPoint | complex, z2: HyperbolicPoint | complex) -> float:
    """cosh d = 1 + |z1 - z2|^2 / (2 Im z1 Im z2)."""
    z1 = z1.z if isinstance(z1, HyperbolicPoint) else complex(z1)
    z2 = z2.z if isinstance(z2, HyperbolicPoint) else complex(z2)
    return math.acosh(1 + abs(z1 - z2) ** 2 / (2 * z1.imag * z2.imag))


def trace_form(m) -> float:
    m = normalize_det(m)
    return float((m * m).sum())


def hyperbolic_distance_of_word(m, tol: float = 1e-12) -> float:
    """d = arccosh(Tr(m m^T) / 2) after scaling m to determinant one."""
    tr = trace_form(m)
    if tr < 2 - tol:
        raise GeometryError(f"Tr(m m^T) = {tr} < 2")
    return math.acosh(max(tr / 2, 1.0))


def distance_by_points(m) -> float:
    """d(i, m(i)) from the point-pair formula.

    Matrices with Fraction entries are mapped exactly: m(i) = x + iy with
    x = (ac + bd)/(c^2 + d^2) and y = det/(c^2 + d^2), so long words keep full
    precision even when y is far below machine epsilon.
    """
    if isinstance(m[0][0], Fraction):
        a, b, c, d = m[0][0], m[0][1], m[1][0], m[1][1]
        det = a * d - b * c
        if det <= 0:
            raise GeometryError("orientation-reversing or singular matrix")
        den = c * c + d * d
        x, y = (a * c + b * d) / den, det / den
        # scalar multiples of m act identically, so no normalization is needed
        arg = 1 + (x * x + (y - 1) ** 2) / (2 * y)
        return math.acosh(float(arg))
    return point_distance(1j, mobius_apply(normalize_det(m), 1j))


def rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


# ---------------------------------------------------------------------------
# angle process


def _fold(theta):
    """Fold angles into (-pi/2, pi/2]."""
    t = np.mod(np.asarray(theta) + np.pi / 2, np.pi) - np.pi / 2
    return np.where(t <= -np.pi / 2, t + np.pi, t)


def angle_step(theta: float, h) -> tuple[float, float]:
    """One step of the direction process: v(theta) -> h^T v(theta).

    Returns the folded new angle and the log growth ln |h^T v|^2.
    """
    h = _as_array(h)
    v = np.array([math.cos(theta), math.sin(theta)])
    w = h.T @ v
    return float(_fold(math.atan2(w[1], w[0]))), float(math.log(w @ w))


@dataclass
class DensityGrid:
    """Density on N uniform cells of (-pi/2, pi/2]; ``weights`` sum to one."""

    weights: np.ndarray
    converged: bool = True
    sweeps: int = 0
    trajectory: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def centers(self) -> np.ndarray:
        return -np.pi / 2 + (np.arange(self.n) + 0.5) * np.pi / self.n

    @property
    def density(self) -> np.ndarray:
        return self.weights * self.n / np.pi

    def coarsen(self, bins: int) -> np.ndarray:
        if self.n % bins:
            raise ValueError(f"{bins} does not divide the grid size {self.n}")
        return self.weights.reshape(bins, -1).sum(axis=1)

    def to_csv(self) -> str:
        lines = ["theta,density"]
        for t, d in zip(self.centers, self.density):
            lines.append(f"{t:.12g},{d:.12g}")
        return "\n".join(lines) + "\n"


class MeasureNotConverged(RuntimeError):
    def __init__(self, message, grid):
        super().__init__(message)
        self.grid = grid


def _interp_periodic(values: np.ndarray, theta: np.ndarray) -> np.ndarray:
    n = values.size
    pos = (theta + np.pi / 2) / np.pi * n - 0.5
    lo = np.floor(pos).astype(int)
    frac = pos - lo
    return (1 - frac) * values[lo % n] + frac * values[(lo + 1) % n]


def _transfer_tables(generators: Sequence, centers: np.ndarray):
    """Preimage angles and Jacobians of every generator's direction map at the grid centres."""
    v = np.stack([np.cos(centers), np.sin(centers)])
    tables = []
    for h in generators:
        h = normalize_det(h)
        binv = np.linalg.inv(h.T)
        u = binv @ v
        norm2 = (u * u).sum(axis=0)
        pre = _fold(np.arctan2(u[1], u[0]))
        jac = abs(np.linalg.det(binv)) / norm2
        tables.append((pre, jac))
    return tables


def iterate_invariant_measure(generators: Sequence, n: int = 4096, tol: float = 1e-8,
                              max_sweeps: int = 20_000, init: str | np.ndarray = "uniform",
                              strict: bool = False) -> DensityGrid:
    """Stationary law of the direction process with each generator picked with probability 1/n_g.

    The density is pushed forward on the theta grid (x = cot theta), read off
    at preimages by periodic linear interpolation and renormalized after each
    sweep.  Stops when the L1 change of the weights drops below ``tol``.
    """
    if n < 256:
        raise ValueError("grid needs at least 256 cells")
    grid = DensityGrid(np.full(n, 1.0 / n))
    centers = grid.centers
    if isinstance(init, str):
        if init == "uniform":
            w = np.ones(n)
        elif init == "bump":
            w = np.cos(centers) ** 2 + 1e-3
        else:
            raise ValueError(f"unknown initialization {init!r}")
    else:
        w = np.asarray(init, dtype=float).copy()
    w = w / w.sum()
    tables = _transfer_tables(generators, centers)
    ng = len(tables)
    traj = []
    for sweep in range(1, max_sweeps + 1):
        dens = w * n / np.pi
        new = np.zeros(n)
        for pre, jac in tables:
            new += _interp_periodic(dens, pre) * jac
        new /= ng
        new = new / new.sum()
        change = float(np.abs(new - w).sum())
        traj.append(change)
        w = new
        if change < tol:
            return DensityGrid(w, True, sweep, traj)
    grid = DensityGrid(w, False, max_sweeps, traj)
    if strict:
        raise MeasureNotConverged(f"no convergence after {max_sweeps} sweeps (last change {traj[-1]:.3g})", grid)
    return grid


@dataclass
class LyapunovResult:
    gamma1: float
    gamma2: float
    method: str
    standard_error: float | None = None
    n: int | None = None
    samples: int | None = None
    seed: int | None = None

    @property
    def sigma2(self) -> float:
        return self.gamma2 - self.gamma1 ** 2

    def to_dict(self) -> dict:
        return {"gamma1": self.gamma1, "gamma2": self.gamma2, "sigma2": self.sigma2,
                "method": self.method, "standard_error": self.standard_error,
                "n": self.n, "samples": self.samples, "seed": self.seed}


def lyapunov_from_measure(generators: Sequence, mu: DensityGrid) -> LyapunovResult:
    """gamma_k = (1/n_g) sum_alpha int mu(theta) (ln |h_alpha^T v(theta)|^2)^k dtheta (midpoint rule)."""
    th = mu.centers
    v = np.stack([np.cos(th), np.sin(th)])
    g1 = g2 = 0.0
    for h in generators:
        w = normalize_det(h).T @ v
        lg = np.log((w * w).sum(axis=0))
        g1 += float(mu.weights @ lg)
        g2 += float(mu.weights @ (lg * lg))
    return LyapunovResult(g1 / len(generators), g2 / len(generators), "measure-integral")


# ---------------------------------------------------------------------------
# Monte Carlo


RENORM = 32


def _move_matrices(fr: Framing, moves: Sequence[int]) -> np.ndarray:
    return np.stack([normalize_det(fr.letter_matrix(s)) for s in moves])


def generator_set(fr: Framing, kind: str = "simple") -> list[np.ndarray]:
    return list(_move_matrices(fr, fr.moves(kind)))


def _matrix_block(mats, inverse_of, seed, block, size, steps, checkpoints, directed, n_bins, burn_in):
    mv = block_moves(seed, block, size, steps, mats.shape[0], directed, inverse_of)
    return K.matrix_walk(mv, mats, checkpoints, RENORM, n_bins, burn_in)


@dataclass
class MatrixWalkResult:
    checkpoints: np.ndarray
    log_trace: np.ndarray  # (samples, checkpoints)
    histogram: np.ndarray


def matrix_walk(fr: Framing, walk_kind: str, n: int, samples: int, seed: int = 0,
                workers: int = 1, checkpoints: Sequence[int] | None = None,
                n_bins: int = 0, burn_in: int = 0) -> MatrixWalkResult:
    if walk_kind not in ("simple", "directed"):
        raise ConfigError(f"unknown walk kind {walk_kind!r}")
    if n < 1 or samples < 1:
        raise ConfigError("n and samples must be positive")
    moves = fr.moves("simple")
    table = move_table(fr, moves)
    mats = _move_matrices(fr, moves)
    cps = np.array(sorted(set(checkpoints or [n])), dtype=np.int64)
    args = [(mats, table.inverse_of, seed, b, size, n, cps, walk_kind == "directed", n_bins, burn_in)
            for b, size in enumerate(block_sizes(samples))]
    res = run_blocks(_matrix_block, args, workers)
    logs = np.concatenate([r[0] for r in res], axis=0)
    hist = np.sum([r[1] for r in res], axis=0)
    if not np.all(np.isfinite(logs)):
        raise FloatingPointError("overflow in the matrix product despite renormalization")
    return MatrixWalkResult(cps, logs, hist)


def lyapunov_mc(fr: Framing, walk_kind: str = "simple", n: int = 10_000, samples: int = 1000,
                seed: int = 0, workers: int = 1) -> LyapunovResult:
    """gamma_1 estimated as <ln Tr(w_n w_n^T)>/n; gamma_2 is the matching second moment per step."""
    res = matrix_walk(fr, walk_kind, n, samples, seed, workers)
    x = res.log_trace[:, -1] / n
    est = Estimate.from_samples(x, seed)
    # per-step variance: Var(ln Tr) / n
    sigma2 = est.variance * n
    return LyapunovResult(est.mean, sigma2 + est.mean ** 2, f"monte-carlo/{walk_kind}",
                          est.standard_error, n, samples, seed)


def theta_histogram(fr: Framing, n: int, samples: int, n_bins: int, seed: int = 0,
                    burn_in: int = 100, walk_kind: str = "simple") -> np.ndarray:
    """Normalized histogram of the direction of the first row of w_t over t >= burn_in."""
    res = matrix_walk(fr, walk_kind, n, samples, seed, n_bins=n_bins, burn_in=burn_in)
    return res.histogram / res.histogram.sum()


# ---------------------------------------------------------------------------
# backbone subgroups and the length / trace relation


@dataclass(frozen=True)
class BackboneSpec:
    """A framing, the free subgroup whose directed walk calibrates it, and the scale factor s_f."""

    name: str
    parent: Framing
    backbone: Framing
    scale_factor: float
    graph_drift: float


def backbone_specs() -> dict[str, BackboneSpec]:
    return {
        "F3": BackboneSpec("F3", free_idempotent(3), free_idempotent(3), 1.0, 1 / 3),
        "F4": BackboneSpec("F4", free_group(2), free_group(2), 1.0, 1 / 2),
        "H3": BackboneSpec("H3", hecke(3), backbone_framing(3), 2.0, 2 / 15),
        "PSL2Z": BackboneSpec("PSL2Z", psl2z_sigma(), backbone_framing(3), 1.0, 1 / 4),
    }


def check_backbone_free(spec: BackboneSpec, max_len: int = 12) -> bool:
    """No reduced word of length <= max_len in the backbone letters is trivial in the parent group.

    Reduced means no letter is followed by its inverse (for order-2 letters, by itself).
    """
    fr = spec.backbone
    moves = fr.moves("simple")
    inv = {s: (s if -s not in moves else -s) for s in moves}
    frontier = [((), ())]
    g = fr.group
    for _ in range(max_len):
        nxt = []
        for letters, stack in frontier:
            for s in moves:
                if letters and inv[letters[-1]] == s:
                    continue
                st = list(stack)
                for f, e in fr.image(s):
                    g.push(st, f, e)
                if not st:
                    return False
                nxt.append((letters + (s,), tuple(st)))
        frontier = nxt
        if len(frontier) > 200_000:
            break
    return True


@dataclass
class Table1Row:
    name: str
    scale_factor: float
    gamma_simple: LyapunovResult
    gamma_directed: LyapunovResult
    graph_drift: float

    @property
    def ratio(self) -> float:
        return self.scale_factor * self.gamma_simple.gamma1 / self.gamma_directed.gamma1

    @property
    def ratio_error(self) -> float:
        gs, gd = self.gamma_simple, self.gamma_directed
        rel = math.hypot(gs.standard_error / gs.gamma1, gd.standard_error / gd.gamma1)
        return abs(self.ratio) * rel

    def to_dict(self) -> dict:
        return {"name": self.name, "s_f": self.scale_factor,
                "gamma_simple": self.gamma_simple.gamma1, "gamma_simple_se": self.gamma_simple.standard_error,
                "gamma_directed": self.gamma_directed.gamma1,
                "gamma_directed_se": self.gamma_directed.standard_error,
                "ratio": self.ratio, "ratio_se": self.ratio_error, "graph_drift": self.graph_drift}


def table1(n: int = 10_000, samples: int = 1000, seed: int = 0, workers: int = 1,
           rows: Sequence[str] | None = None) -> list[Table1Row]:
    specs = backbone_specs()
    out = []
    for i, name in enumerate(rows or list(specs)):
        sp = specs[name]
        gs = lyapunov_mc(sp.parent, "simple", n, samples, seed + 2 * i, workers)
        gd = lyapunov_mc(sp.backbone, "directed", n, samples, seed + 2 * i + 1, workers)
        out.append(Table1Row(name, sp.scale_factor, gs, gd, sp.graph_drift))
    return out


def format_table1(rows: Sequence[Table1Row]) -> str:
    head = f"{'group':<8}{'s_f':>5}{'gamma_s':>12}{'gamma_d':>12}{'ratio':>10}{'+-':>9}{'graph':>9}"
    lines = [head]
    for r in rows:
        lines.append(f"{r.name:<8}{r.scale_factor:>5.0f}{r.gamma_simple.gamma1:>12.5f}"
                     f"{r.gamma_directed.gamma1:>12.5f}{r.ratio:>10.4f}{r.ratio_error:>9.4f}{r.graph_drift:>9.4f}")
    return "\n".join(lines)


def _relation_block(table, mats, seed, block, size, steps, checkpoints, track_sigma):
    mv = block_moves(seed, block, size, steps, mats.shape[0])
    counts = np.zeros(0, dtype=np.int64)
    stats = K.walk_free_product(mv, table.img_f, table.img_e, table.img_len, table.weights,
                                table.orders, checkpoints, track_sigma, False, counts)
    logs, _ = K.matrix_walk(mv, mats, checkpoints, RENORM, 0, 0)
    return stats, logs


@dataclass
class RelationReport:
    name: str
    n: int
    samples: int
    mean_length: float
    mean_log_trace: float
    gamma_directed: float
    ratio: float
    ratio_ci: tuple[float, float]
    seed: int

    @property
    def passed(self) -> bool:
        return 0.98 <= self.ratio <= 1.02

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ratio_ci"] = list(self.ratio_ci)
        d["passed"] = self.passed
        return d


def check_length_trace_relation(name: str, n: int = 10_000, samples: int = 1000, seed: int = 0,
                                workers: int = 1, gamma_directed: LyapunovResult | None = None,
                                directed_samples: int | None = None) -> RelationReport:
    """Compare <L(w)> with (s_f / gamma_d) <ln Tr(w w^T)> on the same sample paths."""
    sp = backbone_specs()[name]
    fr = sp.parent
    moves = fr.moves("simple")
    table = move_table(fr, moves)
    mats = _move_matrices(fr, moves)
    cps = np.array([n], dtype=np.int64)
    args = [(table, mats, seed, b, size, n, cps, _track_sigma(fr))
            for b, size in enumerate(block_sizes(samples))]
    res = run_blocks(_relation_block, args, workers)
    col = K.COL_LSIG if fr.metric == "sigma" else K.COL_LEN
    length = np.concatenate([r[0][:, 0, col] for r in res]).astype(float)
    logs = np.concatenate([r[1][:, 0] for r in res])
    if gamma_directed is None:
        gamma_directed = lyapunov_mc(sp.backbone, "directed", n, directed_samples or samples,
                                     seed + 1, workers)
    gd = gamma_directed.gamma1
    mL, mT = length.mean(), logs.mean()
    ratio = mL / (sp.scale_factor / gd * mT)
    # delta method with the covariance of (L, ln Tr) and the error of gamma_d
    cov = np.cov(length, logs) / len(length)
    rel2 = (cov[0, 0] / mL**2 + cov[1, 1] / mT**2 - 2 * cov[0, 1] / (mL * mT)
            + (gamma_directed.standard_error / gd) ** 2)
    half = 1.96 * ratio * math.sqrt(max(rel2, 0.0))
    return RelationReport(name, n, samples, float(mL), float(mT), gd, float(ratio),
                          (float(ratio - half), float(ratio + half)), seed)


def word_length_and_distance(w: Word) -> tuple[int, float]:
    """(irreducible length, hyperbolic distance) of one word."""
    from .groups import matrix_of_word

    return irreducible_length(reduce_word(w), w.framing), hyperbolic_distance_of_word(matrix_of_word(w))
