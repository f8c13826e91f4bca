"""Master equations for the backbone walk on Hecke groups and the return-probability chain.

The generation k of an H_q walk (number of a2-syllables) together with the
vertex type of the current q-gon is a Markov chain once the distribution of
vertex types in the parent cell is closed by the weights rho.  In transform
space (x conjugate to k, s marking time) its master equations read
``M_q(x, s, rho) Q = alpha`` with ``M_q = s A_q(x, rho) - I``; the generating
function is singular where ``det M_q = 0`` and the root closest to zero
controls the large-n behaviour.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np


class SpectralError(RuntimeError):
    pass


class SingularWeights(SpectralError):
    pass


class DegenerateRoot(SpectralError):
    pass


class NumericalInconsistency(SpectralError):
    pass


class NotConverged(SpectralError):
    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


class LatticeTooSmall(SpectralError):
    pass


def n_types(q: int) -> int:
    return q // 2 + 1


@dataclass(frozen=True)
class TransferMatrixSpec:
    q: int
    rho: tuple[float, ...]

    def __post_init__(self):
        if not 3 <= self.q <= 64:
            raise ValueError(f"q must lie in 3..64, got {self.q}")
        rho = tuple(float(r) for r in self.rho)
        if len(rho) != n_types(self.q):
            raise ValueError(f"rho needs {n_types(self.q)} components for q={self.q}")
        if any(r < -1e-12 or r > 1 + 1e-12 for r in rho):
            raise ValueError(f"rho components must lie in [0, 1]: {rho}")
        if abs(sum(rho) - 1) > 1e-9:
            raise ValueError(f"rho must sum to 1, got {sum(rho)}")
        if rho[0] >= 1:
            raise SingularWeights("rho_1 = 1 leaves no weight for the other vertex types")
        object.__setattr__(self, "rho", rho)

    @property
    def dimension(self) -> int:
        return n_types(self.q)


def uniform_rho(q: int) -> tuple[float, ...]:
    n = n_types(q)
    return tuple([1.0 / n] * n)


# ---------------------------------------------------------------------------
# the one-step operator A_q(x) and M_q = s A_q - I


def step_operator(q: int, x: complex, rho, derivative: bool = False) -> np.ndarray:
    """A_q(x, rho): column j holds the weights (times e^{+-ix}) of moves out of type j.

    Types 1..n_q are indexed 0..n_q-1.  Moves have probability 1/3 each:
    the a2-move from type 1 drops one generation and lands on a parent vertex
    of type i >= 2 with probability rho_i/(1-rho_1); from any other type it
    climbs to type 1 of a child cell.  b-moves walk around the q-gon.  For even
    q the last type is the single antipodal vertex, so both of its b-moves
    lead to type n_q - 1.

    With ``derivative`` the entrywise x-derivative is returned instead.
    """
    spec = TransferMatrixSpec(q, tuple(rho))
    n = spec.dimension
    r = spec.rho
    up = 1j * cmath.exp(1j * x) if derivative else cmath.exp(1j * x)
    down = -1j * cmath.exp(-1j * x) if derivative else cmath.exp(-1j * x)
    flat = 0.0 if derivative else 1.0
    a = np.zeros((n, n), dtype=complex)
    third = 1.0 / 3.0
    # out of type 1: two b-moves to type 2, a2 back to the parent
    a[1, 0] += 2 * third * flat
    for i in range(1, n):
        a[i, 0] += third * r[i] / (1 - r[0]) * down
    # out of types 2..n: a2 into a child cell
    for j in range(1, n):
        a[0, j] += third * up
    # b-moves around the polygon between types 2..n
    for j in range(1, n):
        a[j - 1, j] += third * flat  # towards type 1
        if j + 1 < n:
            a[j + 1, j] += third * flat
    last = n - 1
    if q % 2:
        a[last, last] += third * flat  # the two type-n vertices are neighbours
    else:
        a[last - 1, last] += third * flat  # antipodal vertex: both b-moves go down
    return a


def build_transfer_matrix(q: int, x: float, s: complex, rho) -> np.ndarray:
    """M_q(x, s, rho) = s A_q(x, rho) - I."""
    a = step_operator(q, x, rho)
    return s * a - np.eye(a.shape[0])


def det_polynomial(a: np.ndarray) -> np.ndarray:
    """Coefficients (ascending powers of s) of det(s A - I)."""
    n = a.shape[0]
    p = np.poly(a)  # det(lambda I - A), descending in lambda
    # det(sA - I) = (-1)^n s^n det(I/s - A) = (-1)^n sum_k p_k s^k
    return ((-1) ** n) * np.asarray(p, dtype=complex)


def roots_of(a: np.ndarray) -> np.ndarray:
    """Roots of det(s A - I) = 0 sorted by modulus."""
    coeffs = det_polynomial(a)
    nz = np.nonzero(np.abs(coeffs) > 1e-14 * np.abs(coeffs).max())[0]
    coeffs = coeffs[: nz[-1] + 1]
    r = np.roots(coeffs[::-1])
    return r[np.argsort(np.abs(r))]


def _smallest(a: np.ndarray, guess: complex | None) -> complex:
    r = roots_of(a)
    if guess is None:
        if len(r) > 1 and abs(abs(r[1]) - abs(r[0])) < 1e-8:
            raise DegenerateRoot(f"two roots of equal modulus {abs(r[0])}")
        return complex(r[0])
    i = int(np.argmin(np.abs(r - guess)))
    return complex(r[i])


def track_root(op: Callable[[float], np.ndarray], x: float, steps: int | None = None) -> complex:
    """Follow the root that starts at s(0) = root of smallest modulus continuously to x."""
    s = _smallest(op(0.0), None)
    if x == 0:
        return s
    if steps is None:
        steps = max(1, int(math.ceil(abs(x) / 0.01)))
    for k in range(1, steps + 1):
        s = _smallest(op(x * k / steps), s)
    return s


def smallest_root(q: int, x: float, rho, max_abs_x: float = 0.5) -> complex:
    """s_-(x): root of det M_q tracked from the smallest-modulus root at x = 0."""
    if abs(x) > max_abs_x:
        raise ValueError(f"|x| = {abs(x)} is outside the tracked neighbourhood {max_abs_x}")
    return track_root(lambda y: step_operator(q, y, rho), x)


def _cofactor_matrix(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=m.dtype)
    c = np.empty_like(m)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(m, i, axis=0), j, axis=1)
            c[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return c


def implicit_root_derivative(a0: np.ndarray, da: np.ndarray, s: complex) -> complex:
    """ds/dx at a root of det(s A(x) - I) by the implicit-function formula.

    d det M = tr(adj(M) dM) (Jacobi), with dM/dx = s A'(x) and dM/ds = A.
    """
    m = s * a0 - np.eye(a0.shape[0])
    cof = _cofactor_matrix(m)  # adj(M) = cof^T, so tr(adj M X) = sum(cof * X)
    d_ds = np.sum(cof * a0)
    d_dx = np.sum(cof * (s * da))
    if abs(d_ds) < 1e-14:
        raise DegenerateRoot("d det / ds vanishes at the root")
    return -d_dx / d_ds


def root_series(op: Callable[[float], np.ndarray], h: float = 1e-4) -> tuple[complex, complex, complex]:
    """(s(0), s'(0), s''(0)/2) of the tracked root, by central differences."""
    s0 = track_root(op, 0.0)
    sp = track_root(op, h, 1)
    sm = track_root(op, -h, 1)
    return s0, (sp - sm) / (2 * h), (sp - 2 * s0 + sm) / (2 * h * h)


# ---------------------------------------------------------------------------
# drift


@dataclass
class DriftResult:
    q: int
    backbone_drift: float
    graph_drift: float
    rho_fixed_point: tuple[float, ...]
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"q": self.q, "l_backbone": self.backbone_drift, "l_graph": self.graph_drift,
                "rho": list(self.rho_fixed_point), "residual": self.diagnostics.get("residual"),
                "iterations": self.diagnostics.get("iterations")}


def _drift_from_operator(op, dop, fd_step: float = 1e-6, tol: float = 1e-10) -> tuple[float, dict]:
    s0 = track_root(op, 0.0)
    ds = implicit_root_derivative(op(0.0), dop(0.0), s0)
    sp = track_root(op, fd_step, 1)
    sm = track_root(op, -fd_step, 1)
    ds_fd = (sp - sm) / (2 * fd_step)
    drift = 1j * ds
    if abs(drift.imag) > tol:
        raise NumericalInconsistency(f"drift has imaginary part {drift.imag}")
    diag = {"s_minus": s0, "ds_implicit": ds, "ds_finite_difference": ds_fd,
            "fd_discrepancy": abs(ds - ds_fd)}
    return drift.real, diag


def backbone_drift(q: int, rho, fd_step: float = 1e-6) -> float:
    """l_bar_q(rho) = i ds_-/dx at x = 0."""
    drift, _ = backbone_drift_details(q, rho, fd_step)
    return drift


def backbone_drift_details(q: int, rho, fd_step: float = 1e-6) -> tuple[float, dict]:
    rho = tuple(rho)
    return _drift_from_operator(lambda y: step_operator(q, y, rho),
                                lambda y: step_operator(q, y, rho, derivative=True), fd_step)


def rho_bar(q: int, rho) -> np.ndarray:
    """Normalized null vector of M_q(0, s_-(rho), rho), taken componentwise in modulus."""
    a = step_operator(q, 0.0, rho)
    s = track_root(lambda y: step_operator(q, y, rho), 0.0)
    m = s * a - np.eye(a.shape[0])
    _, _, vh = np.linalg.svd(m)
    v = np.abs(vh[-1].conj())
    return v / v.sum()


def solve_rho_fixed_point(q: int, omega: float = 0.5, tol: float = 1e-10,
                          max_iter: int = 10_000, rho0=None) -> tuple[tuple[float, ...], dict]:
    """Damped iteration rho <- (1 - omega) rho + omega rho_bar(rho)."""
    rho = np.array(uniform_rho(q) if rho0 is None else rho0, dtype=float)
    trajectory = []
    for it in range(1, max_iter + 1):
        target = rho_bar(q, rho)
        res = float(np.abs(target - rho).sum())
        trajectory.append(res)
        if res < tol:
            return tuple(target / target.sum()), {"iterations": it, "residual": res}
        rho = (1 - omega) * rho + omega * target
        rho /= rho.sum()
    raise NotConverged(f"rho iteration for q={q} did not converge in {max_iter} steps", trajectory)


def graph_drift(q: int, omega: float = 0.5) -> DriftResult:
    """l_q = l_bar_q(rho) (1 + sum_{i>=2} (i-1) rho_i / (1 - rho_1)) at the rho fixed point."""
    rho, diag = solve_rho_fixed_point(q, omega)
    lb, d2 = backbone_drift_details(q, rho)
    diag.update(d2)
    factor = 1 + sum((i - 1) * rho[i - 1] for i in range(2, len(rho) + 1)) / (1 - rho[0])
    lg = lb * factor
    if lb < -1e-12 or lg < lb - 1e-12:
        raise NumericalInconsistency(f"drifts out of order: l_bar={lb}, l={lg}")
    return DriftResult(q, lb, lg, rho, diag)


def backbone_variance(q: int, rho, h: float = 1e-4) -> float:
    """Asymptotic Var(k)/n of the backbone generation from the second-order root expansion."""
    rho = tuple(rho)
    _, c1, c2 = root_series(lambda y: step_operator(q, y, rho), h)
    return float((2 * (c2 - c1 * c1 / 2)).real)


def h3_gaussian_profile(n: int) -> tuple[Fraction, Fraction]:
    """Mean and variance of the H3 backbone generation k after n steps: (n/15, 214 n/1125)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Fraction(n, 15), Fraction(214 * n, 1125)


# ---------------------------------------------------------------------------
# the two-type chain of the projected-braid walk on PSL(2,Z)


def sigma_step_operator(x: float, derivative: bool = False) -> np.ndarray:
    """One-step operator of the generation chain for the walk in the projected-braid letters.

    Both vertex types climb with weight 2/4 and drop with weight 1/4; the last
    quarter swaps the type and moves the generation by one in the direction
    fixed by the type.
    """
    up = 1j * cmath.exp(1j * x) if derivative else cmath.exp(1j * x)
    down = -1j * cmath.exp(-1j * x) if derivative else cmath.exp(-1j * x)
    diag = (down + 2 * up) / 4
    return np.array([[diag, up / 4], [down / 4, diag]], dtype=complex)


def sigma_smallest_root_closed_form(x: float) -> complex:
    """s_-(x) = 4 / (1 + e^{-ix} + 2 e^{ix}) from factoring the 2x2 determinant."""
    return 4 / (1 + cmath.exp(-1j * x) + 2 * cmath.exp(1j * x))


def sigma_backbone_drift() -> tuple[float, dict]:
    return _drift_from_operator(sigma_step_operator,
                                lambda y: sigma_step_operator(y, derivative=True))


# ---------------------------------------------------------------------------
# honeycomb return-probability chain


LAMBDA_PSL = (2 * math.sqrt(2) + 1) / 4
C_PSL = (9 + 4 * math.sqrt(2)) / (7 * math.pi)


def _honeycomb_step(p: np.ndarray, width: int) -> np.ndarray:
    """P_{n+1}(k) = 1/4 P_n(k+1) + 1/4 P_n(k) + 1/2 P_n(k-1); at k = 0 the blocked
    downward move is a stay, so P_{n+1}(0) = 1/2 P_n(0) + 1/4 P_n(1)."""
    new = np.zeros_like(p)
    w = width
    new[: w] += 0.25 * p[1: w + 1]
    new[: w + 1] += 0.25 * p[: w + 1]
    new[1: w + 2] += 0.5 * p[: w + 1]
    new[0] += 0.25 * p[0]
    return new


def honeycomb_return_profile(n_max: int, lattice: int | None = None,
                             exact: bool = False) -> list:
    """P_n(0) for n = 0..n_max.

    ``lattice`` is the number of sites kept; the default n_max + 1 can never be
    reached by the walker.  ``exact`` iterates in Fractions (n_max <= 200).
    """
    if n_max < 0 or n_max > 10**6:
        raise ValueError("n_max must lie in 0..10^6")
    size = n_max + 1 if lattice is None else lattice
    if size < n_max + 1:
        raise LatticeTooSmall(f"lattice of {size} sites is reached after {size - 1} steps; need {n_max + 1}")
    if exact:
        if n_max > 200:
            raise ValueError("exact iteration is limited to n_max <= 200")
        return _honeycomb_exact(n_max)
    p = np.zeros(size + 1)
    p[0] = 1.0
    out = [1.0]
    for n in range(n_max):
        width = min(n + 1, size - 1)
        p = _honeycomb_step(p, width)
        out.append(float(p[0]))
    return out


def honeycomb_distribution(n: int) -> np.ndarray:
    """Full distribution of the chain after n steps (for conservation checks)."""
    p = np.zeros(n + 2)
    p[0] = 1.0
    for t in range(n):
        p = _honeycomb_step(p, t + 1)
    return p


def _honeycomb_exact(n_max: int) -> list[Fraction]:
    q, h, z = Fraction(1, 4), Fraction(1, 2), Fraction(0)
    p = [Fraction(1)]
    out = [Fraction(1)]
    for _ in range(n_max):
        new = [z] * (len(p) + 1)
        for k, v in enumerate(p):
            if not v:
                continue
            new[k + 1] += h * v
            if k == 0:
                new[0] += h * v
            else:
                new[k] += q * v
                new[k - 1] += q * v
        p = new
        out.append(p[0])
    return out


def honeycomb_path_enumeration(n: int) -> Fraction:
    """P_n(0) by summing the weight of every one of the 3^n move sequences of the chain."""
    from itertools import product

    w = {1: Fraction(1, 2), 0: Fraction(1, 4), -1: Fraction(1, 4)}
    total = Fraction(0)
    for seq in product((1, 0, -1), repeat=n):
        k = 0
        weight = Fraction(1)
        for m in seq:
            if k == 0 and m == -1:
                weight = None  # the blocked move is counted under "stay"
                break
            if k == 0 and m == 0:
                weight *= Fraction(1, 2)
            else:
                weight *= w[m]
            k += m
        if weight is not None and k == 0:
            total += weight
    return total


@dataclass(frozen=True)
class ReturnFit:
    lam: float
    C: float
    n_lo: int
    n_hi: int
    exponent: float

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "C": self.C, "n_lo": self.n_lo, "n_hi": self.n_hi,
                "exponent": self.exponent}


def fit_return_profile(profile, n_lo: int, n_hi: int, exponent: float = 1.5,
                       parity: int | None = None) -> ReturnFit:
    """Least-squares fit of ln P_n = ln C + n ln lambda - exponent ln n over n_lo..n_hi."""
    ns = np.arange(n_lo, n_hi + 1)
    if parity is not None:
        ns = ns[ns % 2 == parity]
    y = np.array([math.log(float(profile[n])) for n in ns]) + exponent * np.log(ns)
    slope, intercept = np.polyfit(ns, y, 1)
    return ReturnFit(math.exp(slope), math.exp(intercept), n_lo, n_hi, exponent)
