"""Compiled inner loops for the Monte Carlo engine.

The kernels never draw random numbers themselves: callers hand them
pre-generated move indices so that the stream for a block depends only on
(seed, block index).
"""

import numpy as np
from numba import njit

# output columns of walk_free_product
COL_LEN, COL_NA, COL_LSIG, COL_EGEO, COL_EXPSUM, COL_DEPTH, COL_TAIL = range(7)
N_COLS = 7


@njit(cache=True)
def _cost(orders, f, e):
    m = orders[f]
    if m == 0:
        return abs(e)
    return min(e, m - e)


@njit(cache=True)
def _eps(e):
    return 1 if e == 1 else -1


@njit(cache=True)
def _sigma_stats(sf, se, depth, n_a, sum_eps):
    """Projected-braid length and the exponent sum of the canonical geodesic (Z2 * Z3 only)."""
    if depth == 0:
        return 0, 0
    first = sf[0]
    last = sf[depth - 1]
    if first == 0 and last == 0:
        if depth == 1:
            return 3, 3
        return n_a, sum_eps - 3 * _eps(se[1])
    if first == 1 and last == 1:
        return n_a + 2, sum_eps - 3 * _eps(se[0])
    return n_a, sum_eps


@njit(cache=True)
def walk_free_product(moves, img_f, img_e, img_len, weights, orders, checkpoints,
                      track_sigma, braid_identity, identity_counts):
    """Run one block of walks on a free product of cyclic groups.

    moves[s, t] is the move index taken by sample s at step t.  Returns an
    array (samples, len(checkpoints), N_COLS) with the statistics listed in
    the COL_* constants.  identity_counts[t] accumulates the number of samples
    sitting at the identity after t+1 steps (for braid walks the exponent sum
    must vanish as well).
    """
    n_samples, n_steps = moves.shape
    n_check = checkpoints.shape[0]
    max_img = img_f.shape[1]
    out = np.zeros((n_samples, n_check, N_COLS), dtype=np.int64)
    cap = n_steps * max_img + 1
    sf = np.empty(cap, dtype=np.int64)
    se = np.empty(cap, dtype=np.int64)
    for s in range(n_samples):
        depth = 0
        length = 0
        n_a = 0
        sum_eps = 0
        expsum = 0
        c = 0
        for t in range(n_steps):
            mv = moves[s, t]
            expsum += weights[mv]
            for j in range(img_len[mv]):
                f = img_f[mv, j]
                e = img_e[mv, j]
                if depth > 0 and sf[depth - 1] == f:
                    old = se[depth - 1]
                    length -= _cost(orders, f, old)
                    if f == 0:
                        n_a -= 1
                    elif track_sigma:
                        sum_eps -= _eps(old)
                    ne = old + e
                    m = orders[f]
                    if m != 0:
                        ne = ne % m
                    if ne == 0:
                        depth -= 1
                    else:
                        se[depth - 1] = ne
                        length += _cost(orders, f, ne)
                        if f == 0:
                            n_a += 1
                        elif track_sigma:
                            sum_eps += _eps(ne)
                else:
                    sf[depth] = f
                    se[depth] = e
                    depth += 1
                    length += _cost(orders, f, e)
                    if f == 0:
                        n_a += 1
                    elif track_sigma:
                        sum_eps += _eps(e)
            if identity_counts.shape[0] > 0:
                if depth == 0 and (not braid_identity or expsum == 0):
                    identity_counts[t] += 1
            while c < n_check and checkpoints[c] == t + 1:
                out[s, c, COL_LEN] = length
                out[s, c, COL_NA] = n_a
                out[s, c, COL_EXPSUM] = expsum
                out[s, c, COL_DEPTH] = depth
                if depth > 0 and sf[depth - 1] != 0:
                    out[s, c, COL_TAIL] = _cost(orders, sf[depth - 1], se[depth - 1])
                if track_sigma:
                    ls, eg = _sigma_stats(sf, se, depth, n_a, sum_eps)
                    out[s, c, COL_LSIG] = ls
                    out[s, c, COL_EGEO] = eg
                c += 1
    return out


@njit(cache=True)
def directed_moves(u, n_moves, inverse_of):
    """Turn uniforms into a non-backtracking move sequence.

    inverse_of[m] is the move undoing m (m itself for an involution); it is
    excluded at the next step and the remaining n_moves - 1 moves are uniform.
    """
    n_samples, n_steps = u.shape
    out = np.empty((n_samples, n_steps), dtype=np.uint8)
    for s in range(n_samples):
        prev = -1
        for t in range(n_steps):
            if prev < 0:
                mv = int(u[s, t] * n_moves)
                if mv >= n_moves:
                    mv = n_moves - 1
            else:
                banned = inverse_of[prev]
                mv = int(u[s, t] * (n_moves - 1))
                if mv >= n_moves - 1:
                    mv = n_moves - 2
                if mv >= banned:
                    mv += 1
            out[s, t] = mv
            prev = mv
    return out


@njit(cache=True)
def matrix_walk(moves, mats, checkpoints, renorm, n_bins, burn_in):
    """Right-multiply random generator matrices and record ln Tr(w w^T).

    Every ``renorm`` steps the running product is divided by its largest entry
    and the logarithm of the factor is accumulated, so the recorded values are
    exact up to rounding.  When n_bins > 0 the angle of the first row of w,
    folded into (-pi/2, pi/2], is histogrammed for steps t >= burn_in.
    """
    n_samples, n_steps = moves.shape
    n_check = checkpoints.shape[0]
    out = np.empty((n_samples, n_check), dtype=np.float64)
    hist = np.zeros(max(n_bins, 1), dtype=np.int64)
    half_pi = np.pi / 2
    for s in range(n_samples):
        m00 = 1.0
        m01 = 0.0
        m10 = 0.0
        m11 = 1.0
        logscale = 0.0
        c = 0
        for t in range(n_steps):
            k = moves[s, t]
            a = mats[k, 0, 0]
            b = mats[k, 0, 1]
            cc = mats[k, 1, 0]
            d = mats[k, 1, 1]
            n00 = m00 * a + m01 * cc
            n01 = m00 * b + m01 * d
            n10 = m10 * a + m11 * cc
            n11 = m10 * b + m11 * d
            m00 = n00
            m01 = n01
            m10 = n10
            m11 = n11
            if (t + 1) % renorm == 0:
                big = max(max(abs(m00), abs(m01)), max(abs(m10), abs(m11)))
                m00 /= big
                m01 /= big
                m10 /= big
                m11 /= big
                logscale += np.log(big)
            if n_bins > 0 and t >= burn_in:
                th = np.arctan2(m01, m00)
                if th > half_pi:
                    th -= np.pi
                elif th <= -half_pi:
                    th += np.pi
                idx = int((th + half_pi) / np.pi * n_bins)
                if idx >= n_bins:
                    idx = n_bins - 1
                if idx < 0:
                    idx = 0
                hist[idx] += 1
            while c < n_check and checkpoints[c] == t + 1:
                tr = m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11
                out[s, c] = np.log(tr) + 2.0 * logscale
                c += 1
    return out, hist
