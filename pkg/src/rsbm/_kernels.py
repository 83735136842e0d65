# Compiled inner loops shared by blocks, models and mcmc.
#
# Every objective handled here has the form
#
#   sum_rs pair(m_rs, Lambda_rs) + 2 sum_i (k+_i a_i + k-_i b_i)
#
# with Lambda_rr = SI_r^2, Lambda_rs = SO_r SO_s, SI/SO per-block sums of the
# node factors I/O. The node part is rewritten as 2 sum_i k+_i (a_i - b_i)
# plus a partition constant, so moves only need d_i = a_i - b_i.
import math

import numpy as np
from numba import njit

# m log(m / Lambda) when Lambda = 0 but m > 0
DEGENERATE_PAIR = -10000.0
# floor for log arguments of the node terms
LOG_FLOOR = 1e-10


@njit(cache=True, nogil=True)
def pair_term(m, lam):
    if m == 0:
        return 0.0
    if lam <= 0.0:
        return DEGENERATE_PAIR
    return m * math.log(m / lam)


@njit(cache=True, nogil=True)
def _lam(r, s, SI, SO):
    if r == s:
        return SI[r] * SI[r]
    return SO[r] * SO[s]


@njit(cache=True, nogil=True)
def pair_sum(M, SI, SO):
    B = M.shape[0]
    tot = 0.0
    for r in range(B):
        for s in range(B):
            tot += pair_term(M[r, s], _lam(r, s, SI, SO))
    return tot


@njit(cache=True, nogil=True)
def local_pair_sum(M, SI, SO, r, s):
    """Sum of the ordered-pair terms touching block r or s."""
    B = M.shape[0]
    tot = 0.0
    for y in range(B):
        tot += pair_term(M[r, y], _lam(r, y, SI, SO))
        if s != r:
            tot += pair_term(M[s, y], _lam(s, y, SI, SO))
    for x in range(B):
        if x != r and x != s:
            tot += pair_term(M[x, r], _lam(x, r, SI, SO))
            if s != r:
                tot += pair_term(M[x, s], _lam(x, s, SI, SO))
    return tot


@njit(cache=True, nogil=True)
def move_node(i, s, indptr, indices, weights, g, M, kappa, sizes, kplus,
              I, O, SI, SO, nzI, nzO, d):
    """Move node i to block s, updating all statistics in place.

    Returns sum_j (change in k+_j) * d_j over the affected nodes.
    """
    r = g[i]
    if r == s:
        return 0.0
    k_i = 0
    new_kp = 0
    dnode = 0.0
    for p in range(indptr[i], indptr[i + 1]):
        j = indices[p]
        w = weights[p]
        k_i += w
        if j == i:
            M[r, r] -= w
            M[s, s] += w
            new_kp += w
            continue
        t = g[j]
        M[r, t] -= w
        M[t, r] -= w
        M[s, t] += w
        M[t, s] += w
        if t == s:
            new_kp += w
            kplus[j] += w
            dnode += w * d[j]
        elif t == r:
            kplus[j] -= w
            dnode -= w * d[j]
    dnode += (new_kp - kplus[i]) * d[i]
    kplus[i] = new_kp
    kappa[r] -= k_i
    kappa[s] += k_i
    sizes[r] -= 1
    sizes[s] += 1
    # nonzero-factor counts keep emptied sums at exactly 0.0
    if I[i] != 0.0:
        nzI[r] -= 1
        nzI[s] += 1
        SI[r] = SI[r] - I[i] if nzI[r] > 0 else 0.0
        SI[s] += I[i]
    if O[i] != 0.0:
        nzO[r] -= 1
        nzO[s] += 1
        SO[r] = SO[r] - O[i] if nzO[r] > 0 else 0.0
        SO[s] += O[i]
    g[i] = s
    return dnode


@njit(cache=True, nogil=True)
def move_delta(i, s, indptr, indices, weights, g, M, kappa, sizes, kplus,
               I, O, SI, SO, nzI, nzO, d):
    """Apply the move and return the change of the objective."""
    r = g[i]
    if r == s:
        return 0.0
    before = local_pair_sum(M, SI, SO, r, s)
    dnode = move_node(i, s, indptr, indices, weights, g, M, kappa, sizes, kplus,
                      I, O, SI, SO, nzI, nzO, d)
    after = local_pair_sum(M, SI, SO, r, s)
    return after - before + 2.0 * dnode


@njit(cache=True, nogil=True)
def proposal_mass(i, s, self_block, indptr, indices, weights, g, M, kappa, eps):
    """sum_t n_t p(. -> s | t) for node i; self-loops see block self_block."""
    B = M.shape[0]
    tot = 0.0
    for p in range(indptr[i], indptr[i + 1]):
        j = indices[p]
        t = self_block if j == i else g[j]
        tot += weights[p] * (M[t, s] + eps) / (kappa[t] + eps * B)
    return tot


@njit(cache=True, nogil=True)
def propose(i, u_nbr, u_blk, indptr, indices, weights, g, M, kappa, eps, degree):
    """Draw a target block for node i from two uniforms."""
    B = M.shape[0]
    k = degree[i]
    if k == 0:
        return min(int(u_blk * B), B - 1)
    # neighbor endpoint chosen proportionally to multiplicity
    target = u_nbr * k
    acc = 0.0
    t = g[i]
    for p in range(indptr[i], indptr[i + 1]):
        acc += weights[p]
        if target < acc:
            t = g[indices[p]]
            break
    target = u_blk * (kappa[t] + eps * B)
    acc = 0.0
    for s in range(B):
        acc += M[t, s] + eps
        if target < acc:
            return s
    return B - 1


@njit(cache=True, nogil=True)
def run_sweeps(order, u, eps, indptr, indices, weights, degree, g, M, kappa, sizes,
               kplus, I, O, SI, SO, nzI, nzO, d, objective, best_obj, best_g,
               out_obj, out_acc, out_parts, out_move_obj, freeze):
    """Run order.shape[0] sweeps. Returns (objective, best_obj).

    out_parts / out_move_obj may have zero rows to skip recording.
    """
    n_sw, n = order.shape
    rec_parts = out_parts.shape[0] > 0
    rec_moves = out_move_obj.shape[0] > 0
    for t in range(n_sw):
        moved = 0
        for idx in range(n):
            i = order[t, idx]
            r = g[i]
            s = propose(i, u[t, idx, 0], u[t, idx, 1], indptr, indices, weights, g, M,
                        kappa, eps, degree)
            if s != r and not freeze:
                if degree[i] == 0:
                    fwd = 1.0
                else:
                    fwd = proposal_mass(i, s, r, indptr, indices, weights, g, M, kappa, eps)
                dL = move_delta(i, s, indptr, indices, weights, g, M, kappa, sizes, kplus,
                                I, O, SI, SO, nzI, nzO, d)
                if degree[i] == 0:
                    bwd = 1.0
                else:
                    bwd = proposal_mass(i, r, s, indptr, indices, weights, g, M, kappa, eps)
                log_a = dL + math.log(bwd) - math.log(fwd)
                if log_a >= 0.0 or u[t, idx, 2] < math.exp(log_a):
                    objective += dL
                    moved += 1
                else:
                    move_node(i, r, indptr, indices, weights, g, M, kappa, sizes, kplus,
                              I, O, SI, SO, nzI, nzO, d)
            if rec_moves:
                out_move_obj[t, idx] = objective
        out_obj[t] = objective
        out_acc[t] = moved / n if n > 0 else 0.0
        if rec_parts:
            out_parts[t, :] = g
        if objective > best_obj:
            best_obj = objective
            best_g[:] = g
    return objective, best_obj


def block_sums(values, g, B):
    return np.bincount(g, weights=values, minlength=B).astype(np.float64)


def nonzero_counts(values, g, B):
    return np.bincount(g, weights=(values != 0).astype(np.float64), minlength=B).astype(np.int64)
