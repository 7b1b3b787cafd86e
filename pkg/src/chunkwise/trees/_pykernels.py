"""Pure-numpy split scanners.

Each scanner receives one feature's values sorted ascending together with the
per-row payload in the same order, and returns ``(score, pos)`` where ``pos``
is the number of rows sent left (``-1`` when no admissible split exists).
Arithmetic order mirrors ``_splitkern.pyx`` exactly so both backends agree
bit for bit.
"""

import numpy as np


def _candidates(xs, min_leaf):
    n = xs.shape[0]
    pos = np.arange(min_leaf, n - min_leaf + 1)
    if pos.size == 0:
        return pos
    return pos[xs[pos - 1] < xs[pos]]


def msop_split(xs, R, min_leaf):
    """Maximize ``max_c sum_left R[:, c] + max_c sum_right R[:, c]``."""
    pos = _candidates(xs, min_leaf)
    if pos.size == 0:
        return float("-inf"), -1
    P = np.cumsum(R, axis=0)
    T = P[-1]
    L = P[pos - 1]
    score = L.max(axis=1) + (T - L).max(axis=1)
    best = int(np.argmax(score))
    return float(score[best]), int(pos[best])


def entropy_split(xs, labels, n_classes, min_leaf, plogp):
    """Minimize ``sum_k n_k * H_k`` (base-2) using the table ``plogp[c] = c*log2(c)``."""
    pos = _candidates(xs, min_leaf)
    if pos.size == 0:
        return float("inf"), -1
    n = xs.shape[0]
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), labels] = 1
    C = np.cumsum(onehot, axis=0)
    T = C[-1]
    CL = C[pos - 1]
    CR = T - CL
    cost_l = plogp[pos]
    cost_r = plogp[n - pos]
    for c in range(n_classes):
        cost_l = cost_l - plogp[CL[:, c]]
        cost_r = cost_r - plogp[CR[:, c]]
    cost = cost_l + cost_r
    best = int(np.argmin(cost))
    return float(cost[best]), int(pos[best])


def sse_split(xs, y, min_leaf):
    """Minimize total within-child sum of squared errors."""
    pos = _candidates(xs, min_leaf)
    if pos.size == 0:
        return float("inf"), -1
    n = xs.shape[0]
    S = np.cumsum(y)
    Q = np.cumsum(y * y)
    s_t = S[-1]
    q_t = Q[-1]
    s_l = S[pos - 1]
    q_l = Q[pos - 1]
    n_l = pos.astype(np.float64)
    n_r = (n - pos).astype(np.float64)
    s_r = s_t - s_l
    q_r = q_t - q_l
    cost = (q_l - (s_l * s_l) / n_l) + (q_r - (s_r * s_r) / n_r)
    best = int(np.argmin(cost))
    return float(cost[best]), int(pos[best])
