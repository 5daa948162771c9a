"""Brute-force references. Slow on purpose; nothing here shares code paths
with the analytic modules beyond the Pmf container."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .probability import Pmf

MAX_SEQUENCES = 10**7
MAX_INTERLEAVE = 12


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    value: float
    method: str
    work: int
    argmin: np.ndarray | None = None


def exhaustive_guesswork(p: Pmf, n: int, rho: float) -> OracleResult:
    """E[G*^rho] over length-n i.i.d. sequences by listing every sequence."""
    k = len(p)
    size = k ** n
    if size > MAX_SEQUENCES:
        raise OracleLimitError(f"{k}^{n} = {size} sequences exceeds {MAX_SEQUENCES}")
    probs = np.array([1.0])
    for _ in range(n):
        probs = (probs[:, None] * p.probs[None, :]).reshape(-1)
    # flattened index order is lexicographic, stable sort keeps it for ties
    order = np.argsort(-probs, kind="stable")
    sorted_p = probs[order]
    rank = np.arange(1, size + 1, dtype=float)
    return OracleResult(math.fsum(rank ** rho * sorted_p), "exhaustive-enumeration", size)


def simplex_grid(k: int, step: float) -> np.ndarray:
    """All points of the probability simplex on a regular grid, as rows."""
    m = int(round(1.0 / step))
    if k == 2:
        q = np.arange(m + 1) / m
        return np.column_stack([q, 1.0 - q])
    if k == 3:
        i, j = np.triu_indices(m + 1)
        # pairs (a, b) with a + b <= m
        a = i
        b = j - i
        return np.column_stack([a / m, b / m, (m - a - b) / m])
    raise ValueError("grid oracle supports alphabets of size 2 or 3")


def simplex_grid_min(objective: Callable[[np.ndarray], np.ndarray], k: int, step: float) -> OracleResult:
    """Global grid minimum of a vectorized objective on the simplex.

    ``objective`` maps an (N, k) array of distributions to N values; use
    +inf for infeasible points. Ties go to the smallest grid index.
    """
    if k == 2 and step > 1e-6 + 1e-18:
        raise ValueError("binary grids must use step <= 1e-6")
    if k == 3 and step > 1e-3 + 1e-18:
        raise ValueError("ternary grids must use step <= 1e-3")
    pts = simplex_grid(k, step)
    vals = np.asarray(objective(pts), dtype=float)
    i = int(np.argmin(vals))
    return OracleResult(float(vals[i]), "grid-minimization", len(pts), argmin=pts[i])


# vectorized building blocks for grid objectives

def entropy_rows(q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(q > 0, q * np.log(q), 0.0)
    return -t.sum(axis=1)


def cross_entropy_rows(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(q > 0, -q * np.log(p)[None, :], 0.0)
    return t.sum(axis=1)


def kl_rows(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    return cross_entropy_rows(q, p) - entropy_rows(q)


def interleaving_search(lists: Sequence[Sequence], target) -> OracleResult:
    """Worst first-hit position of ``target`` over all order-preserving
    interleavings of the agents' lists (inf if no list contains it)."""
    lists = [tuple(x) for x in lists]
    total = sum(len(x) for x in lists)
    if total > MAX_INTERLEAVE:
        raise OracleLimitError(f"total prefix length {total} exceeds {MAX_INTERLEAVE}")
    work = 0

    @lru_cache(maxsize=None)
    def worst(state: tuple) -> float:
        # max number of deliveries, from this state, until the target shows up
        nonlocal work
        work += 1
        best = -math.inf
        for a, pos in enumerate(state):
            if pos == len(lists[a]):
                continue
            if lists[a][pos] == target:
                cand = 1.0
            else:
                nxt = state[:a] + (pos + 1,) + state[a + 1 :]
                cand = 1.0 + worst(nxt)
            best = max(best, cand)
        return math.inf if best == -math.inf else best

    value = worst(tuple(0 for _ in lists))
    return OracleResult(value, "interleaving-search", work)


def truncated_series_moment(p_hit: float, rho: float, tail_eps: float = 1e-9) -> OracleResult:
    """E[G^rho] for G ~ Geometric(p_hit), summed term by term.

    Stops when the ratio-test tail bound is below ``tail_eps`` times the
    running sum.
    """
    if not 0 < p_hit <= 1:
        raise ValueError("p_hit must lie in (0, 1]")
    if not tail_eps > 0:
        raise ValueError("tail_eps must be > 0")
    if p_hit == 1:
        return OracleResult(1.0, "truncated-series", 1)
    r = 1.0 - p_hit
    terms = []
    running = 0.0
    k = 1
    pw = 1.0  # r^(k-1)
    while True:
        t = k ** rho * pw * p_hit
        terms.append(t)
        running += t
        pw *= r
        k += 1
        # beyond this point successive terms shrink by at most c
        c = ((k + 1) / k) ** rho * r
        if c < 1 and k ** rho * pw * p_hit / (1 - c) < tail_eps * running:
            return OracleResult(math.fsum(terms), "truncated-series", k - 1)
