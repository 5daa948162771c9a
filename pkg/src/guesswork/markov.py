"""Markov password sources and the Perron-Frobenius guessing chain."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .probability import Pmf

ROW_ATOL = 1e-12
STATIONARY_ATOL = 1e-10


class ReducibleMatrixError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def is_irreducible(w) -> bool:
    """Strong connectivity of the positive-entry graph."""
    adj = np.asarray(w) > 0
    k = adj.shape[0]
    # every node reachable from node 0 and node 0 reachable from every node
    for graph in (adj, adj.T):
        seen = np.zeros(k, dtype=bool)
        seen[0] = True
        frontier = seen.copy()
        while frontier.any():
            nxt = graph[frontier].any(axis=0) & ~seen
            seen |= nxt
            frontier = nxt
        if not seen.all():
            return False
    return True


@dataclass(frozen=True, eq=False)
class PerronData:
    lam: float
    left: np.ndarray
    right: np.ndarray
    w_matrix: np.ndarray
    iterations: int = 0


def _power(m: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, int]:
    # Iterating on m + I keeps the same Perron vector but makes an irreducible
    # matrix primitive, so periodic chains converge too.
    k = m.shape[0]
    shifted = m + np.eye(k)
    x = np.full(k, 1.0 / k)
    lam = math.nan
    for it in range(1, max_iter + 1):
        y = shifted @ x
        s = y.sum()
        lam_new = s - 1.0  # x sums to one
        y /= s
        if abs(lam_new - lam) < tol and np.max(np.abs(y - x)) < tol:
            return lam_new, y, it
        x, lam = y, lam_new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def perron(w, tol: float = 1e-12, max_iter: int = 10**6) -> PerronData:
    """Perron root and eigenvectors of an irreducible nonnegative matrix.

    The left vector sums to one and the right vector is scaled so that
    ``left @ right == 1``.
    """
    w = np.array(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("matrix must be finite and nonnegative")
    if not is_irreducible(w):
        raise ReducibleMatrixError("matrix is reducible")
    lam, right, it_r = _power(w, tol, max_iter)
    lam_l, left, it_l = _power(w.T, tol, max_iter)
    left = left / left.sum()
    right = right / (left @ right)
    w.setflags(write=False)
    return PerronData(lam=float(lam), left=left, right=right, w_matrix=w, iterations=max(it_r, it_l))


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Row-stochastic chain over ordered states, with its stationary law."""

    states: tuple
    transitions: np.ndarray
    stationary: Pmf

    def __post_init__(self):
        states = tuple(self.states)
        u = np.array(self.transitions, dtype=float)
        if u.shape != (len(states), len(states)):
            raise ValueError("transition matrix shape does not match the state list")
        if np.any(u < 0) or not np.all(np.isfinite(u)):
            raise ValueError("transitions must be finite and nonnegative")
        if np.any(np.abs(u.sum(axis=1) - 1.0) > ROW_ATOL):
            raise ValueError("every row of the transition matrix must sum to 1")
        if not is_irreducible(u):
            raise ReducibleMatrixError("Markov chain is not irreducible")
        if self.stationary.support != states:
            raise ValueError("stationary distribution must be over the chain's states")
        if np.max(np.abs(self.stationary.probs @ u - self.stationary.probs)) > STATIONARY_ATOL:
            raise ValueError("given distribution is not stationary for the chain")
        u.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transitions", u)

    @classmethod
    def from_transitions(cls, states, transitions) -> "MarkovModel":
        u = np.array(transitions, dtype=float)
        u = u / u.sum(axis=1, keepdims=True)
        data = perron(u)
        return cls(tuple(states), u, Pmf.from_weights(tuple(states), data.left))

    @classmethod
    def iid(cls, p: Pmf) -> "MarkovModel":
        """Chain whose rows all equal ``p`` (needs p > 0 everywhere)."""
        u = np.tile(p.probs, (len(p), 1))
        return cls(p.support, u, p)

    def __len__(self):
        return len(self.states)

    def log_prob(self, seqs: np.ndarray, initial: np.ndarray | None = None) -> np.ndarray:
        """Log-probability of each row of state-index sequences."""
        seqs = np.atleast_2d(seqs)
        init = self.stationary.probs if initial is None else initial
        with np.errstate(divide="ignore"):
            lu = np.log(self.transitions)
            out = np.log(init)[seqs[:, 0]]
        for i in range(1, seqs.shape[1]):
            out = out + lu[seqs[:, i - 1], seqs[:, i]]
        return out

    def sample(self, rng: np.random.Generator, size: int, n: int) -> np.ndarray:
        """``size`` state-index sequences of length ``n``."""
        cum = np.cumsum(self.transitions, axis=1)
        cum[:, -1] = 1.0
        init_cum = np.cumsum(self.stationary.probs)
        init_cum[-1] = 1.0
        out = np.empty((size, n), dtype=np.int64)
        out[:, 0] = np.searchsorted(init_cum, rng.random(size), side="right")
        for i in range(1, n):
            u = rng.random(size)
            out[:, i] = (u[:, None] >= cum[out[:, i - 1]]).sum(axis=1)
        return out

    def to_json(self) -> dict:
        return {"states": list(self.states), "transitions": self.transitions.tolist()}

    @classmethod
    def from_json(cls, obj) -> "MarkovModel":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_transitions(tuple(obj["states"]), obj["transitions"])


def tilted_matrix(source: MarkovModel, rho: float) -> np.ndarray:
    """Entrywise U^(1/(1+rho)); zero entries stay zero."""
    if not rho >= 0:
        raise ValueError(f"rho must be >= 0, got {rho!r}")
    return np.power(source.transitions, 1.0 / (1.0 + rho))


def optimal_markov_guesser(source: MarkovModel, rho: float) -> MarkovModel:
    """Guessing chain with transitions W_ab r_b / (lam r_a).

    Its stationary law is ``left * right`` (elementwise), the standard
    result for the Doob transform of W.
    """
    data = perron(tilted_matrix(source, rho))
    w, r, lam = data.w_matrix, data.right, data.lam
    what = w * r[None, :] / (lam * r[:, None])
    what = what / what.sum(axis=1, keepdims=True)
    pi = Pmf.from_weights(source.states, data.left * data.right)
    return MarkovModel(source.states, what, pi)


def markov_sync_exponent(source: MarkovModel, rho: float) -> float:
    """(1 + rho) log lam, per symbol, nats."""
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho!r}")
    return (1.0 + rho) * math.log(perron(tilted_matrix(source, rho)).lam)


def markov_iid_v_moment(source: MarkovModel, guesser: MarkovModel, n: int, rho: float = 1.0) -> float:
    """log sum_x P(x)/Q(x)^rho over length-n sequences, by transfer matrices.

    Both chains start from their own stationary law.
    """
    if source.states != guesser.states:
        raise ValueError("source and guesser must share states")
    p0, q0 = source.stationary.probs, guesser.stationary.probs
    u, uh = source.transitions, guesser.transitions
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(u > 0, u / np.power(uh, rho), 0.0)
        v = np.where(p0 > 0, p0 / np.power(q0, rho), 0.0)
    if np.any((u > 0) & (uh == 0)) or np.any((p0 > 0) & (q0 == 0)):
        return math.inf
    log_scale = 0.0
    for _ in range(n - 1):
        v = v @ m
        s = v.sum()
        log_scale += math.log(s)
        v = v / s
    return log_scale + math.log(v.sum())
