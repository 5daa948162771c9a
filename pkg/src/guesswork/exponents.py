"""Success and failure exponents for a guess budget J = e^(n alpha).

All of the optimizations here reduce to one-parameter searches along the
tilted family ``p^b / sum p^b``: the objectives depend on a type Q only
through D(Q||p) and the linear functional E_Q[-log p], and for a fixed value
of that functional the divergence is minimized by a tilt of p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .analytics import entropy_matching_tilt
from .probability import Pmf, cross_entropy, kl_divergence, shannon_entropy, tilt

BETA_MAX = 50.0
ENTROPY_TOL = 1e-10


@dataclass(frozen=True)
class ListGrowthRate:
    """Budget exponent alpha (nats per symbol) for an alphabet of size k."""

    alpha: float
    alphabet_size: int

    def __post_init__(self):
        top = math.log(self.alphabet_size)
        if not 0.0 <= self.alpha <= top + 1e-12:
            raise ValueError(f"alpha must lie in [0, {top}], got {self.alpha!r}")

    @classmethod
    def from_base_k(cls, a: float, alphabet_size: int) -> "ListGrowthRate":
        """From the J = |X|^(n a) convention."""
        return cls(a * math.log(alphabet_size), alphabet_size)


@dataclass(frozen=True, eq=False)
class ExponentReport:
    value: float
    argmin_type: Pmf
    solver: str
    residual: float
    beta: float | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "value": _json_float(self.value),
            "argmin_type": {"symbols": list(self.argmin_type.support), "probs": self.argmin_type.probs.tolist()},
            "solver": self.solver,
            "residual": self.residual,
            "beta": self.beta,
            **self.extra,
        }


def _json_float(x):
    return "inf" if math.isinf(x) else x


def _check_alpha(p: Pmf, alpha: float):
    top = math.log(len(p))
    if not 0.0 <= alpha <= top + 1e-12:
        raise ValueError(f"alpha must lie in [0, log|X|] = [0, {top}], got {alpha!r}")


def _argmax_uniform(p: Pmf) -> Pmf:
    top = p.probs == p.probs.max()
    return Pmf.from_weights(p.support, top.astype(float))


def _tilt_ext(p: Pmf, b: float) -> Pmf:
    return _argmax_uniform(p) if math.isinf(b) else tilt(p, b)


@dataclass(frozen=True, eq=False)
class _Threshold:
    q: Pmf
    beta: float
    residual: float


def _threshold(p: Pmf, alpha: float, beta_max: float) -> _Threshold:
    n_pos = int(p.positive.sum())
    if alpha > math.log(n_pos) + 1e-12:
        # entropy this high needs mass where p is zero: cross-entropy is infinite
        return _Threshold(Pmf.uniform(p.support), 0.0, 0.0)
    if abs(alpha - shannon_entropy(p)) <= ENTROPY_TOL:
        return _Threshold(p, 1.0, abs(alpha - shannon_entropy(p)))
    limit = _argmax_uniform(p)
    if alpha <= shannon_entropy(limit) + ENTROPY_TOL:
        return _Threshold(limit, math.inf, 0.0)
    beta = entropy_matching_tilt(p, alpha, beta_max)
    q = tilt(p, beta)
    resid = abs(shannon_entropy(q) - alpha)
    if beta >= beta_max and resid > ENTROPY_TOL:
        return _Threshold(limit, math.inf, abs(shannon_entropy(limit) - alpha))
    return _Threshold(q, beta, resid)


def threshold_type(p: Pmf, alpha: float, beta_max: float = BETA_MAX) -> Pmf:
    """Minimizer of the cross-entropy E_Q[-log p] subject to H(Q) >= alpha.

    The constraint binds for every alpha > 0, and the minimizer is the tilt
    of p whose entropy is exactly alpha.
    """
    _check_alpha(p, alpha)
    return _threshold(p, alpha, beta_max).q


def threshold_level(p: Pmf, alpha: float, beta_max: float = BETA_MAX) -> float:
    """Cross-entropy of the threshold type; types below it are in the list."""
    return cross_entropy(threshold_type(p, alpha, beta_max), p)


def in_guess_list(q: Pmf, p: Pmf, alpha: float, beta_max: float = BETA_MAX) -> bool:
    """Whether sequences of type q sit in the first e^(n alpha) list positions."""
    return cross_entropy(q, p) < threshold_level(p, alpha, beta_max)


def sync_success_exponent(p: Pmf, alpha: float, beta_max: float = BETA_MAX) -> ExponentReport:
    """Decay rate of P(G* <= J) for the optimal list."""
    _check_alpha(p, alpha)
    h = shannon_entropy(p)
    if alpha > h:
        return ExponentReport(0.0, p, "tilted-bisection", 0.0, beta=1.0)
    t = _threshold(p, alpha, beta_max)
    if math.isinf(t.beta):
        # Tied top probabilities (e.g. p uniform): the list fills up with
        # e^(n alpha) sequences of probability e^(-n level), so the rate is
        # level - alpha rather than a divergence of the limiting type.
        value = max(cross_entropy(t.q, p) - alpha, 0.0)
        return ExponentReport(value, t.q, "tilted-bisection", t.residual, beta=t.beta, extra={"tied_top": True})
    return ExponentReport(kl_divergence(t.q, p), t.q, "tilted-bisection", t.residual, beta=t.beta)


def _tilt_path(p: Pmf, phat: Pmf, alpha: float) -> tuple[Pmf, float, float, float]:
    """Minimize D(Q||p) + [E_Q[-log phat] - alpha]_+ over the whole simplex.

    The minimizer is Q_t ~ p * phat^t for some t in [0, 1]; t = 0 when the
    penalty is already inactive at p, t = 1 when it stays active at the
    unconstrained optimum of D + CE, otherwise the penalty's root.
    Returns (Q, value, t, residual).
    """

    def q_at(t):
        with np.errstate(divide="ignore"):
            lw = np.where(p.positive, np.log(p.probs) + t * np.log(np.where(phat.positive, phat.probs, 1.0)), -np.inf)
        lw = lw - lw.max()
        return Pmf.from_weights(p.support, np.exp(lw))

    def obj(q):
        return kl_divergence(q, p) + max(cross_entropy(q, phat) - alpha, 0.0)

    if cross_entropy(p, phat) <= alpha:
        return p, 0.0, 0.0, 0.0
    q1 = q_at(1.0)
    if cross_entropy(q1, phat) >= alpha:
        return q1, obj(q1), 1.0, 0.0
    t = brentq(lambda s: cross_entropy(q_at(s), phat) - alpha, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    q = q_at(t)
    return q, obj(q), t, abs(cross_entropy(q, phat) - alpha)


def async_success_exponent(
    p: Pmf,
    alpha: float,
    beta: float,
    restrict_to_list_types: bool = False,
    beta_max: float = BETA_MAX,
) -> ExponentReport:
    """Decay rate of P(G <= J) for i.i.d. guessing from tilt(p, beta).

    Minimizes D(Q||p) + [D(Q||tilt(p, beta)) + H(Q) - alpha]_+ over all
    types Q; with ``restrict_to_list_types`` only types inside the optimal
    list's first e^(n alpha) positions are admitted.
    """
    _check_alpha(p, alpha)
    if not beta >= 0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    phat = tilt(p, beta)
    q, value, t, resid = _tilt_path(p, phat, alpha)
    if restrict_to_list_types:
        # Along the tilted family the objective is convex in E_Q[-log p], so
        # the restricted optimum is the unrestricted one clamped to the set.
        level = threshold_level(p, alpha, beta_max)
        if not cross_entropy(q, p) < level:
            thr = _threshold(p, alpha, beta_max)
            q = thr.q
            value = kl_divergence(q, p) + max(cross_entropy(q, phat) - alpha, 0.0)
            resid = thr.residual
    return ExponentReport(value, q, "tilted-bisection", resid, beta=beta, extra={"path_t": t})


def min_beta_async_exponent(
    p: Pmf, alpha: float, beta_max: float = BETA_MAX, grid_points: int = 401
) -> ExponentReport:
    """Best tilt for i.i.d. guessers: grid over beta, then bounded refinement."""
    _check_alpha(p, alpha)

    def f(b):
        return async_success_exponent(p, alpha, b).value

    # denser near small beta where the exponent varies fastest
    grid = np.unique(np.concatenate([np.linspace(0.0, 4.0, grid_points), np.geomspace(4.0, beta_max, 60)]))
    vals = np.array([f(b) for b in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    best_b, best_v = float(grid[i]), float(vals[i])
    if hi > lo:
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12, "maxiter": 500})
        if res.fun < best_v:
            best_b, best_v = float(res.x), float(res.fun)
    rep = async_success_exponent(p, alpha, best_b)
    return ExponentReport(
        rep.value, rep.argmin_type, "tilted-bisection", rep.residual, beta=best_b, extra={"path_t": rep.extra["path_t"]}
    )


def failure_exponent(p: Pmf, alpha: float, beta_max: float = BETA_MAX) -> ExponentReport:
    """Decay rate of P(G* > J), the probability the list misses the secret."""
    _check_alpha(p, alpha)
    if alpha >= math.log(len(p)) - 1e-12:
        # the budget covers every sequence
        return ExponentReport(math.inf, Pmf.uniform(p.support), "tilted-bisection", 0.0, beta=0.0)
    h = shannon_entropy(p)
    if alpha <= h:
        return ExponentReport(0.0, p, "tilted-bisection", 0.0, beta=1.0)
    t = _threshold(p, alpha, beta_max)
    return ExponentReport(kl_divergence(t.q, p), t.q, "tilted-bisection", t.residual, beta=t.beta)
