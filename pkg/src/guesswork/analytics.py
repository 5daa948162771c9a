"""Exact and asymptotic guesswork for list guessers and i.i.d. guessers."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .probability import (
    ConditionalPmf,
    Pmf,
    conditional_tilt,
    kl_divergence,
    log_power_sum,
    renyi_entropy,
    shannon_entropy,
    tilt,
)

MOMENT_KINDS = ("exact-G-moment", "V-rho", "G-rho", "arikan-lower", "arikan-upper", "exponent")


@dataclass(frozen=True)
class MomentParam:
    rho: float
    gamma: float | None = None

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")


@dataclass(frozen=True)
class AnalyticMoment:
    """A moment, stored together with its log so neither overflows."""

    log_value: float
    kind: str

    def __post_init__(self):
        if self.kind not in MOMENT_KINDS:
            raise ValueError(f"unknown moment kind {self.kind!r}")

    @property
    def value(self) -> float:
        if self.log_value > 709.0:
            return math.inf
        return math.exp(self.log_value)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.log_value) and self.log_value > 0

    @classmethod
    def of(cls, value: float, kind: str) -> "AnalyticMoment":
        return cls(math.log(value) if value > 0 else -math.inf, kind)


@dataclass(frozen=True, eq=False)
class GuessList:
    order: tuple
    rank_of: dict

    def __len__(self):
        return len(self.order)

    def rank(self, symbol) -> int:
        return self.rank_of[symbol]


def _check_rho(rho):
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho!r}")


def optimal_order(p: Pmf) -> np.ndarray:
    """Support indices by decreasing probability, ties by support order."""
    return np.argsort(-p.probs, kind="stable")


def optimal_list(p: Pmf) -> GuessList:
    idx = optimal_order(p)
    order = tuple(p.support[i] for i in idx)
    return GuessList(order, {s: r for r, s in enumerate(order, start=1)})


def ranks(p: Pmf) -> np.ndarray:
    """1-based rank of each support entry in the optimal list."""
    r = np.empty(len(p), dtype=np.int64)
    r[optimal_order(p)] = np.arange(1, len(p) + 1)
    return r


def exact_guesswork_moment(p: Pmf, rho: float) -> AnalyticMoment:
    _check_rho(rho)
    r = ranks(p).astype(float)
    return AnalyticMoment.of(math.fsum(r ** rho * p.probs), "exact-G-moment")


def arikan_bounds(p: Pmf, rho: float) -> tuple[AnalyticMoment, AnalyticMoment]:
    """Lower and upper bounds on the optimal rho-th guesswork moment."""
    _check_rho(rho)
    log_upper = (1.0 + rho) * log_power_sum(p, 1.0 / (1.0 + rho))
    log_lower = log_upper - rho * math.log1p(math.log(len(p)))
    return AnalyticMoment(log_lower, "arikan-lower"), AnalyticMoment(log_upper, "arikan-upper")


def sync_exponent(p: Pmf, rho: float) -> float:
    """rho * H_{1/(1+rho)}(p): log E[G*^rho] per symbol, nats."""
    _check_rho(rho)
    return rho * renyi_entropy(p, 1.0 / (1.0 + rho))


def iid_v_moment(p: Pmf, phat: Pmf, rho: float) -> AnalyticMoment:
    """E[V_rho] = sum_x p(x) / phat(x)^rho for guesses drawn i.i.d. from phat."""
    _check_rho(rho)
    if p.support != phat.support:
        raise ValueError("p and phat must share a support")
    mask = p.positive
    if np.any(phat.probs[mask] == 0):
        return AnalyticMoment(math.inf, "V-rho")
    terms = np.log(p.probs[mask]) - rho * np.log(phat.probs[mask])
    return AnalyticMoment(float(logsumexp(terms)), "V-rho")


def optimal_iid_distribution(p: Pmf, rho: float) -> tuple[Pmf, AnalyticMoment]:
    """Tilt of order 1/(1+rho) and the log of the minimal E[V_rho]."""
    _check_rho(rho)
    return tilt(p, 1.0 / (1.0 + rho)), AnalyticMoment(sync_exponent(p, rho), "V-rho")


def geometric_moment(p_hit: float, rho: float, tail_eps: float = 1e-9, chunk: int = 1 << 16) -> tuple[float, int]:
    """sum_k k^rho (1-q)^(k-1) q, truncated by a geometric tail bound.

    Returns ``(value, terms_used)``. Summation stops once the remaining
    tail is provably below ``tail_eps`` times the running sum.
    """
    _check_rho(rho)
    if not tail_eps > 0:
        raise ValueError("tail_eps must be > 0")
    q = float(p_hit)
    if not 0 < q <= 1:
        raise ValueError(f"hit probability must lie in (0, 1], got {q!r}")
    if q == 1.0:
        return 1.0, 1
    log_r = math.log1p(-q)
    log_q = math.log(q)
    total = 0.0
    comp = 0.0
    k0 = 1
    while True:
        k = np.arange(k0, k0 + chunk, dtype=float)
        terms = np.exp(rho * np.log(k) + (k - 1) * log_r + log_q)
        # Kahan step across chunks
        y = float(np.sum(terms)) - comp
        t = total + y
        comp = (t - total) - y
        total = t
        K = k0 + chunk - 1
        # ratio of successive terms beyond K is at most ((K+2)/(K+1))^rho (1-q)
        c = math.exp(rho * math.log1p(1.0 / (K + 1)) + log_r)
        if c < 1.0:
            next_term = math.exp(rho * math.log(K + 1) + K * log_r + log_q)
            tail = next_term / (1.0 - c)
            if tail < tail_eps * total:
                return total, K
        k0 += chunk
        if k0 > 10**10:
            raise RuntimeError("geometric series did not converge")


def iid_g_moment_numeric(p: Pmf, phat: Pmf, rho: float, tail_eps: float = 1e-9) -> AnalyticMoment:
    """E[G^rho] for i.i.d. guessing from phat, by truncated series per symbol."""
    _check_rho(rho)
    if not tail_eps > 0:
        raise ValueError("tail_eps must be > 0")
    if p.support != phat.support:
        raise ValueError("p and phat must share a support")
    mask = p.positive
    if np.any(phat.probs[mask] == 0):
        return AnalyticMoment(math.inf, "G-rho")
    cache: dict[float, float] = {}
    parts = []
    for px, qx in zip(p.probs[mask], phat.probs[mask]):
        if qx not in cache:
            cache[qx] = geometric_moment(qx, rho, tail_eps)[0]
        parts.append(px * cache[qx])
    return AnalyticMoment.of(math.fsum(parts), "G-rho")


def mismatch_exponent(p: Pmf, rho: float, gamma: float) -> float:
    """log E[V_rho] when guessing i.i.d. from the tilt optimized for gamma.

    The first Renyi order, (gamma - rho + 1)/(1 + gamma), can be zero or
    negative when rho > gamma + 1; the power sum is still finite on a finite
    alphabet and is evaluated directly.
    """
    _check_rho(rho)
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    order = (gamma - rho + 1.0) / (1.0 + gamma)
    if abs(order - 1.0) < 1e-9:
        first = 0.0
    else:
        # rho/(1+gamma) * H_order == log sum p^order, since 1 - order = rho/(1+gamma)
        first = log_power_sum(p, order)
    second = gamma * rho / (1.0 + gamma) * renyi_entropy(p, 1.0 / (1.0 + gamma))
    return first + second


def entropy_matching_tilt(p: Pmf, target_entropy: float, beta_max: float = 50.0, xtol: float = 1e-13) -> float:
    """beta in [0, beta_max] with H(tilt(p, beta)) = target_entropy.

    Entropy along the tilted family is non-increasing in beta, so a bracketed
    root exists whenever the target lies between the two endpoint entropies.
    Targets outside the bracket return the nearest endpoint.
    """
    h_lo = shannon_entropy(tilt(p, beta_max))
    h_hi = shannon_entropy(tilt(p, 0.0))
    if target_entropy >= h_hi:
        return 0.0
    if target_entropy <= h_lo:
        return beta_max

    def f(b):
        return shannon_entropy(tilt(p, b)) - target_entropy

    return brentq(f, 0.0, beta_max, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)


def j_guesswork_exponent(p: Pmf, alpha: float, beta_max: float = 50.0) -> float:
    """Exponent of the mean number of guesses for an attacker capped at J = e^(n alpha)."""
    log_k = math.log(len(p))
    if alpha < 0 or alpha > log_k + 1e-12:
        raise ValueError(f"alpha must lie in [0, log|X|] = [0, {log_k}], got {alpha!r}")
    h = shannon_entropy(p)
    if alpha < h:
        return alpha
    beta = entropy_matching_tilt(p, alpha, beta_max)
    return max(alpha - kl_divergence(tilt(p, beta), p), renyi_entropy(p, 0.5))


def conditional_optimal_iid(c: ConditionalPmf, marginal_y: Pmf, rho: float) -> tuple[ConditionalPmf, float]:
    """Row-wise optimal tilt and log E[V*] = log sum_y P(y) (sum_x P(x|y)^(1/(1+rho)))^(1+rho)."""
    _check_rho(rho)
    if set(marginal_y.support) != set(c.y_support):
        raise ValueError("marginal over Y does not match the conditional rows")
    theta = 1.0 / (1.0 + rho)
    logs = []
    weights = []
    for y, py in zip(marginal_y.support, marginal_y.probs):
        if py == 0:
            continue
        logs.append((1.0 + rho) * log_power_sum(c[y], theta))
        weights.append(py)
    value = float(logsumexp(logs, b=weights))
    return conditional_tilt(c, theta), value


def iid_success_curve(p: Pmf, phat: Pmf, js) -> np.ndarray:
    """P(G <= j) for i.i.d. guessing from phat, for each j in ``js``."""
    js = np.asarray(js, dtype=float)
    q = phat.probs[None, :]
    miss = np.exp(js[:, None] * np.log1p(-np.minimum(q, 1.0 - 1e-300)))
    miss = np.where(q >= 1.0, np.where(js[:, None] >= 1, 0.0, 1.0), miss)
    return np.clip(1.0 - miss @ p.probs, 0.0, 1.0)


def list_success_curve(p: Pmf, js) -> np.ndarray:
    """P(G* <= j) for the optimal list: mass of the j most likely symbols."""
    cum = np.concatenate([[0.0], np.cumsum(p.probs[optimal_order(p)])])
    js = np.clip(np.asarray(js, dtype=np.int64), 0, len(p))
    return np.minimum(cum[js], 1.0)
