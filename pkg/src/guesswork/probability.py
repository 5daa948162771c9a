"""Finite-alphabet probability machinery.

Everything is in nats. Distributions are immutable; every function here
returns a fresh object and never touches its inputs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

PMF_ATOL = 1e-12
RENORMALIZE_ATOL = 1e-6


class NumericOverflowError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over an ordered, finite support."""

    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if len(support) != probs.size:
            raise ValueError(f"support has {len(support)} entries but probs has {probs.size}")
        if probs.size == 0:
            raise ValueError("empty support")
        if len(set(support)) != len(support):
            raise ValueError("support entries must be unique")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probabilities must be finite and non-negative")
        total = math.fsum(probs)
        if abs(total - 1.0) > PMF_ATOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_weights(cls, support: Sequence[Hashable], weights) -> "Pmf":
        """Normalize arbitrary non-negative weights."""
        w = np.asarray(weights, dtype=float)
        total = math.fsum(w)
        if not total > 0 or not math.isfinite(total):
            raise ValueError("weights must have a positive finite sum")
        return cls(tuple(support), _fix_sum(w / total))

    @classmethod
    def renormalized(cls, support: Sequence[Hashable], probs) -> "Pmf":
        """Build a Pmf from probabilities carrying float drift.

        Drift above ``RENORMALIZE_ATOL`` means the caller has a bug, not
        rounding noise, and raises.
        """
        p = np.asarray(probs, dtype=float)
        total = math.fsum(p)
        if abs(total - 1.0) > RENORMALIZE_ATOL:
            raise ValueError(f"probabilities sum to {total!r}; drift exceeds {RENORMALIZE_ATOL}")
        return cls.from_weights(support, p)

    @classmethod
    def uniform(cls, support: Sequence[Hashable] | int) -> "Pmf":
        if isinstance(support, int):
            support = range(support)
        support = tuple(support)
        return cls.from_weights(support, np.ones(len(support)))

    @classmethod
    def point_mass(cls, support: Sequence[Hashable] | int, at: Hashable) -> "Pmf":
        if isinstance(support, int):
            support = range(support)
        support = tuple(support)
        probs = np.zeros(len(support))
        probs[support.index(at)] = 1.0
        return cls(support, probs)

    @classmethod
    def bernoulli(cls, p0: float, support: Sequence[Hashable] = (0, 1)) -> "Pmf":
        """Binary PMF with ``P(support[0]) = p0``."""
        return cls(tuple(support), np.array([p0, 1.0 - p0]))

    def __len__(self) -> int:
        return len(self.support)

    def __getitem__(self, symbol) -> float:
        return float(self.probs[self.index(symbol)])

    def index(self, symbol) -> int:
        return self._index[symbol]

    @property
    def _index(self) -> dict:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {s: i for i, s in enumerate(self.support)}
            object.__setattr__(self, "_index_cache", cache)
        return cache

    @property
    def log_probs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.probs)

    @property
    def positive(self) -> np.ndarray:
        return self.probs > 0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs.tolist()))

    def allclose(self, other: "Pmf", atol: float = 1e-12) -> bool:
        return self.support == other.support and bool(np.allclose(self.probs, other.probs, rtol=0, atol=atol))

    def __repr__(self) -> str:
        body = ", ".join(f"{s!r}: {p:.6g}" for s, p in zip(self.support[:6], self.probs[:6]))
        more = ", ..." if len(self) > 6 else ""
        return f"Pmf({{{body}{more}}})"


def _fix_sum(p: np.ndarray) -> np.ndarray:
    # Pushes the fsum residual onto the largest entry so the 1e-12 check holds
    # even for 10^4+ symbols.
    p = np.array(p, dtype=float)
    resid = 1.0 - math.fsum(p)
    if resid != 0.0:
        i = int(np.argmax(p))
        p[i] = max(p[i] + resid, 0.0)
    return p


@dataclass(frozen=True, eq=False)
class ConditionalPmf:
    """Rows ``y -> P(.|y)`` sharing one X-support."""

    rows: Mapping[Hashable, Pmf]

    def __post_init__(self):
        rows = dict(self.rows)
        if not rows:
            raise ValueError("conditional PMF needs at least one row")
        supports = {row.support for row in rows.values()}
        if len(supports) != 1:
            raise ValueError("all rows must share the same X-support")
        object.__setattr__(self, "rows", rows)

    @property
    def x_support(self) -> tuple:
        return next(iter(self.rows.values())).support

    @property
    def y_support(self) -> tuple:
        return tuple(self.rows)

    def __getitem__(self, y) -> Pmf:
        return self.rows[y]


@dataclass(frozen=True)
class ZipfSpec:
    m: int
    s: float
    variant: str = "pdf"
    normalizer: float | None = field(default=None)

    def __post_init__(self):
        if int(self.m) != self.m or self.m <= 0:
            raise ValueError(f"alphabet size must be a positive integer, got {self.m!r}")
        if self.s < 0:
            raise ValueError(f"Zipf exponent must be >= 0, got {self.s!r}")
        if self.variant not in ("pdf", "cdf"):
            raise ValueError(f"variant must be 'pdf' or 'cdf', got {self.variant!r}")
        if self.variant == "cdf" and self.s > 1:
            raise ValueError("CDF-Zipf requires 0 <= s <= 1")
        expected = zipf_normalizer(self.m, self.s, self.variant)
        if self.normalizer is None:
            object.__setattr__(self, "normalizer", expected)
        elif abs(self.normalizer - expected) > 1e-12 * max(1.0, abs(expected)):
            raise ValueError(f"normalizer {self.normalizer!r} does not match recomputed {expected!r}")


def harmonic_number(m: int, s: float) -> float:
    """Generalized harmonic number sum_{j=1}^m j^-s."""
    j = np.arange(1, int(m) + 1, dtype=float)
    return math.fsum(j ** -s)


def zipf_normalizer(m: int, s: float, variant: str = "pdf") -> float:
    if variant == "pdf":
        return harmonic_number(m, s)
    # the CDF C*i^s has to reach 1 at i = m
    return float(m) ** -s


def zipf_pmf(spec: ZipfSpec) -> Pmf:
    """Zipf law over ranks 1..m (support is the rank itself)."""
    i = np.arange(1, spec.m + 1, dtype=float)
    if spec.variant == "pdf":
        probs = i ** -spec.s / spec.normalizer
    else:
        probs = spec.normalizer * (i ** spec.s - (i - 1) ** spec.s)
    return Pmf.renormalized(tuple(range(1, spec.m + 1)), probs)


def tilt(p: Pmf, theta: float) -> Pmf:
    """Tilted distribution ``p(x)^theta / sum p^theta``.

    ``theta = 0`` is accepted and gives the uniform law over the positive
    support; zero-probability symbols always stay at zero.
    """
    if not theta >= 0 or not math.isfinite(theta):
        raise ValueError(f"tilt parameter must be a finite number >= 0, got {theta!r}")
    pos = p.positive
    logw = np.full(len(p), -np.inf)
    logw[pos] = theta * np.log(p.probs[pos])
    logz = logsumexp(logw[pos])
    out = np.zeros(len(p))
    out[pos] = np.exp(logw[pos] - logz)
    if not np.all(np.isfinite(out)) or not math.isfinite(logz):
        raise NumericOverflowError(f"tilt by {theta!r} is not representable")
    return Pmf.renormalized(p.support, out)


def log_power_sum(p: Pmf, order: float) -> float:
    """log sum_{x: p(x)>0} p(x)^order, valid for any real order."""
    lp = p.log_probs[p.positive]
    return float(logsumexp(order * lp))


def shannon_entropy(p: Pmf) -> float:
    q = p.probs[p.positive]
    return float(-math.fsum(q * np.log(q)))


def renyi_entropy(p: Pmf, alpha: float) -> float:
    if not alpha > 0:
        raise ValueError(f"Renyi order must be > 0, got {alpha!r}")
    if abs(alpha - 1.0) < 1e-9:
        return shannon_entropy(p)
    if math.isinf(alpha):
        return float(-np.log(p.probs.max()))
    return log_power_sum(p, alpha) / (1.0 - alpha)


def _check_same_support(q: Pmf, p: Pmf):
    if q.support != p.support:
        raise ValueError("distributions are defined over different supports")


def cross_entropy(q: Pmf, p: Pmf) -> float:
    """E_q[-log p]; +inf when q charges a symbol p excludes."""
    _check_same_support(q, p)
    mask = q.positive
    if np.any(p.probs[mask] == 0):
        return math.inf
    return float(-math.fsum(q.probs[mask] * np.log(p.probs[mask])))


def kl_divergence(q: Pmf, p: Pmf) -> float:
    """D(q || p) in nats; +inf when supp(q) is not inside supp(p)."""
    _check_same_support(q, p)
    mask = q.positive
    if np.any(p.probs[mask] == 0):
        return math.inf
    qq, pp = q.probs[mask], p.probs[mask]
    return max(float(math.fsum(qq * (np.log(qq) - np.log(pp)))), 0.0)


def empirical_from_counts(rows: Iterable[tuple[Hashable, int]]) -> Pmf:
    """PMF from (symbol, count) pairs.

    Support is sorted by descending count, ties broken lexicographically.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no (symbol, count) rows given")
    seen = set()
    for sym, count in rows:
        if sym in seen:
            raise ValueError(f"duplicate symbol {sym!r}")
        seen.add(sym)
        if isinstance(count, bool) or int(count) != count or count <= 0:
            raise ValueError(f"count for {sym!r} must be a positive integer, got {count!r}")
    rows.sort(key=lambda r: (-int(r[1]), str(r[0])))
    counts = np.array([int(c) for _, c in rows], dtype=float)
    return Pmf.from_weights([s for s, _ in rows], counts)


def truncate_top_k(p: Pmf, k: int) -> Pmf:
    """Keep the first ``k`` symbols of the support and renormalize."""
    if k <= 0:
        raise ValueError("top-k must be positive")
    k = min(k, len(p))
    return Pmf.from_weights(p.support[:k], p.probs[:k])


def conditional_tilt(c: ConditionalPmf, theta: float) -> ConditionalPmf:
    return ConditionalPmf({y: tilt(row, theta) for y, row in c.rows.items()})


def product_pmf(p: Pmf, n: int) -> Pmf:
    """n-fold i.i.d. product; support is the tuple of symbols, lexicographic."""
    if n < 1:
        raise ValueError("n must be >= 1")
    probs = p.probs
    for _ in range(n - 1):
        probs = np.multiply.outer(probs, p.probs).reshape(-1)
    support = tuple(itertools.product(p.support, repeat=n))
    return Pmf.renormalized(support, probs)


def read_frequency_file(path) -> list[tuple[str, int]]:
    """Parse ``<password>\\t<count>`` lines; ``#`` lines and blanks are skipped.

    Raises ``FrequencyFileError`` naming the offending line.
    """
    rows = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rsplit("\t", 1)
            if len(parts) != 2:
                raise FrequencyFileError(lineno, "expected '<password>\\t<count>'")
            pw, count = parts
            if not count.isdigit() or int(count) <= 0:
                raise FrequencyFileError(lineno, f"count {count!r} is not a positive base-10 integer")
            if pw in seen:
                raise FrequencyFileError(lineno, f"duplicate password (first seen on line {seen[pw]})")
            seen[pw] = lineno
            rows.append((pw, int(count)))
    if not rows:
        raise FrequencyFileError(0, "no records")
    return rows


class FrequencyFileError(ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)
