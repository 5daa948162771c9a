"""Monte Carlo simulation of distributed brute-force attacks.

Sequences of length n over a k-letter alphabet are handled as integers in
[0, k^n), most significant symbol first, so integer order is lexicographic.

Two execution paths:

* literal: agents produce guess streams, a schedule interleaves them and
  queries are checked one by one (chunked with numpy).
* geometric: when every agent guesses i.i.d. from the same law, the number
  of queries before a hit is Geometric(Q(target)) under any fixed delivery
  order, and it is sampled directly. This is what makes 10^6 trials or
  n = 16 sequences affordable.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from scipy.stats import ks_2samp

from .markov import MarkovModel
from .probability import Pmf

MAX_SPACE = 2**62
MAX_ENUMERATE = 10**7
GEOMETRIC_BLOCK = 1 << 16
CHUNK = 256


class NonTerminationError(RuntimeError):
    pass


# ---------------------------------------------------------------- strategies


@dataclass(frozen=True)
class SharedOptimalList:
    """All agents advance one shared pointer through the optimal list."""


@dataclass(frozen=True)
class ReplicatedOptimalList:
    """Each agent walks the full optimal list on its own."""


@dataclass(frozen=True)
class PartitionedLists:
    """The optimal list split into disjoint cells, one per agent.

    ``mode="interleaved"`` deals list positions round-robin (agent a gets
    positions a, a+A, ...); ``"contiguous"`` cuts it into consecutive blocks.
    """

    mode: str = "interleaved"

    def __post_init__(self):
        if self.mode not in ("interleaved", "contiguous"):
            raise ValueError(f"unknown partition mode {self.mode!r}")


@dataclass(frozen=True, eq=False)
class IidSampler:
    """Guesses drawn i.i.d. from ``pmf``: per symbol, or over whole sequences
    when ``over_sequences`` is set (support then indexes the sequence space)."""

    pmf: Pmf
    over_sequences: bool = False


@dataclass(frozen=True, eq=False)
class MarkovSampler:
    """Each guess is an independent run of ``model`` of length n."""

    model: MarkovModel


Strategy = Union[SharedOptimalList, ReplicatedOptimalList, PartitionedLists, IidSampler, MarkovSampler]
DETERMINISTIC = (SharedOptimalList, ReplicatedOptimalList, PartitionedLists)
RANDOM = (IidSampler, MarkovSampler)


# ------------------------------------------------------------------- sources


@dataclass(frozen=True, eq=False)
class IidSource:
    pmf: Pmf
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sequence length must be >= 1")

    @property
    def alphabet(self) -> tuple:
        return self.pmf.support


@dataclass(frozen=True, eq=False)
class MarkovSource:
    model: MarkovModel
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sequence length must be >= 1")

    @property
    def alphabet(self) -> tuple:
        return self.model.states


@dataclass(frozen=True, eq=False)
class AttackPlan:
    agents: tuple
    source: Union[IidSource, MarkovSource]
    budget: int | None = None

    def __post_init__(self):
        agents = tuple((str(a), s) for a, s in self.agents)
        if not agents:
            raise ValueError("an attack needs at least one agent")
        if len({a for a, _ in agents}) != len(agents):
            raise ValueError("agent ids must be unique")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be a positive integer")
        object.__setattr__(self, "agents", agents)

    @property
    def strategies(self) -> list:
        return [s for _, s in self.agents]


# ----------------------------------------------------------------- schedules


@dataclass(frozen=True)
class RoundRobin:
    pass


@dataclass(frozen=True)
class RandomInterleave:
    seed: int = 0


@dataclass(frozen=True)
class WorstCase:
    pass


@dataclass(frozen=True)
class ExplicitPermutation:
    """First deliveries given as (agent index, local query number, 1-based);
    afterwards the remaining queries go round-robin in each agent's order."""

    prefix: tuple

    def __post_init__(self):
        prefix = tuple((int(a), int(k)) for a, k in self.prefix)
        if len(set(prefix)) != len(prefix):
            raise ValueError("explicit permutation repeats a delivery")
        if any(a < 0 or k < 1 for a, k in prefix):
            raise ValueError("agent indices must be >= 0 and query numbers >= 1")
        object.__setattr__(self, "prefix", prefix)


Schedule = Union[RoundRobin, RandomInterleave, WorstCase, ExplicitPermutation]


# ------------------------------------------------------------ sequence space


class SequenceSpace:
    """Encoding, sampling and optimal-list ranks for a source."""

    def __init__(self, source):
        self.source = source
        self.k = len(source.alphabet)
        self.n = source.n
        if self.k ** self.n > MAX_SPACE:
            raise ValueError(f"sequence space {self.k}^{self.n} is too large to index")
        self.size = self.k ** self.n
        self.weights = self.k ** np.arange(self.n - 1, -1, -1, dtype=np.int64)
        self._order = None
        self._rank = None
        self._source_cdf = _cdf(source.pmf.probs) if isinstance(source, IidSource) else None

    def encode(self, seqs: np.ndarray) -> np.ndarray:
        return np.atleast_2d(seqs) @ self.weights

    def decode(self, idx) -> np.ndarray:
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        return (idx[:, None] // self.weights[None, :]) % self.k

    def symbols(self, idx: int) -> tuple:
        return tuple(self.source.alphabet[i] for i in self.decode(idx)[0])

    def sample_targets(self, rng: np.random.Generator, size: int) -> np.ndarray:
        src = self.source
        if isinstance(src, IidSource):
            seqs = _draw_symbols(rng, self._source_cdf, (size, self.n))
        else:
            seqs = src.model.sample(rng, size, self.n)
        return self.encode(seqs)

    def log_probs_all(self) -> np.ndarray:
        """log-probability of every sequence, by index."""
        if self.size > MAX_ENUMERATE:
            raise ValueError(f"cannot enumerate {self.size} sequences")
        seqs = self.decode(np.arange(self.size))
        src = self.source
        if isinstance(src, IidSource):
            # equal-probability symbols share a class so every permutation of a
            # type gets a bit-identical score
            lp = src.pmf.log_probs
            classes, inv = np.unique(lp, return_inverse=True)
            counts = np.zeros((self.size, len(classes)))
            for c in range(len(classes)):
                counts[:, c] = (inv[seqs] == c).sum(axis=1)
            with np.errstate(invalid="ignore"):
                out = np.where(counts > 0, counts * classes[None, :], 0.0).sum(axis=1)
            return out
        return src.model.log_prob(seqs)

    @property
    def order(self) -> np.ndarray:
        """Optimal list: sequence indices by decreasing probability, ties
        lexicographic."""
        if self._order is None:
            lp = self.log_probs_all()
            self._order = np.lexsort((np.arange(self.size), -lp))
        return self._order

    @property
    def rank(self) -> np.ndarray:
        if self._rank is None:
            r = np.empty(self.size, dtype=np.int64)
            r[self.order] = np.arange(1, self.size + 1)
            self._rank = r
        return self._rank


def _agent_lists(plan: AttackPlan, space: SequenceSpace) -> list:
    """Deterministic guess list per agent (None for random agents)."""
    a_count = len(plan.agents)
    out = []
    for a, strat in enumerate(plan.strategies):
        if isinstance(strat, (ReplicatedOptimalList, SharedOptimalList)):
            out.append(space.order)
        elif isinstance(strat, PartitionedLists):
            if strat.mode == "interleaved":
                out.append(space.order[a::a_count])
            else:
                out.append(np.array_split(space.order, a_count)[a])
        else:
            out.append(None)
    return out


def _cdf(probs: np.ndarray) -> np.ndarray:
    c = np.cumsum(probs)
    c[-1] = 1.0
    return c


def _draw_symbols(rng: np.random.Generator, cdf: np.ndarray, shape) -> np.ndarray:
    # inverse-CDF sampling; cheaper than Generator.choice for small batches
    return np.searchsorted(cdf, rng.random(shape), side="right")


class _Sampler:
    """Draws guess indices and gives each sequence's guess probability."""

    def __init__(self, strat, space: SequenceSpace):
        self.strat = strat
        self.space = space
        if isinstance(strat, IidSampler):
            if strat.over_sequences:
                if len(strat.pmf) != space.size:
                    raise ValueError("sequence-level sampler must cover the whole sequence space")
            elif strat.pmf.support != space.source.alphabet:
                raise ValueError("i.i.d. sampler alphabet differs from the source alphabet")
            self.cdf = _cdf(strat.pmf.probs)
            self.log_p = strat.pmf.log_probs
            self.full_support = bool(np.all(strat.pmf.probs > 0))
        else:
            if strat.model.states != space.source.alphabet:
                raise ValueError("Markov sampler states differ from the source alphabet")
            self.full_support = bool(np.all(strat.model.transitions > 0) and np.all(strat.model.stationary.probs > 0))

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        s, sp = self.strat, self.space
        if isinstance(s, IidSampler):
            if s.over_sequences:
                return _draw_symbols(rng, self.cdf, size)
            return _draw_symbols(rng, self.cdf, (size, sp.n)) @ sp.weights
        return sp.encode(s.model.sample(rng, size, sp.n))

    def log_prob(self, idx: np.ndarray) -> np.ndarray:
        s, sp = self.strat, self.space
        if isinstance(s, IidSampler):
            if s.over_sequences:
                return self.log_p[idx]
            return self.log_p[sp.decode(idx)].sum(axis=1)
        return s.model.log_prob(sp.decode(idx))


def _same_law(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, IidSampler):
        return a.over_sequences == b.over_sequences and a.pmf.allclose(b.pmf, atol=0.0)
    return a.model.states == b.model.states and np.array_equal(a.model.transitions, b.model.transitions) and np.array_equal(
        a.model.stationary.probs, b.model.stationary.probs
    )


def exchangeable(plan: AttackPlan) -> bool:
    """All agents guess i.i.d. from one common law."""
    strats = plan.strategies
    if not all(isinstance(s, RANDOM) for s in strats):
        return False
    return all(_same_law(strats[0], s) for s in strats[1:])


# --------------------------------------------------------------- worst case


def worst_case_deterministic(plan: AttackPlan, target, space: SequenceSpace | None = None) -> float:
    """Sup over order-preserving interleavings of the queries until ``target``.

    Every agent first spends all of its misses before the target (its whole
    list if it never holds the target), then one hit is delivered.
    """
    space = space or SequenceSpace(plan.source)
    if not all(isinstance(s, DETERMINISTIC) for s in plan.strategies):
        raise ValueError("worst case is only defined here for deterministic list strategies")
    t = _as_index(target, space)
    if isinstance(plan.strategies[0], SharedOptimalList):
        if not all(isinstance(s, SharedOptimalList) for s in plan.strategies):
            raise ValueError("shared-pointer agents cannot be mixed with other strategies")
        return float(space.rank[t])
    total = 0
    covered = False
    for lst in _agent_lists(plan, space):
        hit = np.flatnonzero(lst == t)
        if hit.size:
            covered = True
            total += int(hit[0])
        else:
            total += len(lst)
    return float(total + 1) if covered else math.inf


def _as_index(target, space: SequenceSpace) -> int:
    if isinstance(target, (int, np.integer)):
        return int(target)
    if not isinstance(target, tuple):
        target = (target,)
    pos = {s: i for i, s in enumerate(space.source.alphabet)}
    return int(space.encode(np.array([[pos[s] for s in target]]))[0])


# ------------------------------------------------------------------- trials


@dataclass(frozen=True)
class TrialRecord:
    total_queries: int
    success: bool
    target: int


def trial_seed(master_seed: int, index: int) -> int:
    """Per-trial seed derived from (master seed, trial index)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    hi, lo = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


class _Context:
    def __init__(self, plan: AttackPlan, schedule):
        self.plan = plan
        self.schedule = schedule
        self.space = SequenceSpace(plan.source)
        strats = plan.strategies
        kinds = {isinstance(s, DETERMINISTIC) for s in strats}
        if any(isinstance(s, SharedOptimalList) for s in strats) and not all(isinstance(s, SharedOptimalList) for s in strats):
            raise ValueError("shared-pointer agents cannot be mixed with other strategies")
        self.shared = isinstance(strats[0], SharedOptimalList)
        self.deterministic = kinds == {True}
        self.mixed = len(kinds) == 2
        if isinstance(schedule, WorstCase) and self.mixed:
            raise ValueError("worst-case delivery is undefined for mixed random/deterministic agents")
        if isinstance(schedule, ExplicitPermutation) and any(a >= len(strats) for a, _ in schedule.prefix):
            raise ValueError("explicit permutation names an agent that does not exist")
        self.lists = _agent_lists(plan, self.space) if (self.deterministic or self.mixed) else [None] * len(strats)
        self.samplers = [None if isinstance(s, DETERMINISTIC) else _Sampler(s, self.space) for s in strats]
        self.always_reachable = any(s is not None and s.full_support for s in self.samplers)
        # agents sharing a law draw their streams in one call
        self.groups = []
        if not (self.deterministic or self.mixed):
            for a, strat in enumerate(strats):
                for smp, idx in self.groups:
                    if _same_law(smp.strat, strat):
                        idx.append(a)
                        break
                else:
                    self.groups.append((self.samplers[a], [a]))
        self.streamed = not (self.deterministic or self.mixed)
        # only deterministic lists can run out; random streams go on forever
        self.guard = self.space.size * len(strats) + 1
        if plan.budget is not None:
            self.limit = plan.budget
        elif self.deterministic:
            self.limit = self.guard
        else:
            self.limit = math.inf


def _deliveries(ctx: _Context, rng_sched: np.random.Generator | None):
    """Yield chunks of (agent, local 0-based index) arrays in delivery order.

    Exhausted agents are skipped. Chunks grow geometrically so short trials
    stay cheap.
    """
    a_count = len(ctx.plan.agents)
    lengths = np.array([np.iinfo(np.int64).max if l is None else len(l) for l in ctx.lists], dtype=np.int64)
    sched = ctx.schedule
    nxt = np.zeros(a_count, dtype=np.int64)
    delivered: dict = {}
    if isinstance(sched, ExplicitPermutation):
        pre = [(a, k - 1) for a, k in sched.prefix if k - 1 < lengths[a]]
        for a, k in pre:
            delivered.setdefault(a, set()).add(k)
        for lo in range(0, len(pre), CHUNK):
            part = pre[lo : lo + CHUNK]
            yield np.array([a for a, _ in part]), np.array([k for _, k in part])
    size = 16
    while True:
        active = np.flatnonzero(nxt < lengths)
        if active.size == 0:
            return
        if isinstance(sched, RandomInterleave):
            agents = active[rng_sched.integers(0, active.size, size=size)]
        else:
            # whole cycles, so every chunk restarts at the lowest active agent
            agents = np.tile(active, -(-size // active.size))
        local = np.empty(agents.size, dtype=np.int64)
        keep = np.ones(agents.size, dtype=bool)
        for a in active:
            m = agents == a
            cnt = int(m.sum())
            if not cnt:
                continue
            if a in delivered:
                # skip queries the explicit prefix already delivered
                idx = []
                k = int(nxt[a])
                while len(idx) < cnt and k < lengths[a]:
                    if k not in delivered[a]:
                        idx.append(k)
                    k += 1
                nxt[a] = k
                vals = np.full(cnt, -1, dtype=np.int64)
                vals[: len(idx)] = idx
                local[m] = vals
                keep[m] = vals >= 0
            else:
                local[m] = nxt[a] + np.arange(cnt)
                nxt[a] += cnt
                keep[m] = local[m] < lengths[a]
        if not keep.all():
            agents, local = agents[keep], local[keep]
        if agents.size:
            yield agents, local
        size = min(size * 2, 4096)


def _run_literal(ctx: _Context, target: int, rng: np.random.Generator, rng_sched) -> TrialRecord:
    a_count = len(ctx.plan.agents)
    limit = ctx.limit
    if ctx.shared:
        g = int(ctx.space.rank[target])
        return _finish(ctx, g)
    if isinstance(ctx.schedule, WorstCase):
        if ctx.deterministic:
            g = worst_case_deterministic(ctx.plan, target, ctx.space)
            return _finish(ctx, g)
        # i.i.d. streams stay i.i.d. under any fixed order: identity delivery
    if ctx.limit == math.inf and not ctx.always_reachable and not _reachable(ctx, target):
        raise NonTerminationError("no agent can ever produce the target; set a budget")
    if ctx.streamed:
        return _run_random(ctx, target, rng, rng_sched)
    # per-agent guess buffers, each filled in that agent's own query order
    buffers: list = [np.empty(0, dtype=np.int64) for _ in range(a_count)]
    count = 0
    for agents, local in _deliveries(ctx, rng_sched):
        guesses = np.empty(len(agents), dtype=np.int64)
        for a in np.unique(agents):
            m = agents == a
            if ctx.lists[a] is not None:
                guesses[m] = ctx.lists[a][local[m]]
            else:
                need = int(local[m].max()) + 1
                if need > len(buffers[a]):
                    extra = max(need - len(buffers[a]), 2 * len(buffers[a]), 32)
                    buffers[a] = np.concatenate([buffers[a], ctx.samplers[a].draw(rng, extra)])
                guesses[m] = buffers[a][local[m]]
        hits = np.flatnonzero(guesses == target)
        if hits.size and count + hits[0] + 1 <= limit:
            return _finish(ctx, count + int(hits[0]) + 1)
        count += len(agents)
        if count >= limit:
            break
    if ctx.plan.budget is not None:
        return TrialRecord(ctx.plan.budget, False, target)
    raise NonTerminationError(
        f"no agent produced the target within {ctx.guard} deliveries; set a budget or cover the space"
    )


class _Positions:
    """Global 1-based delivery position of query k (0-based) of agent a, for
    endless streams under round-robin, random or explicit-prefix delivery."""

    def __init__(self, a_count: int, schedule, rng_sched):
        self.a = a_count
        self.rng = rng_sched if isinstance(schedule, RandomInterleave) else None
        self.sched = np.empty(0, dtype=np.int64)
        self.counts = np.zeros(a_count, dtype=np.int64)
        prefix = schedule.prefix if isinstance(schedule, ExplicitPermutation) else ()
        self.offset = len(prefix)
        self.pre = [{} for _ in range(a_count)]
        for i, (a, k) in enumerate(prefix):
            self.pre[a][k - 1] = i + 1
        self.pre_sorted = [np.array(sorted(d), dtype=np.int64) for d in self.pre]
        # past this local index every agent's positions increase with k
        self.monotone_from = max((k for a, k in prefix), default=0)

    def __call__(self, agents: np.ndarray, ks: np.ndarray) -> np.ndarray:
        if self.rng is not None:
            need = np.zeros(self.a, dtype=np.int64)
            np.maximum.at(need, agents, ks + 1)
            if np.any(need > self.counts):
                while np.any(need > self.counts):
                    grow = max(len(self.sched), 2 * self.a * int(need.max()))
                    self.sched = np.concatenate([self.sched, self.rng.integers(0, self.a, size=grow)])
                    self.counts = np.bincount(self.sched, minlength=self.a)
                # positions grouped by agent, each group in delivery order
                self.by_agent = np.argsort(self.sched, kind="stable")
                self.starts = np.concatenate([[0], np.cumsum(self.counts)[:-1]])
            return self.by_agent[self.starts[agents] + ks] + 1
        if not self.offset:
            return ks * self.a + agents + 1
        out = np.empty(len(ks), dtype=np.int64)
        for i, (a, k) in enumerate(zip(agents.tolist(), ks.tolist())):
            hit = self.pre[a].get(k)
            if hit is None:
                # rank among the agent's queries left over after the prefix
                r = k - int(np.searchsorted(self.pre_sorted[a], k))
                hit = self.offset + r * self.a + a + 1
            out[i] = hit
        return out


def _run_random(ctx: _Context, target: int, rng: np.random.Generator, rng_sched) -> TrialRecord:
    """Literal run for all-random agents under any schedule.

    Guess streams are drawn per agent in growing blocks and every hit is
    mapped to its delivery position. The earliest one is final once no
    undrawn query of any agent could be delivered before it.
    """
    a_count = len(ctx.plan.agents)
    limit = ctx.limit
    positions = _Positions(a_count, ctx.schedule, rng_sched)
    every = np.arange(a_count)
    best = math.inf
    drawn = 0
    width = max(16, positions.monotone_from)
    while True:
        block = np.empty((a_count, width), dtype=np.int64)
        for sampler, idx in ctx.groups:
            block[idx] = sampler.draw(rng, len(idx) * width).reshape(len(idx), width)
        ha, hk = np.nonzero(block == target)
        if ha.size:
            best = min(best, int(positions(ha, hk + drawn).min()))
        drawn += width
        frontier = int(positions(every, np.full(a_count, drawn)).min())
        if best <= limit and best < frontier:
            return _finish(ctx, best)
        if frontier > limit:
            # nothing left can land within the budget
            return TrialRecord(ctx.plan.budget, False, target)
        width = min(width * 2, 4096)


def _reachable(ctx: _Context, target: int) -> bool:
    for lst, smp in zip(ctx.lists, ctx.samplers):
        if lst is not None and np.any(lst == target):
            return True
        if smp is not None and smp.log_prob(np.array([target]))[0] > -np.inf:
            return True
    return False


def _finish(ctx: _Context, g: float) -> TrialRecord:
    target = -1  # filled by caller
    budget = ctx.plan.budget
    if math.isinf(g) or g > ctx.limit:
        if budget is not None:
            return TrialRecord(budget, False, target)
        raise NonTerminationError("target is never delivered under this plan and schedule")
    return TrialRecord(int(g), True, target)


def _sched_rng(schedule, seed: int):
    if isinstance(schedule, RandomInterleave):
        return np.random.default_rng(np.random.SeedSequence([int(schedule.seed), int(seed)]))
    return None


def _trial(ctx: _Context, seed: int) -> TrialRecord:
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    target = int(ctx.space.sample_targets(rng, 1)[0])
    rec = _run_literal(ctx, target, rng, _sched_rng(ctx.schedule, seed))
    return TrialRecord(rec.total_queries, rec.success, target)


def run_trial(plan: AttackPlan, schedule, seed: int) -> TrialRecord:
    """One attack: draw a target, deliver queries, count until the first hit."""
    return _trial(_Context(plan, schedule), seed)


# -------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True, eq=False)
class SimStats:
    trials: int
    rho: float
    mean_G: float
    mean_G_pow_rho: float
    se_G: float
    se_G_pow_rho: float
    success_within_J: float
    se_success: float
    J: int | None
    seed: int
    method: str
    totals: np.ndarray | None = field(default=None, repr=False)
    successes: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "rho": self.rho,
            "mean_G": self.mean_G,
            "mean_G_pow_rho": self.mean_G_pow_rho,
            "se_G": self.se_G,
            "se_G_pow_rho": self.se_G_pow_rho,
            "success_within_J": self.success_within_J,
            "se_success": self.se_success,
            "J": self.J,
            "seed": self.seed,
            "method": self.method,
        }

    def success_curve(self, js) -> np.ndarray:
        """Empirical P(G <= j) for each j (needs kept totals)."""
        if self.totals is None:
            raise ValueError("run monte_carlo with keep_records=True")
        hit = self.totals[self.successes] if self.successes is not None else self.totals
        s = np.sort(hit)
        return np.searchsorted(s, np.asarray(js), side="right") / self.trials


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    mean = math.fsum(x) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def _geometric_block(ctx: _Context, sampler: _Sampler, master_seed: int, block: int, size: int):
    rng = np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(block),)))
    targets = ctx.space.sample_targets(rng, size)
    q = np.exp(sampler.log_prob(targets))
    if np.any(q <= 0) and ctx.plan.budget is None:
        raise NonTerminationError("some targets can never be guessed by the sampler; set a budget")
    g = np.full(size, np.iinfo(np.int64).max, dtype=np.int64)
    pos = q > 0
    g[pos] = rng.geometric(np.minimum(q[pos], 1.0))
    return targets, g


def _literal_block(ctx: _Context, master_seed: int, lo: int, hi: int):
    recs = [_trial(ctx, trial_seed(master_seed, i)) for i in range(lo, hi)]
    return (
        np.array([r.target for r in recs], dtype=np.int64),
        np.array([r.total_queries for r in recs], dtype=np.int64),
        np.array([r.success for r in recs], dtype=bool),
    )


def monte_carlo(
    plan: AttackPlan,
    schedule,
    trials: int,
    rho: float = 1.0,
    master_seed: int = 0,
    J: int | None = None,
    method: str = "auto",
    workers: int = 1,
    keep_records: bool = False,
) -> SimStats:
    """Repeat independent attacks and aggregate guesswork statistics.

    ``method`` is "literal", "geometric" (only for exchangeable i.i.d.
    agents) or "auto". Work is split into fixed blocks whose seeds depend
    only on the master seed and the block/trial index, so the result does
    not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not rho > 0:
        raise ValueError("rho must be > 0")
    ctx = _Context(plan, schedule)
    if method == "auto":
        method = "geometric" if exchangeable(plan) else "literal"
    if method == "geometric" and not exchangeable(plan):
        raise ValueError("geometric sampling needs all agents to guess i.i.d. from one law")
    if method not in ("geometric", "literal"):
        raise ValueError(f"unknown method {method!r}")
    if J is None:
        J = plan.budget

    if method == "geometric":
        sampler = _Sampler(plan.strategies[0], ctx.space)
        blocks = [(b, min(GEOMETRIC_BLOCK, trials - b * GEOMETRIC_BLOCK)) for b in range(-(-trials // GEOMETRIC_BLOCK))]
        task = lambda bs: _geometric_block(ctx, sampler, master_seed, *bs)
    else:
        step = 512
        blocks = [(lo, min(lo + step, trials)) for lo in range(0, trials, step)]
        task = lambda lh: _literal_block(ctx, master_seed, *lh)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(task, blocks))
    else:
        results = [task(b) for b in blocks]

    g = np.concatenate([r[1] for r in results])
    if method == "geometric":
        if plan.budget is not None:
            success = g <= plan.budget
            g = np.minimum(g, plan.budget)
        else:
            success = np.ones(trials, dtype=bool)
    else:
        success = np.concatenate([r[2] for r in results])

    gf = g.astype(float)
    mean_g, se_g = _mean_se(gf)
    mean_gr, se_gr = _mean_se(gf ** rho)
    if J is not None:
        within = success & (g <= J)
        rate = float(np.count_nonzero(within)) / trials
    else:
        rate = float(np.count_nonzero(success)) / trials
    se_rate = math.sqrt(rate * (1 - rate) / trials)
    return SimStats(
        trials=trials,
        rho=rho,
        mean_G=mean_g,
        mean_G_pow_rho=mean_gr,
        se_G=se_g,
        se_G_pow_rho=se_gr,
        success_within_J=rate,
        se_success=se_rate,
        J=J,
        seed=int(master_seed),
        method=method,
        totals=g if keep_records else None,
        successes=success if keep_records else None,
    )


def trial_records(plan: AttackPlan, schedule, trials: int, master_seed: int = 0, method: str = "literal") -> list[TrialRecord]:
    """Per-trial (total_queries, success, target) for trace dumps."""
    ctx = _Context(plan, schedule)
    if method == "literal":
        t, g, s = _literal_block(ctx, master_seed, 0, trials)
    else:
        st = monte_carlo(plan, schedule, trials, master_seed=master_seed, method=method, keep_records=True)
        return [TrialRecord(int(x), bool(y), -1) for x, y in zip(st.totals, st.successes)]
    return [TrialRecord(int(a), bool(b), int(c)) for a, b, c in zip(g, s, t)]


# -------------------------------------------------------- schedule checking


@dataclass(frozen=True)
class InvarianceReport:
    statistics: dict
    threshold: float
    trials: int

    @property
    def passed(self) -> bool:
        return all(v < self.threshold for v in self.statistics.values())


def _schedule_name(s) -> str:
    if isinstance(s, RandomInterleave):
        return f"RandomInterleave({s.seed})"
    if isinstance(s, ExplicitPermutation):
        return f"ExplicitPermutation({len(s.prefix)})"
    return type(s).__name__


def schedule_invariance_check(
    plan: AttackPlan, schedules: Sequence, trials: int, seed: int = 0, threshold: float = 0.01
) -> InvarianceReport:
    """Two-sample KS statistic of total queries for every pair of schedules.

    Every schedule gets its own independent seed stream; for i.i.d. agents
    the laws coincide and the statistics stay small.
    """
    strats = plan.strategies
    if not (all(isinstance(s, RANDOM) for s in strats) or all(isinstance(s, DETERMINISTIC) for s in strats)):
        raise ValueError("invariance check needs agents of a single kind")
    if all(isinstance(s, RANDOM) for s in strats) and not exchangeable(plan):
        raise ValueError("i.i.d. agents must share one guessing law")
    samples = []
    for i, sch in enumerate(schedules):
        st = monte_carlo(plan, sch, trials, master_seed=seed + 7919 * i, method="literal", keep_records=True)
        samples.append(st.totals)
    stats = {}
    for i in range(len(schedules)):
        for j in range(i + 1, len(schedules)):
            key = f"{i}:{_schedule_name(schedules[i])}|{j}:{_schedule_name(schedules[j])}"
            stats[key] = float(ks_2samp(samples[i], samples[j]).statistic)
    return InvarianceReport(stats, threshold, trials)


# ----------------------------------------------------- exponent estimation


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    ns: tuple
    log_means: tuple
    per_n: tuple
    stats: tuple = field(repr=False, default=())


def estimate_exponent(
    make_plan: Callable[[int], AttackPlan],
    ns: Iterable[int],
    schedule,
    rho: float = 1.0,
    trials: int = 10_000,
    seed: int = 0,
    method: str = "auto",
) -> ExponentFit:
    """Least-squares slope of log E[G^rho] against n, plus (1/n) log E[G^rho]."""
    ns = tuple(int(n) for n in ns)
    if len(ns) < 3:
        raise ValueError("need at least three sequence lengths")
    logs = []
    stats = []
    for i, n in enumerate(ns):
        st = monte_carlo(make_plan(n), schedule, trials, rho=rho, master_seed=seed + 104729 * i, method=method)
        if not (math.isfinite(st.mean_G_pow_rho) and st.mean_G_pow_rho > 0):
            raise ValueError(f"estimate at n={n} is not finite")
        logs.append(math.log(st.mean_G_pow_rho))
        stats.append(st)
    slope, intercept = np.polyfit(np.array(ns, dtype=float), np.array(logs), 1)
    return ExponentFit(
        float(slope), float(intercept), ns, tuple(logs), tuple(l / n for l, n in zip(logs, ns)), tuple(stats)
    )
