"""Synthetic catalog generation and the answered-queries sweep.

Catalogs are random path functions over oriented relation atoms, every
position existential except the last.  For each oriented relation the sweep
asks whether an equivalent rewriting, a Susie plan, a smart plan, or a
weakly smart plan exists, and records per-query runtimes.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .characterize import is_bounded
from .engine import (
    _Searcher,
    _concat_skeleton,
    _smartable,
    catalog_closure,
    find_one_weakly_smart,
    has_trivial_equivalent_rewriting,
    susie_plans,
)
from .model import Atom, AtomicQuery, PathFunction

APPROACHES = ("eqRewriting", "susie", "smart", "weaklySmart")


class SplitMix64:
    """Tiny portable 64-bit generator (splitmix64), so catalogs reproduce
    across implementations regardless of the host RNG."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next_u64() % n


@dataclass(frozen=True)
class SynthConfig:
    relation_count: int
    function_count: int
    max_length: int = 3
    seed: int = 0
    allow_inverse: bool = True

    def __post_init__(self):
        if self.relation_count < 1 or self.function_count < 1 or self.max_length < 1:
            raise ValueError("counts and max_length must be positive")


def gen_catalog(cfg: SynthConfig) -> List[PathFunction]:
    """Deterministic random catalog; output position is always the last.

    Bodies with more than one x.x^- pivot are resampled, since the plan
    search splits a body at a unique pivot.
    """
    rng = SplitMix64(cfg.seed)
    atoms = [Atom(f"r{i}") for i in range(1, cfg.relation_count + 1)]
    if cfg.allow_inverse:
        atoms += [a.invert() for a in atoms]
    catalog = []
    for i in range(cfg.function_count):
        while True:
            length = 1 + rng.below(cfg.max_length)
            skeleton = tuple(atoms[rng.below(len(atoms))] for _ in range(length))
            pivots = [
                j
                for j in range(length - 1)
                if skeleton[j + 1] == skeleton[j].invert()
            ]
            if len(pivots) <= 1:
                break
        catalog.append(PathFunction(f"f{i + 1}", skeleton, (length,)))
    return catalog


def smart_plan_exists(
    query: AtomicQuery,
    catalog: Sequence[PathFunction],
    deadline: Optional[float] = None,
) -> bool:
    """Existence check mirroring the smart enumeration's plan shapes."""
    closure = catalog_closure(catalog)
    rel = query.relation
    if any(v.skeleton == (rel,) for v in closure):
        return True
    # A core whose final call can carry the filter, found by the search.
    searcher = _Searcher(
        closure,
        query,
        max_plans=1,
        deadline=deadline,
        single=True,
        emit_gate=lambda vs: _smartable(vs, query),
    )
    searcher.run()
    if searcher.results:
        return True
    for v in closure:
        if len(v) == 1:
            continue
        if _smartable((v,), query):
            return True
    # A bounded weakly smart core extended by an inverse query atom.
    tails = [
        v
        for v in closure
        if v.skeleton == (rel.invert(),)
        or (
            v.skeleton == (rel.invert(), rel)
            and len(v) >= 2
            and (len(v) - 1) in v.bindable
        )
    ]
    if tails and _bounded_weak_exists(query, closure, deadline):
        return True
    return False


def _bounded_weak_exists(query, closure, deadline) -> bool:
    for v in closure:
        if is_bounded(v.skeleton, query) is not None:
            return True
    searcher = _Searcher(
        closure,
        query,
        max_plans=1,
        deadline=deadline,
        single=True,
        emit_gate=lambda vs: is_bounded(_concat_skeleton(vs), query) is not None,
    )
    searcher.run()
    return bool(searcher.results)


@dataclass
class QueryOutcome:
    answered: bool
    millis: float
    timed_out: bool = False


@dataclass
class PointResult:
    axis_value: int
    fractions: Dict[str, float]
    millis: Dict[str, List[float]] = field(default_factory=dict)
    timeouts: int = 0

    def median_ms(self, approach: str) -> float:
        values = self.millis.get(approach, [])
        return statistics.median(values) if values else 0.0

    def p95_ms(self, approach: str) -> float:
        values = sorted(self.millis.get(approach, []))
        if not values:
            return 0.0
        return values[int(0.95 * (len(values) - 1))]


def vocabulary(catalog: Sequence[PathFunction]) -> List[str]:
    names = {a.base for f in catalog for a in f.skeleton}
    return sorted(names)


def answered_fractions(
    catalog: Sequence[PathFunction],
    constant: str = "a",
    timeout_ms: float = 2000.0,
) -> PointResult:
    """For every oriented relation in the catalog's vocabulary, run each
    approach's existence check and record fractions and runtimes."""
    queries = []
    for base in vocabulary(catalog):
        queries.append(AtomicQuery(Atom(base), constant))
        queries.append(AtomicQuery(Atom(base, True), constant))
    counts = {a: 0 for a in APPROACHES}
    millis = {a: [] for a in APPROACHES}
    timeouts = 0
    for query in queries:
        for approach in APPROACHES:
            start = time.monotonic()
            deadline = start + timeout_ms / 1000.0
            timed_out = False
            try:
                if approach == "eqRewriting":
                    answered = has_trivial_equivalent_rewriting(query, catalog)
                elif approach == "susie":
                    answered = bool(susie_plans(query, catalog))
                elif approach == "smart":
                    answered = smart_plan_exists(query, catalog, deadline)
                else:
                    result = find_one_weakly_smart(query, catalog, deadline=deadline)
                    answered = result.hit is not None
            except Exception:
                answered = False
                timed_out = True
            elapsed = (time.monotonic() - start) * 1000.0
            if elapsed > timeout_ms:
                timed_out = True
            if timed_out:
                timeouts += 1
            counts[approach] += 1 if answered else 0
            millis[approach].append(elapsed)
    total = len(queries) or 1
    fractions = {a: counts[a] / total for a in APPROACHES}
    return PointResult(0, fractions, millis, timeouts)


@dataclass
class SweepRow:
    axis_value: int
    approach: str
    fraction: float
    median_ms: float
    p95_ms: float


@dataclass
class SweepResult:
    axis: str
    rows: List[SweepRow]
    timeouts: int
    query_count: int


def _point_job(args):
    axis, fixed, value, seed, max_length, timeout_ms = args
    if axis == "relations":
        cfg = SynthConfig(value, fixed, max_length, seed=_mix_seed(seed, value))
    else:
        cfg = SynthConfig(fixed, value, max_length, seed=_mix_seed(seed, value))
    catalog = gen_catalog(cfg)
    return answered_fractions(catalog, timeout_ms=timeout_ms)


def _mix_seed(seed: int, point: int) -> int:
    return SplitMix64((seed << 20) ^ point).next_u64()


def sweep(
    axis: str,
    fixed: int,
    values: Sequence[int],
    seeds: int = 20,
    max_length: int = 3,
    timeout_ms: float = 2000.0,
    workers: int = 1,
) -> SweepResult:
    """Average answered fractions over seeds at each axis point."""
    if axis not in ("relations", "functions"):
        raise ValueError("axis must be 'relations' or 'functions'")
    if not values:
        raise ValueError("empty sweep range")
    jobs = [
        (axis, fixed, value, seed, max_length, timeout_ms)
        for value in values
        for seed in range(seeds)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_job, jobs))
    else:
        results = [_point_job(job) for job in jobs]
    rows = []
    timeouts = 0
    query_count = 0
    for value in values:
        merged = {a: [] for a in APPROACHES}
        millis = {a: [] for a in APPROACHES}
        for (job, res) in zip(jobs, results):
            if job[2] != value:
                continue
            timeouts += res.timeouts
            for a in APPROACHES:
                merged[a].append(res.fractions[a])
                millis[a].extend(res.millis[a])
                query_count += len(res.millis[a]) if a == "weaklySmart" else 0
        for a in APPROACHES:
            avg = sum(merged[a]) / len(merged[a])
            med = statistics.median(millis[a]) if millis[a] else 0.0
            p95 = sorted(millis[a])[int(0.95 * (len(millis[a]) - 1))] if millis[a] else 0.0
            rows.append(SweepRow(value, a, avg, med, p95))
    return SweepResult(axis, rows, timeouts, query_count)


def sweep_csv(result: SweepResult) -> str:
    lines = ["axisValue,approach,fractionAnswered,medianMs,p95Ms"]
    for row in result.rows:
        lines.append(
            f"{row.axis_value},{row.approach},{row.fraction:.6f},"
            f"{row.median_ms:.3f},{row.p95_ms:.3f}"
        )
    return "\n".join(lines) + "\n"
