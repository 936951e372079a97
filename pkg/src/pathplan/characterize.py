"""Characterization of weakly smart and smart plans without execution.

A chained plan is weakly smart exactly when its semantics delivers a query
answer on its own canonical database: the one-path instance every
refutation proof constructs, on which a delivered answer replays over any
instance where the filter-free plan and the query both succeed.  Smart
plans are the bounded ones: the skeleton splits into a forward path
followed by a walk back through the reversed query atom and the forward
path, with one equality filter pinned next to the output inside a query
atom.  The walk decompositions here also describe plan shapes (the "loose"
variant lets the query relation open the skeleton and the walk stop one
position short).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import (
    Atom,
    AtomicQuery,
    ExecutionPlan,
    PathSemantics,
    constraint_free_core,
    plan_semantics,
    reduce_plan,
    strip_filters,
)

FORWARD = "forward"
BACKWARD = "backward"

SMART = "smart"
WEAKLY_SMART_ONLY = "weaklySmartOnly"
NOT_WEAKLY_SMART = "notWeaklySmart"


@dataclass(frozen=True)
class Step:
    """One move through a base sequence, emitting one oriented atom.

    A forward step at position i emits base atom i (0-based) and moves to
    i+1; a backward step at position i emits the inverse of base atom i-1
    and moves to i-1.
    """

    kind: str
    emitted: Atom
    from_position: int
    to_position: int


@dataclass(frozen=True)
class WalkDecomposition:
    base: tuple
    steps: tuple
    end_position: int

    def emitted(self) -> tuple:
        return tuple(s.emitted for s in self.steps)


@dataclass(frozen=True)
class BoundedDecomposition:
    """Forward path plus the backward walk that retraces it to the query.

    ``loose`` marks the r.P.B form, whose walk stops at position 1 instead
    of crossing the query atom down to 0.
    """

    forward_path: tuple
    walk: WalkDecomposition
    loose: bool


@dataclass(frozen=True)
class Verdict:
    level: str
    decomposition: Optional[BoundedDecomposition] = None
    witness: object = None


def find_walk(base: Sequence[Atom], candidate: Sequence[Atom], target: int):
    """First walk through ``base`` emitting ``candidate``, ending at ``target``.

    Starts at position len(base); backward steps are tried before forward
    ones, depth-first, so the returned witness is deterministic.  Returns
    None when no walk exists.
    """
    base = tuple(base)
    candidate = tuple(candidate)
    n = len(base)
    dead = set()

    def go(pos: int, i: int):
        if i == len(candidate):
            return [] if pos == target else None
        if (pos, i) in dead:
            return None
        atom = candidate[i]
        if pos >= 1 and base[pos - 1].invert() == atom:
            rest = go(pos - 1, i + 1)
            if rest is not None:
                return [Step(BACKWARD, atom, pos, pos - 1)] + rest
        if pos <= n - 1 and base[pos] == atom:
            rest = go(pos + 1, i + 1)
            if rest is not None:
                return [Step(FORWARD, atom, pos, pos + 1)] + rest
        dead.add((pos, i))
        return None

    steps = go(n, 0)
    if steps is None:
        return None
    return WalkDecomposition(base, tuple(steps), target)


def is_bounded(skeleton: Sequence[Atom], query: AtomicQuery):
    """Shortest-forward-path bounded decomposition, or None.

    Tries every split of the skeleton into P and B and accepts when B is a
    walk through rev(q).P down to position 0.
    """
    skeleton = tuple(skeleton)
    for m in range(len(skeleton) + 1):
        forward = skeleton[:m]
        rest = skeleton[m:]
        if not rest:
            continue
        walk = find_walk((query.relation.invert(),) + forward, rest, 0)
        if walk is not None:
            return BoundedDecomposition(forward, walk, loose=False)
    return None


def is_loosely_bounded(skeleton: Sequence[Atom], query: AtomicQuery):
    """Bounded decomposition if one exists, else the r.P.B walk-to-1 form."""
    skeleton = tuple(skeleton)
    bounded = is_bounded(skeleton, query)
    if bounded is not None:
        return bounded
    if not skeleton or skeleton[0] != query.relation:
        return None
    body = skeleton[1:]
    for m in range(len(body)):
        forward = body[:m]
        rest = body[m:]
        walk = find_walk((query.relation.invert(),) + forward, rest, 1)
        if walk is not None:
            return BoundedDecomposition(forward, walk, loose=True)
    return None


def weakly_smart_semantics(sem: PathSemantics, query: AtomicQuery) -> bool:
    """Decide weak smartness of a filter-free semantics by evaluating it on
    its canonical database.

    The canonical path instance (one query fact plus the skeleton laid over
    fresh constants) is the completeness proofs' refutation witness, and an
    answer delivered there replays on every instance where the query and
    the filter-free plan both succeed.  This refines the pure walk check:
    a walk may cross the query position in ways no instance supports.
    """
    from .evaluate import canonical_weak_database, eval_semantics, query_answers

    instance = canonical_weak_database(sem, query)
    delivered = eval_semantics(sem, query.constant, instance)
    return bool(delivered & query_answers(query, instance))


def weakly_smart_skeleton(skeleton: Sequence[Atom], query: AtomicQuery) -> bool:
    sem = PathSemantics(tuple(skeleton), (), len(skeleton))
    return len(skeleton) > 0 and weakly_smart_semantics(sem, query)


def is_weakly_smart(plan: ExecutionPlan, query: AtomicQuery, catalog=None) -> bool:
    """Decide weak smartness of the plan, filters included.

    The filtered semantics is evaluated on the canonical database of its
    own skeleton: filters survive there exactly when they sit on boundaries
    pinned to the input constant, which is what holds on every instance.
    """
    from .model import reduce_plan, sub_function_transformation

    kept = sub_function_transformation(reduce_plan(plan))
    return weakly_smart_semantics(plan_semantics(kept), query)


def is_well_filtering(plan: ExecutionPlan, query: AtomicQuery) -> bool:
    """All filters equate variables with the query constant, and the
    semantics contains the query atom applied to (constant, output)."""
    sem = plan_semantics(plan)
    return _well_filtering_sem(sem, query)


def _well_filtering_sem(sem: PathSemantics, query: AtomicQuery) -> bool:
    fmap = sem.filter_map()
    if any(const != query.constant for const in fmap.values()):
        return False
    return _has_query_atom_at_output(sem, query)


def _has_query_atom_at_output(sem: PathSemantics, query: AtomicQuery) -> bool:
    out = sem.output
    filtered = sem.filter_positions
    n = len(sem.skeleton)
    # rel(constant, output): atom at position `out`, preceded by the constant.
    if out >= 1 and sem.skeleton[out - 1] == query.relation:
        if out - 1 == 0 or out - 1 in filtered:
            return True
    # rel^-(output, constant): atom just after the output, ending at the constant.
    if out + 1 <= n and sem.skeleton[out] == query.relation.invert():
        if out + 1 in filtered:
            return True
    return False


def minimal_filtering_plan(plan: ExecutionPlan, query: AtomicQuery) -> ExecutionPlan:
    """Canonical single-filter form used by the smartness decision.

    Strips all filters; if the result is already well-filtering it stands.
    Otherwise one filter on the query constant is placed at the greatest
    call and greatest output variable that yields a well-filtering plan.
    Returns the plan unchanged when no placement works.
    """
    stripped = strip_filters(plan)
    if is_well_filtering(stripped, query):
        return stripped
    for i in range(len(plan.calls) - 1, -1, -1):
        call = plan.calls[i]
        for name in reversed(call.outputs):
            candidate = ExecutionPlan(
                stripped.calls, ((name, query.constant),), stripped.output
            )
            if is_well_filtering(candidate, query):
                return candidate
    return plan


def _filter_is_safe(sem: PathSemantics, query: AtomicQuery, pos: int) -> bool:
    """A filter position is harmless iff it sits inside a query atom that
    touches the output: rel at (pos, output=pos+1) or rel^- at (output=pos-1, pos)."""
    n = len(sem.skeleton)
    if pos + 1 <= n and sem.skeleton[pos] == query.relation and sem.output == pos + 1:
        return True
    if pos >= 1 and sem.skeleton[pos - 1] == query.relation.invert() and sem.output == pos - 1:
        return True
    return False


def smart_shape(plan: ExecutionPlan, query: AtomicQuery) -> bool:
    """Syntactic smartness test for a chained plan with its own filters."""
    sem = plan_semantics(plan)
    fmap = sem.filter_map()
    if any(const != query.constant for const in fmap.values()):
        return False
    if not all(_filter_is_safe(sem, query, p) for p in fmap):
        return False
    if not _has_query_atom_at_output(sem, query):
        return False
    core = plan_semantics(constraint_free_core(plan))
    dec = is_bounded(core.skeleton, query)
    return dec is not None


def is_smart(plan: ExecutionPlan, query: AtomicQuery, catalog=None) -> Verdict:
    """Three-way verdict: smart, weakly smart only, or neither.

    Smartness holds when the plan is well-filtering, every filter sits inside
    a query atom adjacent to the output, and the constraint-free core is
    bounded (not merely loosely bounded).
    """
    core = plan_semantics(constraint_free_core(plan))
    if smart_shape(plan, query):
        return Verdict(SMART, is_bounded(core.skeleton, query))
    if is_weakly_smart(plan, query):
        return Verdict(WEAKLY_SMART_ONLY, is_loosely_bounded(core.skeleton, query))
    return Verdict(NOT_WEAKLY_SMART, None)
