"""State-space enumeration of minimal weakly smart and smart plans.

The search scans forward-path positions left to right.  A state is a set of
positioned function members: forward members emit their current atom and
count up, backward members emit the inverse of theirs and count down, and
exactly one forward member is designated as the forward-path builder.  All
active members of a consistent state emit the same atom.  A backward member
exhausting means a call starts at the current position; a forward member
running out means a call ends there.  Minimal plans allow at most one of
each per state and never repeat a state, which bounds the search and makes
it terminate on all inputs.

Functions whose body contains an x.x^- pivot may cross a turning point:
their two halves enter the state together as a forward and a backward
member tied to one call.  Calls that dive through the query atom to the
bottom of the walk align with the first scanned position, so they are
seeded explicitly rather than discovered mid-scan.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, List, Optional, Sequence

from .characterize import is_bounded, is_loosely_bounded, weakly_smart_skeleton
from .model import (
    AtomicQuery,
    ExecutionPlan,
    PathFunction,
    SubFunction,
    catalog_closure,
    chain_plan,
)

FORWARD = True
BACKWARD = False


class EngineError(Exception):
    pass


class EmptyCatalogError(EngineError):
    pass


class NotWeaklySmartError(EngineError):
    pass


@dataclass(frozen=True)
class Member:
    """One positioned function (or function half) inside a search state.

    ``index`` is 1-based into ``atoms``.  A forward member with index < 1 is
    pending and activates later; a backward member with index beyond its
    length idles until the scan reaches its window.  ``token`` ties the
    member to a call and is excluded from state identity.
    """

    fn_key: tuple
    atoms: tuple
    index: int
    forward: bool
    designated: bool = False
    token: int = field(default=-1, compare=False, hash=False)

    def emission(self):
        if self.index < 1 or self.index > len(self.atoms):
            return None
        atom = self.atoms[self.index - 1]
        return atom if self.forward else atom.invert()


@dataclass(frozen=True)
class SuccessorRecord:
    advanced: frozenset
    start_count: int
    end_count: int
    designated_ended: bool
    started: tuple = ()
    ended: tuple = ()


def state_consistent(members: Iterable[Member]) -> bool:
    """All active members emit the same atom."""
    emissions = {m.emission() for m in members} - {None}
    return len(emissions) <= 1


def search_successors(members: Iterable[Member]) -> SuccessorRecord:
    """Advance every member one scan step, counting starts and ends."""
    advanced = []
    started = []
    ended = []
    for m in members:
        if m.forward:
            if m.index < 1:
                advanced.append(replace(m, index=m.index + 1))
            elif m.index + 1 > len(m.atoms):
                ended.append(m)
            else:
                advanced.append(replace(m, index=m.index + 1))
        else:
            if m.index > len(m.atoms):
                advanced.append(replace(m, index=m.index - 1))
            elif m.index == 1:
                started.append(m)
            else:
                advanced.append(replace(m, index=m.index - 1))
    return SuccessorRecord(
        frozenset(advanced),
        len(started),
        len(ended),
        any(m.designated for m in ended),
        tuple(started),
        tuple(ended),
    )


@dataclass
class _Part:
    window: tuple
    entry: int
    idx0: int
    forward: bool
    designated: bool
    trailing: bool = False  # followed by the implicit final query atom (to 0)
    dip: bool = False  # dives through the query atom and back
    tail: bool = False  # enters at walk position 0, ends the walk at 1


@dataclass
class _CallRec:
    token: int
    view: SubFunction
    parts: List[_Part]


@dataclass(frozen=True)
class _Obligation:
    """The seed call's ascending half joins as the final designated piece at
    a fixed scan; enter_scan < 0 marks a consumed obligation."""

    token: int
    view: SubFunction
    window: tuple
    enter_scan: int



def _entry_emission(members: Sequence[Member]):
    """Unique atom the structure's active members emit at entry, or None.

    Returns the string "clash" when members disagree, marking an invalid
    structure.
    """
    emissions = {m.emission() for m in members} - {None}
    if not emissions:
        return None
    if len(emissions) > 1:
        return "clash"
    return next(iter(emissions))


@dataclass
class _SearchStats:
    states_visited: int = 0
    plans_emitted: int = 0
    truncated: bool = False


class _StopSearch(Exception):
    pass


class _Searcher:
    """One depth-first run over all seeds for a fixed query and closure."""

    def __init__(
        self,
        closure: Sequence[SubFunction],
        query: AtomicQuery,
        max_depth: int = 64,
        max_plans: int = 10000,
        deadline: Optional[float] = None,
        single: bool = False,
        use_loops: bool = True,
        emit_gate: Optional[Callable] = None,
        seeds_override: Optional[Callable] = None,
        prune_dominated: bool = False,
    ):
        self.closure = list(closure)
        if prune_dominated:
            # A call whose view is weakly smart on its own dominates every
            # multi-call plan containing it, so those views never appear in
            # minimal multi-call plans.  Single-call plans are found outside
            # the search.
            self.closure = [
                v
                for v in self.closure
                if not weakly_smart_skeleton(v.skeleton, query)
            ]
        self.query = query
        self.max_depth = max_depth
        self.max_plans = max_plans
        self.deadline = deadline
        self.single = single
        self.use_loops = use_loops
        self.emit_gate = emit_gate
        self.seeds_override = seeds_override
        self.visited = set()
        self.stats = _SearchStats()
        self.results: List[tuple] = []
        self._token_counter = itertools.count()
        self._loops = []
        if use_loops:
            for v in self.closure:
                p = v.parent.pivot()
                if p is not None and p < len(v):
                    self._loops.append((v, p))

    def run(self):
        seeds = self.seeds_override() if self.seeds_override else self._seeds()
        for members, recs, obligation, mode in seeds:
            if len(set(members)) != len(members):
                continue
            if not state_consistent(members):
                continue
            if sum(1 for m in members if m.designated) != 1:
                continue
            try:
                self._search(frozenset(members), 1, list(recs), obligation, mode, [])
            except _StopSearch:
                return

    # -- seed construction ---------------------------------------------------

    def _new_token(self) -> int:
        return next(self._token_counter)

    def _seeds(self):
        """Initial states: a designated start, a bottom structure, and at
        most one extra structure touching the first scanned position.

        All members whose atom windows align with scan 1 must be present in
        the seed; anything touching only later positions joins through
        start/end events during the search.  Structures are combined only
        when their first-scan emissions match.
        """
        tables = self._seed_tables()
        for mode, bottom in self._bottom_options():
            yield from self._seed_combos(mode, bottom, tables)

    def _seed_tables(self):
        """Extra structures and designated options, bucketed by the atom
        they emit at the first scan position."""
        extra_buckets = {}
        for x in self._extra_structures():
            e = _entry_emission(x[0])
            if e == "clash":
                continue
            extra_buckets.setdefault(e, []).append(x)
        des_buckets = {}
        for mode in ("bounded", "loose", "to1"):
            buckets = {}
            for d in self._designated_options(None, mode):
                e = _entry_emission(d[0])
                if e == "clash":
                    continue
                buckets.setdefault(e, []).append(d)
            des_buckets[mode] = buckets
        return extra_buckets, des_buckets

    def _seed_combos(self, mode, bottom, tables):
        extra_buckets, des_buckets = tables
        allow_extra = not bottom[3]
        want = _entry_emission(bottom[0])
        if want == "clash":
            return
        obligation0 = bottom[2]
        if obligation0 is not None and obligation0.enter_scan == 1:
            des_options = list(self._designated_options(obligation0, mode))
        else:
            des_options = None
        if not allow_extra:
            extra_list = [None]
        elif want is None:
            extra_list = [None] + [x for xs in extra_buckets.values() for x in xs]
        else:
            extra_list = [None] + extra_buckets.get(want, []) + extra_buckets.get(None, [])
        for extra in extra_list:
            obligation = obligation0
            if extra is not None and extra[2] is not None:
                if obligation is not None:
                    continue
                obligation = extra[2]
            if des_options is not None:
                candidates = des_options
            elif want is None:
                candidates = [d for ds in des_buckets[mode].values() for d in ds]
            else:
                candidates = des_buckets[mode].get(want, []) + des_buckets[mode].get(None, [])
            for des in candidates:
                d_members, d_recs, d_obligation = des
                if des_options is not None:
                    e = _entry_emission(d_members)
                    if e == "clash" or (want is not None and e is not None and e != want):
                        continue
                members = list(d_members) + list(bottom[0])
                recs = list(d_recs) + list(bottom[1])
                if extra is not None:
                    members += list(extra[0])
                    recs += list(extra[1])
                ob = d_obligation if d_obligation is not None else obligation
                yield members, recs, ob, mode

    def _trailing_bottom(self, view: SubFunction, drop: int):
        """A final call descending straight to position 1, then the implicit
        query atom; ``drop`` atoms at the end are excluded from the scan."""
        sk = view.skeleton
        window = sk[: len(sk) - drop]
        if not window:
            return None
        tok = self._new_token()
        member = Member(view.key + (1, len(window)), window, len(window), BACKWARD, token=tok)
        rec = _CallRec(tok, view, [_Part(window, 1, len(window), BACKWARD, False, trailing=True)])
        return ([member], [rec], None, False)

    def _bottom_options(self):
        for bottom in self._bounded_bottoms():
            yield "bounded", bottom
        for bottom in self._loose_bottoms():
            yield "loose", bottom

    def _bounded_bottoms(self):
        """Final-call structures whose skeleton ends with the query atom."""
        rel = self.query.relation
        for v in self.closure:
            sk = v.skeleton
            if len(sk) < 2 or sk[-1] != rel:
                continue
            bottom = self._trailing_bottom(v, 1)
            if bottom:
                yield bottom
            pivot = v.parent.pivot() if self.use_loops else None
            if pivot is not None and pivot + 1 <= len(sk) - 1:
                # Turn usage: climb to the pivot, then descend to the
                # implicit query atom.  The climb is either the forward
                # path's final piece (joining later as designated) or a
                # mid-walk ascent (pending member).
                a_win = sk[:pivot]
                d_win = sk[pivot : len(sk) - 1]
                if len(d_win) < len(a_win):
                    continue
                tok = self._new_token()
                m = Member(v.key + (pivot + 1, len(sk) - 1), d_win, len(d_win), BACKWARD, token=tok)
                rec = _CallRec(tok, v, [_Part(d_win, 1, len(d_win), BACKWARD, False, trailing=True)])
                ob = _Obligation(tok, v, a_win, 1 + len(d_win) - len(a_win))
                yield ([m], [rec], ob, False)
                idx0 = len(a_win) - len(d_win) + 1
                tok2 = self._new_token()
                m_a = Member(v.key + (1, pivot), a_win, idx0, FORWARD, token=tok2)
                m_d = Member(v.key + (pivot + 1, len(sk) - 1), d_win, len(d_win), BACKWARD, token=tok2)
                rec2 = _CallRec(
                    tok2,
                    v,
                    [
                        _Part(a_win, 1, idx0, FORWARD, False),
                        _Part(d_win, 1, len(d_win), BACKWARD, False, trailing=True),
                    ],
                )
                yield ([m_a, m_d], [rec2], None, False)

    def _loose_bottoms(self):
        """Final structures for walks ending at position 1.

        Every ender structure at the first scan position ends the walk
        there; dive-through endings and dip-terminal calls also qualify.
        The fourth slot marks bottoms that already cross the query atom.
        """
        rel = self.query.relation
        for members, recs, obligation in self._ender_structures(1):
            yield (members, recs, obligation, False)
        for v in self.closure:
            sk = v.skeleton
            pivot = v.parent.pivot() if self.use_loops else None
            # Dive-through ending: this call finishes with the query atom
            # (walk touches 0) and a tail call climbs back to position 1.
            if len(sk) >= 2 and sk[-1] == rel:
                for tail_members, tail_recs in self._tail_options():
                    base = self._trailing_bottom(v, 1)
                    if base is None:
                        continue
                    yield (
                        base[0] + tail_members,
                        base[1] + tail_recs,
                        None,
                        True,
                    )
            # Dip-terminal: the final call dives through the query atom and
            # climbs straight back to position 1.
            if (
                self.use_loops
                and pivot is not None
                and pivot + 1 == len(sk)
                and pivot >= 2
                and sk[pivot - 1] == rel
            ):
                alpha = sk[: pivot - 1]
                tok3 = self._new_token()
                m3 = Member(v.key + (1, pivot - 1), alpha, len(alpha), BACKWARD, token=tok3)
                r3 = _CallRec(tok3, v, [_Part(alpha, 1, len(alpha), BACKWARD, False, dip=True)])
                yield ([m3], [r3], None, True)

    def _extra_structures(self):
        """Structures whose walk stretches touch the first scanned position:
        one-call valleys, two-call valley pairs, and dives through the query
        atom.  At most one such extra joins a seed."""
        out = [list(x) + [None] for x in self._dip_options()]
        for members, recs in self._valley_structures(1):
            out.append([members, recs, None])
        for b_members, b_recs, b_ob in self._beginner_structures(1):
            for e_members, e_recs, e_ob in self._ender_structures(1):
                if b_ob is not None and e_ob is not None:
                    continue
                out.append(
                    [
                        b_members + e_members,
                        b_recs + e_recs,
                        b_ob if b_ob is not None else e_ob,
                    ]
                )
        return out

    def _tail_options(self):
        """Calls entering at walk position 0 and ending the walk at 1."""
        rel = self.query.relation
        out = []
        for v in self.closure:
            sk = v.skeleton
            if sk == (rel.invert(),):
                tok = self._new_token()
                rec = _CallRec(tok, v, [_Part((), 1, 0, FORWARD, False, tail=True)])
                out.append(([], [rec]))
            elif self.use_loops and len(sk) >= 3 and sk[0] == rel.invert():
                pivot = v.parent.pivot()
                if pivot is None or pivot < 2 or pivot >= len(sk):
                    continue
                a_win = sk[1:pivot]
                d_win = sk[pivot:]
                if not a_win or len(a_win) != len(d_win):
                    continue
                tok = self._new_token()
                m1 = Member(v.key + (2, pivot), a_win, 1, FORWARD, token=tok)
                m2 = Member(v.key + (pivot + 1, len(sk)), d_win, len(a_win), BACKWARD, token=tok)
                rec = _CallRec(
                    tok,
                    v,
                    [
                        _Part(a_win, 1, 1, FORWARD, False, tail=True),
                        _Part(d_win, 1, len(a_win), BACKWARD, False, tail=True),
                    ],
                )
                out.append(([m1, m2], [rec]))
        return out

    def _dip_options(self):
        """Mid-walk calls diving through the query atom and climbing back."""
        rel = self.query.relation
        out = []
        if not self.use_loops:
            return out
        for v in self.closure:
            pivot = v.parent.pivot()
            sk = v.skeleton
            if pivot is None or pivot >= len(sk):
                continue
            if sk[pivot - 1] != rel:
                continue
            alpha = sk[: pivot - 1]
            beta = sk[pivot + 1 :]
            if not alpha and not beta:
                continue  # pure dive-and-return: removable, never minimal
            tok = self._new_token()
            members = []
            parts = []
            if alpha:
                members.append(Member(v.key + (1, pivot - 1), alpha, len(alpha), BACKWARD, token=tok))
                parts.append(_Part(alpha, 1, len(alpha), BACKWARD, False, dip=True))
            if beta:
                members.append(Member(v.key + (pivot + 2, len(sk)), beta, 1, FORWARD, token=tok))
                parts.append(_Part(beta, 1, 1, FORWARD, False, dip=True))
            if not members:
                continue
            out.append((members, [_CallRec(tok, v, parts)]))
        return out

    def _designated_options(self, obligation, mode):
        """First forward-path piece.  In loose mode the first call also
        carries the leading query atom; in bounded mode any view (or a split
        loop view) can open the path."""
        if obligation is not None and obligation.enter_scan == 1:
            if mode == "loose":
                return  # the lead call must own the first designated piece
            tok = obligation.token
            m = Member(
                obligation.view.key + (1, len(obligation.window)),
                obligation.window,
                1,
                FORWARD,
                designated=True,
                token=tok,
            )
            rec = _CallRec(tok, obligation.view, [_Part(obligation.window, 1, 1, FORWARD, True)])
            yield ([m], [rec], replace(obligation, enter_scan=-1))
            return
        if mode == "loose":
            rel = self.query.relation
            for v in self.closure:
                sk = v.skeleton
                if len(sk) < 2 or sk[0] != rel:
                    continue
                pivot = v.parent.pivot() if self.use_loops else None
                tok = self._new_token()
                if pivot is None or pivot < 2:
                    window = sk[1:]
                    m = Member(v.key + (2, len(sk)), window, 1, FORWARD, designated=True, token=tok)
                    rec = _CallRec(tok, v, [_Part(window, 1, 1, FORWARD, True)])
                    yield ([m], [rec], None)
                else:
                    a_win = sk[1:pivot]
                    d_win = sk[pivot:]
                    if a_win and len(d_win) <= len(a_win):
                        m1 = Member(v.key + (2, pivot), a_win, 1, FORWARD, designated=True, token=tok)
                        m2 = Member(v.key + (pivot + 1, len(sk)), d_win, len(a_win), BACKWARD, token=tok)
                        rec = _CallRec(
                            tok,
                            v,
                            [
                                _Part(a_win, 1, 1, FORWARD, True),
                                _Part(d_win, 1, len(a_win), BACKWARD, False),
                            ],
                        )
                        yield ([m1, m2], [rec], None)
            return
        for v in self.closure:
            sk = v.skeleton
            tok = self._new_token()
            m = Member(v.key + (1, len(sk)), sk, 1, FORWARD, designated=True, token=tok)
            rec = _CallRec(tok, v, [_Part(sk, 1, 1, FORWARD, True)])
            yield ([m], [rec], None)
        for v, pivot in self._loops:
            sk = v.skeleton
            a_win = sk[:pivot]
            d_win = sk[pivot:]
            if len(d_win) <= len(a_win):
                tok = self._new_token()
                m1 = Member(v.key + (1, pivot), a_win, 1, FORWARD, designated=True, token=tok)
                m2 = Member(v.key + (pivot + 1, len(sk)), d_win, len(a_win), BACKWARD, token=tok)
                rec = _CallRec(
                    tok,
                    v,
                    [
                        _Part(a_win, 1, 1, FORWARD, True),
                        _Part(d_win, 1, len(a_win), BACKWARD, False),
                    ],
                )
                yield ([m1, m2], [rec], None)

    # -- the depth-first search ------------------------------------------------

    def _state_key(self, members: frozenset, scan: int, obligation) -> tuple:
        ob = None
        if obligation is not None and obligation.enter_scan >= 0:
            ob = (obligation.view.key, obligation.window, obligation.enter_scan - scan)
        return (members, ob)

    def _search(self, members, scan, recs, obligation, mode, stack):
        if self.deadline is not None and time.monotonic() > self.deadline:
            self.stats.truncated = True
            raise _StopSearch
        if scan > self.max_depth:
            self.stats.truncated = True
            return
        if obligation is not None and 0 <= obligation.enter_scan < scan:
            return
        key = self._state_key(members, scan, obligation)
        if self.single:
            if key in self.visited:
                return
            self.visited.add(key)
        else:
            if key in stack:
                return
            stack.append(key)
        self.stats.states_visited += 1
        try:
            rec = search_successors(members)
            advanced = rec.advanced
            if not advanced:
                if obligation is None or obligation.enter_scan < 0:
                    self._emit(recs, mode)
                return
            started = list(rec.started)
            ended = list(rec.ended)
            # A forward half exhausting together with its own backward half
            # is the internal turn of one call, not a start/end pair.
            cancelled_designated = False
            for e in list(ended):
                for s in list(started):
                    if (
                        e.token == s.token
                        and e.forward
                        and not s.forward
                        and e.fn_key[3] < s.fn_key[2]
                    ):
                        ended.remove(e)
                        started.remove(s)
                        if e.designated:
                            cancelled_designated = True
                        break
            if cancelled_designated:
                return  # members persist past the turn's top: dead branch
            designated_ended = any(e.designated for e in ended)
            nondes_ends = [e for e in ended if not e.designated]
            # Pending/idle members activating behave like begin/end needs at
            # the next position (their stretch starts or ends there).
            acts_fwd = sum(1 for m in advanced if m.forward and m.index == 1)
            acts_bwd = sum(
                1 for m in advanced if not m.forward and m.index == len(m.atoms)
            )
            begins = len(started) + acts_fwd
            ends_n = len(nondes_ends) + acts_bwd
            if begins > 1 or ends_n > 1:
                return
            if designated_ended and (begins or ends_n):
                return
            # Need-carrying additions per case; a one-call valley crossing
            # the next position carries no need and may join any of them.
            # New members must emit the next state's atom, so structures
            # with a different first emission are pruned up front.
            current = next(
                (m.emission() for m in advanced if m.emission() is not None), None
            )
            if designated_ended:
                base_options = list(self._designated_additions(scan + 1, obligation))
            elif begins == 1 and ends_n == 1:
                base_options = [None]
            elif begins == 1:
                base_options = list(self._ender_structures(scan + 1, current))
            elif ends_n == 1:
                base_options = list(self._beginner_structures(scan + 1, current))
            else:
                base_options = [None]
                for b_members, b_recs, b_ob in self._beginner_structures(scan + 1, current):
                    for e_members, e_recs, e_ob in self._ender_structures(scan + 1, current):
                        if b_ob is not None and e_ob is not None:
                            continue
                        base_options.append(
                            (
                                b_members + e_members,
                                b_recs + e_recs,
                                b_ob if b_ob is not None else e_ob,
                            )
                        )
            valley_options = [None] + list(self._valley_structures(scan + 1, current))
            for base in base_options:
                for valley in valley_options:
                    members = list(base[0]) if base else []
                    add_recs = list(base[1]) if base else []
                    new_ob = base[2] if base else None
                    if valley is not None:
                        members += valley[0]
                        add_recs += valley[1]
                    if not members and valley is None:
                        if base is None:
                            self._search(advanced, scan + 1, recs, obligation, mode, stack)
                        continue
                    self._try(
                        advanced, members, add_recs, scan, recs, obligation, mode, stack, new_ob
                    )
        finally:
            if not self.single:
                stack.pop()

    def _try(
        self,
        advanced,
        add_members,
        add_recs,
        scan,
        recs,
        obligation,
        mode,
        stack,
        new_obligation=None,
    ):
        if new_obligation is not None:
            if new_obligation.enter_scan < 0:
                obligation = new_obligation  # pending obligation consumed
            else:
                if obligation is not None and obligation.enter_scan >= 0:
                    return  # at most one pending final-designated obligation
                obligation = new_obligation
        new_members = advanced | frozenset(add_members)
        if len(new_members) != len(advanced) + len(add_members):
            return
        if not state_consistent(new_members):
            return
        if sum(1 for m in new_members if m.designated) != 1:
            return
        self._search(new_members, scan + 1, recs + add_recs, obligation, mode, stack)

    def _ender_structures(self, entry, target=None):
        """New members whose walk stretch ends at the entry position."""
        def ok(members):
            e = _entry_emission(members)
            return e != "clash" and (target is None or e is None or e == target)

        for v in self.closure:
            sk = v.skeleton
            tok = self._new_token()
            m = Member(v.key + (1, len(sk)), sk, len(sk), BACKWARD, token=tok)
            if not ok([m]):
                continue
            rec = _CallRec(tok, v, [_Part(sk, entry, len(sk), BACKWARD, False)])
            yield [m], [rec], None
        for v, pivot in self._loops:
            sk = v.skeleton
            a_win = sk[:pivot]
            d_win = sk[pivot:]
            idx0 = len(a_win) - len(d_win) + 1
            if idx0 <= 1:
                # Peak call descending into this position; its ascending half
                # is pending until the scan reaches its window.
                tok = self._new_token()
                m1 = Member(v.key + (1, pivot), a_win, idx0, FORWARD, token=tok)
                m2 = Member(v.key + (pivot + 1, len(sk)), d_win, len(d_win), BACKWARD, token=tok)
                if ok([m1, m2]):
                    rec = _CallRec(
                        tok,
                        v,
                        [
                            _Part(a_win, entry, idx0, FORWARD, False),
                            _Part(d_win, entry, len(d_win), BACKWARD, False),
                        ],
                    )
                    yield [m1, m2], [rec], None
            if len(d_win) > len(a_win):
                # Turn call whose descent enters first; the ascent joins
                # later as the final designated piece.
                tok = self._new_token()
                m2 = Member(v.key + (pivot + 1, len(sk)), d_win, len(d_win), BACKWARD, token=tok)
                if ok([m2]):
                    rec = _CallRec(tok, v, [_Part(d_win, entry, len(d_win), BACKWARD, False)])
                    yield [m2], [rec], _Obligation(tok, v, a_win, entry + len(d_win) - len(a_win))

    def _beginner_structures(self, entry, target=None):
        """New members whose walk stretch begins at the entry position."""
        def ok(members):
            e = _entry_emission(members)
            return e != "clash" and (target is None or e is None or e == target)

        for v in self.closure:
            sk = v.skeleton
            tok = self._new_token()
            m = Member(v.key + (1, len(sk)), sk, 1, FORWARD, token=tok)
            if not ok([m]):
                continue
            rec = _CallRec(tok, v, [_Part(sk, entry, 1, FORWARD, False)])
            yield [m], [rec], None
        for v, pivot in self._loops:
            # Peak call climbing from this position; its descending half
            # idles until the scan reaches its window.
            sk = v.skeleton
            a_win = sk[:pivot]
            d_win = sk[pivot:]
            if len(d_win) > len(a_win):
                continue
            tok = self._new_token()
            m1 = Member(v.key + (1, pivot), a_win, 1, FORWARD, token=tok)
            m2 = Member(v.key + (pivot + 1, len(sk)), d_win, len(a_win), BACKWARD, token=tok)
            if not ok([m1, m2]):
                continue
            rec = _CallRec(
                tok,
                v,
                [
                    _Part(a_win, entry, 1, FORWARD, False),
                    _Part(d_win, entry, len(a_win), BACKWARD, False),
                ],
            )
            yield [m1, m2], [rec], None

    def _valley_structures(self, entry, target=None):
        """Single calls descending into and climbing out of this position."""
        for v, pivot in self._loops:
            sk = v.skeleton
            pre = sk[:pivot]
            post = sk[pivot:]
            tok = self._new_token()
            m1 = Member(v.key + (1, pivot), pre, pivot, BACKWARD, token=tok)
            m2 = Member(v.key + (pivot + 1, len(sk)), post, 1, FORWARD, token=tok)
            e = _entry_emission([m1, m2])
            if e == "clash" or (target is not None and e is not None and e != target):
                continue
            rec = _CallRec(
                tok,
                v,
                [
                    _Part(pre, entry, pivot, BACKWARD, False),
                    _Part(post, entry, 1, FORWARD, False),
                ],
            )
            yield [m1, m2], [rec]

    def _designated_additions(self, entry, obligation):
        if obligation is not None and obligation.enter_scan == entry:
            m = Member(
                obligation.view.key + (1, len(obligation.window)),
                obligation.window,
                1,
                FORWARD,
                designated=True,
                token=obligation.token,
            )
            rec = _CallRec(
                obligation.token,
                obligation.view,
                [_Part(obligation.window, entry, 1, FORWARD, True)],
            )
            yield [m], [rec], replace(obligation, enter_scan=-1)
        for v in self.closure:
            sk = v.skeleton
            tok = self._new_token()
            m = Member(v.key + (1, len(sk)), sk, 1, FORWARD, designated=True, token=tok)
            rec = _CallRec(tok, v, [_Part(sk, entry, 1, FORWARD, True)])
            yield [m], [rec], None
        for v, pivot in self._loops:
            # Turn call: the forward path's last piece plus the walk's first
            # descent belong to one call crossing the top.
            sk = v.skeleton
            a_win = sk[:pivot]
            d_win = sk[pivot:]
            if len(d_win) > len(a_win):
                continue
            tok = self._new_token()
            m1 = Member(v.key + (1, pivot), a_win, 1, FORWARD, designated=True, token=tok)
            m2 = Member(v.key + (pivot + 1, len(sk)), d_win, len(a_win), BACKWARD, token=tok)
            rec = _CallRec(
                tok,
                v,
                [
                    _Part(a_win, entry, 1, FORWARD, True),
                    _Part(d_win, entry, len(a_win), BACKWARD, False),
                ],
            )
            yield [m1, m2], [rec], None

    # -- plan assembly -----------------------------------------------------------

    def _emit(self, recs: List[_CallRec], mode: str):
        views = self._assemble(recs, mode)
        if views is None:
            return
        if self.emit_gate is not None and not self.emit_gate(views):
            return
        self.results.append(views)
        self.stats.plans_emitted += 1
        if self.single or self.stats.plans_emitted >= self.max_plans:
            raise _StopSearch

    def _assemble(self, recs: List[_CallRec], mode: str) -> Optional[tuple]:
        by_token = {}
        order = []
        for rec in recs:
            if rec.token in by_token:
                by_token[rec.token].parts.extend(rec.parts)
            else:
                by_token[rec.token] = _CallRec(rec.token, rec.view, list(rec.parts))
                order.append(rec.token)
        m = 0
        group_a = []
        walk = {}
        for tok in order:
            rec = by_token[tok]
            des_parts = [p for p in rec.parts if p.designated]
            walk_parts = [p for p in rec.parts if not p.designated]
            if des_parts:
                m += sum(len(p.window) for p in des_parts)
                group_a.append(tok)
            if walk_parts:
                stretch = self._stretch(walk_parts)
                if stretch is None:
                    return None
                walk[tok] = stretch
        terminal = 0 if mode == "bounded" else 1
        chain = self._chain_walk(walk, m + 1, terminal)
        if chain is None:
            return None
        seen = set(group_a)
        ordered = [by_token[tok].view for tok in group_a]
        for tok in chain:
            if tok not in seen:
                ordered.append(by_token[tok].view)
                seen.add(tok)
        return tuple(ordered)

    @staticmethod
    def _chain_walk(walk: dict, start: int, terminal: int):
        """Order the walk stretches end-to-start from the forward path's top.

        Several stretches may share a top position (a turn call's descent can
        share it with a later climb), so the chaining backtracks.
        """
        tokens = sorted(walk)

        def go(current, remaining):
            if not remaining:
                return [] if current == terminal else None
            for tok in tokens:
                if tok not in remaining:
                    continue
                s, e = walk[tok]
                if s != current:
                    continue
                rest = go(e, remaining - {tok})
                if rest is not None:
                    return [tok] + rest
            return None

        return go(start, frozenset(tokens))

    @staticmethod
    def _stretch(parts: List[_Part]) -> Optional[tuple]:
        if any(p.tail for p in parts):
            return (0, 1)
        if any(p.dip for p in parts):
            alpha = next((p for p in parts if not p.forward), None)
            beta = next((p for p in parts if p.forward), None)
            if alpha is not None and alpha.entry != 1:
                return None
            start = 1 + (len(alpha.window) if alpha else 0)
            end = 1 + (len(beta.window) if beta else 0)
            return (start, end)
        fwd = [p for p in parts if p.forward]
        bwd = [p for p in parts if not p.forward]
        if len(fwd) > 1 or len(bwd) > 1 or (not fwd and not bwd):
            return None
        if fwd and bwd:
            f, b = fwd[0], bwd[0]
            f_start = f.entry + 1 - f.idx0
            f_end = f_start + len(f.window)
            b_start = b.entry + b.idx0
            b_end = b_start - len(b.window)
            if b.trailing:
                if b_end != 1:
                    return None
                b_end = 0
            if b_end == f_start:  # valley: descend, then climb
                return (b_start, f_end)
            if b_start == f_end:  # peak: climb, then descend
                return (f_start, b_end)
            return None
        if bwd:
            b = bwd[0]
            start = b.entry + b.idx0
            end = start - len(b.window)
            if b.trailing:
                if end != 1:
                    return None
                end = 0
            return (start, end)
        f = fwd[0]
        start = f.entry + 1 - f.idx0
        return (start, start + len(f.window))


# -- public enumeration API --------------------------------------------------


@dataclass(frozen=True)
class PlanHit:
    plan: ExecutionPlan
    views: tuple
    shape: str  # "bounded" | "loose"


def _concat_skeleton(views: Sequence[SubFunction]) -> tuple:
    return tuple(a for v in views for a in v.skeleton)


def _loose_gate(query: AtomicQuery):
    def gate(views):
        return weakly_smart_skeleton(_concat_skeleton(views), query)

    return gate


def _subsequence_is_weak(views: Sequence[SubFunction], query: AtomicQuery) -> bool:
    return weakly_smart_skeleton(_concat_skeleton(views), query)


def _is_minimal_weak(views: Sequence[SubFunction], query: AtomicQuery) -> bool:
    views = tuple(views)
    n = len(views)
    if n > 14:
        # Exhaustive subsequences explode; the embedding filter against
        # shorter accepted plans covers long candidates.
        return True
    for size in range(1, n):
        for combo in itertools.combinations(range(n), size):
            if _subsequence_is_weak(tuple(views[i] for i in combo), query):
                return False
    return True


def _embeds(small: Sequence[SubFunction], big: Sequence[SubFunction], weaken: bool) -> bool:
    """Is ``small`` a subsequence of ``big``, with each call matched to one
    of the same parent (optionally at a shorter prefix)?"""
    i = 0
    for v in big:
        if i == len(small):
            break
        s = small[i]
        if s.parent.name == v.parent.name and (
            s.prefix == v.prefix or (weaken and s.prefix <= v.prefix)
        ):
            i += 1
    return i == len(small)


def _minimal_filter(candidates, query, weaken, explicit_check):
    """Keep candidates no accepted smaller plan embeds into.

    Candidates are processed shortest first, so any plan witnessing a
    candidate's non-minimality has had its own minimal core accepted
    earlier (the enumeration finds every minimal plan); embedding is
    transitive over subsequences.  ``explicit_check`` double-checks small
    candidates exhaustively.
    """
    ordered = sorted(
        candidates,
        key=lambda views: (
            len(views),
            sum(len(v) for v in views),
            tuple(v.name for v in views),
        ),
    )
    accepted = []
    for views in ordered:
        if any(_embeds(a, views, weaken) for a in accepted):
            continue
        if not explicit_check(views):
            continue
        accepted.append(views)
    return accepted


def enumerate_minimal_weakly_smart(
    query: AtomicQuery,
    catalog: Sequence[PathFunction],
    max_plans: int = 10000,
    max_depth: int = 64,
    deadline: Optional[float] = None,
    use_loops: bool = True,
) -> List[PlanHit]:
    """All minimal weakly smart plans, deduplicated and sorted.

    Every emitted plan's semantics is loosely bounded, no proper
    call-subsequence of it is, and each such plan is found at least once.
    """
    if not catalog:
        raise EmptyCatalogError("no functions")
    closure = catalog_closure(catalog)
    raw = [(v,) for v in closure if weakly_smart_skeleton(v.skeleton, query)]
    searcher = _Searcher(
        closure,
        query,
        max_depth=max_depth,
        max_plans=max_plans,
        deadline=deadline,
        use_loops=use_loops,
        emit_gate=_loose_gate(query),
        prune_dominated=True,
    )
    searcher.run()
    raw.extend(searcher.results)
    hits = {}
    for views in raw:
        key = tuple(v.key for v in views)
        if key in hits:
            continue
        skeleton = _concat_skeleton(views)
        if not weakly_smart_skeleton(skeleton, query):
            continue
        dec = is_loosely_bounded(skeleton, query)
        hits[key] = (views, "loose" if dec is None or dec.loose else "bounded")
    shapes = {key: shape for key, (views, shape) in hits.items()}
    minimal = _minimal_filter(
        [views for views, _ in hits.values()],
        query,
        weaken=False,
        explicit_check=lambda vs: _is_minimal_weak(vs, query),
    )
    out = [
        PlanHit(
            chain_plan(views, query.constant),
            views,
            shapes[tuple(v.key for v in views)],
        )
        for views in minimal
    ]
    out.sort(key=lambda h: tuple(v.name for v in h.views))
    return out


@dataclass
class FindResult:
    hit: Optional[PlanHit]
    states_visited: int
    state_bound: int


def find_one_weakly_smart(
    query: AtomicQuery,
    catalog: Sequence[PathFunction],
    max_depth: int = 64,
    deadline: Optional[float] = None,
) -> FindResult:
    """First weakly smart plan found, minimized; visits each state once.

    The history is a persistent visited set without pops, so the number of
    explored states never exceeds the total state count.
    """
    if not catalog:
        raise EmptyCatalogError("no functions")
    closure = catalog_closure(catalog)
    k = max(len(v) for v in closure)
    bound = len(closure) ** (2 * k)
    for v in closure:
        if weakly_smart_skeleton(v.skeleton, query):
            return FindResult(
                PlanHit(chain_plan([v], query.constant), (v,), _shape_of((v,), query)),
                0,
                bound,
            )
    searcher = _Searcher(
        closure,
        query,
        max_depth=max_depth,
        max_plans=1,
        deadline=deadline,
        single=True,
        emit_gate=_loose_gate(query),
        prune_dominated=True,
    )
    searcher.run()
    if searcher.results:
        views = minimize_views(searcher.results[0], query)
        return FindResult(
            PlanHit(chain_plan(views, query.constant), views, _shape_of(views, query)),
            searcher.stats.states_visited,
            bound,
        )
    return FindResult(None, searcher.stats.states_visited, bound)


def _shape_of(views: Sequence[SubFunction], query: AtomicQuery) -> str:
    dec = is_loosely_bounded(_concat_skeleton(views), query)
    return "bounded" if dec is not None and not dec.loose else "loose"


def minimize_views(views: Sequence[SubFunction], query: AtomicQuery) -> tuple:
    """Smallest weakly smart subsequence, searched by increasing size."""
    views = tuple(views)
    for size in range(1, len(views) + 1):
        for combo in itertools.combinations(range(len(views)), size):
            sub = tuple(views[i] for i in combo)
            if _subsequence_is_weak(sub, query):
                return sub
    raise NotWeaklySmartError("no weakly smart subsequence")


def minimize_plan(plan: ExecutionPlan, query: AtomicQuery) -> ExecutionPlan:
    """Extract a minimal weakly smart plan from a weakly smart one."""
    views = tuple(c.view for c in plan.calls)
    if not _subsequence_is_weak(views, query):
        raise NotWeaklySmartError("plan is not weakly smart")
    return chain_plan(minimize_views(views, query), query.constant)


def has_trivial_equivalent_rewriting(
    query: AtomicQuery, catalog: Sequence[PathFunction]
) -> bool:
    """Constraint-free equivalent rewriting: some view is the query atom."""
    return any(v.skeleton == (query.relation,) for v in catalog_closure(catalog))


@dataclass(frozen=True)
class BoundEstimate:
    state_bound: int
    max_function_length: int
    factorial_digits: int


def bound_estimate(catalog: Sequence[PathFunction]) -> BoundEstimate:
    """M = |catalog|^(2k) and the digit count of M!, never materialized."""
    if not catalog:
        return BoundEstimate(0, 0, 0)
    k = max(len(f) for f in catalog)
    m = len(catalog) ** (2 * k)
    if m <= 1:
        digits = 1
    elif m < 10**15:
        digits = int(math.lgamma(m + 1) / math.log(10)) + 1
    else:
        # Stirling in log10 space for astronomically large M.
        log10_fact = (
            m * math.log10(m) - m / math.log(10) + 0.5 * math.log10(2 * math.pi * m)
        )
        digits = int(log10_fact) + 1
    return BoundEstimate(m, k, digits)


# -- smart plans ----------------------------------------------------------------


@dataclass(frozen=True)
class SmartHit:
    plan: ExecutionPlan
    views: tuple
    kind: str  # "trivial" | "terminal" | "inverse-terminal" | "appended-inverse"


def _two_output_able(view: SubFunction) -> bool:
    return len(view) >= 2 and (len(view) - 1) in view.bindable


def _smart_plan_terminal(views, constant, filter_on_last_var=False):
    """Chain with a two-output final call, filtering one of the pair."""
    plan = chain_plan(views, constant, two_output_last=True)
    pair = plan.calls[-1].outputs
    if filter_on_last_var:
        return ExecutionPlan(plan.calls, ((pair[1], constant),), pair[0])
    return ExecutionPlan(plan.calls, ((pair[0], constant),), pair[1])


def _smart_plan_appended_inverse(views, constant):
    plan = chain_plan(views, constant)
    last_var = plan.calls[-1].outputs[-1]
    prev_var = plan.calls[-2].outputs[-1]
    return ExecutionPlan(plan.calls, ((last_var, constant),), prev_var)


def _smartable(views: Sequence[SubFunction], query: AtomicQuery) -> bool:
    """Can some filter placement make this call sequence a smart plan?"""
    rel = query.relation
    views = tuple(views)
    skeleton = _concat_skeleton(views)
    last = views[-1]
    if len(views) == 1 and last.skeleton == (rel,):
        return True
    if last.skeleton[-1] == rel:
        filterable = (len(last) == 1 and len(views) >= 2) or _two_output_able(last)
        if filterable and is_bounded(skeleton, query) is not None:
            return True
    if last.skeleton == (rel.invert(),) and len(views) >= 2:
        if is_bounded(skeleton[:-1], query) is not None:
            return True
    if (
        len(last) >= 2
        and last.skeleton[-2:] == (rel, rel.invert())
        and _two_output_able(last)
    ):
        if is_bounded(skeleton[:-1], query) is not None:
            return True
    if last.skeleton == (rel.invert(), rel) and _two_output_able(last):
        if is_bounded(skeleton[:-2], query) is not None:
            return True
    return False


def _is_minimal_smart(views: Sequence[SubFunction], query: AtomicQuery) -> bool:
    """No call subsequence, with calls possibly weakened to shorter prefix
    views, admits a smart plan.

    Prefix weakening matters: replacing a call by the sub-function that
    stops at an earlier output can expose a shorter smart plan, and such a
    plan makes the longer one useless.
    """
    views = tuple(views)
    n = len(views)
    if n > 8:
        # The embedding filter against shorter accepted plans handles long
        # candidates; here only contiguous cuts are affordable.
        for i in range(n):
            for j in range(i, n):
                sub = views[:i] + views[j + 1 :]
                if sub and _smartable(sub, query):
                    return False
        return True
    options = [
        [SubFunction(v.parent, p) for p in v.parent.outputs if p <= v.prefix]
        for v in views
    ]
    tried = set()
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            for weakened in itertools.product(*[options[i] for i in combo]):
                if size == n and all(
                    w.prefix == views[i].prefix for w, i in zip(weakened, combo)
                ):
                    continue
                key = tuple(w.key for w in weakened)
                if key in tried:
                    continue
                tried.add(key)
                if _smartable(weakened, query):
                    return False
    return True


def enumerate_minimal_smart(
    query: AtomicQuery,
    catalog: Sequence[PathFunction],
    max_plans: int = 10000,
    max_depth: int = 64,
    deadline: Optional[float] = None,
) -> List[SmartHit]:
    """All minimal smart plans: a weakly smart bounded core plus a filter
    pinned inside a query atom adjacent to the output."""
    from .characterize import SMART, is_smart

    if not catalog:
        raise EmptyCatalogError("no functions")
    closure = catalog_closure(catalog)
    rel = query.relation
    candidates = {}

    def consider(views, builder, kind):
        key = (tuple(v.key for v in views), kind)
        if key in candidates:
            return
        try:
            plan = builder(tuple(views))
        except Exception:
            return
        if is_smart(plan, query).level != SMART:
            return
        candidates[key] = SmartHit(plan, tuple(views), kind)

    for v in closure:
        if v.skeleton == (rel,):
            consider((v,), lambda vs: chain_plan(vs, query.constant), "trivial")

    # Bounded cores ending with the query atom (search results plus single
    # calls), final call upgraded to expose the filtered variable.
    searcher = _Searcher(
        closure, query, max_depth=max_depth, max_plans=max_plans, deadline=deadline
    )
    searcher.run()
    raw = list(searcher.results) + [(v,) for v in closure]
    for views in raw:
        skeleton = _concat_skeleton(views)
        last = views[-1]
        if (
            len(last) >= 2
            and last.skeleton[-1] == rel
            and _two_output_able(last)
            and is_bounded(skeleton, query) is not None
        ):
            consider(
                views,
                lambda vs: _smart_plan_terminal(vs, query.constant),
                "terminal",
            )

    weak = enumerate_minimal_weakly_smart(
        query, catalog, max_plans=max_plans, max_depth=max_depth, deadline=deadline
    )
    bounded_weak = [h for h in weak if h.shape == "bounded"]
    for hit in bounded_weak:
        for j in closure:
            if j.skeleton == (rel.invert(),):
                consider(
                    hit.views + (j,),
                    lambda vs: _smart_plan_appended_inverse(vs, query.constant),
                    "appended-inverse",
                )
        for e in closure:
            if e.skeleton == (rel.invert(), rel) and _two_output_able(e):
                consider(
                    hit.views + (e,),
                    lambda vs: _smart_plan_terminal(vs, query.constant),
                    "terminal",
                )

    # Final calls ending query-atom immediately followed by its inverse:
    # scan as if the call stopped at the query atom; filter past the output.
    iii_views = [
        v
        for v in closure
        if len(v) >= 2 and v.skeleton[-2:] == (rel, rel.invert()) and _two_output_able(v)
    ]
    for f in iii_views:
        if len(f) == 2:
            continue  # handled by the walk-to-1 search below
        if is_bounded(f.skeleton[:-1], query) is not None:
            consider(
                (f,),
                lambda vs: _smart_plan_terminal(
                    vs, query.constant, filter_on_last_var=True
                ),
                "inverse-terminal",
            )

    if iii_views:
        def iii_seeds():
            s = _Searcher(closure, query)  # seed factory only
            tables = s._seed_tables()
            for f in iii_views:
                if len(f) < 3:
                    continue
                bottom = s._trailing_bottom(f, 2)
                if bottom is None:
                    continue
                yield from s._seed_combos("bounded", bottom, tables)

        s3 = _Searcher(
            closure,
            query,
            max_depth=max_depth,
            max_plans=max_plans,
            deadline=deadline,
            emit_gate=lambda vs: is_bounded(_concat_skeleton(vs)[:-1], query) is not None,
            seeds_override=iii_seeds,
        )
        s3.run()
        for views in s3.results:
            if views[-1] in iii_views:
                consider(
                    views,
                    lambda vs: _smart_plan_terminal(
                        vs, query.constant, filter_on_last_var=True
                    ),
                    "inverse-terminal",
                )
        # Two-atom dive calls appended after a walk that ends at position 1.
        pairs = [f for f in iii_views if len(f) == 2]
        if pairs:
            def to1_seeds():
                s = _Searcher(closure, query)
                tables = s._seed_tables()
                for members, recs, obligation in s._ender_structures(1):
                    yield from s._seed_combos(
                        "to1", (members, recs, obligation, False), tables
                    )

            s4 = _Searcher(
                closure,
                query,
                max_depth=max_depth,
                max_plans=max_plans,
                deadline=deadline,
                emit_gate=lambda vs: is_bounded(
                    _concat_skeleton(vs) + (rel,), query
                )
                is not None,
                seeds_override=to1_seeds,
            )
            s4.run()
            for views in s4.results:
                for f in pairs:
                    consider(
                        views + (f,),
                        lambda vs: _smart_plan_terminal(
                            vs, query.constant, filter_on_last_var=True
                        ),
                        "inverse-terminal",
                    )

    by_views = {}
    for hit in candidates.values():
        by_views.setdefault(hit.views, hit)
    minimal = _minimal_filter(
        list(by_views),
        query,
        weaken=True,
        explicit_check=lambda vs: _is_minimal_smart(vs, query),
    )
    out = [by_views[views] for views in minimal]
    out.sort(key=lambda h: (tuple(v.name for v in h.views), h.kind))
    return out


def susie_plans(query: AtomicQuery, catalog: Sequence[PathFunction]) -> List[SmartHit]:
    """Plans of shape F.F^-.query: a forward chain retraced by one final call.

    Every such plan is smart; the final call must expose the variable before
    its last one so the filter can be placed (or be the bare query atom).
    """
    closure = catalog_closure(catalog)
    rel = query.relation
    out = {}
    for f in closure:
        sk = f.skeleton
        if sk[-1] != rel:
            continue
        if len(sk) == 1:
            key = (f.key,)
            if key not in out:
                out[key] = SmartHit(chain_plan((f,), query.constant), (f,), "trivial")
            continue
        if not _two_output_able(f):
            continue
        target = tuple(a.invert() for a in reversed(sk[:-1]))

        def extend(prefix, covered):
            if covered == len(target):
                views = tuple(prefix) + (f,)
                key = tuple(v.key for v in views)
                if key not in out:
                    out[key] = SmartHit(
                        _smart_plan_terminal(views, query.constant), views, "terminal"
                    )
                return
            for w in closure:
                wsk = w.skeleton
                if target[covered : covered + len(wsk)] == wsk:
                    extend(prefix + [w], covered + len(wsk))

        extend([], 0)
    return sorted(out.values(), key=lambda h: tuple(v.name for v in h.views))
