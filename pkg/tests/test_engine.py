import random

import pytest

from pathplan import (
    Atom,
    AtomicQuery,
    Member,
    SubFunction,
    bound_estimate,
    chain_plan,
    enumerate_minimal_smart,
    enumerate_minimal_weakly_smart,
    find_one_weakly_smart,
    has_trivial_equivalent_rewriting,
    is_smart,
    minimize_plan,
    search_successors,
    state_consistent,
    susie_plans,
)
from pathplan.characterize import SMART
from pathplan.engine import EmptyCatalogError, NotWeaklySmartError
from pathplan.synth import SynthConfig, gen_catalog

from util import brute_force_minimal_weak, fig1_catalog, fn, jobtitle_query, music_catalog


def member(text, index, forward, designated=False):
    atoms = []
    for part in text.split("."):
        atoms.append(Atom(part[:-2], True) if part.endswith("^-") else Atom(part))
    atoms = tuple(atoms)
    return Member(("t", len(atoms), 1, len(atoms)), atoms, index, forward, designated)


def test_state_consistent_positive():
    # Both members emit u at this scan position.
    state = {member("u.s", 1, True, True), member("s^-.u^-.r", 2, False)}
    assert state_consistent(state)


def test_state_consistent_negative():
    state = {member("u.s", 1, True, True), member("t^-.s^-", 1, False)}
    assert not state_consistent(state)


def test_state_consistent_singleton():
    assert state_consistent({member("u", 1, True, True)})


def test_search_successors_single_atom_ends():
    rec = search_successors({member("r", 1, True, True)})
    assert rec.advanced == frozenset()
    assert rec.end_count == 1 and rec.designated_ended


def test_search_successors_mid_flight():
    rec = search_successors(
        {member("u.s.t", 2, True, True), member("t^-.s^-", 2, False)}
    )
    assert rec.start_count == 0 and rec.end_count == 0
    indices = sorted((m.index, m.forward) for m in rec.advanced)
    assert indices == [(1, False), (3, True)]


def test_search_successors_start_and_end():
    rec = search_successors(
        {member("u.s.t", 3, True, True), member("t^-.s^-", 1, False)}
    )
    assert rec.start_count == 1 and rec.end_count == 1 and rec.designated_ended


def test_enumerate_fig1():
    hits = enumerate_minimal_weakly_smart(jobtitle_query(), fig1_catalog())
    assert len(hits) == 1
    assert [v.name for v in hits[0].views] == ["getCompany", "getHierarchy"]
    assert hits[0].shape == "bounded"


def test_enumerate_trivial_function():
    r = Atom("r")
    hits = enumerate_minimal_weakly_smart(AtomicQuery(r, "a"), [fn("f", [r])])
    assert len(hits) == 1 and len(hits[0].views) == 1


def test_enumerate_bounded_figure_catalog():
    u, s, t, r = Atom("u"), Atom("s"), Atom("t"), Atom("r")
    cat = [
        fn("f1", [u, s, t]),
        fn("f2", [t.invert(), s.invert()]),
        fn("f3", [s]),
        fn("f4", [s.invert(), u.invert(), r]),
    ]
    hits = enumerate_minimal_weakly_smart(AtomicQuery(r, "a"), cat)
    names = {tuple(v.name for v in h.views) for h in hits}
    assert ("f1", "f2", "f3", "f4") in names


def test_enumerate_excludes_non_minimal():
    r = Atom("r")
    cat = [fn("f1", [r]), fn("f2", [r.invert(), r])]
    hits = enumerate_minimal_weakly_smart(AtomicQuery(r, "a"), cat)
    assert [tuple(v.name for v in h.views) for h in hits] == [("f1",)]


def test_enumerate_empty_catalog():
    with pytest.raises(EmptyCatalogError):
        enumerate_minimal_weakly_smart(jobtitle_query(), [])


def test_loop_solo_plan():
    s, r = Atom("s"), Atom("r")
    cat = [fn("f", [s, s.invert(), r])]
    hits = enumerate_minimal_weakly_smart(AtomicQuery(r, "a"), cat)
    assert [tuple(v.name for v in h.views) for h in hits] == [("f",)]


def test_loop_extension_no_op_without_loops():
    rng = random.Random(19)
    for seed in range(20):
        cat = gen_catalog(SynthConfig(3, 4, 2, seed=seed + 600))
        if any(f.pivot() for f in cat):
            continue
        q = AtomicQuery(Atom(f"r{rng.randint(1, 3)}"), "a")
        on = enumerate_minimal_weakly_smart(q, cat, use_loops=True)
        off = enumerate_minimal_weakly_smart(q, cat, use_loops=False)
        assert [h.views for h in on] == [h.views for h in off]


def test_find_one_matches_enumerate():
    for seed in range(60):
        cat = gen_catalog(SynthConfig(3, 4, 3, seed=seed + 300))
        for base in ("r1", "r2"):
            q = AtomicQuery(Atom(base), "a")
            hits = enumerate_minimal_weakly_smart(q, cat)
            result = find_one_weakly_smart(q, cat)
            assert (result.hit is not None) == bool(hits)
            if result.hit is not None:
                # The returned plan is itself minimal and weakly smart.
                keys = tuple(v.key for v in result.hit.views)
                assert keys in {tuple(v.key for v in h.views) for h in hits}


def test_find_one_never_revisits_and_respects_bound():
    for seed in range(20):
        cat = gen_catalog(SynthConfig(3, 5, 3, seed=seed + 900))
        q = AtomicQuery(Atom("r1"), "a")
        result = find_one_weakly_smart(q, cat)
        assert result.states_visited <= result.state_bound


def test_smart_fig1():
    hits = enumerate_minimal_smart(jobtitle_query(), fig1_catalog())
    assert len(hits) == 1
    plan = hits[0].plan
    assert [v.name for v in hits[0].views] == ["getCompany", "getHierarchy"]
    assert plan.filters == (("v1", "a"),) and plan.output == "v2"


def test_smart_music_none():
    q = AtomicQuery(Atom("sing"), "a")
    assert enumerate_minimal_smart(q, music_catalog()) == []
    assert len(enumerate_minimal_weakly_smart(q, music_catalog())) == 1


def susie_miss_catalog():
    worksFor, locatedIn, jobTitle = Atom("worksFor"), Atom("locatedIn"), Atom("jobTitle")
    return [
        fn("getProfessionalAddress", [worksFor, locatedIn]),
        fn("getEntityAtAddress", [locatedIn.invert()]),
        fn("getHierarchy", [worksFor.invert(), jobTitle], (1, 2)),
    ]


def test_smart_plan_susie_misses():
    q = jobtitle_query()
    cat = susie_miss_catalog()
    smart = enumerate_minimal_smart(q, cat)
    names = {tuple(v.name for v in h.views) for h in smart}
    assert ("getProfessionalAddress", "getEntityAtAddress", "getHierarchy") in names
    susie = susie_plans(q, cat)
    assert susie == []


def test_susie_fig1():
    hits = susie_plans(jobtitle_query(), fig1_catalog())
    assert len(hits) == 1
    assert [v.name for v in hits[0].views] == ["getCompany", "getHierarchy"]


def test_susie_plans_are_smart():
    for seed in range(40):
        cat = gen_catalog(SynthConfig(3, 4, 2, seed=seed + 450))
        for base in ("r1", "r2", "r3"):
            for inv in (False, True):
                q = AtomicQuery(Atom(base, inv), "a")
                for hit in susie_plans(q, cat):
                    assert is_smart(hit.plan, q).level == SMART


def test_minimize_plan():
    r = Atom("r")
    f1, f2 = fn("f1", [r]), fn("f2", [r.invert(), r])
    q = AtomicQuery(r, "a")
    plan = chain_plan([SubFunction(f1, 1), SubFunction(f2, 2)], "a")
    assert [c.view.name for c in minimize_plan(plan, q).calls] == ["f1"]
    small = chain_plan([SubFunction(f1, 1)], "a")
    assert minimize_plan(small, q) == small


def test_minimize_plan_requires_weakly_smart():
    q = jobtitle_query()
    g = fn("g", [Atom("worksFor")])
    plan = chain_plan([SubFunction(g, 1)], "a")
    with pytest.raises(NotWeaklySmartError):
        minimize_plan(plan, q)


def test_minimize_outputs_are_minimal():
    rng = random.Random(77)
    for seed in range(30):
        cat = gen_catalog(SynthConfig(2, 4, 2, seed=seed + 50))
        q = AtomicQuery(Atom("r1"), "a")
        hits = enumerate_minimal_weakly_smart(q, cat)
        for hit in hits[:3]:
            views = hit.views
            n = len(views)
            if n > 6:
                continue
            # No proper subsequence is weakly smart.
            import itertools

            from pathplan import is_loosely_bounded

            for size in range(1, n):
                for combo in itertools.combinations(range(n), size):
                    sub = [views[i] for i in combo]
                    sk = tuple(a for v in sub for a in v.skeleton)
                    assert is_loosely_bounded(sk, q) is None


def test_has_trivial_equivalent_rewriting():
    r = Atom("r")
    assert has_trivial_equivalent_rewriting(AtomicQuery(r, "a"), [fn("f", [r])])
    assert not has_trivial_equivalent_rewriting(jobtitle_query(), fig1_catalog())
    located = Atom("locatedIn", True)
    assert has_trivial_equivalent_rewriting(
        AtomicQuery(located, "a"), susie_miss_catalog()
    )


def test_bound_estimate():
    r, s = Atom("r"), Atom("s")
    est = bound_estimate([fn("f", [r])])
    assert est.state_bound == 1 and est.factorial_digits == 1
    est = bound_estimate([fn("f", [r, s]), fn("g", [s])])
    assert est.state_bound == 16
    thirty = [fn(f"f{i}", [r, s, r]) for i in range(30)]
    est = bound_estimate(thirty)
    assert est.state_bound == 729_000_000
    assert est.factorial_digits > 6 * 10**9  # log10(M!) is astronomically large


def test_engine_matches_brute_force_small():
    mismatches = []
    for seed in range(25):
        cat = gen_catalog(SynthConfig(3, 4, 3, seed=seed))
        for base in ("r1", "r2"):
            q = AtomicQuery(Atom(base), "a")
            ref = set(brute_force_minimal_weak(q, cat, max_calls=4))
            got = {
                tuple(v.key for v in h.views)
                for h in enumerate_minimal_weakly_smart(q, cat)
                if len(h.views) <= 4
            }
            if got != ref:
                mismatches.append((seed, base, got ^ ref))
    assert mismatches == []


def test_enumerated_smart_plans_verify():
    # Generator-checker soundness: every emitted smart plan passes the
    # smart verdict; every emitted weak plan passes the weak check.
    from pathplan import is_weakly_smart

    for seed in range(20):
        cat = gen_catalog(SynthConfig(3, 5, 3, seed=seed + 2400))
        q = AtomicQuery(Atom("r1"), "a")
        for hit in enumerate_minimal_smart(q, cat):
            assert is_smart(hit.plan, q).level == SMART
        for hit in enumerate_minimal_weakly_smart(q, cat):
            assert is_weakly_smart(hit.plan, q)
