"""Shared test helpers: reference enumerators and tiny catalog builders.

The brute-force enumerators are independent oracles: they enumerate call
chains exhaustively and keep the minimal ones, with no state machinery.
"""

from __future__ import annotations

import itertools

from pathplan import (
    Atom,
    AtomicQuery,
    PathFunction,
    catalog_closure,
    is_bounded,
    is_loosely_bounded,
)
from pathplan.characterize import weakly_smart_skeleton


def fn(name, atoms, outs=None):
    atoms = tuple(atoms)
    return PathFunction(name, atoms, tuple(outs) if outs else (len(atoms),))


def concat(views):
    return tuple(a for v in views for a in v.skeleton)


def brute_force_minimal_weak(query, catalog, max_calls=5):
    """Exhaustive chains over the closure, kept iff weakly smart (canonical
    database evaluation) and no proper subsequence is."""
    closure = catalog_closure(catalog)
    memo = {}

    def weak_skeleton(skeleton):
        if skeleton not in memo:
            memo[skeleton] = weakly_smart_skeleton(skeleton, query)
        return memo[skeleton]

    weak = {}
    for k in range(1, max_calls + 1):
        for combo in itertools.product(closure, repeat=k):
            if weak_skeleton(concat(combo)):
                weak[tuple(v.key for v in combo)] = combo
    out = {}
    for key, views in weak.items():
        minimal = True
        n = len(views)
        for size in range(1, n):
            for idxs in itertools.combinations(range(n), size):
                sub = tuple(views[i].key for i in idxs)
                if sub in weak:
                    minimal = False
                    break
                if weak_skeleton(concat([views[i] for i in idxs])):
                    minimal = False
                    break
            if not minimal:
                break
        if minimal:
            out[key] = views
    return out


def fig1_catalog():
    worksFor, jobTitle, graduatedFrom = Atom("worksFor"), Atom("jobTitle"), Atom("graduatedFrom")
    return [
        fn("getCompany", [worksFor]),
        fn("getHierarchy", [worksFor.invert(), jobTitle], (1, 2)),
        fn("getEducation", [graduatedFrom]),
    ]


def music_catalog():
    sing, onAlbum = Atom("sing"), Atom("onAlbum")
    return [
        fn("getAlbumsOfSinger", [sing, onAlbum]),
        fn("getSongsOnAlbum", [onAlbum.invert()]),
    ]


def jobtitle_query():
    return AtomicQuery(Atom("jobTitle"), "a")
