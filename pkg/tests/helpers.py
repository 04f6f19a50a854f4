"""Shared generators and independent oracles for the test suite.

The oracles here deliberately re-derive verdicts by brute force (explicit
unrolling, exhaustive cycle enumeration) so the package's cleverer
implementations are checked against structurally different computations.
"""

from __future__ import annotations

import math
from fractions import Fraction

from timedplan.graphs import CommGraph, build_graph
from timedplan.mitl import (
    Always,
    And,
    Eventually,
    Interval,
    Next,
    Not,
    Prop,
    Until,
)
from timedplan.rational import INF
from timedplan.tba import TBA, Atom, Edge, GAnd, GNot, TOP, gand
from timedplan.wts import WTS, TimedWord


def rand_fraction(rng, max_den=4, max_num=8):
    """Positive rational with a small denominator."""
    den = int(rng.integers(1, max_den + 1))
    num = int(rng.integers(1, max_num + 1))
    return Fraction(num, den)


def rand_word(rng, props, max_len=6) -> TimedWord:
    n = int(rng.integers(1, max_len + 1))
    labels = []
    for _ in range(n):
        labels.append(frozenset(p for p in props if rng.random() < 0.5))
    durations = tuple(rand_fraction(rng) for _ in range(n))
    stem = int(rng.integers(0, n))
    return TimedWord(tuple(labels), durations, stem)


def _rand_interval(rng, allow_inf=True) -> Interval:
    lo = rand_fraction(rng) if rng.random() < 0.7 else Fraction(0)
    if allow_inf and rng.random() < 0.25:
        return Interval(lo, INF)
    return Interval(lo, lo + rand_fraction(rng))


def _rand_combo(rng, props, depth):
    """Boolean combination of propositions."""
    roll = rng.random()
    if depth <= 0 or roll < 0.55:
        return Prop(props[int(rng.integers(0, len(props)))])
    if roll < 0.75:
        return Not(_rand_combo(rng, props, depth - 1))
    return And(_rand_combo(rng, props, depth - 1), _rand_combo(rng, props, depth - 1))


def rand_fragment(rng, props, depth=3):
    """Formula in the compilable fragment, tree depth bounded by ``depth``."""
    roll = rng.random()
    if roll < 0.10:
        return _rand_combo(rng, props, depth - 1)
    if roll < 0.35:
        return Eventually(_rand_interval(rng), _rand_combo(rng, props, depth - 1))
    if roll < 0.55:
        return Always(_rand_interval(rng), _rand_combo(rng, props, depth - 1))
    if roll < 0.70:
        return Until(
            _rand_interval(rng),
            _rand_combo(rng, props, depth - 2 if depth > 1 else 0),
            _rand_combo(rng, props, depth - 2 if depth > 1 else 0),
        )
    if roll < 0.80:
        return Next(_rand_interval(rng, allow_inf=False), _rand_combo(rng, props, depth - 1))
    if depth >= 2:
        return And(rand_fragment(rng, props, depth - 1), rand_fragment(rng, props, depth - 1))
    return Eventually(_rand_interval(rng), _rand_combo(rng, props, 0))


# -- brute-force satisfaction --------------------------------------------------


def _finite_bound_sum(f) -> Fraction:
    if isinstance(f, Prop):
        return Fraction(0)
    if isinstance(f, Not):
        return _finite_bound_sum(f.sub)
    if isinstance(f, And):
        return _finite_bound_sum(f.left) + _finite_bound_sum(f.right)
    if isinstance(f, Until):
        inner = _finite_bound_sum(f.left) + _finite_bound_sum(f.right)
    else:
        inner = _finite_bound_sum(f.sub)
    hi = f.interval.hi
    bound = f.interval.lo if hi == INF else hi
    return inner + bound


def naive_sat(w: TimedWord, f, j: int = 0) -> bool:
    """Brute-force point-wise evaluation on an explicit unrolling.

    The horizon is sized so every window any subformula can open is fully
    covered, plus two whole cycles of slack; positions past the horizon are
    never needed because the suffix repeats with the cycle period.
    """
    cyc_dur = sum(w.durations[w.stem_len:], Fraction(0))
    need = _finite_bound_sum(f) + w.time(len(w) - 1)
    laps = 3 + math.ceil(need / cyc_dur)
    horizon = len(w) + w.cycle_len * laps
    return _brute(w, f, j, horizon)


def _brute(w, f, j, horizon) -> bool:
    if isinstance(f, Prop):
        return f.name in w.label(j)
    if isinstance(f, Not):
        return not _brute(w, f.sub, j, horizon)
    if isinstance(f, And):
        return _brute(w, f.left, j, horizon) and _brute(w, f.right, j, horizon)
    t0 = w.time(j)
    if isinstance(f, Next):
        return f.interval.contains(w.time(j + 1) - t0) and _brute(
            w, f.sub, j + 1, horizon
        )
    if isinstance(f, Eventually):
        for k in range(j, horizon):
            if f.interval.contains(w.time(k) - t0) and _brute(w, f.sub, k, horizon):
                return True
        return False
    if isinstance(f, Always):
        for k in range(j, horizon):
            d = w.time(k) - t0
            if f.interval.hi != INF and d > f.interval.hi:
                break
            if f.interval.contains(d) and not _brute(w, f.sub, k, horizon):
                return False
        return True
    if isinstance(f, Until):
        for k in range(j, horizon):
            d = w.time(k) - t0
            if f.interval.hi != INF and d > f.interval.hi:
                return False
            if f.interval.contains(d) and _brute(w, f.right, k, horizon):
                return True
            if not _brute(w, f.left, k, horizon):
                return False
        return False
    raise TypeError(f"unsupported node {f!r}")


# -- random systems and automata -----------------------------------------------


def rand_wts(rng, props, n_states=6) -> WTS:
    names = [f"n{i}" for i in range(n_states)]
    labels = {}
    trans = {}
    for s in names:
        labels[s] = frozenset(p for p in props if rng.random() < 0.4)
        k = int(rng.integers(1, 4))
        outs = []
        for _ in range(k):
            outs.append((names[int(rng.integers(0, n_states))], rand_fraction(rng)))
        trans[s] = outs
    return WTS(names, [names[0]], trans, labels, alphabet=props)


def _rand_guard(rng):
    roll = rng.random()
    c = "c"
    if roll < 0.3:
        return TOP
    if roll < 0.5:
        return Atom(c, "<=", rand_fraction(rng))
    if roll < 0.7:
        return Atom(c, ">=", rand_fraction(rng))
    a = rand_fraction(rng)
    g = gand(Atom(c, ">=", a), Atom(c, "<=", a + rand_fraction(rng)))
    if roll < 0.9:
        return g
    return GNot(g)


def rand_tba(rng, props, n_locs=4) -> TBA:
    locs = [f"q{i}" for i in range(n_locs)]
    labels = {q: frozenset(p for p in props if rng.random() < 0.4) for q in locs}
    edges = []
    for src in locs:
        for dst in locs:
            if rng.random() < 0.55:
                resets = frozenset({"c"}) if rng.random() < 0.3 else frozenset()
                edges.append(Edge(src, _rand_guard(rng), resets, dst))
    initial = [q for q in locs if rng.random() < 0.5] or [locs[0]]
    accepting = [q for q in locs if rng.random() < 0.4]
    return TBA(locs, initial, ("c",), edges, accepting, labels, frozenset(props))


# -- exhaustive emptiness oracle -------------------------------------------------


def crawl(initials, succ):
    """Full reachable graph: (nodes in discovery order, adjacency dict)."""
    seen = list(initials)
    seen_set = set(seen)
    adj = {}
    i = 0
    while i < len(seen):
        node = seen[i]
        i += 1
        kids = tuple(succ(node))
        adj[node] = kids
        for k in kids:
            if k not in seen_set:
                seen_set.add(k)
                seen.append(k)
    return seen, adj


def accepting_cycle_exists(initials, succ, accepting) -> bool:
    """SCC-based oracle: some reachable accepting node lies on a cycle."""
    nodes, adj = crawl(initials, succ)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    counter = [0]
    result = [False]

    def strongconnect(v):
        work = [(v, iter(adj[v]))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for child in it:
                if child not in index:
                    index[child] = low[child] = counter[0]
                    counter[0] += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(adj[child])))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack.discard(u)
                    comp.append(u)
                    if u == node:
                        break
                comp_set = set(comp)
                has_cycle = len(comp) > 1 or any(
                    u in adj[u] for u in comp
                )
                if has_cycle and any(accepting(u) for u in comp):
                    result[0] = True

    for v in nodes:
        if v not in index:
            strongconnect(v)
    return result[0]


def rand_connected_graph(rng, n) -> CommGraph:
    edges = []
    for i in range(2, n + 1):
        edges.append((int(rng.integers(1, i)), i))
    for _ in range(int(rng.integers(0, n))):
        a = int(rng.integers(1, n + 1))
        b = int(rng.integers(1, n + 1))
        if a != b and (min(a, b), max(a, b)) not in [
            (min(e), max(e)) for e in edges
        ]:
            edges.append((a, b))
    return build_graph(n, edges)


def rand_wts_lasso(rng, wts: WTS, max_len=8):
    """Random lasso run of a WTS starting at an initial state, or None."""
    from timedplan.wts import TimedRun

    start = sorted(wts.initial)[0]
    path = [start]
    durations = []
    for _ in range(max_len):
        outs = list(wts.succ_weighted(path[-1]))
        if not outs:
            return None
        nxt, w = outs[int(rng.integers(0, len(outs)))]
        if nxt in path:
            k = path.index(nxt)
            durations.append(w)
            return TimedRun(tuple(path), tuple(durations), k)
        path.append(nxt)
        durations.append(w)
    return None
