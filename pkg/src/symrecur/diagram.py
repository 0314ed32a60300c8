"""Markov diagrams of coding spaces, their irreducible part, and specification checks.

A vertex is a pair (symbol j, follower state reached by a word ending in j).
D_0 holds the vertices of the one-symbol words and D_n adds the successors of
D_{n-1}.  For interval codings the follower state is the image interval, which
pins down the subinterval J of I_j through the inverse branch.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Optional

import networkx as nx
import numpy as np

from .errors import BudgetExceeded, NotFound, RecurError
from .models import Coded, Full, IntervalCoding, SubshiftModel, budget
from .words import Word

DIAGRAM_SCHEMA = "recur-diagram/1"
DEFAULT_VERTEX_BUDGET = 200_000


@dataclass
class Vertex:
    id: int
    level: int
    symbol: int
    key: Hashable
    state: object
    witness: bytes  # shortlex-least word reaching this vertex

    def representation(self, model: SubshiftModel) -> str:
        if isinstance(model, IntervalCoding):
            lo, hi = self.state
            p = model.params
            return f"[{float(p.backward(lo, self.symbol))!r}, {float(p.backward(hi, self.symbol))!r}]"
        return "F(" + Word(self.witness, model.m).format(cli=True) + ")"

    def sort_key(self, model: SubshiftModel):
        if isinstance(model, IntervalCoding):
            lo, hi = self.state
            return (self.symbol, float(lo), float(hi), self.witness)
        return (self.symbol, len(self.witness), self.witness)


class MarkovDiagram:
    def __init__(self, model: SubshiftModel, max_vertices: Optional[int] = None):
        self.model = model
        self.max_vertices = max_vertices or budget(DEFAULT_VERTEX_BUDGET)
        self.vertices: list[Vertex] = []
        self.by_key: dict = {}
        self.succ: dict[int, list[tuple[int, int]]] = {}
        self.built_to = -1
        self._frontier: list[int] = []
        s0 = model.initial_state()
        first = []
        for j in range(model.m):
            s = model.step(s0, j)
            if s is not None:
                first.append(self._add(0, j, s, bytes((j,))))
        self._frontier = first
        self.built_to = 0

    def _vkey(self, j, state):
        return (j, self.model.state_key(state))

    def _add(self, level, j, state, witness) -> int:
        k = self._vkey(j, state)
        if k in self.by_key:
            return self.by_key[k]
        if len(self.vertices) >= self.max_vertices:
            raise BudgetExceeded(f"Markov diagram exceeds {self.max_vertices} vertices")
        v = Vertex(len(self.vertices), level, j, k, state, witness)
        self.vertices.append(v)
        self.by_key[k] = v.id
        return v.id

    def _expand(self, vid: int) -> list[tuple[int, int]]:
        if vid in self.succ:
            return self.succ[vid]
        v = self.vertices[vid]
        out = []
        for j in range(self.model.m):
            s = self.model.step(v.state, j)
            if s is not None:
                out.append((j, self._add(v.level + 1, j, s, v.witness + bytes((j,)))))
        self.succ[vid] = out
        return out

    def extend_to(self, n: int) -> "MarkovDiagram":
        while self.built_to < n:
            if not self._frontier:
                # finite diagram: every further level equals this one
                self.built_to = n
                break
            nxt = set()
            for vid in self._frontier:
                for _, d in self._expand(vid):
                    dv = self.vertices[d]
                    if dv.level > self.built_to:
                        # lazily created vertices may carry a too-large level
                        dv.level = self.built_to + 1
                        nxt.add(d)
            self._frontier = sorted(nxt)
            self.built_to += 1
        return self

    def canonical_order(self) -> list[Vertex]:
        """Vertices of D_{built_to} sorted by level, then representation."""
        vs = [v for v in self.vertices if v.level <= self.built_to]
        return sorted(vs, key=lambda v: (v.level, v.sort_key(self.model)))

    def level(self, n: int) -> list[Vertex]:
        """Vertices of D_n."""
        self.extend_to(n)
        return [v for v in self.vertices if v.level <= n]

    def successors(self, v) -> list[tuple[int, Vertex]]:
        vid = v.id if isinstance(v, Vertex) else v
        return [(j, self.vertices[d]) for j, d in self._expand(vid)]

    def closed_edges(self) -> list[tuple[int, int, int]]:
        """Edges out of every expanded vertex, as (src, symbol, dst)."""
        return [(a, j, b) for a in sorted(self.succ) for j, b in self.succ[a]]

    def step_vertex(self, vid: int, j: int) -> Optional[int]:
        for jj, d in self._expand(vid):
            if jj == j:
                return d
        return None

    def graph(self, n: Optional[int] = None) -> nx.DiGraph:
        """Truncated graph on D_n (default: every expanded vertex)."""
        n = self.built_to if n is None else n
        self.extend_to(n)
        keep = {v.id for v in self.vertices if v.level <= n}
        g = nx.DiGraph()
        g.add_nodes_from(sorted(keep))
        for a in sorted(keep):
            for _, b in self._expand(a):
                if b in keep:
                    g.add_edge(a, b)
        return g

    def to_text(self) -> str:
        order = self.canonical_order()
        ids = {v.id: i for i, v in enumerate(order)}
        lines = [f"# schema: {DIAGRAM_SCHEMA}",
                 f"# built_to: {self.built_to}",
                 "# vertices: id,level,symbol,representation"]
        for v in order:
            lines.append(f"{ids[v.id]},{v.level},{v.symbol},\"{v.representation(self.model)}\"")
        lines.append("# edges: src,symbol,dst")
        for v in order:
            for j, d in self._expand(v.id):
                if d in ids:
                    lines.append(f"{ids[v.id]},{j},{ids[d]}")
        return "\n".join(lines) + "\n"


def build_diagram(model: SubshiftModel, N: int, max_vertices: Optional[int] = None) -> MarkovDiagram:
    if N < 0:
        raise RecurError("N must be non-negative")
    return MarkovDiagram(model, max_vertices).extend_to(N)


def successors(diagram: MarkovDiagram, v) -> list[tuple[int, Vertex]]:
    return diagram.successors(v)


# -- decomposition ----------------------------------------------------------------


def spectral_radius(g: nx.DiGraph, nodes) -> float:
    nodes = sorted(nodes)
    if not nodes:
        return 0.0
    a = nx.to_numpy_array(g.subgraph(nodes), nodelist=nodes)
    return float(max(abs(np.linalg.eigvals(a))))


@dataclass
class Decomposition:
    diagram: Optional[MarkovDiagram]
    N: int
    C: frozenset
    F: frozenset
    t_edges: Optional[int]
    unreachable: Optional[tuple[int, int]] = None
    kind: str = "diagram"
    extra: dict = field(default_factory=dict)

    @property
    def model(self) -> SubshiftModel:
        return self.diagram.model if self.diagram is not None else self.extra["model"]

    @property
    def t(self) -> int:
        """Connector length bound: a path of t_N edges spells t_N - 1 symbols in between."""
        if self.kind != "diagram":
            return 0
        if self.t_edges is None:
            raise NotFound(f"no path from vertex {self.unreachable[0]} to vertex {self.unreachable[1]} "
                           f"inside D_{self.N}")
        return self.t_edges - 1

    @property
    def core(self) -> frozenset:
        """D_N intersected with C."""
        return self.F


def irreducible_component(diagram: MarkovDiagram, N: int, depth: Optional[int] = None) -> Decomposition:
    """SCC of largest spectral radius on the truncation, closed under successors.

    ``depth`` (default N + 4) is how far the diagram is expanded before the
    strongly connected components are computed.
    """
    depth = N + 4 if depth is None else max(depth, N)
    diagram.extend_to(depth)
    g = diagram.graph(depth)
    comps = []
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(v, v) for v in comp):
            lvl = min(diagram.vertices[v].level for v in comp)
            comps.append((spectral_radius(g, comp), -lvl, -min(comp), frozenset(comp)))
    if not comps:
        raise NotFound(f"no non-trivial strongly connected component within depth {depth}")
    comps.sort(reverse=True)
    best = comps[0][3]
    C = set(best)
    stack = list(best)
    while stack:
        a = stack.pop()
        for b in g.successors(a):
            if b not in C:
                C.add(b)
                stack.append(b)
    F = frozenset(v for v in C if diagram.vertices[v].level <= N)
    if not F:
        raise NotFound(f"irreducible part has no vertex in D_{N}")
    dec = Decomposition(diagram, N, frozenset(C), F, None)
    dec.t_edges, dec.unreachable = _gap(g, F)
    return dec


def _gap(g: nx.DiGraph, core) -> tuple[Optional[int], Optional[tuple[int, int]]]:
    worst = 0
    for a in sorted(core):
        # paths of at least one edge, so a -> a counts as a cycle through a
        dist: dict[int, int] = {}
        dq = deque()
        for b in g.successors(a):
            if b not in dist:
                dist[b] = 1
                dq.append(b)
        while dq:
            x = dq.popleft()
            for y in g.successors(x):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    dq.append(y)
        for b in sorted(core):
            if b not in dist:
                return None, (a, b)
            worst = max(worst, dist[b])
    return worst, None


def gap_size(dec: Decomposition) -> int:
    """t_N: every ordered pair in D_N n C is joined by a path of at most t_N edges."""
    if dec.kind != "diagram":
        return dec.t_edges
    if dec.t_edges is None:
        a, b = dec.unreachable
        raise NotFound(f"pair ({a}, {b}) in D_{dec.N} is not connected within the truncation")
    return dec.t_edges


def trivial_decomposition(model: Full) -> Decomposition:
    return Decomposition(None, 0, frozenset(), frozenset(), 1, kind="full", extra={"model": model})


def generator_decomposition(model: Coded) -> Decomposition:
    """Good words are concatenations of generators, glued with gap 0."""
    return Decomposition(None, 0, frozenset(), frozenset(), 1, kind="coded", extra={"model": model})


def decompose(model: SubshiftModel, N: int = 4, depth: Optional[int] = None) -> Decomposition:
    if isinstance(model, Full):
        return trivial_decomposition(model)
    if isinstance(model, Coded):
        return generator_decomposition(model)
    return irreducible_component(build_diagram(model, N), N, depth)


def in_good_set(dec: Decomposition, w: Word) -> bool:
    if len(w) == 0:
        return True
    model = dec.model
    if dec.kind == "full":
        return True
    if dec.kind == "coded":
        gens = model.generators
        s = w.symbols
        ok = [False] * (len(s) + 1)
        ok[0] = True
        for i in range(len(s)):
            if ok[i]:
                for g in gens:
                    if s.startswith(g, i):
                        ok[i + len(g)] = True
        return ok[len(s)]
    d = dec.diagram
    for vid in sorted(dec.F):
        if d.vertices[vid].symbol != w[0]:
            continue
        cur = vid
        for j in w.symbols[1:]:
            cur = d.step_vertex(cur, j)
            if cur is None:
                break
        if cur is not None and cur in dec.F:
            return True
    return False


def connect(dec: Decomposition, u: Word, v: Word, t: Optional[int] = None) -> Word:
    """Shortest, then lexicographically least, w with |w| <= t and uwv admissible."""
    model = dec.model
    t = dec.t if t is None else t
    s = model.follower(u)
    if s is None:
        raise RecurError(f"u = {u.format(cli=True)} is not admissible")
    hit = connect_from_state(model, s, v.symbols, t)
    if hit is None:
        raise NotFound(f"no connector of length <= {t} joins {u.format(cli=True)} to {v.format(cli=True)}")
    return Word(hit, model.m)


def _run(model: SubshiftModel, s, word: bytes):
    for c in word:
        s = model.step(s, c)
        if s is None:
            return None
    return s


def connect_from_state(model: SubshiftModel, s, v: bytes, t: int) -> Optional[bytes]:
    for n in range(t + 1):
        for w in product(range(model.m), repeat=n):
            s2 = _run(model, s, bytes(w))
            if s2 is not None and _run(model, s2, v) is not None:
                return bytes(w)
    return None


@dataclass
class WPrimeReport:
    passed: bool
    t: int
    t_needed: Optional[int]
    L: int
    pairs_checked: int
    counterexamples: list[tuple[Word, Word]]


def assemblies(dec: Decomposition, L: int, t: int, max_blocks: int = 3) -> list[Word]:
    """Admissible words of length <= L built from <= max_blocks good blocks and gaps <= t."""
    model = dec.model
    out = []
    cap = budget()
    seen = 0
    for n in range(1, L + 1):
        words = _admissible_words(model, n)
        seen += len(words)
        if seen > cap:
            raise BudgetExceeded(f"more than {cap} candidate words up to length {L}")
        for w in words:
            if _is_assembly(dec, w, t, max_blocks):
                out.append(Word(w, model.m))
    return out


def _admissible_words(model: SubshiftModel, n: int) -> list[bytes]:
    out = []

    def rec(s, buf):
        if len(buf) == n:
            out.append(bytes(buf))
            return
        for j in range(model.m):
            s2 = model.step(s, j)
            if s2 is not None:
                buf.append(j)
                rec(s2, buf)
                buf.pop()

    rec(model.initial_state(), bytearray())
    return out


def _is_assembly(dec: Decomposition, w: bytes, t: int, max_blocks: int) -> bool:
    m = dec.model.m
    good: dict = {}

    def g(i, j):
        key = (i, j)
        if key not in good:
            good[key] = in_good_set(dec, Word(w[i:j], m))
        return good[key]

    n = len(w)
    # reach[b] = set of end positions after b blocks
    frontier = {0}
    for b in range(max_blocks):
        nxt = set()
        for i in frontier:
            starts = [i] if b == 0 else [i + gap for gap in range(t + 1) if i + gap < n]
            for s in starts:
                for e in range(s + 1, n + 1):
                    if g(s, e):
                        nxt.add(e)
        if n in nxt:
            return True
        frontier = nxt
        if not frontier:
            return False
    return False


def verify_w_prime(dec: Decomposition, L: int, t: Optional[int] = None,
                   max_counterexamples: int = 5) -> WPrimeReport:
    """Finite check of the (W') gluing condition on block assemblies up to length L.

    ``t`` defaults to the decomposition's connector bound; when that is not
    defined (disconnected core) the search allows connectors up to length L.
    """
    model = dec.model
    try:
        t_claim = dec.t if t is None else t
    except NotFound:
        t_claim = L
    words = assemblies(dec, L, t_claim)
    by_state: dict = {}
    for u in words:
        s = model.follower(u)
        by_state.setdefault(model.state_key(s), (u, s))
    need = 0
    bad: list[tuple[Word, Word]] = []
    checked = 0
    for key in sorted(by_state, key=lambda k: by_state[k][0].symbols):
        u, s = by_state[key]
        for v in words:
            checked += 1
            hit = connect_from_state(model, s, v.symbols, t_claim)
            if hit is None:
                if len(bad) < max_counterexamples:
                    bad.append((u, v))
                continue
            need = max(need, len(hit))
    return WPrimeReport(not bad, t_claim, None if bad else need, L, checked, bad)


def count_paths(diagram: MarkovDiagram, dec: Decomposition, n: int) -> int:
    """Number of distinct words spelled by length-n paths that start in F."""
    if n < 0:
        raise RecurError("n must be non-negative")
    if n == 0:
        return 1
    start: dict[int, set] = {}
    for vid in sorted(dec.F):
        start.setdefault(diagram.vertices[vid].symbol, set()).add(vid)
    memo: dict = {}

    def rec(S: frozenset, r: int) -> int:
        if r == 0:
            return 1
        key = (S, r)
        if key in memo:
            return memo[key]
        total = 0
        for j in range(diagram.model.m):
            nxt = frozenset(d for v in S for jj, d in diagram._expand(v) if jj == j)
            if nxt:
                total += rec(nxt, r - 1)
        memo[key] = total
        return total

    return sum(rec(frozenset(S), n - 1) for S in start.values())


def suffix_entropy(diagram: MarkovDiagram, dec: Decomposition, n: int) -> float:
    """log(#words of length n in C^{s,N}) / n; 0 when that set has no such word."""
    N = dec.N
    diagram.extend_to(N + 1 + n)
    starts = [v.id for v in diagram.vertices if v.level <= N + 1 and v.level > N]
    memo: dict = {}

    def rec(S: frozenset, r: int) -> int:
        if r == 0:
            return 1
        key = (S, r)
        if key in memo:
            return memo[key]
        total = 0
        for j in range(diagram.model.m):
            nxt = frozenset(d for v in S for jj, d in diagram._expand(v) if jj == j
                            and diagram.vertices[d].level > N and _in_c(dec, diagram, d))
            if nxt:
                total += rec(nxt, r - 1)
        memo[key] = total
        return total

    groups: dict[int, set] = {}
    for v in starts:
        if _in_c(dec, diagram, v):
            groups.setdefault(diagram.vertices[v].symbol, set()).add(v)
    count = sum(rec(frozenset(S), n - 1) for S in groups.values())
    return math.log(count) / n if count > 0 else 0.0


def _in_c(dec: Decomposition, diagram: MarkovDiagram, vid: int) -> bool:
    """C membership, extended past the SCC truncation by successor closure."""
    cache = dec.extra.setdefault("c_closure", set(dec.C))
    if vid in cache:
        return True
    # a vertex reached from C is in C; new vertices only appear as successors of known ones
    for a in list(cache):
        for _, b in diagram._expand(a):
            if b == vid:
                cache.add(vid)
                return True
    return False
