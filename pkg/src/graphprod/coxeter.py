"""Word calculus for the right-angled Coxeter group of a finite simple graph.

Group elements are stored as plain tuples of vertex ids holding the ShortLex-least
reduced word of the element.  All index sets used by the Fock-space decompositions
(word sets, triple splittings, rho-patterns, clique triples) are produced here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, NamedTuple, Sequence

Word = tuple  # tuple[int, ...] in normal form

E: Word = ()


@dataclass(frozen=True)
class SimpleGraph:
    """Finite simple graph on the vertices ``0..vertex_count-1``."""

    vertex_count: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("a graph needs at least one vertex")
        clean = set()
        for e in self.edges:
            e = tuple(e)
            if len(e) != 2 or e[0] == e[1]:
                raise ValueError(f"self-loop at vertex {e[0]}")
            u, v = e
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge {(u, v)} out of range")
            clean.add(frozenset((u, v)))
        object.__setattr__(self, "edges", frozenset(clean))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "SimpleGraph":
        edges = [tuple(e) for e in edges]
        for e in edges:
            if len(e) != 2:
                raise ValueError(f"malformed edge {e}")
            if e[0] == e[1]:
                raise ValueError(f"self-loop at vertex {e[0]}")
        return cls(n, frozenset(frozenset(e) for e in edges))

    @classmethod
    def complete(cls, n: int) -> "SimpleGraph":
        return cls.from_edges(n, combinations(range(n), 2))

    def adjacent(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.edges

    def free(self) -> "SimpleGraph":
        """Same vertices, no edges."""
        return SimpleGraph(self.vertex_count)

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.edges)


# Reference graphs used throughout the tests and suites.
G1 = SimpleGraph(1)
G2 = SimpleGraph(2)
G3 = SimpleGraph.from_edges(2, [(0, 1)])
G4 = SimpleGraph.from_edges(3, [(0, 1), (1, 2)])
NAMED_GRAPHS = {"G1": G1, "G2": G2, "G3": G3, "G4": G4}


class TripleSplit(NamedTuple):
    w1: Word
    w2: Word
    w3: Word


class RhoTuple(NamedTuple):
    n_l: int
    n_r: int
    u_l: Word
    u_r: Word
    t: Word

    @property
    def degree(self) -> int:
        return self.n_l + len(self.u_l) + len(self.t) + len(self.u_r) + self.n_r


class TauTuple(NamedTuple):
    rho: RhoTuple
    r: Word


@dataclass(frozen=True)
class WordSets:
    """The six word sets attached to ``u``, truncated at length ``depth``."""

    u: Word
    n: int
    depth: int
    left: frozenset
    right: frozenset
    left_tilde: frozenset
    right_tilde: frozenset
    left_tilde_n: frozenset
    right_tilde_n: frozenset


def word_str(w: Word, names: Sequence[str] | None = None) -> str:
    if not w:
        return "e"
    if names is None:
        return " ".join(str(x) for x in w)
    return " ".join(names[x] for x in w)


def match_legs(seq: Sequence[int], target: Sequence[int]) -> tuple[int, ...]:
    """Permutation p with ``target[k] == seq[p[k]]``, matching equal letters in order.

    For two reduced expressions of one element this is the unique leg permutation
    that keeps equal letters in their relative order.
    """
    slots: dict[int, list[int]] = {}
    for i, x in enumerate(seq):
        slots.setdefault(x, []).append(i)
    used: dict[int, int] = {}
    out = []
    for x in target:
        k = used.get(x, 0)
        out.append(slots[x][k])
        used[x] = k + 1
    return tuple(out)


@dataclass
class CoxeterGroup:
    """The right-angled Coxeter group W over ``graph`` with memoised word operations."""

    graph: SimpleGraph
    _nf: dict = field(default_factory=dict, repr=False)
    _cliques: list | None = field(default=None, repr=False)
    _words: dict = field(default_factory=dict, repr=False)
    _triples: list | None = field(default=None, repr=False)

    def __post_init__(self):
        n = self.graph.vertex_count
        self.n = n
        self.adj = [[self.graph.adjacent(u, v) for v in range(n)] for u in range(n)]

    def __hash__(self):
        return hash(self.graph)

    def __eq__(self, other):
        return isinstance(other, CoxeterGroup) and other.graph == self.graph

    # -- normal forms -------------------------------------------------------------
    def _check(self, seq):
        for x in seq:
            if not (isinstance(x, int) or hasattr(x, "__index__")) or not 0 <= x < self.n:
                raise ValueError(f"letter {x!r} is not a vertex of the graph")

    def _reduce(self, seq):
        adj = self.adj
        out: list[int] = []
        for v in seq:
            i = len(out) - 1
            while i >= 0:
                x = out[i]
                if x == v:
                    del out[i]
                    break
                if not adj[x][v]:
                    i = -1
                    out.append(v)
                    break
                i -= 1
            else:
                out.append(v)
        return out

    def _shortlex(self, word):
        adj = self.adj
        rest = list(word)
        out = []
        while rest:
            best = None
            for k, x in enumerate(rest):
                if best is not None and x >= rest[best]:
                    continue
                if all(adj[y][x] for y in rest[:k]):
                    best = k
            out.append(rest.pop(best))
        return tuple(out)

    def normal_form(self, seq: Iterable[int]) -> Word:
        """ShortLex-least reduced word equivalent to ``seq``."""
        seq = tuple(int(x) for x in seq)
        hit = self._nf.get(seq)
        if hit is not None:
            return hit
        self._check(seq)
        w = self._shortlex(self._reduce(seq))
        self._nf[seq] = w
        return w

    def multiply(self, *ws: Word) -> Word:
        return self.normal_form(tuple(x for w in ws for x in w))

    def inverse(self, w: Word) -> Word:
        return self.normal_form(tuple(reversed(w)))

    def length(self, w: Word) -> int:
        return len(self.normal_form(w))

    def is_reduced_product(self, ws: Sequence[Word]) -> bool:
        if not ws:
            raise ValueError("empty product")
        return len(self.multiply(*ws)) == sum(len(w) for w in ws)

    def reorder(self, seq: Sequence[int]) -> tuple[Word, tuple[int, ...]]:
        """Normal form of a reduced sequence and the leg permutation onto it."""
        w = self.normal_form(seq)
        if len(w) != len(seq):
            raise ValueError(f"sequence {tuple(seq)} is not reduced")
        return w, match_legs(seq, w)

    # -- prefixes, suffixes, cliques ---------------------------------------------
    def starts_with(self, w: Word, u: Word) -> bool:
        return len(self.multiply(self.inverse(u), w)) == len(w) - len(u)

    def ends_with(self, w: Word, u: Word) -> bool:
        return len(self.multiply(w, self.inverse(u))) == len(w) - len(u)

    def s_left(self, w: Word) -> Word:
        """Letters v with |vw| < |w|, as a clique word."""
        adj = self.adj
        out = set()
        for i, x in enumerate(w):
            if x not in out and all(adj[y][x] for y in w[:i]):
                out.add(x)
        return tuple(sorted(out))

    def s_right(self, w: Word) -> Word:
        adj = self.adj
        out = set()
        n = len(w)
        for i in range(n - 1, -1, -1):
            x = w[i]
            if x not in out and all(adj[y][x] for y in w[i + 1:]):
                out.add(x)
        return tuple(sorted(out))

    def clique_prefix_suffix(self, w: Word) -> tuple[Word, Word]:
        return self.s_left(w), self.s_right(w)

    def is_clique(self, w: Word) -> bool:
        return len(set(w)) == len(w) and all(self.adj[a][b] for a, b in combinations(w, 2))

    def cliques(self) -> list[Word]:
        """All clique words including e, sorted ShortLex."""
        if self._cliques is None:
            out = [()]
            for k in range(1, self.n + 1):
                out += [c for c in combinations(range(self.n), k) if self.is_clique(c)]
            self._cliques = out
        return list(self._cliques)

    def subcliques(self, t: Word) -> list[Word]:
        return [c for k in range(len(t) + 1) for c in combinations(t, k)]

    def remove(self, t: Word, r: Word) -> Word:
        """The clique word t with the letters of r removed (r ⊆ t)."""
        if not set(r) <= set(t):
            raise ValueError(f"{r} is not a sub-clique of {t}")
        return tuple(x for x in t if x not in r)

    # -- enumeration --------------------------------------------------------------
    def enumerate_words(self, depth: int) -> list[Word]:
        """All elements of length ≤ depth, ShortLex ordered."""
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        hit = self._words.get(depth)
        if hit is not None:
            return list(hit)
        layer = [()]
        seen = {()}
        out = [()]
        for _ in range(depth):
            nxt = set()
            for w in layer:
                ends = set(self.s_right(w))
                for v in range(self.n):
                    if v not in ends:
                        y = self.multiply(w, (v,))
                        if y not in seen:
                            seen.add(y)
                            nxt.add(y)
            layer = sorted(nxt)
            out += layer
            if not layer:
                break
        self._words[depth] = out
        return list(out)

    def prefixes(self, w: Word) -> list[Word]:
        """All p with w starting with p."""
        seen = {()}
        frontier = [()]
        while frontier:
            nxt = []
            for p in frontier:
                rest = self.multiply(self.inverse(p), w)
                for v in self.s_left(rest):
                    q = self.multiply(p, (v,))
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return sorted(seen, key=lambda x: (len(x), x))

    def word_sets(self, u: Word, n: int, depth: int) -> WordSets:
        if n > depth:
            raise ValueError("n must not exceed the depth")
        words = self.enumerate_words(depth)
        lu = len(u)
        sl_u, sr_u = self.s_left(u), self.s_right(u)
        left = [w for w in words if len(self.multiply(u, w)) == lu + len(w)]
        right = [w for w in words if len(self.multiply(w, u)) == lu + len(w)]
        lt = [w for w in left if self.s_left(self.multiply(u, w)) == sl_u]
        rt = [w for w in right if self.s_right(self.multiply(w, u)) == sr_u]
        return WordSets(
            u, n, depth, frozenset(left), frozenset(right), frozenset(lt), frozenset(rt),
            frozenset(w for w in lt if len(w) == n), frozenset(w for w in rt if len(w) == n),
        )

    def in_right_tilde(self, v: Word, u: Word) -> bool:
        """v ∈ W̃^R(u)."""
        vu = self.multiply(v, u)
        return len(vu) == len(v) + len(u) and self.s_right(vu) == self.s_right(u)

    def in_left(self, w: Word, u: Word) -> bool:
        """w ∈ W^L(u)."""
        return len(self.multiply(u, w)) == len(u) + len(w)

    def right_tilde_n(self, u: Word, n: int) -> list[Word]:
        return [v for v in self.enumerate_words(n) if len(v) == n and self.in_right_tilde(v, u)]

    # -- splittings -----------------------------------------------------------------
    def triple_splittings(self, w: Word) -> list[TripleSplit]:
        out = []
        for w1 in self.prefixes(w):
            rest = self.multiply(self.inverse(w1), w)
            for w2 in self.subcliques(self.s_left(rest)):
                w3 = self.multiply(w2, rest)
                out.append(TripleSplit(w1, w2, w3))
        return sorted(out)

    def rho_of_split(self, split: TripleSplit) -> RhoTuple:
        """The unique rho-pattern a triple split belongs to (recovery formulas)."""
        w1, w2, w3 = split
        t = w2
        u_l = self.remove(self.s_right(self.multiply(w1, w2)), t)
        u_r = self.remove(self.s_right(self.multiply(self.inverse(w3), w2)), t)
        return RhoTuple(len(w1) - len(u_l), len(w3) - len(u_r), u_l, u_r, t)

    def split_matches_rho(self, split: TripleSplit, rho: RhoTuple) -> bool:
        w1, w2, w3 = split
        n_l, n_r, u_l, u_r, t = rho
        if w2 != t:
            return False
        v_l = self.multiply(w1, u_l)
        v_r = self.multiply(self.inverse(w3), u_r)
        if len(v_l) != n_l or len(v_r) != n_r:
            return False
        if self.multiply(v_l, u_l) != w1 or self.multiply(self.inverse(u_r), self.inverse(v_r)) != w3:
            return False
        return self.in_right_tilde(v_l, self.multiply(u_l, t)) and self.in_right_tilde(
            v_r, self.multiply(u_r, t)
        )

    def splittings_for_rho(self, w: Word, rho: RhoTuple) -> list[TripleSplit]:
        if rho.degree != len(w):
            return []
        return [s for s in self.triple_splittings(w) if self.split_matches_rho(s, rho)]

    def enumerate_clique_triples(self) -> list[tuple[Word, Word, Word]]:
        if self._triples is None:
            cl = self.cliques()
            out = []
            for u_l, u_r, t in product(cl, cl, cl):
                if (
                    self.is_clique(self.multiply(u_l, t))
                    and self.is_clique(self.multiply(t, u_r))
                    and self.is_reduced_product([u_l, t, u_r])
                ):
                    out.append((u_l, u_r, t))
            self._triples = sorted(out, key=lambda x: (sum(map(len, x)), x))
        return list(self._triples)

    def rhos(self, degree: int) -> list[RhoTuple]:
        """All rho-tuples with |rho| = degree."""
        out = []
        for u_l, u_r, t in self.enumerate_clique_triples():
            rest = degree - len(u_l) - len(u_r) - len(t)
            for n_l in range(rest + 1):
                out.append(RhoTuple(n_l, rest - n_l, u_l, u_r, t))
        return out

    def c_gamma(self) -> int:
        return sum(2 ** len(t) for _, _, t in self.enumerate_clique_triples())

    def clique_count(self) -> int:
        """#Cliq, counting the empty clique."""
        return len(self.cliques())


@lru_cache(maxsize=None)
def group(g: SimpleGraph) -> CoxeterGroup:
    """Shared memoised group object for a graph."""
    return CoxeterGroup(g)


def normal_form(seq: Iterable[int], g: SimpleGraph) -> Word:
    return group(g).normal_form(seq)


def multiply(w1: Word, w2: Word, g: SimpleGraph) -> Word:
    return group(g).multiply(w1, w2)


def c_gamma(g: SimpleGraph) -> int:
    return group(g).c_gamma()
