"""Hecke algebras of small finite Coxeter groups as vertex algebras.

Convention: (T_s - q_s)(T_s + 1) = 0, with the regular action on the basis δ_w

    T_s δ_w = δ_{sw}                       if |sw| > |w|,
    T_s δ_w = q_s δ_{sw} + (q_s - 1) δ_w   otherwise.

The trace vector state at δ_e has ⟨δ_v, δ_w⟩ = q_w δ_{v,w} on the GNS space, so we work in
the orthonormal basis e_w = q_w^{-1/2} δ_w, in which every T_s is self-adjoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from graphprod.coxeter import SimpleGraph
from graphprod.fock import FockOperator, FockSpace, build_fock
from graphprod.valg import VertexAlgebra

MAX_ORDER = 2000


@dataclass(frozen=True, eq=False)
class FiniteCoxeter:
    """Coxeter system given by its matrix; elements are enumerated by BFS."""

    matrix: tuple  # m(s, t), symmetric with ones on the diagonal
    name: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=int)
        n = m.shape[0]
        if m.shape != (n, n) or n < 1:
            raise ValueError("Coxeter matrix must be square and nonempty")
        if not np.array_equal(m, m.T):
            raise ValueError("Coxeter matrix must be symmetric")
        if np.any(np.diag(m) != 1):
            raise ValueError("Coxeter matrix must have ones on the diagonal")
        off = m[~np.eye(n, dtype=bool)]
        if np.any(off < 2):
            raise ValueError("off-diagonal Coxeter entries must be at least 2")
        object.__setattr__(self, "matrix", tuple(tuple(int(x) for x in r) for r in m))

    @classmethod
    def a1(cls) -> "FiniteCoxeter":
        return cls(((1,),), "A1")

    @classmethod
    def a1xa1(cls) -> "FiniteCoxeter":
        return cls(((1, 2), (2, 1)), "A1xA1")

    @classmethod
    def dihedral(cls, m: int) -> "FiniteCoxeter":
        if not 2 <= m <= 6:
            raise ValueError("dihedral type I2(m) is supported for 2 <= m <= 6")
        return cls(((1, m), (m, 1)), f"I2({m})")

    @classmethod
    def parse(cls, text: str) -> "FiniteCoxeter":
        t = text.replace(" ", "").upper()
        if t == "A1":
            return cls.a1()
        if t in ("A1XA1", "A1*A1"):
            return cls.a1xa1()
        if t.startswith("I2(") and t.endswith(")"):
            return cls.dihedral(int(t[3:-1]))
        raise ValueError(f"unknown Coxeter type {text!r}")

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def _reflections(self) -> list[np.ndarray]:
        n = self.rank
        B = np.array([[-np.cos(np.pi / self.matrix[i][j]) for j in range(n)] for i in range(n)])
        return [_reflection(B, s) for s in range(n)]

    @cached_property
    def elements(self) -> list[tuple]:
        """Reduced words of all elements in BFS (length, then lexicographic) order."""
        return self._bfs()[0]

    @cached_property
    def _table(self):
        return self._bfs()

    def _bfs(self):
        refl = self._reflections()
        key = lambda M: tuple(np.round(M, 8).ravel())
        start = np.eye(self.rank)
        seen = {key(start): 0}
        words = [()]
        mats = [start]
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                for s in range(self.rank):
                    M = refl[s] @ mats[i]
                    k = key(M)
                    if k not in seen:
                        seen[k] = len(words)
                        words.append((s,) + words[i])
                        mats.append(M)
                        nxt.append(len(words) - 1)
                        if len(words) > MAX_ORDER:
                            raise ValueError("Coxeter group is infinite or too large")
            frontier = sorted(nxt, key=lambda j: (len(words[j]), words[j]))
        # left multiplication table by generators
        index = {w: i for i, w in enumerate(words)}
        left = np.empty((self.rank, len(words)), dtype=int)
        for s in range(self.rank):
            for i, M in enumerate(mats):
                left[s, i] = seen[key(refl[s] @ M)]
        return words, index, left, mats, seen, key

    @property
    def order(self) -> int:
        return len(self.elements)

    def length(self, i: int) -> int:
        return len(self.elements[i])

    def left_mult(self, s: int, i: int) -> int:
        return int(self._table[2][s, i])

    def multiply(self, i: int, j: int) -> int:
        words, index, left = self._table[:3]
        k = j
        for s in reversed(words[i]):
            k = left[s, k]
        return int(k)

    def conjugacy_classes_of_generators(self) -> list[set]:
        """Generators s, t are conjugate iff joined by a path of odd m(s, t)."""
        n = self.rank
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        for s in range(n):
            for t in range(s + 1, n):
                if self.matrix[s][t] % 2 == 1:
                    parent[find(s)] = find(t)
        groups: dict = {}
        for s in range(n):
            groups.setdefault(find(s), set()).add(s)
        return list(groups.values())


def _reflection(B: np.ndarray, s: int) -> np.ndarray:
    n = B.shape[0]
    S = np.eye(n)
    # x ↦ x - 2 B(α_s, x) α_s in the basis of simple roots
    for j in range(n):
        S[s, j] -= 2 * B[s, j]
    return S


@dataclass(eq=False)
class HeckeAlgebra:
    coxeter: FiniteCoxeter
    q: tuple
    generators: list  # T_s on ℓ²(W) in the orthonormal basis e_w
    algebra: VertexAlgebra
    gram_min: float  # smallest eigenvalue of the Gram matrix of the T_w δ_e

    def element(self, i: int) -> np.ndarray:
        """T_w for the element with index i, on ℓ²(W)."""
        M = np.eye(self.coxeter.order)
        for s in self.coxeter.elements[i]:
            M = M @ self.generators[s]
        return M

    def adapted(self, M: np.ndarray) -> np.ndarray:
        """An operator on ℓ²(W) in the adapted GNS coordinates of the vertex algebra."""
        F = self.algebra.frame
        return F.conj().T @ M @ F

    def generator_adapted(self, s: int) -> np.ndarray:
        return self.adapted(self.generators[s])

    def quadratic_residual(self, s: int) -> float:
        T = self.generators[s]
        one = np.eye(T.shape[0])
        return float(np.abs((T - self.q[s] * one) @ (T + one)).max())

    def braid_residual(self, s: int, t: int) -> float:
        m = self.coxeter.matrix[s][t]
        a, b = self.generators[s], self.generators[t]
        left = np.eye(a.shape[0])
        right = np.eye(a.shape[0])
        for k in range(m):
            left = left @ (a if k % 2 == 0 else b)
            right = right @ (b if k % 2 == 0 else a)
        return float(np.abs(left - right).max())


def _check_q(W: FiniteCoxeter, q: Sequence[float]) -> tuple:
    if np.isscalar(q):
        q = [float(q)] * W.rank
    q = tuple(float(x) for x in q)
    if len(q) != W.rank:
        raise ValueError("one parameter per generator is required")
    if any(x <= 0 for x in q):
        raise ValueError("Hecke parameters must be positive")
    for cls in W.conjugacy_classes_of_generators():
        vals = {q[s] for s in cls}
        if len(vals) > 1:
            raise ValueError(f"conjugate generators {sorted(cls)} need equal parameters")
    return q


def _generators(W: FiniteCoxeter, q: tuple) -> list[np.ndarray]:
    n = W.order
    gens = []
    for s in range(W.rank):
        T = np.zeros((n, n))
        for i in range(n):
            j = W.left_mult(s, i)
            T[j, i] = np.sqrt(q[s])
            if W.length(j) < W.length(i):
                T[i, i] = q[s] - 1.0
        gens.append(T)
    return gens


def _gram_min(H: HeckeAlgebra) -> float:
    """Smallest eigenvalue of the Gram matrix of the vectors T_w δ_e."""
    vecs = np.stack([H.element(i)[:, 0] for i in range(H.coxeter.order)])
    gram = vecs.conj() @ vecs.T
    return float(np.linalg.eigvalsh((gram + gram.conj().T) / 2).min())


def trace_gram_min(W: FiniteCoxeter, q) -> float:
    """Faithfulness margin of the state at δ_e, computed before any GNS construction."""
    q = _check_q(W, q)
    return _gram_min(HeckeAlgebra(W, q, _generators(W, q), None, 0.0))  # type: ignore[arg-type]


def hecke_algebra(W: FiniteCoxeter, q) -> HeckeAlgebra:
    q = _check_q(W, q)
    n = W.order
    H = HeckeAlgebra(W, q, _generators(W, q), None, 0.0)  # type: ignore[arg-type]
    H.gram_min = _gram_min(H)
    ops = np.stack([H.element(i) for i in range(n)]).astype(complex)
    xi = np.zeros(n)
    xi[0] = 1.0
    H.algebra = VertexAlgebra.from_operators(ops, xi, name=f"Hecke {W.name} q={q}")
    return H


def hecke_vertex(W: FiniteCoxeter, q) -> VertexAlgebra:
    return hecke_algebra(W, q).algebra


# ---------------------------------------------------------------------------------
# graph products of Hecke algebras


@dataclass(frozen=True)
class RelationCheck:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass
class HeckeReport:
    depth: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def raise_on_failure(self):
        bad = self.failures()
        if bad:
            raise AssertionError(f"relation residual above tolerance: {', '.join(bad)}")


def _safe_residual(X: FockOperator) -> float:
    return X.safe().max_abs()


def verify_hecke_graph_product(g: SimpleGraph, vertices: Sequence[tuple], depth: int,
                               tol: float = 1e-12, cap: int = 5000) -> HeckeReport:
    """Relations of λ(T_s) on the truncated Fock space, on the safe columns of each product."""
    if len(vertices) != g.vertex_count:
        raise ValueError("one Hecke specification per vertex is required")
    heckes = [hecke_algebra(W, q) for W, q in vertices]
    F: FockSpace = build_fock(g, [h.algebra for h in heckes], depth, cap)
    lam = {(v, s): F.lambda_v(v, h.generator_adapted(s)) for v, h in enumerate(heckes) for s in range(h.coxeter.rank)}
    one = FockOperator.identity(F)
    rep = HeckeReport(depth)
    for (v, s), L in lam.items():
        q = heckes[v].q[s]
        R = (L - one * q) @ (L + one)
        rep.checks.append(RelationCheck(f"quadratic v{v} s{s}", _safe_residual(R), tol))
        if abs(q - 1.0) < 1e-15:
            U = L.H @ L - one
            rep.checks.append(RelationCheck(f"unitary v{v} s{s}", _safe_residual(U), tol))
    for v, h in enumerate(heckes):
        for s in range(h.coxeter.rank):
            for t in range(s + 1, h.coxeter.rank):
                m = h.coxeter.matrix[s][t]
                a, b = lam[(v, s)], lam[(v, t)]
                left, right = one, one
                for k in range(m):
                    left = left @ (a if k % 2 == 0 else b)
                    right = right @ (b if k % 2 == 0 else a)
                rep.checks.append(RelationCheck(f"braid v{v} s{s} t{t}", _safe_residual(left - right), tol))
    for (v, s), A in lam.items():
        for (u, t), B in lam.items():
            if u > v and g.adjacent(u, v):
                C = A @ B - B @ A
                rep.checks.append(RelationCheck(f"commute v{v}s{s} v{u}s{t}", _safe_residual(C), tol))
    for v, h in enumerate(heckes):
        alg = h.algebra
        worst = 0.0
        for j in range(alg.dim):
            a = alg.basis[j]
            X = F.lambda_v(v, a)
            worst = max(worst, abs(X.apply(F.vacuum())[0] - alg.state(a)))
        rep.checks.append(RelationCheck(f"state v{v}", worst, tol))
    return rep
