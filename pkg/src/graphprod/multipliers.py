"""Multipliers on the truncated graph-product Fock space.

The word-length projections are written as signed sums of the maps
H_τ(X) = V_{n_l}^{u_l t, r} (X ⊗ 1) (V_{n_r}^{u_r t, r})*, which are applied block by
block: each input column word is split into two Fock legs, X acts on the first leg and
the result is shuffled back together.  The tensor square of the Fock space is never formed.

Alongside these sit the graph products of vertex maps (u.c.p. maps with their Stinespring
dilation, completely bounded maps on fixed-degree parts, maps on Fock spaces) and the
finite-rank nets that approximate the identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Callable, Sequence

import numpy as np
from scipy import linalg as sla
from scipy import sparse

from graphprod.coxeter import CoxeterGroup, RhoTuple, SimpleGraph, TauTuple, TripleSplit, Word, group
from graphprod.fock import AlgebraicElement, FockOperator, FockSpace, build_fock, permute_legs
from graphprod.valg import CpMap, constant_c, is_ucp, l2_norm, l2_op_norm, cb_upper, stinespring


# -------------------------------------------------------------------------------------
# superoperators


@dataclass(eq=False)
class Superoperator:
    """A linear map on Fock operators, optionally with an action on algebraic elements.

    When only the algebraic action is present, a Fock operator X is read as λ(x) with x
    recovered from XΩ; this is exact for X in λ of the algebra and a GNS Fock space.
    """

    descriptor: str
    fock: Callable[[FockOperator], FockOperator] | None = None
    algebraic: Callable[[AlgebraicElement], AlgebraicElement] | None = None

    def __call__(self, X):
        if isinstance(X, AlgebraicElement):
            if self.algebraic is None:
                raise ValueError(f"{self.descriptor} has no algebraic action")
            return self.algebraic(X)
        if self.fock is not None:
            return self.fock(X)
        sp = X.space
        x = sp.element_from_vector(X @ sp.vacuum())
        out = sp.lam(self.algebraic(x))
        out.margin = X.margin
        return out

    def compose(self, other: "Superoperator") -> "Superoperator":
        fock = None
        if self.fock is not None or other.fock is not None:
            fock = lambda X: self(other(X))
        alg = None
        if self.algebraic is not None and other.algebraic is not None:
            alg = lambda x: self.algebraic(other.algebraic(x))
        if fock is None and alg is None:
            alg = lambda x: self(other(x))
        return Superoperator(f"{self.descriptor}∘{other.descriptor}", fock, alg)


def linear_combination(terms: Sequence[tuple[complex, Superoperator]], descriptor: str) -> Superoperator:
    def fock(X):
        out = FockOperator.zero(X.space, X.margin)
        for c, S in terms:
            if c != 0:
                out = out + c * S(X)
        out.margin = X.margin
        return out

    alg = None
    if all(S.algebraic is not None for _, S in terms):
        def alg(x):
            out = AlgebraicElement()
            for c, S in terms:
                out = out + c * S.algebraic(x)
            return out
    use_fock = any(S.fock is not None for _, S in terms)
    return Superoperator(descriptor, fock if use_fock or alg is None else None, alg)


# -------------------------------------------------------------------------------------
# partial isometries V_n^{u,r}


@dataclass(eq=False)
class PartialIsometryVnur:
    """V_n^{u,r} from a slice of F ⊗ F into F.

    The slice holds all pairs (y1, y2) with |y1|, |y2| ≤ D and |y1| + |y2| ≤ D + 2|r|, which
    contains every initial-space pair whose image fits in the truncation.
    """

    u: Word
    r: Word
    n: int
    space: FockSpace
    domain: list  # (y1, y2) pairs in slice order
    domain_offsets: dict
    matrix: sparse.csr_matrix  # (F dim, slice dim)

    def initial_indices(self) -> np.ndarray:
        return np.unique(self.matrix.nonzero()[1])

    def final_words(self) -> set:
        sp = self.space
        rows = np.unique(self.matrix.nonzero()[0])
        return {sp.word_of_index(i) for i in rows}


def v_partial_isometry(space: FockSpace, u: Word, r: Word, n: int) -> PartialIsometryVnur:
    W = space.group
    D = space.depth
    if not W.is_clique(r) or len(W.multiply(u, r)) + len(r) != len(u):
        raise ValueError(f"{u} does not end with the clique {r}")
    ur = W.multiply(u, r)
    words = space.words
    domain, offsets, off = [], {}, 0
    for y1 in words:
        for y2 in words:
            if len(y1) + len(y2) <= D + 2 * len(r):
                domain.append((y1, y2))
                offsets[(y1, y2)] = off
                off += space.sizes[y1] * space.sizes[y2]
    rows, cols = [], []
    tails = [w for w in W.enumerate_words(D) if W.in_left(w, u)]
    for v_r in W.right_tilde_n(u, n):
        y1 = W.multiply(v_r, ur)
        if not space.has(y1):
            continue
        for vt in tails:
            y2 = W.multiply(r, vt)
            o = W.multiply(y1, y2)
            if (y1, y2) not in offsets or not space.has(y2) or not space.has(o):
                continue
            n1, n2 = space.sizes[y1], space.sizes[y2]
            idx = np.arange(n1 * n2).reshape(space.leg_shape(y1) + space.leg_shape(y2))
            idx = permute_legs(idx, y1 + y2, o).reshape(-1)
            rows.append(space.offsets[o] + np.arange(space.sizes[o]))
            cols.append(offsets[(y1, y2)] + idx)
    if rows:
        r_, c_ = np.concatenate(rows), np.concatenate(cols)
    else:
        r_ = c_ = np.zeros(0, dtype=int)
    M = sparse.csr_matrix((np.ones(len(r_)), (r_, c_)), shape=(space.dim, off))
    return PartialIsometryVnur(u, r, n, space, domain, offsets, M)


# -------------------------------------------------------------------------------------
# H_tau


def _tau_words(W: CoxeterGroup, tau: TauTuple):
    (n_l, n_r, u_l, u_r, t), r = tau
    if not W.is_clique(t) or r not in W.subcliques(t):
        raise ValueError(f"{r} is not a sub-clique of {t}")
    return n_l, n_r, W.multiply(u_l, t), W.multiply(u_r, t), r


def _h_tau_plan(space: FockSpace, tau: TauTuple):
    key = ("h_tau", tau)
    if key in space._cache:
        return space._cache[key]
    W = space.group
    D = space.depth
    n_l, n_r, ult, urt, r = _tau_words(W, tau)
    targets = {W.multiply(v_l, ult, r) for v_l in W.right_tilde_n(ult, n_l)} if n_l <= D else set()
    cols: dict = {}
    if n_r <= D:
        tails = [w for w in W.enumerate_words(D) if W.in_left(w, urt) and W.in_left(w, ult)]
        for v_r in W.right_tilde_n(urt, n_r):
            base = W.multiply(v_r, urt)
            y1 = W.multiply(v_r, urt, r)
            for vt in tails:
                if len(base) + len(vt) > D:
                    continue
                x = W.multiply(base, vt)
                cols.setdefault(x, []).append((y1, W.multiply(r, vt)))
    plan = (targets, cols)
    space._cache[key] = plan
    return plan


def apply_h_tau(tau: TauTuple, X: FockOperator) -> FockOperator:
    sp = X.space
    W = sp.group
    targets, cols = _h_tau_plan(sp, tau)
    by_col: dict = {}
    for (i, j), b in X.blocks.items():
        if i in targets:
            by_col.setdefault(j, []).append((i, b))
    out: dict = {}
    for x, entries in cols.items():
        if not sp.has(x):
            continue
        for y1, y2 in entries:
            if not sp.has(y2):
                continue
            n2 = sp.sizes[y2]
            eye2 = np.eye(n2).reshape(sp.leg_shape(y2) * 2)
            for z, blk in by_col.get(y1, ()):
                o = W.multiply(z, y2)
                if not sp.has(o):
                    continue
                t = blk.reshape(sp.leg_shape(z) + sp.leg_shape(y1))
                t = np.multiply.outer(t, eye2)  # z, y1, y2, y2'
                nz, n1, k2 = len(z), len(y1), len(y2)
                order = (list(range(nz)) + list(range(nz + n1, nz + n1 + k2))
                         + list(range(nz, nz + n1)) + list(range(nz + n1 + k2, nz + n1 + 2 * k2)))
                t = np.transpose(t, order)
                t = permute_legs(t, z + y2, o, lead=0)
                t = permute_legs(t, y1 + y2, x, lead=len(o))
                blk_out = t.reshape(sp.sizes[o], sp.sizes[x])
                key = (o, x)
                out[key] = out[key] + blk_out if key in out else blk_out
    return FockOperator(sp, out, X.margin)


def h_tau(tau: TauTuple) -> Superoperator:
    tau = TauTuple(RhoTuple(*tau[0]), tuple(tau[1]))
    return Superoperator(f"H{tau}", fock=lambda X: apply_h_tau(tau, X))


def h_tau_materialized(tau: TauTuple, X: FockOperator) -> FockOperator:
    """V_l (X ⊗ 1) V_r* with both partial isometries as explicit matrices (small spaces only)."""
    sp = X.space
    W = sp.group
    n_l, n_r, ult, urt, r = _tau_words(W, tau)
    Vl = v_partial_isometry(sp, ult, r, n_l)
    Vr = v_partial_isometry(sp, urt, r, n_r)
    Xd = X.dense()
    dom = Vl.domain
    size = Vl.matrix.shape[1]
    XI = np.zeros((size, size), dtype=complex)
    for (y1, y2), o_in in Vl.domain_offsets.items():
        for (z, z2), o_out in Vl.domain_offsets.items():
            if z2 != y2:
                continue
            blk = Xd[sp.block_slice(z), sp.block_slice(y1)]
            n2 = sp.sizes[y2]
            XI[o_out:o_out + sp.sizes[z] * n2, o_in:o_in + sp.sizes[y1] * n2] = np.kron(blk, np.eye(n2))
    M = Vl.matrix @ XI @ Vr.matrix.conj().T
    return FockOperator.from_dense(sp, np.asarray(M))


# -------------------------------------------------------------------------------------
# the projection P_a(τ, ω), computed from its defining union of subspaces


def p_a_projection(tau: TauTuple, omega: TripleSplit, L: FockOperator, max_col: int) -> FockOperator:
    """Projection onto the span of the J-subspaces for columns of length ≤ max_col.

    Each J-subspace {η ∈ H°_x : Lη ∈ H°_y} is found numerically as the null space of the
    rows of L outside H°_y.
    """
    sp = L.space
    W = sp.group
    (n_l, n_r, u_l, u_r, t), r = tau
    ult, urt = W.multiply(u_l, t), W.multiply(u_r, t)
    w1, w2, w3 = omega
    w23 = W.multiply(w2, w3)
    lefts = W.right_tilde_n(ult, n_l)
    rights = W.right_tilde_n(urt, n_r)
    tails = [w for w in W.enumerate_words(max_col) if W.in_left(w, ult) and W.in_left(w, urt)]
    cols: dict = {}
    for (i, j), b in L.blocks.items():
        cols.setdefault(j, []).append((i, b))
    spans: dict = {}
    for v_r in rights:
        vrt = W.multiply(v_r, urt)
        vrtr = W.multiply(vrt, r)
        if len(vrtr) != len(w23) + len(W.multiply(w23, vrtr)):
            continue
        for vt in tails:
            x = W.multiply(vrt, vt)
            if len(x) > max_col or not sp.has(x):
                continue
            if len(W.multiply(w1, w3, x)) != len(w1) + len(W.multiply(w3, x)):
                continue
            for v_l in lefts:
                y = W.multiply(v_l, ult, vt)
                off = [b for i, b in cols.get(x, ()) if i != y]
                if off:
                    basis = sla.null_space(np.vstack(off), rcond=1e-12)
                else:
                    basis = np.eye(sp.sizes[x])
                if basis.size:
                    spans.setdefault(x, []).append(basis)
    blocks = {}
    for x, bases in spans.items():
        Q = sla.orth(np.hstack(bases))
        blocks[(x, x)] = Q @ Q.conj().T
    return FockOperator(sp, blocks)


# -------------------------------------------------------------------------------------
# H̃_ρ, P_d and the radial maps


def h_tilde_rho(rho: RhoTuple, g: SimpleGraph) -> Superoperator:
    rho = RhoTuple(*rho)
    W = group(g)
    terms = [((-1) ** len(r), h_tau(TauTuple(rho, r))) for r in W.subcliques(rho.t)]
    return linear_combination(terms, f"H~{tuple(rho)}")


def p_d_terms(g: SimpleGraph, d: int) -> list[tuple[int, TauTuple]]:
    """The signed H_τ terms of the degree-d projection."""
    W = group(g)
    out = []
    for rho in W.rhos(d):
        for r in W.subcliques(rho.t):
            out.append(((-1) ** len(r), TauTuple(rho, r)))
    return out


def p_d_bound_terms(g: SimpleGraph, d: int) -> int:
    """Number of completely contractive terms left after dropping the vanishing (e,e,e) ones."""
    if d == 0:
        return 1
    W = group(g)
    return sum(2 ** len(rho.t) for rho in W.rhos(d) if (rho.u_l, rho.u_r, rho.t) != ((), (), ()))


def p_d_bound(g: SimpleGraph, d: int) -> float:
    """Upper bound for the cb norm of the degree-d projection: 1 at d = 0, C_Γ·d otherwise."""
    return 1.0 if d == 0 else float(group(g).c_gamma() * d)


def p_d(d: int, mode: str = "direct", g: SimpleGraph | None = None) -> Superoperator:
    if d < 0:
        raise ValueError("degree must be nonnegative")
    if mode == "direct":
        return Superoperator(f"P{d}", algebraic=lambda x: x.homogeneous(d))
    if mode == "via_h_tau":
        if g is None:
            raise ValueError("the H_tau expansion needs the graph")
        terms = p_d_terms(g, d)

        def fock(X):
            out = FockOperator.zero(X.space, X.margin)
            for sign, tau in terms:
                out = out + sign * apply_h_tau(tau, X)
            out.margin = X.margin
            return out

        return Superoperator(f"P{d}[H]", fock=fock)
    raise ValueError(f"unknown mode {mode!r}")


def radial(r: float, n: int | None = None, mode: str = "direct", g: SimpleGraph | None = None) -> Superoperator:
    """Σ_k r^k P_k, cut at degree n when n is given."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    name = f"T[{r}]" if n is None else f"T[{r},{n}]"
    if mode == "direct":
        def alg(x):
            out = AlgebraicElement()
            for w, t in x.terms.items():
                if n is None or len(w) <= n:
                    out.terms[w] = (r ** len(w)) * t
            return out
        return Superoperator(name, algebraic=alg)

    def fock(X):
        top = X.margin if n is None else min(n, X.margin)
        out = FockOperator.zero(X.space, X.margin)
        for k in range(top + 1):
            if r ** k != 0:
                out = out + (r ** k) * p_d(k, "via_h_tau", g)(X)
        out.margin = X.margin
        return out

    return Superoperator(name, fock=fock)


def radial_tail_bound(g: SimpleGraph, r: float, n: int) -> float:
    """Upper bound for ‖T_r − T_{r,n}‖_cb."""
    if r >= 1:
        return float("inf")
    return group(g).c_gamma() * n * r ** n / (1 - r) ** 2


# -------------------------------------------------------------------------------------
# certified norm estimates


def lambda_norm_upper(space: FockSpace, x: AlgebraicElement) -> float:
    """Triangle-inequality upper bound for ‖λ(x)‖ over the canonical tensor basis."""
    opn = [np.array([np.linalg.norm(o, 2) for o in ops]) for ops in space.ops]
    total = 0.0
    for w, c in x.terms.items():
        if not w:
            total += abs(complex(c))
            continue
        weight = np.array(1.0)
        for v in w:
            weight = np.multiply.outer(weight, opn[v])
        total += float(np.sum(np.abs(c) * weight))
    return total


def safe_norm_lower(X: FockOperator) -> float:
    """Norm of the exactly computed part (safe columns), a lower bound for the true norm."""
    S = X.safe()
    return S.norm()


def certified_ratio(space: FockSpace, image: AlgebraicElement, source: AlgebraicElement) -> float:
    """Lower bound for ‖λ(image)‖ / ‖λ(source)‖."""
    num = safe_norm_lower(space.lam(image))
    den = lambda_norm_upper(space, source)
    return num / den if den > 0 else 0.0


# -------------------------------------------------------------------------------------
# graph products of vertex maps


def _centered_block(T: CpMap) -> np.ndarray:
    return T.matrix[1:, 1:]


def graph_map_algebraic(maps: Sequence[CpMap], degree: int | None = None) -> Callable:
    mats = [_centered_block(T) for T in maps]

    def alg(x: AlgebraicElement) -> AlgebraicElement:
        if degree is not None:
            extra = x.degrees() - {degree}
            if extra:
                raise ValueError(f"input has components outside degree {degree}")
        return x.map_legs(mats)

    return alg


@dataclass(eq=False)
class UcpGraphProduct:
    graph: SimpleGraph
    maps: list
    superoperator: Superoperator
    dilations: list = field(default_factory=list)

    def dilation_spaces(self, depth: int, cap: int = 20000):
        """(F, F̂, V) with V: F → F̂ the tensor product of the vertex isometries on each word,
        given as a dict word -> block."""
        F = build_fock(self.graph, [T.target for T in self.maps], depth, cap)
        ops = tuple(np.array([S.rep(b) for b in S.source.basis[1:]]) for S in self.dilations)
        Fh = FockSpace(self.graph, tuple(S.dim for S in self.dilations), depth, ops, cap)
        Vo = [S.isometry[1:, 1:] for S in self.dilations]
        V = {}
        for w in F.words:
            if not Fh.has(w):
                continue
            blk = np.ones((1, 1), dtype=complex)
            for v in w:
                blk = np.kron(blk, Vo[v])
            V[w] = blk
        return F, Fh, V

    def certify(self, x: AlgebraicElement, depth: int) -> float:
        """Largest entry of θ(λ(x)) − V* π(λ(x)) V over columns of length ≤ depth − |x|."""
        F, Fh, V = self.dilation_spaces(depth)
        safe = depth - x.max_length
        lhs = F.lam(self.superoperator.algebraic(x)).columns_upto(safe)
        rhs = {}
        for (i, j), b in Fh.lam(x).blocks.items():
            if len(j) > safe or i not in V or j not in V:
                continue
            blk = V[i].conj().T @ b @ V[j]
            rhs[(i, j)] = rhs[(i, j)] + blk if (i, j) in rhs else blk
        return (lhs - FockOperator(F, rhs)).max_abs()


def graph_product_ucp(maps: Sequence[CpMap], graph: SimpleGraph) -> UcpGraphProduct:
    if len(maps) != graph.vertex_count:
        raise ValueError("one map per vertex is required")
    for v, T in enumerate(maps):
        if not is_ucp(T):
            raise ValueError(f"vertex {v}: map is not unital completely positive")
        if not T.is_state_preserving():
            raise ValueError(f"vertex {v}: map is not state-preserving")
    S = Superoperator("*θ", algebraic=graph_map_algebraic(maps))
    return UcpGraphProduct(graph, list(maps), S, [stinespring(T) for T in maps])


def _check_state_preserving(maps):
    for v, T in enumerate(maps):
        if np.abs(T.matrix[0, 1:]).max(initial=0.0) > 1e-10:
            raise ValueError(f"vertex {v}: map does not preserve the state on centered elements")


def cb_bound(graph: SimpleGraph, d: int, constants: Sequence[float]) -> float:
    W = group(graph)
    return float(W.clique_count() ** 3 * d * max(constants) ** d)


def cb_difference_bound(graph: SimpleGraph, d: int, T: Sequence[CpMap], S: Sequence[CpMap]) -> float:
    W = group(graph)
    m = max(max(constant_c(a), constant_c(b)) for a, b in zip(T, S))
    diff = max(constant_c(a - b) for a, b in zip(T, S))
    return float(W.clique_count() ** 3 * d ** 2 * m ** (d - 1) * diff)


def graph_product_cb_on_Ad(maps: Sequence[CpMap], d: int, graph: SimpleGraph) -> tuple[Superoperator, float]:
    if d < 1:
        raise ValueError("degree must be at least one")
    _check_state_preserving(maps)
    S = Superoperator(f"*T_{d}", algebraic=graph_map_algebraic(maps, d))
    return S, cb_bound(graph, d, [constant_c(T) for T in maps])


@dataclass(eq=False)
class FockGraphProduct:
    """η_1 ⊗ ... ⊗ η_d ↦ T(η_1) ⊗ ... ⊗ T(η_d) on the degree-d part of the Fock space."""

    graph: SimpleGraph
    maps: list
    d: int

    def vertex_blocks(self):
        return [_centered_block(T) for T in self.maps]

    def words(self):
        return [w for w in group(self.graph).enumerate_words(self.d) if len(w) == self.d]

    def block(self, w: Word) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for v in w:
            out = np.kron(out, self.vertex_blocks()[v])
        return out

    def norm(self) -> float:
        """Exact norm: the blocks are orthogonal and each is a Kronecker product."""
        vn = [np.linalg.norm(b, 2) if b.size else 0.0 for b in self.vertex_blocks()]
        return max((prod(vn[v] for v in w) for w in self.words()), default=0.0)

    def norm_direct(self) -> float:
        return max((np.linalg.norm(self.block(w), 2) for w in self.words()), default=0.0)

    def difference_norm(self, other: "FockGraphProduct") -> float:
        return max((np.linalg.norm(self.block(w) - other.block(w), 2) for w in self.words()), default=0.0)

    def difference_bound(self, other: "FockGraphProduct") -> float:
        vn = lambda T: np.linalg.norm(_centered_block(T), 2)
        m = max(max(vn(a), vn(b)) for a, b in zip(self.maps, other.maps))
        diff = max(vn(a - b) for a, b in zip(self.maps, other.maps))
        return float(self.d * m ** (self.d - 1) * diff)


def graph_product_on_fock(maps: Sequence[CpMap], d: int, graph: SimpleGraph) -> FockGraphProduct:
    _check_state_preserving(maps)
    return FockGraphProduct(graph, list(maps), d)


# -------------------------------------------------------------------------------------
# finite-rank nets


@dataclass(eq=False)
class CcapNet:
    """Per-vertex finite-rank maps V[v][j] and u.c.p. maps U[v][j] on the same algebra."""

    graph: SimpleGraph
    V: list
    U: list

    def __post_init__(self):
        for v, seq in enumerate(self.U):
            for j, T in enumerate(seq):
                if not is_ucp(T) or not T.is_state_preserving():
                    raise ValueError(f"vertex {v}, index {j}: U is not a state-preserving u.c.p. map")
        for v, seq in enumerate(self.V):
            _check_state_preserving(seq)

    def epsilon(self, v: int, j: int) -> float:
        """cb (upper bound) + both L2 norms of V - U."""
        D = self.V[v][j] - self.U[v][j]
        return cb_upper(D) + l2_norm(D) + l2_op_norm(D)

    def max_epsilon(self, j: int) -> float:
        return max(self.epsilon(v, j) for v in range(self.graph.vertex_count))


@dataclass
class GapReport:
    N: int
    j: int
    r: float
    epsilon: float
    cb_upper: float
    cb_tail_term: float
    cb_net_term: float
    l2_upper: float
    l2_tail_term: float
    l2_net_term: float
    cb_lower: float = 0.0
    l2_lower: float = 0.0
    l2op_lower: float = 0.0


def ccap_net(net: CcapNet, N: int, j: int, space: FockSpace | None = None,
             samples: Sequence[AlgebraicElement] = ()) -> tuple[Superoperator, Superoperator, GapReport]:
    g = net.graph
    W = group(g)
    r = 1.0 - 1.0 / np.sqrt(N)
    Vm = [net.V[v][j] for v in range(g.vertex_count)]
    Um = [net.U[v][j] for v in range(g.vertex_count)]
    Vb, Ub = [_centered_block(T) for T in Vm], [_centered_block(T) for T in Um]

    def d_alg(x):
        out = AlgebraicElement()
        for w, t in x.terms.items():
            if len(w) <= N:
                out.terms[w] = (r ** len(w)) * AlgebraicElement({w: t}).map_legs(Vb).terms[w]
        return out

    def e_alg(x):
        out = AlgebraicElement()
        for w, t in x.terms.items():
            out.terms[w] = (r ** len(w)) * AlgebraicElement({w: t}).map_legs(Ub).terms[w]
        return out

    Dn = Superoperator(f"D[{N},{j}]", algebraic=d_alg)
    En = Superoperator(f"E[{N},{j}]", algebraic=e_alg)
    eps = net.max_epsilon(j)
    cliq3 = W.clique_count() ** 3
    cb_tail = radial_tail_bound(g, r, N)
    cb_net = sum(cliq3 * d ** 2 * 2 ** (d - 1) * eps * p_d_bound(g, d) for d in range(1, N + 1))
    l2_tail = r ** (N + 1)
    l2_net = sum(d * 2 ** (d - 1) * eps for d in range(1, N + 1))
    rep = GapReport(N, j, r, eps, cb_tail + cb_net, cb_tail, cb_net, l2_tail + l2_net, l2_tail, l2_net)
    if space is not None:
        for x in samples:
            diff = e_alg(x) - d_alg(x)
            rep.cb_lower = max(rep.cb_lower, certified_ratio(space, diff, x))
            vx, vd = x.vector(space), diff.vector(space)
            if np.linalg.norm(vx) > 0:
                rep.l2_lower = max(rep.l2_lower, np.linalg.norm(vd) / np.linalg.norm(vx))
            ox = space.lam(x).H @ space.vacuum()
            od = space.lam(diff).H @ space.vacuum()
            if np.linalg.norm(ox) > 0:
                rep.l2op_lower = max(rep.l2op_lower, np.linalg.norm(od) / np.linalg.norm(ox))
    return Dn, En, rep
