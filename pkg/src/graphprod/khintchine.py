"""Concrete operator-space realizations for the Khintchine-type factorization.

Column and row Hilbert spaces are realized as plain vectors, and an element of
column ⊗_h B(K) ⊗_h row as the rectangular operator matrix Σ_k C_k ⊗ M_k, whose norm is
an ordinary operator norm.  Vectors of the free Fock space that enter the leg-by-leg
dilation check are kept as labels: a tuple of ``(letter, centered index)`` pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product as iproduct
from math import prod
from typing import Sequence

import numpy as np
from scipy import sparse

from graphprod.coxeter import CoxeterGroup, RhoTuple, SimpleGraph, Word, group, match_legs
from graphprod.fock import AlgebraicElement, FockOperator, FockSpace, build_fock

Label = tuple  # free Fock basis label: ((letter, index), ...)


class InsufficientDepthError(ValueError):
    def __init__(self, what: str, given: int, required: int):
        super().__init__(f"{what} depth {given} is too small, {required} is required")
        self.given = given
        self.required = required


def _centered_check(a: np.ndarray, tol: float = 1e-12):
    if abs(a[0, 0]) > tol:
        raise ValueError("element is not centered: its state is nonzero")


def _kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _opnorm(M) -> float:
    if sparse.issparse(M):
        if M.nnz == 0:
            return 0.0
        M = M.toarray()
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


@dataclass(eq=False)
class FreeFock:
    """Vertex data of a graph together with the free Fock space over the edgeless graph."""

    graph: SimpleGraph
    algebras: tuple
    depth: int = 2
    cap: int = 5000

    def __post_init__(self):
        self.algebras = tuple(self.algebras)
        if len(self.algebras) != self.graph.vertex_count:
            raise ValueError("one algebra per vertex is required")
        self.group: CoxeterGroup = group(self.graph)
        self.free_group: CoxeterGroup = group(self.graph.free())
        self.dims = tuple(a.dim for a in self.algebras)
        self.cdims = tuple(d - 1 for d in self.dims)
        # row functional of basis element j: b ↦ <Ω, b e_k>, k centered
        self.rows = tuple(np.asarray(a.basis[1:, 0, 1:]) for a in self.algebras)
        self.ops = tuple(np.asarray(a.basis[1:]) for a in self.algebras)

    @cached_property
    def space(self) -> FockSpace:
        return build_fock(self.graph.free(), self.algebras, self.depth, self.cap)

    def graph_space(self, depth: int) -> FockSpace:
        return build_fock(self.graph, self.algebras, depth, self.cap)

    def clique_equivalent(self, w: Sequence[int]) -> bool:
        w = tuple(w)
        if len(set(w)) != len(w):
            return False
        return all(self.graph.adjacent(a, b) for i, a in enumerate(w) for b in w[i + 1:])

    def middle_ops(self, t: Word) -> list[np.ndarray]:
        """Operators on H_t for the centered basis tensors of Å_t, C-ordered."""
        if not t:
            return [np.ones((1, 1), dtype=complex)]
        return [_kron_all([self.ops[x][j] for x, j in zip(t, m)])
                for m in np.ndindex(*(self.cdims[x] for x in t))]


# ---------------------------------------------------------------------------------
# single-letter maps and Diag


def theta1_rho1(ff: FreeFock, v: int, a: np.ndarray) -> tuple[FockOperator, FockOperator]:
    """P_v λ_v(a) P_v^⊥ and P_v^⊥ λ_v(a) P_v on the free Fock space, for centered a."""
    a = np.asarray(a, dtype=complex)
    _centered_check(a)
    parts = ff.space.vertex_parts(v, a)
    return parts["cre"], parts["ann"]


def column_vector(ff: FreeFock, v: int, a: np.ndarray) -> np.ndarray:
    """Coordinates of θ_1(a) in the column space ⊕_v H°_v."""
    _centered_check(a)
    out = np.zeros(sum(ff.cdims), dtype=complex)
    off = sum(ff.cdims[:v])
    out[off:off + ff.cdims[v]] = a[1:, 0]
    return out


def row_vector(ff: FreeFock, v: int, a: np.ndarray) -> np.ndarray:
    """Coordinates of ρ_1(a) in the row space: the functional η ↦ <Ω, a η>."""
    _centered_check(a)
    out = np.zeros(sum(ff.cdims), dtype=complex)
    off = sum(ff.cdims[:v])
    out[off:off + ff.cdims[v]] = a[0, 1:]
    return out


def _compress(ff: FreeFock, w: Sequence[int], a: np.ndarray) -> np.ndarray:
    """(⊗ P_{w_i}) a (⊗ P_{w_i}) restricted to the centered legs."""
    full = tuple(ff.dims[x] for x in w)
    if not w:
        return np.asarray(a, dtype=complex).reshape(1, 1)
    t = np.asarray(a, dtype=complex).reshape(full + full)
    sl = tuple(slice(1, None) for _ in w)
    n = prod(ff.cdims[x] for x in w)
    return t[sl + sl].reshape(n, n)


def _check_diag_word(ff: FreeFock, w: Sequence[int]):
    if not ff.clique_equivalent(w):
        raise ValueError(f"word {tuple(w)} is not equivalent to a clique word")


def diag_w(ff: FreeFock, w: Sequence[int], a: np.ndarray) -> FockOperator:
    """Diag_w(a) on the free Fock space, for an operator a on H_w = ⊗ H_{w_i}."""
    w = tuple(w)
    _check_diag_word(ff, w)
    c = _compress(ff, w, a)
    S = ff.space
    blocks = {}
    for v in S.words:
        if v[:len(w)] == w:
            tail = prod(S.cdims[x] for x in v[len(w):])
            blocks[(v, v)] = np.kron(c, np.eye(tail, dtype=complex))
    return FockOperator(S, blocks)


def diag_isometry(ff: FreeFock, w: Sequence[int]) -> sparse.csr_matrix:
    """V_w : F^f → H_w ⊗ F^f with Diag_w(a) = V_w^*(a ⊗ 1)V_w."""
    w = tuple(w)
    _check_diag_word(ff, w)
    S = ff.space
    full = tuple(ff.dims[x] for x in w)
    rows, cols = [], []
    for v in S.words:
        if v[:len(w)] != w:
            continue
        tail = v[len(w):]
        for m in np.ndindex(*S.leg_shape(v)):
            head = np.ravel_multi_index(tuple(i + 1 for i in m[:len(w)]), full) if w else 0
            tail_idx = S.offsets[tail] + (np.ravel_multi_index(m[len(w):], S.leg_shape(tail)) if tail else 0)
            col = S.offsets[v] + np.ravel_multi_index(m, S.leg_shape(v)) if v else 0
            rows.append(head * S.dim + tail_idx)
            cols.append(col)
    shape = (prod(full) * S.dim, S.dim)
    return sparse.csr_matrix((np.ones(len(rows), dtype=complex), (rows, cols)), shape=shape)


# ---------------------------------------------------------------------------------
# X_d elements


@dataclass(eq=False)
class XdComponent:
    """Σ_k C_k ⊗ M_k with C_k rectangular (column basis x row basis)."""

    rho: RhoTuple
    rows: list  # words v_l u_l, one row block each
    cols: list  # words u_r^{-1} v_r^{-1}
    row_sizes: list
    col_sizes: list
    coeff: np.ndarray  # (total rows, total cols, number of middle operators)
    middle: list  # operators, dense or sparse

    def matrix(self) -> sparse.csr_matrix:
        out = None
        for k, M in enumerate(self.middle):
            Ck = self.coeff[:, :, k]
            if not np.any(Ck):
                continue
            term = sparse.kron(sparse.csr_matrix(Ck), sparse.csr_matrix(M), format="csr")
            out = term if out is None else out + term
        if out is None:
            m = self.middle[0].shape[0]
            return sparse.csr_matrix((self.coeff.shape[0] * m, self.coeff.shape[1] * m), dtype=complex)
        return out

    def nonzero(self, tol: float = 1e-14) -> bool:
        return bool(np.any(np.abs(self.coeff) > tol))

    def entry_count(self, tol: float = 1e-14) -> int:
        return int(np.count_nonzero(np.any(np.abs(self.coeff) > tol, axis=2)))

    def norm(self) -> float:
        return _opnorm(self.matrix())


@dataclass(eq=False)
class XdElement:
    degree: int
    components: dict  # rho -> XdComponent

    def norm(self) -> float:
        return max((c.norm() for c in self.components.values()), default=0.0)

    def nonzero_rhos(self, tol: float = 1e-14) -> list[RhoTuple]:
        return [r for r, c in self.components.items() if c.nonzero(tol)]

    def table(self) -> list[dict]:
        return [
            {"rho": _rho_str(r), "entries": c.entry_count(), "norm": c.norm()}
            for r, c in self.components.items() if c.nonzero()
        ]


def _rho_str(rho: RhoTuple) -> str:
    def s(w):
        return "".join(str(x) for x in w) or "e"
    return f"({rho.n_l},{rho.n_r},{s(rho.u_l)},{s(rho.u_r)},{s(rho.t)})"


def elementary_norm(column: np.ndarray, middle: np.ndarray, row: np.ndarray) -> float:
    """Norm of the realization of column ⊗ middle ⊗ row as an operator matrix."""
    C = np.outer(np.asarray(column), np.asarray(row))
    return _opnorm(np.kron(C, middle))


def amplified_norm(entries: Sequence[Sequence[XdElement]]) -> float:
    """Norm of an n x n matrix of X_d elements: sup over rho of the block operator norm."""
    rhos = set()
    for row in entries:
        for e in row:
            rhos |= set(e.components)
    best = 0.0
    for r in rhos:
        blocks = [[e.components[r].matrix() for e in row] for row in entries]
        best = max(best, _opnorm(sparse.bmat(blocks, format="csr")))
    return best


# ---------------------------------------------------------------------------------
# the component maps


@dataclass(frozen=True)
class RhoLayout:
    rho: RhoTuple
    rows: tuple
    cols: tuple
    row_sizes: tuple
    col_sizes: tuple
    row_offsets: dict
    col_offsets: dict

    @property
    def n_rows(self) -> int:
        return sum(self.row_sizes)

    @property
    def n_cols(self) -> int:
        return sum(self.col_sizes)


def rho_layout(ff: FreeFock, rho: RhoTuple) -> RhoLayout:
    W = ff.group
    n_l, n_r, u_l, u_r, t = rho
    rows = sorted({W.multiply(v, u_l) for v in W.right_tilde_n(W.multiply(u_l, t), n_l)})
    cols = sorted({W.inverse(W.multiply(v, u_r)) for v in W.right_tilde_n(W.multiply(u_r, t), n_r)})
    rs = tuple(prod(ff.cdims[x] for x in w) for w in rows)
    cs = tuple(prod(ff.cdims[x] for x in w) for w in cols)
    ro = dict(zip(rows, np.cumsum((0,) + rs[:-1]).tolist())) if rows else {}
    co = dict(zip(cols, np.cumsum((0,) + cs[:-1]).tolist())) if cols else {}
    return RhoLayout(rho, tuple(rows), tuple(cols), rs, cs, ro, co)


def _degree_of(x: AlgebraicElement, d: int | None) -> int:
    degs = x.degrees()
    if len(degs) > 1:
        raise ValueError(f"element is not homogeneous: degrees {sorted(degs)}")
    if d is None:
        if not degs:
            raise ValueError("degree of the zero element must be given")
        d = degs.pop()
    elif degs and degs != {d}:
        raise ValueError(f"element has degree {sorted(degs)[0]}, not {d}")
    return d


def _split_tensor(x: AlgebraicElement, w: Word, split) -> np.ndarray:
    seq = tuple(split.w1) + tuple(split.w2) + tuple(split.w3)
    p = match_legs(seq, w)
    return np.transpose(x.terms[w], np.argsort(p)) if w else np.asarray(x.terms[w])


def component_coefficients(ff: FreeFock, x: AlgebraicElement, rho: RhoTuple, layout: RhoLayout) -> np.ndarray:
    """Coefficient array (rows, cols, middle basis) of the rho-component."""
    W = ff.group
    t = rho.t
    n_mid = prod(ff.cdims[v] for v in t)
    out = np.zeros((layout.n_rows, layout.n_cols, n_mid), dtype=complex)
    for w in x.words():
        for split in W.splittings_for_rho(w, rho):
            w1, w2, w3 = split
            T = _split_tensor(x, w, split)
            # contract each annihilation leg with its row functional
            base = len(w1) + len(w2)
            for k, c in enumerate(w3):
                T = np.moveaxis(np.tensordot(T, ff.rows[c], axes=(base + k, 0)), -1, base + k)
            n1 = layout.row_sizes[layout.rows.index(w1)]
            n3 = layout.col_sizes[layout.cols.index(w3)]
            T = T.reshape(n1, n_mid, n3).transpose(0, 2, 1)
            r0, c0 = layout.row_offsets[w1], layout.col_offsets[w3]
            out[r0:r0 + n1, c0:c0 + n3, :] += T
    return out


def theta_tilde_d(x: AlgebraicElement, ff: FreeFock, d: int | None = None) -> XdElement:
    """Θ̃_d(λ(x)) with middle entries realized as operators on H_t."""
    d = _degree_of(x, d)
    comps = {}
    for rho in ff.group.rhos(d):
        lay = rho_layout(ff, rho)
        C = component_coefficients(ff, x, rho, lay)
        comps[rho] = XdComponent(rho, list(lay.rows), list(lay.cols), list(lay.row_sizes),
                                 list(lay.col_sizes), C, ff.middle_ops(rho.t))
    return XdElement(d, comps)


def _diag_middle(ff: FreeFock, t: Word) -> list:
    return [diag_w(ff, t, M).sparse() for M in ff.middle_ops(t)]


def j_d(x: AlgebraicElement, ff: FreeFock, d: int | None = None) -> XdElement:
    """j_d(x): as Θ̃_d but with the middle entries passed through Diag_t on the free Fock space."""
    d = _degree_of(x, d)
    comps = {}
    for rho in ff.group.rhos(d):
        lay = rho_layout(ff, rho)
        C = component_coefficients(ff, x, rho, lay)
        comps[rho] = XdComponent(rho, list(lay.rows), list(lay.cols), list(lay.row_sizes),
                                 list(lay.col_sizes), C, _diag_middle(ff, rho.t))
    return XdElement(d, comps)


def apply_diag(ff: FreeFock, y: XdElement) -> XdElement:
    """D_d on an assembled Θ̃_d image: Diag_t applied entrywise to the middle operators."""
    out = {}
    for rho, comp in y.components.items():
        A = comp.matrix().toarray()
        m = comp.middle[0].shape[0]
        nr, nc = comp.coeff.shape[:2]
        blocks = [[None] * nc for _ in range(nr)]
        for i in range(nr):
            for j in range(nc):
                blocks[i][j] = diag_w(ff, rho.t, A[i * m:(i + 1) * m, j * m:(j + 1) * m]).sparse()
        mat = sparse.bmat(blocks, format="csr") if nr and nc else None
        out[rho] = _DenseComponent(rho, mat, ff.space.dim, nr, nc)
    return XdElement(y.degree, out)


@dataclass(eq=False)
class _DenseComponent:
    rho: RhoTuple
    mat: sparse.csr_matrix | None
    m: int
    n_rows: int
    n_cols: int

    def matrix(self):
        if self.mat is None:
            return sparse.csr_matrix((self.n_rows * self.m, self.n_cols * self.m), dtype=complex)
        return self.mat

    def nonzero(self, tol=1e-14):
        return self.mat is not None and self.mat.nnz > 0 and np.abs(self.mat.data).max() > tol

    def norm(self):
        return _opnorm(self.matrix())


def xd_difference(a: XdElement, b: XdElement) -> float:
    """Largest entry of the difference of the assembled components."""
    worst = 0.0
    for rho in set(a.components) | set(b.components):
        A = a.components[rho].matrix()
        B = b.components[rho].matrix()
        D = (A - B)
        if D.nnz:
            worst = max(worst, float(np.abs(D.data).max()))
    return worst


def _basis_elements(ff: FreeFock, d: int) -> list[tuple[Word, tuple]]:
    out = []
    for w in ff.group.enumerate_words(d):
        if len(w) == d:
            out += [(w, m) for m in np.ndindex(*(ff.cdims[x] for x in w))]
    return out


def _flatten(y: XdElement) -> sparse.csr_matrix:
    parts = [y.components[r].matrix().reshape(1, -1) for r in sorted(y.components)]
    return sparse.hstack(parts, format="csr") if parts else sparse.csr_matrix((1, 0))


def e_d_reconstruct(y: XdElement, ff: FreeFock, tol: float = 1e-10) -> AlgebraicElement:
    """The element x of degree d with j_d(x) = y, by least squares on the basis of 𝔸_d."""
    d = y.degree
    basis = _basis_elements(ff, d)
    if not basis:
        raise ValueError(f"there are no words of length {d}")
    cols = []
    for w, m in basis:
        e = AlgebraicElement.basis_tensor(w, m, ff.cdims) if w else AlgebraicElement.scalar(1.0)
        cols.append(_flatten(j_d(e, ff, d)))
    A = sparse.vstack(cols, format="csr").T.tocsr()
    b = _flatten(y).T.toarray().ravel()
    G = (A.conj().T @ A).toarray()
    rhs = A.conj().T @ b
    c = np.linalg.lstsq(G, rhs, rcond=None)[0]
    resid = float(np.linalg.norm(A @ c - b))
    scale = max(1.0, float(np.linalg.norm(b)))
    if resid > tol * scale:
        raise ValueError(f"element is not in the range of j_{d}: residual {resid:.3e}")
    terms: dict = {}
    for (w, m), coef in zip(basis, c):
        if w not in terms:
            terms[w] = np.zeros(tuple(ff.cdims[x] for x in w), dtype=complex)
        terms[w][m] += coef
    return AlgebraicElement(terms)


# ---------------------------------------------------------------------------------
# the partial isometries J^L, J^R and the dilation identity


def free_labels(ff: FreeFock, depth: int) -> list[Label]:
    """Basis labels of the free Fock space up to the given length."""
    out = []
    for w in ff.free_group.enumerate_words(depth):
        for m in np.ndindex(*(ff.cdims[x] for x in w)):
            out.append(tuple(zip(w, m)))
    return out


def _ht_labels(ff: FreeFock, t: Word) -> list[tuple]:
    return list(np.ndindex(*(ff.dims[x] for x in t))) if t else [()]


@dataclass(eq=False)
class _RhoMaps:
    """Label-level action of J^R and the adjoint of J^L for one rho."""

    ff: FreeFock
    rho: RhoTuple

    def __post_init__(self):
        W = self.ff.group
        lay = rho_layout(self.ff, self.rho)
        self.layout = lay
        self.right_seqs = set(lay.cols)
        t = self.rho.t
        self.sub_t = [tuple(t[k] for k in keep) for keep in _subsets(len(t))]
        # decompositions z = v_l u_l · r_l of graph words
        self.left_decomp: dict = {}
        for s in lay.rows:
            for keep in _subsets(len(t)):
                r = tuple(t[k] for k in keep)
                seq = tuple(s) + r
                z = W.normal_form(seq)
                if len(z) != len(seq):
                    continue
                self.left_decomp.setdefault(z, []).append((s, keep, match_legs(seq, z)))

    def right(self, m0: tuple, legs: Sequence[Label]):
        """J^R(η_0 ⊗ η_1 ⊗ ... ): ((graph word, index), tails) or None."""
        if any(not leg for leg in legs):
            return None
        first = tuple(leg[0][0] for leg in legs)
        if first not in self.right_seqs:
            return None
        t = self.rho.t
        keep = [k for k in range(len(t)) if m0[k] > 0]
        seq = tuple(reversed(first)) + tuple(t[k] for k in keep)
        idx = tuple(leg[0][1] for leg in reversed(legs)) + tuple(m0[k] - 1 for k in keep)
        W = self.ff.group
        z = W.normal_form(seq)
        if len(z) != len(seq):
            raise AssertionError(f"J^R produced the non-reduced sequence {seq}")
        p = match_legs(seq, z)
        return (z, tuple(idx[p[k]] for k in range(len(z)))), tuple(leg[1:] for leg in legs)

    def left_adjoint(self, z: Word, idx: tuple, legs: Sequence[Label]):
        """J^{L*}(ζ_1 ⊗ ... ⊗ ζ ): list of (new legs, H_t index)."""
        out = []
        t = self.rho.t
        for s, keep, p in self.left_decomp.get(z, ()):
            seq_idx = [0] * len(z)
            for k in range(len(z)):
                seq_idx[p[k]] = idx[k]
            new_legs = []
            ok = True
            for i, (letter, leg) in enumerate(zip(s, legs)):
                if leg and leg[0][0] == letter:
                    ok = False
                    break
                new_legs.append(((letter, seq_idx[i]),) + tuple(leg))
            if not ok:
                continue
            m0 = [0] * len(t)
            for j, k in enumerate(keep):
                m0[k] = seq_idx[len(s) + j] + 1
            out.append((tuple(new_legs), tuple(m0)))
        return out


def _subsets(n: int) -> list[tuple]:
    out = []
    for mask in range(2 ** n):
        out.append(tuple(k for k in range(n) if mask >> k & 1))
    return out


@dataclass(eq=False)
class JRhoIsometries:
    rho: RhoTuple
    left: sparse.csr_matrix  # legs^{ñ_l} ⊗ H_t → legs ⊗ F
    right: sparse.csr_matrix  # H_t ⊗ legs^{ñ_r} → F ⊗ legs
    left_domain: list
    right_domain: list
    left_range: list
    right_range: list

    @staticmethod
    def _defect(J) -> float:
        P = (J.conj().T @ J).tocsr()
        D = P @ P - P
        return float(np.abs(D.data).max()) if D.nnz else 0.0

    def left_defect(self) -> float:
        return self._defect(self.left)

    def right_defect(self) -> float:
        return self._defect(self.right)


def j_rho_isometries(ff: FreeFock, rho: RhoTuple, leg_depth: int = 1) -> JRhoIsometries:
    """J^L_ρ and J^R_ρ restricted to free Fock legs of length ≤ leg_depth."""
    if leg_depth + 1 > ff.depth:
        raise InsufficientDepthError("free Fock", ff.depth, leg_depth + 1)
    maps = _RhoMaps(ff, rho)
    n_l = rho.n_l + len(rho.u_l)
    n_r = rho.n_r + len(rho.u_r)
    legs = free_labels(ff, leg_depth)
    hts = _ht_labels(ff, rho.t)

    # J^R: domain (m0, legs...) → ((z, idx), tails)
    r_dom = [(m0,) + ls for m0 in hts for ls in iproduct(legs, repeat=n_r)]
    r_rng: dict = {}
    rr, rc = [], []
    for j, (m0, *ls) in enumerate(r_dom):
        res = maps.right(m0, ls)
        if res is None:
            continue
        key = res
        rr.append(r_rng.setdefault(key, len(r_rng)))
        rc.append(j)
    right = sparse.csr_matrix((np.ones(len(rr), dtype=complex), (rr, rc)), shape=(len(r_rng), len(r_dom)))

    # J^L on its domain: (legs..., m0) with η_i = (v_i, j_i) ⊗ η̃_i
    l_dom = [ls + (m0,) for ls in iproduct(legs, repeat=n_l) for m0 in hts]
    l_rng: dict = {}
    lr, lc = [], []
    dom_index = {key: i for i, key in enumerate(l_dom)}
    W = ff.group
    t = rho.t
    for s in maps.layout.rows:
        for m0 in hts:
            keep = [k for k in range(len(t)) if m0[k] > 0]
            for ls in iproduct(legs, repeat=n_l):
                if any(not leg or leg[0][0] != a for leg, a in zip(ls, s)):
                    continue
                key = ls + (m0,)
                if key not in dom_index:
                    continue
                seq = tuple(s) + tuple(t[k] for k in keep)
                idx = tuple(leg[0][1] for leg in ls) + tuple(m0[k] - 1 for k in keep)
                z = W.normal_form(seq)
                p = match_legs(seq, z)
                out = (tuple(leg[1:] for leg in ls), (z, tuple(idx[p[k]] for k in range(len(z)))))
                lr.append(l_rng.setdefault(out, len(l_rng)))
                lc.append(dom_index[key])
    left = sparse.csr_matrix((np.ones(len(lr), dtype=complex), (lr, lc)), shape=(len(l_rng), len(l_dom)))
    return JRhoIsometries(rho, left, right, l_dom, r_dom, list(l_rng), list(r_rng))


@dataclass(frozen=True)
class DilationResult:
    rho: RhoTuple
    residual: float  # Frobenius norm of the difference on the test domain
    lhs_size: float  # Frobenius norm of the left-hand side on the test domain
    domain_size: int


@dataclass(eq=False)
class DilationChecker:
    """Compares Θ̃_d(λx)_ρ with (J^{L*} ⊗ 1)(1 ⊗ λ(x) ⊗ 1)(1 ⊗ J^R) on pure tensors.

    The domain consists of all pure basis tensors whose free Fock legs have length
    ≤ ``free_depth - 1``; outputs are compared label by label.
    """

    ff: FreeFock
    x: AlgebraicElement
    free_depth: int = 2
    fock_depth: int | None = None
    degree: int | None = None

    def __post_init__(self):
        if self.free_depth < 1:
            raise InsufficientDepthError("free Fock", self.free_depth, 1)
        self.d = _degree_of(self.x, self.degree)
        required = 2 * self.d
        if self.fock_depth is None:
            self.fock_depth = required
        if self.fock_depth < required:
            raise InsufficientDepthError("graph Fock", self.fock_depth, required)
        self.space = self.ff.graph_space(self.fock_depth)
        self.lam = self.space.lam(self.x).sparse().tocsc()
        self.labels = self.space.labels()
        self.legs = free_labels(self.ff, self.free_depth - 1)

    def _lam_column(self, z: Word, idx: tuple):
        S = self.space
        col = S.offsets[z] + (np.ravel_multi_index(idx, S.leg_shape(z)) if z else 0)
        c = self.lam.getcol(col)
        return [(self.labels[i], v) for i, v in zip(c.indices, c.data)]

    def rhs(self, maps: _RhoMaps, n_l: int, left, m0, right) -> dict:
        res = maps.right(m0, right)
        out: dict = {}
        if res is None:
            return out
        (z, idx), tails = res
        for (z2, idx2), val in self._lam_column(z, idx):
            for new_left, m1 in maps.left_adjoint(z2, idx2, left):
                key = (new_left, m1, tails)
                out[key] = out.get(key, 0) + val
        return out

    def lhs(self, rho: RhoTuple, pieces, left, m0, right) -> dict:
        out: dict = {}
        for w1, w3, T in pieces:
            # left legs: creation needs η_i not to start with the letter
            if any(leg and leg[0][0] == a for leg, a in zip(left, w1)):
                continue
            if any(not leg or leg[0][0] != c for leg, c in zip(right, w3)):
                continue
            A = T
            # middle: contract column index m0 of each middle operator
            for k in reversed(range(len(w3))):
                A = A[..., right[k][0][1]]
            # A has axes (w1 legs..., middle basis) -> (w1 legs..., out middle)
            A = np.tensordot(A, pieces_mid(self.ff, rho.t)[:, :, _ravel(self.ff, rho.t, m0)], axes=(-1, 0))
            tails = tuple(leg[1:] for leg in right)
            for J1 in np.ndindex(*A.shape[:-1]):
                row = A[J1]
                if not np.any(row):
                    continue
                new_left = tuple(((a, j),) + tuple(leg) for a, j, leg in zip(w1, J1, left))
                for mo in np.nonzero(row)[0]:
                    key = (new_left, _unravel(self.ff, rho.t, mo), tails)
                    out[key] = out.get(key, 0) + row[mo]
        return out

    def _pieces(self, rho: RhoTuple):
        W = self.ff.group
        out = []
        for w in self.x.words():
            for split in W.splittings_for_rho(w, rho):
                T = _split_tensor(self.x, w, split)
                base = len(split.w1) + len(split.w2)
                for k, c in enumerate(split.w3):
                    T = np.moveaxis(np.tensordot(T, self.ff.rows[c], axes=(base + k, 0)), -1, base + k)
                # merge middle legs into one axis, put it last
                n1, nt = len(split.w1), len(split.w2)
                shp = T.shape
                mid = prod(shp[n1:n1 + nt]) if nt else 1
                T = T.reshape(shp[:n1] + (mid,) + shp[n1 + nt:])  # (w1 legs, middle, w3 legs)
                out.append((split.w1, split.w3, T))
        return out

    def check(self, rho: RhoTuple) -> DilationResult:
        if rho.degree != self.d:
            raise ValueError("rho has the wrong degree")
        maps = _RhoMaps(self.ff, rho)
        n_l = rho.n_l + len(rho.u_l)
        n_r = rho.n_r + len(rho.u_r)
        pieces = self._pieces(rho)
        diff = 0.0
        size = 0.0
        count = 0
        for left in iproduct(self.legs, repeat=n_l):
            for m0 in _ht_labels(self.ff, rho.t):
                for right in iproduct(self.legs, repeat=n_r):
                    count += 1
                    a = self.lhs(rho, pieces, left, m0, right)
                    b = self.rhs(maps, n_l, left, m0, right)
                    for k in set(a) | set(b):
                        diff += abs(a.get(k, 0) - b.get(k, 0)) ** 2
                    size += sum(abs(v) ** 2 for v in a.values())
        return DilationResult(rho, float(np.sqrt(diff)), float(np.sqrt(size)), count)


def pieces_mid(ff: FreeFock, t: Word) -> np.ndarray:
    """Stack of middle operators as an array (basis, out, in)."""
    key = ("mid", t)
    cache = ff.__dict__.setdefault("_mid_cache", {})
    if key not in cache:
        cache[key] = np.stack(ff.middle_ops(t))
    return cache[key]


def _ravel(ff: FreeFock, t: Word, m0: tuple) -> int:
    return int(np.ravel_multi_index(m0, tuple(ff.dims[x] for x in t))) if t else 0


def _unravel(ff: FreeFock, t: Word, i: int) -> tuple:
    return tuple(int(k) for k in np.unravel_index(i, tuple(ff.dims[x] for x in t))) if t else ()


def verify_dilation(x: AlgebraicElement, rho: RhoTuple, ff: FreeFock, free_depth: int = 2,
                    fock_depth: int | None = None) -> DilationResult:
    return DilationChecker(ff, x, free_depth, fock_depth).check(rho)


# ---------------------------------------------------------------------------------
# contraction search


@dataclass(frozen=True)
class ContractionResult:
    level: int
    samples: int
    max_ratio: float
    ratios: tuple


@dataclass(eq=False)
class _LinearModel:
    """Θ̃_d and the compressed λ on the basis of 𝔸_d, for fast evaluation."""

    ff: FreeFock
    d: int

    def __post_init__(self):
        ff, d = self.ff, self.d
        self.basis = _basis_elements(ff, d)
        space = ff.graph_space(2 * d)
        small = ff.graph_space(d)
        n = small.dim
        lams = []
        self.theta = {}
        for rho in ff.group.rhos(d):
            self.theta[rho] = (rho_layout(ff, rho), pieces_mid(ff, rho.t), [])
        for w, m in self.basis:
            e = AlgebraicElement.basis_tensor(w, m, ff.cdims) if w else AlgebraicElement.scalar(1.0)
            lams.append(space.lam(e).dense()[:n, :n])
            for rho, (lay, _, lst) in self.theta.items():
                lst.append(component_coefficients(ff, e, rho, lay))
        self.lams = np.stack(lams) if lams else np.zeros((0, n, n))
        self.coeffs = {rho: (np.stack(lst) if lst else None, mid)
                       for rho, (lay, mid, lst) in self.theta.items()}
        self.coeffs = {r: v for r, v in self.coeffs.items() if v[0] is not None and np.any(v[0])}

    def ratio(self, c: np.ndarray) -> float:
        """c has shape (n, n, basis size): an n x n matrix of elements."""
        n = c.shape[0]
        lam = np.einsum("ijk,kab->iajb", c, self.lams).reshape(n * self.lams.shape[1], -1)
        den = np.linalg.norm(lam, 2)
        num = 0.0
        for rho, (C, mid) in self.coeffs.items():
            Cx = np.einsum("ijk,krsm->ijrsm", c, C)  # (n, n, rows, cols, mid)
            M = np.einsum("ijrsm,mab->irajsb", Cx, mid)
            shp = M.shape
            M = M.reshape(shp[0] * shp[1] * shp[2], -1)
            num = max(num, np.linalg.norm(M, 2))
        return float(num / den) if den > 0 else 0.0


def contraction_search(ff: FreeFock, d: int, level: int = 1, samples: int = 200, steps: int = 8,
                       seed: int = 0) -> ContractionResult:
    """Randomized hill climb for a large ratio ‖Θ̃_d(λx)‖ / ‖λ(x)‖ at amplification ``level``."""
    model = _LinearModel(ff, d)
    k = len(model.basis)
    rng = np.random.default_rng(seed)
    ratios = []
    if k == 0:
        return ContractionResult(level, 0, 0.0, ())
    for _ in range(samples):
        c = rng.standard_normal((level, level, k)) + 1j * rng.standard_normal((level, level, k))
        best = model.ratio(c)
        step = 0.5
        for _ in range(steps):
            trial = c + step * (rng.standard_normal(c.shape) + 1j * rng.standard_normal(c.shape)) * np.abs(c).mean()
            r = model.ratio(trial)
            if r > best:
                best, c = r, trial
            else:
                step *= 0.6
        ratios.append(best)
    return ContractionResult(level, samples, max(ratios), tuple(ratios))
