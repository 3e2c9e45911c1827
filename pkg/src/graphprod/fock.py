"""Truncated graph-product Fock space and the left regular representation.

The space is ⊕_{|w| ≤ D} H°_w with H°_w = H°_{w_1} ⊗ ... ⊗ H°_{w_n}, each vertex space
given in adapted coordinates (index 0 is the cyclic vector, so the centered legs have
dimension d_v - 1).  Words are in ShortLex order and multi-indices are lexicographic,
so the basis of depth D is a prefix of the basis of any larger depth.

Operators are stored block-sparse: a dict ``(row word, column word) -> dense block``.
A product of m single-letter operators is exact on columns of length ≤ D - m; the
``margin`` attribute records that number.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from math import prod
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from graphprod.coxeter import CoxeterGroup, SimpleGraph, TripleSplit, Word, group, match_legs

DEFAULT_CAP = 5000


class ResourceGuardError(ValueError):
    """Raised when a requested Fock space exceeds the configured basis-size cap."""

    def __init__(self, dim: int, cap: int):
        super().__init__(f"truncated Fock dimension {dim} exceeds the cap {cap}")
        self.dim = dim
        self.cap = cap


def permute_legs(tensor: np.ndarray, seq: Sequence[int], target: Sequence[int], lead: int = 0) -> np.ndarray:
    """Reorder tensor axes ``lead .. lead+len(seq)`` from the letter order ``seq`` to ``target``.

    Equal letters keep their relative order, which is the shuffle convention.
    """
    p = match_legs(seq, target)
    axes = list(range(tensor.ndim))
    axes[lead:lead + len(seq)] = [lead + k for k in p]
    return np.transpose(tensor, axes)


@dataclass(eq=False)
class FockSpace:
    """Orthonormal basis of the truncated Fock space with index maps."""

    graph: SimpleGraph
    dims: tuple  # Hilbert dimension of each vertex space
    depth: int
    ops: tuple | None = None  # per vertex: (k_v, d_v, d_v) operator basis of the centered algebra
    cap: int = DEFAULT_CAP
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) != self.graph.vertex_count:
            raise ValueError("one vertex dimension per vertex is required")
        if any(d < 1 for d in self.dims):
            raise ValueError("vertex dimensions must be positive")
        self.group: CoxeterGroup = group(self.graph)
        self.cdims = tuple(d - 1 for d in self.dims)
        words = self.group.enumerate_words(self.depth)
        sizes = [prod(self.cdims[x] for x in w) for w in words]
        total = sum(sizes)
        if total > self.cap:
            raise ResourceGuardError(total, self.cap)
        self.words: list[Word] = [w for w, s in zip(words, sizes) if s > 0]
        self.sizes = {w: s for w, s in zip(words, sizes) if s > 0}
        self.offsets = {}
        off = 0
        for w in self.words:
            self.offsets[w] = off
            off += self.sizes[w]
        self.dim = off

    # -- basis bookkeeping ----------------------------------------------------------
    def has(self, w: Word) -> bool:
        return w in self.sizes

    def leg_shape(self, w: Word) -> tuple:
        return tuple(self.cdims[x] for x in w)

    def block_slice(self, w: Word) -> slice:
        o = self.offsets[w]
        return slice(o, o + self.sizes[w])

    def labels(self) -> list[tuple[Word, tuple]]:
        out = []
        for w in self.words:
            out += [(w, m) for m in np.ndindex(*self.leg_shape(w))]
        return out

    def prefix_dim(self, depth: int) -> int:
        return sum(self.sizes[w] for w in self.words if len(w) <= depth)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def embed(self, w: Word, tensor) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        if self.has(w):
            v[self.block_slice(w)] = np.asarray(tensor, dtype=complex).reshape(-1)
        return v

    def component(self, vec: np.ndarray, w: Word) -> np.ndarray:
        return vec[self.block_slice(w)].reshape(self.leg_shape(w))

    def word_of_index(self, i: int) -> Word:
        for w in self.words:
            if self.offsets[w] <= i < self.offsets[w] + self.sizes[w]:
                return w
        raise IndexError(i)

    # -- algebra data -----------------------------------------------------------------
    def alg_dims(self) -> tuple:
        if self.ops is None:
            raise ValueError("this Fock space carries no vertex algebra bases")
        return tuple(o.shape[0] for o in self.ops)

    def with_depth(self, depth: int) -> "FockSpace":
        return FockSpace(self.graph, self.dims, depth, self.ops, self.cap)

    # -- single-letter moves ------------------------------------------------------------
    def _moves(self, v: int):
        """Per column word: how λ_v acts on that block, independent of the operator."""
        key = ("moves", v)
        if key in self._cache:
            return self._cache[key]
        W = self.group
        moves = []
        for x in self.words:
            if v not in W.s_left(x):
                vx = W.multiply((v,), x)
                moves.append((x, "free", vx, None))
            else:
                p = x.index(v)
                rest = x[:p] + x[p + 1:]
                y = W.normal_form(rest)
                moves.append((x, "bound", y, p))
        self._cache[key] = moves
        return moves

    def vertex_parts(self, v: int, a: np.ndarray) -> dict[str, "FockOperator"]:
        """The scalar, creation, diagonal and annihilation parts of λ_v(a)."""
        a = np.asarray(a, dtype=complex)
        c = self.cdims[v]
        col, row, mid = a[1:, 0], a[0, 1:], a[1:, 1:]
        parts = {k: {} for k in ("scalar", "cre", "dia", "ann")}
        for x, kind, y, p in self._moves(v):
            shape = self.leg_shape(x)
            N = self.sizes[x]
            eye = np.eye(N, dtype=complex).reshape(shape + (N,))
            if kind == "free":
                if a[0, 0] != 0:
                    parts["scalar"][(x, x)] = a[0, 0] * np.eye(N, dtype=complex)
                if c and self.has(y):
                    t = np.multiply.outer(col, eye)  # legs (v,)+x, then column
                    t = permute_legs(t, (v,) + x, y)
                    parts["cre"][(y, x)] = t.reshape(self.sizes[y], N)
            else:
                t = np.moveaxis(np.tensordot(mid, eye, axes=(1, p)), 0, p)
                parts["dia"][(x, x)] = t.reshape(N, N)
                if self.has(y):
                    t = np.tensordot(row, eye, axes=(0, p))
                    t = permute_legs(t, x[:p] + x[p + 1:], y)
                    parts["ann"][(y, x)] = t.reshape(self.sizes[y], N)
        return {k: FockOperator(self, b, margin=1) for k, b in parts.items()}

    def lambda_v(self, v: int, a: np.ndarray) -> "FockOperator":
        parts = self.vertex_parts(v, a)
        out = parts["scalar"]
        for k in ("cre", "dia", "ann"):
            out = out + parts[k]
        out.margin = 1
        return out

    def basis_part(self, v: int, j: int, kind: str) -> "FockOperator":
        """Cached part ``kind`` ('full', 'cre', 'dia', 'ann') of λ_v(ops_v[j])."""
        key = ("part", v, j, kind)
        if key not in self._cache:
            a = self.ops[v][j]
            if kind == "full":
                self._cache[key] = self.lambda_v(v, a)
            else:
                self._cache[key] = self.vertex_parts(v, a)[kind]
        return self._cache[key]

    # -- operators from algebraic elements ---------------------------------------------
    def _expand(self, letters: Sequence[int], kinds: Sequence[str], coeff: np.ndarray) -> "FockOperator":
        """Σ_m coeff[m] Π_k part_{kinds[k]}(letters[k], ops[m_k]), expanded left to right."""
        if not letters:
            return FockOperator.identity(self) * complex(coeff)
        v, kind = letters[0], kinds[0]
        total = FockOperator.zero(self)
        for j in range(coeff.shape[0]):
            sub = coeff[j]
            if not np.any(sub):
                continue
            rest = self._expand(letters[1:], kinds[1:], sub)
            total = total + self.basis_part(v, j, kind) @ rest
        total.margin = len(letters)
        return total

    def lam(self, x: "AlgebraicElement") -> "FockOperator":
        """λ(x) on the truncated space."""
        total = FockOperator.zero(self)
        for w, coeff in x.terms.items():
            total = total + self._expand(w, ["full"] * len(w), coeff)
        total.margin = x.max_length
        return total

    def lambda_triple(self, omega: TripleSplit, x: "AlgebraicElement") -> "FockOperator":
        """λ_ω(x) = λ_cre(a_1) λ_dia(a_2) λ_ann(a_3); zero unless x lives on w1·w2·w3."""
        w1, w2, w3 = omega
        words = x.words()
        if len(words) > 1:
            raise ValueError("lambda_triple needs an element supported on a single word")
        zero = FockOperator.zero(self, margin=len(w1) + len(w2) + len(w3))
        if not words:
            return zero
        w = words[0]
        seq = tuple(w1) + tuple(w2) + tuple(w3)
        if self.group.normal_form(seq) != w or len(seq) != len(w):
            return zero
        coeff = x.terms[w]
        p = match_legs(seq, w)
        coeff_seq = np.transpose(coeff, np.argsort(p))
        kinds = ["cre"] * len(w1) + ["dia"] * len(w2) + ["ann"] * len(w3)
        out = self._expand(seq, kinds, coeff_seq)
        out.margin = len(seq)
        return out

    def lambda_parts(self, x: "AlgebraicElement") -> tuple["FockOperator", "FockOperator", "FockOperator"]:
        words = x.words()
        if len(words) != 1:
            raise ValueError("lambda_parts needs an element supported on a single word")
        w = words[0]
        return (
            self.lambda_triple(TripleSplit((), (), w), x),
            self.lambda_triple(TripleSplit((), w, ()), x),
            self.lambda_triple(TripleSplit(w, (), ()), x),
        )

    def element_from_vector(self, vec: np.ndarray) -> "AlgebraicElement":
        """The algebraic element whose GNS vector is ``vec`` (GNS-type Fock spaces only)."""
        if self.ops is None or tuple(o.shape[0] for o in self.ops) != self.cdims:
            raise ValueError("GNS vectors identify elements only on a GNS Fock space")
        terms = {}
        for w in self.words:
            t = self.component(vec, w)
            if np.any(np.abs(t) > 0):
                terms[w] = np.array(t)
        return AlgebraicElement(terms)

    # -- projections ---------------------------------------------------------------------
    def word_projection(self, words: Iterable[Word]) -> "FockOperator":
        blocks = {}
        for w in set(words):
            if self.has(w):
                blocks[(w, w)] = np.eye(self.sizes[w], dtype=complex)
        return FockOperator(self, blocks)


def build_fock(graph: SimpleGraph, algebras: Sequence, depth: int, cap: int = DEFAULT_CAP) -> FockSpace:
    """Fock space over vertex algebras (anything with ``dim`` and ``basis``) or plain dims."""
    if all(isinstance(a, (int, np.integer)) for a in algebras):
        return FockSpace(graph, tuple(algebras), depth, None, cap)
    ops = tuple(np.asarray(a.basis[1:]) for a in algebras)
    return FockSpace(graph, tuple(a.dim for a in algebras), depth, ops, cap)


# -------------------------------------------------------------------------------------
# operators


@dataclass(eq=False)
class FockOperator:
    space: FockSpace
    blocks: dict
    margin: int = 0

    @classmethod
    def zero(cls, space, margin=0):
        return cls(space, {}, margin)

    @classmethod
    def identity(cls, space):
        return cls(space, {(w, w): np.eye(space.sizes[w], dtype=complex) for w in space.words})

    @classmethod
    def from_dense(cls, space, M, tol=0.0):
        blocks = {}
        for r in space.words:
            for c in space.words:
                b = M[space.block_slice(r), space.block_slice(c)]
                if np.any(np.abs(b) > tol):
                    blocks[(r, c)] = np.array(b, dtype=complex)
        return cls(space, blocks)

    def copy(self):
        return FockOperator(self.space, dict(self.blocks), self.margin)

    def __add__(self, other):
        out = dict(self.blocks)
        for k, b in other.blocks.items():
            out[k] = out[k] + b if k in out else b
        return FockOperator(self.space, out, max(self.margin, other.margin))

    def __neg__(self):
        return FockOperator(self.space, {k: -b for k, b in self.blocks.items()}, self.margin)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if c == 0:
            return FockOperator(self.space, {}, self.margin)
        return FockOperator(self.space, {k: c * b for k, b in self.blocks.items()}, self.margin)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            return self.apply(other)
        by_row = {}
        for (j, k), b in other.blocks.items():
            by_row.setdefault(j, []).append((k, b))
        out = {}
        for (i, j), a in self.blocks.items():
            for k, b in by_row.get(j, ()):
                p = a @ b
                if (i, k) in out:
                    out[(i, k)] += p
                else:
                    out[(i, k)] = p
        return FockOperator(self.space, out, self.margin + other.margin)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        sp = self.space
        out = np.zeros(sp.dim, dtype=complex)
        for (i, j), b in self.blocks.items():
            out[sp.block_slice(i)] += b @ vec[sp.block_slice(j)]
        return out

    @property
    def H(self):
        return FockOperator(self.space, {(j, i): b.conj().T for (i, j), b in self.blocks.items()}, self.margin)

    def dense(self) -> np.ndarray:
        sp = self.space
        M = np.zeros((sp.dim, sp.dim), dtype=complex)
        for (i, j), b in self.blocks.items():
            M[sp.block_slice(i), sp.block_slice(j)] += b
        return M

    def sparse(self):
        sp = self.space
        rows, cols, data = [], [], []
        for (i, j), b in self.blocks.items():
            r, c = np.nonzero(b)
            rows.append(r + sp.offsets[i])
            cols.append(c + sp.offsets[j])
            data.append(b[r, c])
        if not rows:
            return sparse.csr_matrix((sp.dim, sp.dim), dtype=complex)
        return sparse.csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(sp.dim, sp.dim)
        )

    def block(self, row: Word, col: Word) -> np.ndarray:
        sp = self.space
        b = self.blocks.get((row, col))
        if b is None:
            return np.zeros((sp.sizes[row], sp.sizes[col]), dtype=complex)
        return b

    def columns_upto(self, length: int) -> "FockOperator":
        """Keep only columns whose word has length ≤ length."""
        return FockOperator(self.space, {k: b for k, b in self.blocks.items() if len(k[1]) <= length}, self.margin)

    def safe(self, margin: int | None = None) -> "FockOperator":
        m = self.margin if margin is None else margin
        return self.columns_upto(self.space.depth - m)

    def max_abs(self) -> float:
        return max((float(np.abs(b).max()) for b in self.blocks.values() if b.size), default=0.0)

    def norm(self) -> float:
        """Operator norm of the truncated matrix."""
        if not self.blocks:
            return 0.0
        return float(np.linalg.norm(self.dense(), 2))

    def restrict(self, depth: int) -> "FockOperator":
        """Compression to words of length ≤ depth, as an operator on the smaller space."""
        sub = self.space.with_depth(depth)
        return FockOperator(
            sub, {k: b for k, b in self.blocks.items() if len(k[0]) <= depth and len(k[1]) <= depth}, self.margin
        )


def safe_difference(a: FockOperator, b: FockOperator, margin: int | None = None) -> float:
    """Largest entry of a - b over columns of length ≤ D - margin."""
    m = max(a.margin, b.margin) if margin is None else margin
    return (a - b).columns_upto(a.space.depth - m).max_abs()


def vacuum_state(X: FockOperator) -> complex:
    b = X.blocks.get(((), ()))
    return complex(b[0, 0]) if b is not None else 0.0


# -------------------------------------------------------------------------------------
# algebraic elements


@dataclass
class AlgebraicElement:
    """Finite sum of coefficient tensors on words.

    ``terms[w]`` has one axis per letter of w, indexed by the centered algebra basis of
    that vertex; ``terms[()]`` is a 0-d array holding the multiple of the identity.  On a
    GNS Fock space the coefficient tensor of w is exactly the component of λ(x)Ω in H°_w.
    """

    terms: dict = field(default_factory=dict)

    @classmethod
    def scalar(cls, z: complex) -> "AlgebraicElement":
        return cls({(): np.array(z, dtype=complex)})

    @classmethod
    def pure(cls, word: Word, hats: Sequence[np.ndarray]) -> "AlgebraicElement":
        """Pure tensor from the centered GNS coordinates of each leg."""
        if len(word) != len(hats):
            raise ValueError("one leg per letter is required")
        t = np.array(1.0 + 0j)
        for h in hats:
            t = np.multiply.outer(t, np.asarray(h, dtype=complex))
        return cls({tuple(word): t})

    @classmethod
    def from_elements(cls, word: Word, elements: Sequence[np.ndarray]) -> "AlgebraicElement":
        """Pure tensor from centered GNS matrices a_i (their first columns minus the state)."""
        hats = []
        for a in elements:
            if abs(a[0, 0]) > 1e-12:
                raise ValueError("tensor legs must be centered elements")
            hats.append(a[1:, 0])
        return cls.pure(word, hats)

    @classmethod
    def basis_tensor(cls, word: Word, index: Sequence[int], dims: Sequence[int]) -> "AlgebraicElement":
        t = np.zeros(tuple(dims[x] for x in word), dtype=complex)
        t[tuple(index)] = 1.0
        return cls({tuple(word): t})

    @classmethod
    def random(cls, rng, words: Iterable[Word], dims: Sequence[int], scalar: bool = True) -> "AlgebraicElement":
        terms = {}
        for w in words:
            shape = tuple(dims[x] for x in w)
            terms[tuple(w)] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if scalar and () not in terms:
            terms[()] = np.array(rng.standard_normal() + 0j)
        return cls(terms)

    def words(self) -> list[Word]:
        return sorted(w for w, t in self.terms.items() if np.any(t != 0))

    @property
    def max_length(self) -> int:
        return max((len(w) for w in self.words()), default=0)

    def homogeneous(self, d: int) -> "AlgebraicElement":
        return AlgebraicElement({w: t for w, t in self.terms.items() if len(w) == d})

    def degrees(self) -> set[int]:
        return {len(w) for w in self.words()}

    def __add__(self, other):
        out = {w: np.array(t) for w, t in self.terms.items()}
        for w, t in other.terms.items():
            out[w] = out[w] + t if w in out else np.array(t)
        return AlgebraicElement(out)

    def __mul__(self, c):
        return AlgebraicElement({w: c * t for w, t in self.terms.items()})

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1) * other

    def map_legs(self, maps: Sequence[np.ndarray]) -> "AlgebraicElement":
        """Apply a linear map on centered coordinates to every leg at each vertex."""
        out = {}
        for w, t in self.terms.items():
            for k, x in enumerate(w):
                t = np.moveaxis(np.tensordot(maps[x], t, axes=(1, k)), 0, k)
            out[w] = t
        return AlgebraicElement(out)

    def vector(self, space: FockSpace) -> np.ndarray:
        v = np.zeros(space.dim, dtype=complex)
        for w, t in self.terms.items():
            if space.has(w):
                v[space.block_slice(w)] += t.reshape(-1)
            elif w == () and space.dim:
                v[0] += complex(t)
        return v


def shuffle(g: SimpleGraph, vs: Sequence[Word], tensors: Sequence[np.ndarray]) -> tuple[Word, np.ndarray]:
    """The shuffle map on pure tensors: legs in concatenated order are moved to the
    normal-form order of the product, equal letters keeping their relative order."""
    W = group(g)
    seq = tuple(x for v in vs for x in v)
    w = W.normal_form(seq)
    if len(w) != len(seq):
        raise ValueError(f"product of {list(vs)} is not reduced")
    t = np.array(1.0 + 0j)
    for v, x in zip(vs, tensors):
        x = np.asarray(x, dtype=complex)
        if x.ndim != len(v):
            raise ValueError("tensor rank must match word length")
        t = np.multiply.outer(t, x)
    return w, permute_legs(t, seq, w)


def clique_unshuffle(space: FockSpace, t: Word) -> np.ndarray:
    """Unitary H_t = ⊗ H_{t_i} → ⊕_{r ⊆ t} H°_r ⊆ F, as a (F dim) x (Π d) matrix.

    A full basis vector drops its legs sitting on the cyclic vector; the remaining
    letters form the sub-clique r.
    """
    W = space.group
    if not W.is_clique(t):
        raise ValueError(f"{t} is not a clique word")
    if len(t) > space.depth:
        raise ValueError("depth too small for this clique")
    full = tuple(space.dims[x] for x in t)
    U = np.zeros((space.dim, prod(full)), dtype=complex)
    for col, m in enumerate(np.ndindex(*full)):
        keep = [k for k in range(len(t)) if m[k] > 0]
        r = tuple(t[k] for k in keep)
        if not space.has(r):
            continue
        sub = tuple(m[k] - 1 for k in keep)
        idx = space.offsets[r] + (np.ravel_multi_index(sub, space.leg_shape(r)) if r else 0)
        U[idx, col] = 1.0
    return U


# -------------------------------------------------------------------------------------
# subspaces


def _check_suffix(W, u, uL):
    if len(W.multiply(u, W.inverse(uL))) + len(uL) != len(u):
        raise ValueError(f"{u} does not end with {uL}")


def _check_prefix(W, u, uR):
    if len(W.multiply(W.inverse(uR), u)) + len(uR) != len(u):
        raise ValueError(f"{u} does not start with {uR}")


def subspace_words(space: FockSpace, kind: str, u: Word, aux: Word | None = None, n: int | None = None) -> set[Word]:
    """Words spanning the named subspaces, truncated at the space depth.

    kinds: 'HL' (H^L(u) or H^L(u, aux)), 'HR' (H^R(u, aux)), 'FL', 'FR' (with optional n),
    'FM' (needs n).
    """
    W = space.group
    D = space.depth
    words = W.enumerate_words(D)
    if kind == "HL" and aux is None:
        return {w for w in words if W.in_left(w, u)}
    if kind in ("HL", "FL"):
        _check_suffix(W, u, aux)
        ws = W.word_sets(u, min(n or 0, D), D)
        src = ws.left if kind == "HL" else (ws.left_tilde if n is None else ws.left_tilde_n)
        out = {W.multiply(aux, w) for w in src}
    elif kind in ("HR", "FR"):
        _check_prefix(W, u, aux)
        ws = W.word_sets(u, min(n or 0, D), D)
        src = ws.right if kind == "HR" else (ws.right_tilde if n is None else ws.right_tilde_n)
        out = {W.multiply(w, aux) for w in src}
    elif kind == "FM":
        if n is None:
            raise ValueError("the middle subspace needs n")
        out = set()
        if n <= D:
            left = [w for w in W.enumerate_words(D) if W.in_left(w, u)]
            for w1 in W.right_tilde_n(u, n):
                for w2 in left:
                    if len(w1) + len(u) + len(w2) > D:
                        continue
                    out.add(W.multiply(w1, u, w2))
    else:
        raise ValueError(f"unknown subspace kind {kind!r}")
    return {w for w in out if len(w) <= D}


def subspaces(space: FockSpace, kind: str, u: Word, aux: Word | None = None, n: int | None = None) -> FockOperator:
    return space.word_projection(subspace_words(space, kind, u, aux, n))
