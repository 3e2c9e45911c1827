"""Finite-dimensional vertex algebras with faithful states and maps between them.

An algebra element is stored as its GNS matrix in an *adapted* orthonormal basis of
the GNS space whose first vector is the cyclic vector.  In these coordinates

* the state is ``a[0, 0]``,
* the GNS vector is the first column ``a[:, 0]``,
* the centered space is spanned by the remaining basis vectors.

The canonical algebra basis ``B_j`` is the unique element with GNS vector ``e_j``, so
``B_0 = 1``.  Linear maps act on GNS vectors through a square matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import linalg as sla

PSD_TOL = 1e-9
ID_TOL = 1e-10


def householder_frame(xi: np.ndarray) -> np.ndarray:
    """Unitary whose first column is the unit vector ``xi``."""
    xi = np.asarray(xi, dtype=complex)
    d = xi.shape[0]
    e0 = np.zeros(d, dtype=complex)
    e0[0] = 1.0
    phase = xi[0] / abs(xi[0]) if abs(xi[0]) > 1e-300 else 1.0
    # reflect e0 onto xi / phase, then restore the phase on the first column
    target = xi / phase
    v = e0 - target
    nv = np.linalg.norm(v)
    if nv < 1e-14:
        H = np.eye(d, dtype=complex)
    else:
        v = v / nv
        H = np.eye(d, dtype=complex) - 2.0 * np.outer(v, v.conj())
    H[:, 0] *= phase
    return H


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(rho)
    return (U * np.sqrt(np.clip(w, 0, None))) @ U.conj().T


@dataclass(frozen=True)
class GNSData:
    """GNS triple in adapted coordinates; ``frame`` maps adapted to natural coordinates."""

    dim: int
    frame: np.ndarray
    rep: Callable[[Sequence[np.ndarray]], np.ndarray]

    @property
    def xi(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    @property
    def centered_basis(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)[:, 1:]


@dataclass(frozen=True, eq=False)
class VertexAlgebra:
    """A finite-dimensional C*-algebra with a faithful state, given concretely.

    Built either from matrix blocks with per-block densities (``from_blocks``) or from a
    spanning set of operators with a cyclic separating vector (``from_operators``).
    """

    basis: np.ndarray  # (d, d, d): basis[j] is B_j in adapted coordinates
    name: str = ""
    blocks: tuple | None = None
    densities: tuple | None = None
    frame: np.ndarray | None = field(default=None, repr=False)

    # -- constructors -------------------------------------------------------------
    @classmethod
    def from_blocks(cls, blocks: Sequence[int], densities: Sequence[np.ndarray], name: str = ""):
        blocks = tuple(int(n) for n in blocks)
        if not blocks or any(n < 1 for n in blocks):
            raise ValueError("block dimensions must be positive")
        if len(densities) != len(blocks):
            raise ValueError("one density per block is required")
        dens = []
        for n, rho in zip(blocks, densities):
            rho = np.atleast_2d(np.asarray(rho, dtype=complex))
            if rho.shape != (n, n):
                raise ValueError(f"density of shape {rho.shape} for a block of size {n}")
            if not np.allclose(rho, rho.conj().T, atol=1e-12):
                raise ValueError("density matrices must be Hermitian")
            if np.linalg.eigvalsh(rho).min() <= 1e-12:
                raise ValueError("state is not faithful: a density matrix is rank deficient")
            dens.append(rho)
        total = sum(np.trace(r).real for r in dens)
        if abs(total - 1) > 1e-10:
            raise ValueError(f"state weights sum to {total}, not 1")
        d = sum(n * n for n in blocks)
        xi = np.concatenate([_sqrtm_psd(r).reshape(-1) for r in dens])
        Q = householder_frame(xi)
        basis = np.empty((d, d, d), dtype=complex)
        offs = np.cumsum((0,) + tuple(n * n for n in blocks))
        for j in range(d):
            X = Q[:, j]
            parts = []
            for i, (n, r) in enumerate(zip(blocks, dens)):
                Xi = X[offs[i]:offs[i + 1]].reshape(n, n)
                parts.append(Xi @ np.linalg.inv(_sqrtm_psd(r)))
            basis[j] = Q.conj().T @ _natural_rep(blocks, parts) @ Q
        return cls(basis, name, blocks, tuple(dens), Q)

    @classmethod
    def from_operators(cls, ops: Sequence[np.ndarray], xi: np.ndarray, name: str = ""):
        """Algebra spanned by ``ops`` (closed under products) with cyclic vector ``xi``."""
        ops = np.asarray(ops, dtype=complex)
        d = ops.shape[1]
        if ops.shape[0] != d:
            raise ValueError("need exactly dim(H) spanning operators")
        xi = np.asarray(xi, dtype=complex)
        xi = xi / np.linalg.norm(xi)
        Q = householder_frame(xi)
        adapted = np.einsum("ab,jbc,cd->jad", Q.conj().T, ops, Q)
        cols = adapted[:, :, 0].T  # column j = GNS vector of ops[j]
        if np.linalg.matrix_rank(cols, tol=1e-10) < d:
            raise ValueError("vector is not cyclic for the operators")
        coef = np.linalg.inv(cols)
        basis = np.einsum("jab,jk->kab", adapted, coef)
        return cls(basis, name, None, None, Q)

    # -- presets ------------------------------------------------------------------
    @classmethod
    def c2(cls, p: float = 0.5) -> "VertexAlgebra":
        return cls.cn([p, 1 - p])

    @classmethod
    def cn(cls, weights: Sequence[float]) -> "VertexAlgebra":
        weights = [float(x) for x in weights]
        return cls.from_blocks([1] * len(weights), [np.array([[w]]) for w in weights], f"C{len(weights)}")

    @classmethod
    def matrix(cls, n: int, eigenvalues: Sequence[float] | None = None) -> "VertexAlgebra":
        """M_n with a diagonal faithful density (normalized trace by default)."""
        ev = np.full(n, 1.0 / n) if eigenvalues is None else np.asarray(eigenvalues, dtype=float)
        return cls.from_blocks([n], [np.diag(ev)], f"M{n}")

    # -- basic structure ----------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def centered_dim(self) -> int:
        return self.dim - 1

    @cached_property
    def gns(self) -> GNSData:
        return gns(self)

    def one(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def state(self, a: np.ndarray) -> complex:
        return complex(a[0, 0])

    def hat(self, a: np.ndarray) -> np.ndarray:
        return np.array(a[:, 0])

    def from_hat(self, vec: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(vec, dtype=complex), self.basis, axes=(0, 0))

    def center(self, a: np.ndarray) -> np.ndarray:
        return a - a[0, 0] * self.one()

    def is_centered(self, a: np.ndarray, tol: float = 1e-12) -> bool:
        return abs(a[0, 0]) <= tol

    def element(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        """GNS matrix of the element with the given blocks."""
        self._need_blocks()
        return self.frame.conj().T @ _natural_rep(self.blocks, parts) @ self.frame

    def to_blocks(self, a: np.ndarray) -> list[np.ndarray]:
        self._need_blocks()
        nat = self.frame @ a @ self.frame.conj().T
        out, off = [], 0
        for n in self.blocks:
            sl = nat[off:off + n * n, off:off + n * n]
            out.append(np.array(sl[::n, ::n]))
            off += n * n
        return out

    def random_element(self, rng: np.random.Generator, centered: bool = False) -> np.ndarray:
        v = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        if centered:
            v[0] = 0
        return self.from_hat(v)

    def random_unitary(self, rng: np.random.Generator) -> np.ndarray:
        self._need_blocks()
        return self.element([_haar_unitary(n, rng) for n in self.blocks])

    def structure_constants(self) -> np.ndarray:
        """c[i, j, k] with B_i B_j = sum_k c[i, j, k] B_k."""
        return np.einsum("ikj->ijk", self.basis)

    def opposite_gram(self) -> np.ndarray:
        """G[k, j] = φ(B_j B_k*), the Gram matrix of the opposite-algebra GNS space."""
        prods = np.einsum("jab,kcb->kjac", self.basis, self.basis.conj())
        return prods[:, :, 0, 0]

    def _need_blocks(self):
        if self.blocks is None:
            raise ValueError(f"algebra {self.name!r} has no block description")


def _natural_rep(blocks, parts) -> np.ndarray:
    mats = []
    for n, a in zip(blocks, parts):
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        if a.shape != (n, n):
            raise ValueError(f"block of shape {a.shape} where {n}x{n} expected")
        mats.append(np.kron(a, np.eye(n)))
    return sla.block_diag(*mats)


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def gns(alg: VertexAlgebra) -> GNSData:
    """GNS data; the representation maps blocks to adapted GNS matrices."""
    frame = alg.frame if alg.frame is not None else np.eye(alg.dim, dtype=complex)
    return GNSData(alg.dim, frame, alg.element)


def center(a: np.ndarray, alg: VertexAlgebra) -> np.ndarray:
    return alg.center(a)


# ---------------------------------------------------------------------------------
# linear maps


@dataclass(frozen=True, eq=False)
class CpMap:
    """Linear map between vertex algebras given by its matrix on GNS vectors."""

    source: VertexAlgebra
    target: VertexAlgebra
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        if self.matrix.shape != (self.target.dim, self.source.dim):
            raise ValueError("map matrix has the wrong shape")

    # constructors
    @classmethod
    def from_function(cls, source, target, f, name=""):
        cols = [target.hat(f(source.basis[j])) for j in range(source.dim)]
        return cls(source, target, np.array(cols, dtype=complex).T, name)

    @classmethod
    def from_block_function(cls, source, target, f, name=""):
        """Map given on block form: ``f(list of source blocks) -> list of target blocks``."""
        return cls.from_function(source, target, lambda a: target.element(f(source.to_blocks(a))), name)

    @classmethod
    def identity(cls, alg):
        return cls(alg, alg, np.eye(alg.dim, dtype=complex), "identity")

    @classmethod
    def radial(cls, alg, r: float):
        """U_r(a) = r a + (1 - r) φ(a) 1."""
        M = r * np.eye(alg.dim, dtype=complex)
        M[0, 0] = 1.0
        return cls(alg, alg, M, f"U_{r}")

    @classmethod
    def state_map(cls, alg):
        M = np.zeros((alg.dim, alg.dim), dtype=complex)
        M[0, 0] = 1.0
        return cls(alg, alg, M, "state")

    @classmethod
    def scaled(cls, alg, c: complex):
        return cls(alg, alg, c * np.eye(alg.dim, dtype=complex), f"scale_{c}")

    @classmethod
    def from_kraus(cls, source, target, kraus: Sequence[Sequence[np.ndarray]], name=""):
        """T(a) = ⊕_l Σ_i Σ_k K a_i K*, with ``kraus[l][i]`` a list of m_l x n_i matrices."""

        def f(parts):
            out = []
            for l, m in enumerate(target.blocks):
                acc = np.zeros((m, m), dtype=complex)
                for i, a in enumerate(parts):
                    for K in kraus[l][i]:
                        acc += K @ a @ K.conj().T
                out.append(acc)
            return out

        return cls.from_block_function(source, target, f, name)

    @classmethod
    def random_ucp(cls, alg, rng: np.random.Generator, terms: int = 2, state_weight: float = 0.0):
        """Random state-preserving u.c.p. map: a convex mix of conjugations by unitaries
        commuting with the state densities, optionally mixed with the state map."""
        alg._need_blocks()
        weights = rng.dirichlet(np.ones(terms)) * (1 - state_weight)
        M = state_weight * cls.state_map(alg).matrix
        for w in weights:
            us = []
            for n, rho in zip(alg.blocks, alg.densities):
                us.append(_centralizer_unitary(rho, rng))
            U = alg.element(us)
            M = M + w * cls.from_function(alg, alg, lambda a, U=U: U @ a @ U.conj().T).matrix
        return cls(alg, alg, M, "random_ucp")

    # evaluation
    def __call__(self, a: np.ndarray) -> np.ndarray:
        return self.target.from_hat(self.matrix @ self.source.hat(a))

    def compose(self, other: "CpMap") -> "CpMap":
        """self ∘ other."""
        return CpMap(other.source, self.target, self.matrix @ other.matrix)

    def __sub__(self, other: "CpMap") -> "CpMap":
        return CpMap(self.source, self.target, self.matrix - other.matrix)

    def __add__(self, other: "CpMap") -> "CpMap":
        return CpMap(self.source, self.target, self.matrix + other.matrix)

    def __rmul__(self, c) -> "CpMap":
        return CpMap(self.source, self.target, c * self.matrix)

    def is_unital(self, tol: float = ID_TOL) -> bool:
        e0 = np.zeros(self.target.dim)
        e0[0] = 1
        return np.linalg.norm(self.matrix[:, 0] - e0) <= tol

    def is_state_preserving(self, tol: float = ID_TOL) -> bool:
        e0 = np.zeros(self.source.dim)
        e0[0] = 1
        return np.linalg.norm(self.matrix[0, :] - e0) <= tol

    def block_tensor(self) -> list[list[np.ndarray]]:
        """``t[l][i]`` has shape (m, m, n, n): T(E_ab in block i) restricted to block l."""
        src, tgt = self.source, self.target
        src._need_blocks()
        tgt._need_blocks()
        out = [[None] * len(src.blocks) for _ in tgt.blocks]
        for i, n in enumerate(src.blocks):
            imgs = []
            for a in range(n):
                for b in range(n):
                    parts = [np.zeros((k, k), dtype=complex) for k in src.blocks]
                    parts[i][a, b] = 1.0
                    imgs.append(tgt.to_blocks(self(src.element(parts))))
            for l, m in enumerate(tgt.blocks):
                arr = np.array([im[l] for im in imgs]).reshape(n, n, m, m)
                out[l][i] = arr.transpose(2, 3, 0, 1)
        return out

    def apply_blocks(self, parts: Sequence[np.ndarray]) -> list[np.ndarray]:
        return self.target.to_blocks(self(self.source.element(parts)))


def _centralizer_unitary(rho: np.ndarray, rng) -> np.ndarray:
    """Random unitary commuting with the density ``rho``."""
    w, V = np.linalg.eigh(rho)
    U = np.zeros_like(rho, dtype=complex)
    groups: list[list[int]] = []
    for k in range(len(w)):
        if groups and abs(w[k] - w[groups[-1][0]]) < 1e-10:
            groups[-1].append(k)
        else:
            groups.append([k])
    for g in groups:
        U[np.ix_(g, g)] = _haar_unitary(len(g), rng)
    return V @ U @ V.conj().T


# ---------------------------------------------------------------------------------
# complete positivity


def choi(T: CpMap) -> list[np.ndarray]:
    """Choi matrices Σ_ab E_ab ⊗ T(E_ab), one per source block, target in block form."""
    out = []
    tens = T.block_tensor()
    for i, n in enumerate(T.source.blocks):
        ms = [t[i] for t in tens]
        # full target as a block-diagonal matrix
        M = sum(m.shape[0] for m in ms)
        C = np.zeros((n, M, n, M), dtype=complex)
        off = 0
        for arr in ms:
            m = arr.shape[0]
            C[:, off:off + m, :, off:off + m] = arr.transpose(2, 0, 3, 1)
            off += m
        out.append(C.reshape(n * M, n * M))
    return out


def min_choi_eigenvalue(T: CpMap) -> float:
    return min(np.linalg.eigvalsh((C + C.conj().T) / 2).min() for C in choi(T))


def is_cp(T: CpMap, tol: float = PSD_TOL) -> bool:
    return min_choi_eigenvalue(T) >= -tol


def is_ucp(T: CpMap, tol: float = PSD_TOL) -> bool:
    return is_cp(T, tol) and T.is_unital(max(tol, ID_TOL))


class NotCompletelyPositive(ValueError):
    def __init__(self, eigenvalue: float):
        super().__init__(f"map is not completely positive: Choi eigenvalue {eigenvalue:.3e}")
        self.eigenvalue = eigenvalue


def kraus(T: CpMap, tol: float = PSD_TOL) -> list[list[list[np.ndarray]]]:
    """Kraus operators ``k[l][i]`` (m_l x n_i) from the per-block Choi matrices."""
    tens = T.block_tensor()
    out = [[[] for _ in T.source.blocks] for _ in T.target.blocks]
    worst = 0.0
    for l, m in enumerate(T.target.blocks):
        for i, n in enumerate(T.source.blocks):
            C = tens[l][i].transpose(2, 0, 3, 1).reshape(n * m, n * m)
            C = (C + C.conj().T) / 2
            w, U = np.linalg.eigh(C)
            worst = min(worst, w.min())
            for k in range(len(w)):
                if w[k] > tol:
                    out[l][i].append(np.sqrt(w[k]) * U[:, k].reshape(n, m).T)
    if worst < -tol:
        raise NotCompletelyPositive(worst)
    return out


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    """θ(a) = V* π(a) V with π(a) = ⊕_i a_i ⊗ 1, all in adapted coordinates.

    The dilation space carries an orthonormal basis whose first vector is V ξ when the
    map is state-preserving, so it can serve directly as a vertex Hilbert space.
    """

    dim: int
    isometry: np.ndarray  # (dim, target GNS dim)
    rep_matrix: Callable[[np.ndarray], np.ndarray]
    source: VertexAlgebra
    target: VertexAlgebra

    def rep(self, a: np.ndarray) -> np.ndarray:
        return self.rep_matrix(a)

    def reconstruct(self, a: np.ndarray) -> np.ndarray:
        V = self.isometry
        return V.conj().T @ self.rep(a) @ V


def stinespring(T: CpMap, tol: float = PSD_TOL) -> StinespringDilation:
    src, tgt = T.source, T.target
    if not T.is_unital():
        raise ValueError("Stinespring dilation requires a unital map")
    ks = kraus(T, tol)
    # T(a) on the target GNS space is ⊕_l (T(a)_l ⊗ 1_{m_l}); dilate each target block
    # by the intrinsic Kraus operators and carry the multiplicity along.
    layout = []  # (source block i, size, kraus count)
    for i, n in enumerate(src.blocks):
        r = sum(len(ks[l][i]) for l in range(len(tgt.blocks)))
        layout.append((i, n, r))
    # natural target coordinates: ⊕_l C^{m_l} ⊗ C^{m_l}
    d_t = tgt.dim
    V_nat = []
    for i, n, r in layout:
        # rows indexed by (j in n, kraus k, multiplicity index s)
        blocks_i = []
        for l, m in enumerate(tgt.blocks):
            for K in ks[l][i]:
                blocks_i.append((l, K))
        mult = max(tgt.blocks)  # pad multiplicity so every source block has one layout
        Vi = np.zeros((n, len(blocks_i), mult, d_t), dtype=complex)
        off_t = np.cumsum((0,) + tuple(m * m for m in tgt.blocks))
        for k, (l, K) in enumerate(blocks_i):
            m = tgt.blocks[l]
            for s in range(m):
                # target natural basis vector (alpha, s) in block l has index off + alpha*m + s
                idx = off_t[l] + np.arange(m) * m + s
                Vi[:, k, s, idx] = K.conj().T
        V_nat.append(Vi.reshape(n, -1, d_t))
    reps = [(n, Vi.shape[1]) for (i, n, r), Vi in zip(layout, V_nat)]
    V = np.concatenate([Vi.reshape(-1, d_t) for Vi in V_nat], axis=0)
    V = V @ tgt.frame
    # padding rows are zero; restricting to the π-invariant span of the range removes them
    def pi_nat(a):
        parts = src.to_blocks(a)
        return sla.block_diag(*[np.kron(p, np.eye(mult_i)) for p, (n, mult_i) in zip(parts, reps)])

    # minimal invariant subspace generated by the range of V
    gens = np.concatenate([pi_nat(src.basis[j]) @ V for j in range(src.dim)], axis=1)
    U, s, _ = np.linalg.svd(gens, full_matrices=False)
    P = U[:, s > 1e-10 * max(1.0, s[0])]
    xi_hat = V @ tgt.gns.xi
    if T.is_state_preserving():
        xi_hat = xi_hat / np.linalg.norm(xi_hat)
        coords = P.conj().T @ xi_hat
        F = P @ householder_frame(coords)
    else:
        F = P
    Vd = F.conj().T @ V
    return StinespringDilation(F.shape[1], Vd, lambda a: F.conj().T @ pi_nat(a) @ F, src, tgt)


# ---------------------------------------------------------------------------------
# norms


class NormReport(NamedTuple):
    cb_lower: float
    l2_A: float
    l2_Aop: float
    cb_upper: float


def l2_norm(T: CpMap) -> float:
    return float(np.linalg.norm(T.matrix, 2))


def l2_op_norm(T: CpMap) -> float:
    Gs = T.source.opposite_gram()
    Gt = T.target.opposite_gram()
    hs = sla.sqrtm(Gt)
    his = np.linalg.inv(sla.sqrtm(Gs))
    return float(np.linalg.norm(hs @ T.matrix @ his, 2))


def cb_upper(T: CpMap) -> float:
    """Haagerup-type upper bound from a singular value decomposition of each block pair."""
    tens = T.block_tensor()
    best = 0.0
    for l, m in enumerate(T.target.blocks):
        LL = np.zeros((m, m), dtype=complex)
        RR_max = 0.0
        RR = []
        for i, n in enumerate(T.source.blocks):
            arr = tens[l][i]  # [alpha, beta, a, b]
            M = arr.transpose(0, 2, 3, 1).reshape(m * n, n * m)
            u, s, vh = np.linalg.svd(M, full_matrices=False)
            R_i = np.zeros((m, m), dtype=complex)
            for k in range(len(s)):
                if s[k] < 1e-14:
                    continue
                L = u[:, k].reshape(m, n)
                R = vh[k].reshape(n, m)
                LL += s[k] * L @ L.conj().T
                R_i += s[k] * R.conj().T @ R
            RR.append(R_i)
        RR_max = np.linalg.norm(sum(RR), 2)
        best = max(best, np.sqrt(np.linalg.norm(LL, 2) * RR_max))
    return float(best)


def _block_norm(parts):
    return max(np.linalg.norm(p, 2) for p in parts)


def cb_lower(T: CpMap, levels: Sequence[int] | None = None, restarts: int = 4,
             iters: int = 60, seed: int = 0) -> float:
    """Best value of ‖(id_k ⊗ T)(x)‖ / ‖x‖ found by alternating maximisation.

    Each step takes the top singular pair of the image and moves x to the unitary
    maximising the resulting linear functional, so the ratio never decreases.
    """
    src, tgt = T.source, T.target
    tens = T.block_tensor()
    if levels is None:
        levels = range(1, src.dim + 1)
    rng = np.random.default_rng(seed)

    def amp(xs, k):
        outs = []
        for l, m in enumerate(tgt.blocks):
            y = np.zeros((k, m, k, m), dtype=complex)
            for i, n in enumerate(src.blocks):
                X = xs[i].reshape(k, n, k, n)
                y += np.einsum("xyab,paqb->pxqy", tens[l][i], X)
            outs.append(y.reshape(k * m, k * m))
        return outs

    def ascend(ys, k):
        l = int(np.argmax([np.linalg.norm(y, 2) for y in ys]))
        u, s, vh = np.linalg.svd(ys[l])
        xi, eta = u[:, 0], vh[0].conj()
        m = tgt.blocks[l]
        R = np.outer(eta, xi.conj()).reshape(k, m, k, m)  # f(x) = tr(y_l R)
        new = []
        for i, n in enumerate(src.blocks):
            # f(x) = Σ X[p,a,q,b] * G[p,a,q,b]
            G = np.einsum("xyab,qypx->paqb", tens[l][i], R)
            Y = G.reshape(k * n, k * n).T
            uu, ss, vvh = np.linalg.svd(Y)
            new.append(vvh.conj().T @ uu.conj().T)
        return new

    best = 0.0
    for k in levels:
        for rep in range(restarts):
            if rep == 0:
                xs = [np.eye(k * n, dtype=complex) for n in src.blocks]
            else:
                xs = [_haar_unitary(k * n, rng) for n in src.blocks]
            val = 0.0
            for _ in range(iters):
                ys = amp(xs, k)
                cur = _block_norm(ys) / _block_norm(xs)
                best = max(best, cur)
                if cur <= val + 1e-13:
                    break
                val = cur
                xs = ascend(ys, k)
    return float(best)


def norms(T: CpMap, levels: Sequence[int] | None = None, seed: int = 0) -> NormReport:
    return NormReport(cb_lower(T, levels, seed=seed), l2_norm(T), l2_op_norm(T), cb_upper(T))


def constant_c(T: CpMap) -> float:
    """max(cb upper bound, both L2 norms): an upper bound for the constant C(T)."""
    return max(cb_upper(T), l2_norm(T), l2_op_norm(T))
