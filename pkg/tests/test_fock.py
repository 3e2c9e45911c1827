import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphprod.coxeter import G1, G2, G3, G4, SimpleGraph, TripleSplit, group
from graphprod.fock import (
    AlgebraicElement, FockOperator, ResourceGuardError, build_fock, clique_unshuffle, safe_difference,
    shuffle, subspace_words, subspaces, vacuum_state,
)
from graphprod.valg import VertexAlgebra

U, V, W_ = 0, 1, 2
C2 = VertexAlgebra.c2(0.3)
M2 = VertexAlgebra.matrix(2, [0.3, 0.7])
M2T = VertexAlgebra.matrix(2)


def space(g, alg, depth):
    return build_fock(g, [alg] * g.vertex_count, depth)


def rand_tensor(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_dimension_examples():
    F = space(G3, C2, 2)
    assert F.dim == 4
    assert F.words == [(), (U,), (V,), (U, V)]
    assert space(G1, M2T, 1).dim == 4
    for g in (G1, G2, G3, G4):
        assert space(g, M2, 0).dim == 1


@pytest.mark.parametrize("g", [G2, G3, G4])
def test_dimension_is_sum_over_words(g):
    F = space(g, M2, 3)
    W = group(g)
    assert F.dim == sum(3 ** len(w) for w in W.enumerate_words(3))
    labels = F.labels()
    assert len(labels) == F.dim
    assert labels[0] == ((), ())


def test_basis_of_smaller_depth_is_prefix():
    F3, F5 = space(G4, C2, 3), space(G4, C2, 5)
    assert F5.labels()[: F3.dim] == F3.labels()
    assert F5.prefix_dim(3) == F3.dim


def test_resource_guard():
    with pytest.raises(ResourceGuardError) as info:
        build_fock(G2, [M2, M2], 8, cap=1000)
    assert info.value.dim > 1000


def test_shuffle_examples():
    rng = np.random.default_rng(0)
    t = rand_tensor(rng, (2, 3))
    w, s = shuffle(G4, [(U, V)], [t])
    assert w == (U, V) and np.allclose(s, t)
    eu, ev = rand_tensor(rng, (2,)), rand_tensor(rng, (3,))
    w, s = shuffle(G3, [(V,), (U,)], [ev, eu])
    assert w == (U, V)
    assert np.allclose(s, np.multiply.outer(eu, ev))
    with pytest.raises(ValueError):
        shuffle(G2, [(U,), (U,)], [eu, eu])


def test_shuffle_keeps_equal_letters_in_order():
    # v u v is reduced in G2 and both v legs keep their relative order
    rng = np.random.default_rng(1)
    a, b = rand_tensor(rng, (2,)), rand_tensor(rng, (2, 2))
    w, s = shuffle(G2, [(V,), (U, V)], [a, b])
    assert w == (V, U, V)
    assert np.allclose(s, np.multiply.outer(a, b))
    # in G4 the letter v commutes with both others and moves to the front
    w2, s2 = shuffle(G4, [(W_, V), (U,)], [b, a])
    assert w2 == (V, W_, U)
    assert np.allclose(s2, np.transpose(np.multiply.outer(b, a), (1, 0, 2)))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_shuffle_is_isometric_and_coherent(seed):
    rng = np.random.default_rng(seed)
    g = [G2, G3, G4][seed % 3]
    W = group(g)
    words = [w for w in W.enumerate_words(2)]
    for _ in range(20):
        vs = [words[i] for i in rng.integers(0, len(words), 3)]
        if W.is_reduced_product(vs):
            break
    else:
        return
    ts = [rand_tensor(rng, (2,) * len(v)) for v in vs]
    w, s = shuffle(g, vs, ts)
    norm_in = np.prod([np.linalg.norm(t) for t in ts])
    assert abs(np.linalg.norm(s) - norm_in) < 1e-10 * max(1.0, norm_in)
    inner_w, inner = shuffle(g, vs[1:], ts[1:])
    w2, s2 = shuffle(g, [vs[0], inner_w], [ts[0], inner])
    assert w2 == w
    assert np.allclose(s2, s, atol=1e-12)


@pytest.mark.parametrize("alg", [C2, M2])
@pytest.mark.parametrize("g", [G1, G2, G4])
def test_lambda_v_is_a_star_homomorphism_on_safe_margin(g, alg):
    F = space(g, alg, 3)
    rng = np.random.default_rng(2)
    for v in range(g.vertex_count):
        a, b = alg.random_element(rng), alg.random_element(rng)
        la, lb = F.lambda_v(v, a), F.lambda_v(v, b)
        assert safe_difference(la @ lb, F.lambda_v(v, a @ b), 2) < 1e-12
        assert safe_difference(la.H, F.lambda_v(v, a.conj().T), 1) < 1e-12
        assert safe_difference(F.lambda_v(v, alg.one()), FockOperator.identity(F), 1) == 0
        assert abs(vacuum_state(la) - alg.state(a)) < 1e-12


def test_lambda_v_of_centered_element_creates_its_hat():
    F = space(G4, M2, 2)
    rng = np.random.default_rng(3)
    a = M2.center(M2.random_element(rng))
    out = F.lambda_v(V, a) @ F.vacuum()
    assert np.allclose(out, F.embed((V,), M2.hat(a)[1:]))


def test_lambda_of_scalar_is_scalar_identity():
    F = space(G3, M2, 2)
    L = F.lam(AlgebraicElement.scalar(2.5))
    assert safe_difference(L, FockOperator.identity(F) * 2.5, 0) == 0


@pytest.mark.parametrize("g", [G2, G3, G4])
def test_lambda_sends_vacuum_to_coefficient_tensor(g):
    F = space(g, M2, 3)
    rng = np.random.default_rng(4)
    x = AlgebraicElement.random(rng, F.group.enumerate_words(3), F.alg_dims())
    L = F.lam(x)
    assert np.allclose(L @ F.vacuum(), x.vector(F))
    assert abs(vacuum_state(L) - complex(x.terms[()])) < 1e-12
    assert abs(vacuum_state(F.lam(x.homogeneous(2)))) < 1e-15
    # injectivity: the vacuum vector recovers the element
    y = F.element_from_vector(L @ F.vacuum())
    assert all(np.allclose(y.terms.get(w, 0), x.terms[w]) for w in x.words())


def test_lambda_of_two_letter_tensor_lands_in_its_block():
    F = space(G3, M2, 2)
    rng = np.random.default_rng(5)
    a, b = (M2.center(M2.random_element(rng)) for _ in range(2))
    x = AlgebraicElement.from_elements((U, V), [a, b])
    direct = F.lambda_v(U, a) @ (F.lambda_v(V, b) @ F.vacuum())
    assert np.allclose(F.lam(x) @ F.vacuum(), direct)
    assert np.allclose(direct, F.embed((U, V), np.multiply.outer(M2.hat(a)[1:], M2.hat(b)[1:])))


def test_algebraic_element_rejects_uncentered_legs():
    with pytest.raises(ValueError):
        AlgebraicElement.from_elements((U,), [M2.one()])


def test_parts_on_vacuum():
    F = space(G2, M2, 3)
    rng = np.random.default_rng(6)
    x = AlgebraicElement.random(rng, [(U,)], F.alg_dims(), scalar=False)
    ann, dia, cre = F.lambda_parts(x)
    Om = F.vacuum()
    assert np.allclose(ann @ Om, 0)
    assert np.allclose(dia @ Om, 0)
    assert np.allclose(cre @ Om, F.lam(x) @ Om)
    mixed = AlgebraicElement.random(rng, [(U,), (V,)], F.alg_dims(), scalar=False)
    with pytest.raises(ValueError):
        F.lambda_parts(mixed)


@pytest.mark.parametrize("g", [G2, G3, G4])
def test_parts_vanishing_rules(g):
    F = space(g, M2, 4)
    W = F.group
    rng = np.random.default_rng(7)
    for w in W.enumerate_words(2):
        if not w:
            continue
        x = AlgebraicElement.random(rng, [w], F.alg_dims(), scalar=False)
        ann, dia, cre = F.lambda_parts(x)
        clique = W.is_clique(w)
        for y in F.words:
            if len(y) > F.depth - len(w):
                continue
            col = lambda op: [b for (r, c), b in op.blocks.items() if c == y and np.abs(b).max() > 1e-14]
            starts_inv = len(W.multiply(w, y)) == len(y) - len(w)
            if not starts_inv:
                assert not col(ann)
            if not (clique and starts_inv):
                assert not col(dia)
            if len(W.multiply(w, y)) != len(w) + len(y):
                assert not col(cre)


def test_triple_with_non_clique_middle_vanishes():
    F = space(G2, M2, 4)
    rng = np.random.default_rng(8)
    x = AlgebraicElement.random(rng, [(U, V)], F.alg_dims(), scalar=False)
    assert F.lambda_triple(TripleSplit((), (U, V), ()), x).max_abs() < 1e-14
    # not a splitting of the word at all
    assert F.lambda_triple(TripleSplit((V,), (), (U,)), x).max_abs() == 0


@pytest.mark.parametrize("alg", [C2, M2])
@pytest.mark.parametrize("g", [G2, G3, G4])
def test_partition_of_the_action(g, alg):
    D = 4 if alg is M2 and g is G4 else 5
    F = space(g, alg, D)
    W = F.group
    rng = np.random.default_rng(9)
    for w in W.enumerate_words(3):
        if not w:
            continue
        x = AlgebraicElement.random(rng, [w], F.alg_dims(), scalar=False)
        total = FockOperator.zero(F)
        for om in W.triple_splittings(w):
            total = total + F.lambda_triple(om, x)
        assert safe_difference(F.lam(x), total, len(w)) < 1e-10


def _component(F, vec, w):
    return F.component(vec, w) if F.has(w) else np.zeros(F.leg_shape(w))


@pytest.mark.parametrize("g", [G2, G3, G4])
def test_action_on_word_part(g):
    D = 5
    F = space(g, C2 if g is G4 else M2T, D) if g is not G2 else space(g, M2T, 4)
    D = F.depth
    W = F.group
    rng = np.random.default_rng(10)
    words = [w for w in W.enumerate_words(D - 1)]
    checked = [0, 0, 0]
    for v1, v2 in itertools.product(words, repeat=2):
        if not W.is_reduced_product([v1, v2]):
            continue
        e1, e2 = rand_tensor(rng, F.leg_shape(v1)), rand_tensor(rng, F.leg_shape(v2))
        v12, eta_t = shuffle(g, [v1, v2], [e1, e2])
        eta, eta1 = F.embed(v12, eta_t), F.embed(v1, e1)
        for w in words:
            if not w or len(w) + len(v12) > D - 1:
                continue
            x = AlgebraicElement.random(rng, [w], F.alg_dims(), scalar=False)
            ann, dia, cre = F.lambda_parts(x)
            wv1 = W.multiply(w, v1)
            if len(v1) == len(w) + len(wv1):
                assert len(W.multiply(wv1, v2)) == len(wv1) + len(v2)
                for op, tgt in ((ann, wv1), (dia, v1)):
                    lhs = op @ eta
                    t, rhs = shuffle(g, [tgt, v2], [_component(F, op @ eta1, tgt), e2])
                    assert np.allclose(lhs, F.embed(t, rhs), atol=1e-10)
                checked[0] += 1
            if len(W.multiply(w, v12)) == len(w) + len(v12):
                assert len(wv1) == len(w) + len(v1)
                t, rhs = shuffle(g, [wv1, v2], [_component(F, cre @ eta1, wv1), e2])
                assert np.allclose(cre @ eta, F.embed(t, rhs), atol=1e-10)
                checked[1] += 1
            for w1, w2, w3 in W.triple_splittings(w):
                w23 = w2 + w3
                w13v1 = W.multiply(w1, w3, v1)
                if len(v1) != len(w23) + len(W.multiply(w23, v1)):
                    continue
                if len(W.multiply(w1, w3, v1, v2)) != len(w1) + len(W.multiply(w3, v1, v2)):
                    continue
                assert len(W.multiply(w13v1, v2)) == len(w13v1) + len(v2)
                op = F.lambda_triple(TripleSplit(w1, w2, w3), x)
                t, rhs = shuffle(g, [w13v1, v2], [_component(F, op @ eta1, w13v1), e2])
                assert np.allclose(op @ eta, F.embed(t, rhs), atol=1e-10)
                checked[2] += 1
    assert min(checked) > 0


def test_subspace_examples():
    F = space(G3, C2, 2)
    assert subspaces(F, "FM", (), n=0).dense() == pytest.approx(np.eye(F.dim))
    F1 = space(G1, M2, 3)
    assert subspace_words(F1, "HL", (0,)) == {()}
    F2 = space(G2, C2, 4)
    swap = lambda ws: {tuple(1 - x for x in w) for w in ws}
    for u in [(U,), (U, V), (V, U, V)]:
        uu = tuple(1 - x for x in u)
        for n in range(3):
            left = subspace_words(F2, "FL", u, u[-1:], n)
            assert swap(left) == subspace_words(F2, "FL", uu, uu[-1:], n)
            right = subspace_words(F2, "FR", u, u[:1], n)
            assert swap(right) == subspace_words(F2, "FR", uu, uu[:1], n)
    with pytest.raises(ValueError):
        subspace_words(F2, "HL", (U,), (V,))


@pytest.mark.parametrize("g", [G2, G3, G4])
def test_middle_subspace_matches_definition(g):
    F = space(g, C2, 4)
    W = F.group
    for u in W.enumerate_words(2):
        for n in range(3):
            got = subspace_words(F, "FM", u, n=n)
            want = set()
            for x in F.words:
                for w1 in W.right_tilde_n(u, n):
                    rest = W.multiply(W.inverse(u), W.inverse(w1), x)
                    if len(x) == len(w1) + len(u) + len(rest) and W.in_left(rest, u):
                        want.add(x)
            assert got == want


def test_clique_unshuffle_examples():
    F = space(G1, M2T, 1)
    Ut = clique_unshuffle(F, (0,))
    assert np.allclose(Ut, np.eye(4))
    F3 = space(G3, C2, 2)
    U2 = clique_unshuffle(F3, (U, V))
    assert U2.shape == (4, 4)
    assert np.allclose(U2.conj().T @ U2, np.eye(4))
    with pytest.raises(ValueError):
        clique_unshuffle(space(G2, C2, 2), (U, V))


@pytest.mark.parametrize("alg", [C2, M2])
def test_clique_unshuffle_intertwines_lambda(alg):
    g = SimpleGraph.complete(3)
    F = build_fock(g, [alg] * 3, 3)
    rng = np.random.default_rng(11)
    for t in [(0,), (0, 2), (0, 1, 2)]:
        Ut = clique_unshuffle(F, t)
        assert np.allclose(Ut.conj().T @ Ut, np.eye(Ut.shape[1]))
        z = rng.standard_normal(Ut.shape[1])
        assert abs(np.linalg.norm(Ut @ z) - np.linalg.norm(z)) < 1e-12
        elems = [alg.center(alg.random_element(rng)) for _ in t]
        x = AlgebraicElement.from_elements(t, elems)
        kron = elems[0]
        for e in elems[1:]:
            kron = np.kron(kron, e)
        assert np.allclose(Ut.conj().T @ F.lam(x).dense() @ Ut, kron, atol=1e-12)
