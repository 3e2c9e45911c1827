import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphprod.coxeter import G1, G2, G3, G4, RhoTuple, SimpleGraph, TauTuple, group
from graphprod.fock import AlgebraicElement, FockOperator, build_fock, safe_difference, subspaces, vacuum_state
from graphprod.multipliers import (
    CcapNet, apply_h_tau, cb_difference_bound, ccap_net, certified_ratio, graph_product_cb_on_Ad,
    graph_product_on_fock, graph_product_ucp, h_tau, h_tau_materialized, h_tilde_rho, lambda_norm_upper,
    p_a_projection, p_d, p_d_bound, p_d_bound_terms, radial, radial_tail_bound, safe_norm_lower,
    v_partial_isometry,
)
from graphprod.valg import CpMap, VertexAlgebra, constant_c

C2 = VertexAlgebra.c2(0.3)
M2 = VertexAlgebra.matrix(2, [0.3, 0.7])
M2T = VertexAlgebra.matrix(2)
E = ()
ZERO_TAU = TauTuple(RhoTuple(0, 0, E, E, E), E)


def space(g, alg, depth, cap=5000):
    return build_fock(g, [alg] * g.vertex_count, depth, cap)


def random_element(F, rng, max_len, scalar=True):
    return AlgebraicElement.random(rng, F.group.enumerate_words(max_len), F.alg_dims(), scalar=scalar)


def transpose_map(alg):
    return CpMap.from_block_function(alg, alg, lambda p: [p[0].T])


@pytest.mark.parametrize("g", [G1, G2, G4])
def test_h_tau_zero_tuple_is_the_vacuum_component(g):
    F = space(g, M2, 3)
    rng = np.random.default_rng(0)
    x = random_element(F, rng, 3)
    L = F.lam(x)
    want = FockOperator.identity(F) * complex(x.terms[()])
    assert safe_difference(h_tau(ZERO_TAU)(L), want, 3) < 1e-12
    assert safe_difference(p_d(0, "via_h_tau", g)(L), want, 3) < 1e-12
    assert safe_difference(p_d(0, "direct")(L), want, 3) < 1e-12


@pytest.mark.parametrize("g, alg, depth", [(G4, C2, 4), (G2, M2T, 3), (G3, M2, 3)])
def test_structural_h_tau_matches_materialized_partial_isometries(g, alg, depth):
    F = space(g, alg, depth)
    W = F.group
    rng = np.random.default_rng(1)
    X = FockOperator.from_dense(F, rng.standard_normal((F.dim, F.dim)) + 1j * rng.standard_normal((F.dim, F.dim)))
    nonzero = 0
    for d in range(3):
        for rho in W.rhos(d):
            for r in W.subcliques(rho.t):
                tau = TauTuple(rho, r)
                got = apply_h_tau(tau, X)
                assert (got - h_tau_materialized(tau, X)).max_abs() < 1e-12
                nonzero += got.max_abs() > 0
    assert nonzero > 0


@pytest.mark.parametrize("g", [G2, G3, G4])
def test_partial_isometry_defect_and_ranges(g):
    F = space(g, C2, 4)
    W = F.group
    for u in W.enumerate_words(3):
        for r in W.subcliques(W.s_right(u)):
            for n in range(3):
                Vn = v_partial_isometry(F, u, r, n)
                V = Vn.matrix.toarray()
                assert np.abs(V.T @ V @ V.T - V.T).max(initial=0.0) <= 1e-12
                assert np.allclose(V @ V.T, subspaces(F, "FM", u, n=n).dense())
                init = V.T @ V
                assert np.allclose(init, np.diag(np.diag(init)))


def test_partial_isometry_rejects_non_suffix():
    F = space(G2, C2, 3)
    with pytest.raises(ValueError):
        v_partial_isometry(F, (0, 1), (0,), 0)


@pytest.mark.parametrize("g, alg, depth", [(G3, C2, 5), (G4, C2, 5), (G2, M2, 4)])
def test_h_tau_formula_against_projection(g, alg, depth):
    F = space(g, alg, depth)
    W = F.group
    rng = np.random.default_rng(2)
    nonzero = 0
    for w in W.enumerate_words(2):
        x = random_element(F, rng, 0) if not w else AlgebraicElement.random(rng, [w], F.alg_dims(), scalar=False)
        for om in W.triple_splittings(w):
            L = F.lambda_triple(om, x)
            for d in range(4):
                for rho in W.rhos(d):
                    for r in W.subcliques(rho.t):
                        tau = TauTuple(rho, r)
                        H = apply_h_tau(tau, L)
                        P = p_a_projection(tau, om, L, depth - len(w))
                        assert safe_difference(H, L @ P, len(w)) < 1e-10
                        nonzero += H.safe(len(w)).max_abs() > 1e-12
    assert nonzero > 0


@pytest.mark.parametrize("g, alg, depth", [(G2, C2, 6), (G3, M2, 4), (G4, C2, 5)])
def test_h_tilde_selects_its_pattern(g, alg, depth):
    F = space(g, alg, depth)
    W = F.group
    rng = np.random.default_rng(3)
    for w in W.enumerate_words(3):
        if not w:
            continue
        x = AlgebraicElement.random(rng, [w], F.alg_dims(), scalar=False)
        for om in W.triple_splittings(w):
            L = F.lambda_triple(om, x)
            owner = W.rho_of_split(om)
            for d in range(len(w) + 2):
                for rho in W.rhos(d):
                    got = h_tilde_rho(rho, g)(L)
                    want = L if rho == owner else FockOperator.zero(F)
                    assert safe_difference(got, want, len(w)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_h_tilde_vanishes_on_other_degrees(seed):
    rng = np.random.default_rng(seed)
    F = space(G4, M2, 3)
    W = F.group
    words = [w for w in W.enumerate_words(2) if w]
    w = words[rng.integers(len(words))]
    x = AlgebraicElement.random(rng, [w], F.alg_dims(), scalar=False)
    rhos = [rho for d in range(4) if d != len(w) for rho in W.rhos(d)]
    rho = rhos[rng.integers(len(rhos))]
    assert h_tilde_rho(rho, G4)(F.lam(x)).safe(len(w)).max_abs() < 1e-10


@pytest.mark.parametrize("g", [G2, G3, G4])
def test_p_d_two_modes_agree(g):
    F = space(g, M2, 4)
    rng = np.random.default_rng(4)
    for k in range(4):
        x = random_element(F, rng, k)
        L = F.lam(x)
        for d in range(k + 2):
            a = p_d(d, "direct")(L)
            b = p_d(d, "via_h_tau", g)(L)
            assert safe_difference(a, b, k) <= 1e-8


def test_p_d_is_a_family_of_orthogonal_projections():
    F = space(G4, C2, 5)
    W = F.group
    rng = np.random.default_rng(5)
    x = random_element(F, rng, 2)
    L = F.lam(x)
    for d in range(3):
        Pd = p_d(d, "via_h_tau", G4)
        xd = F.lam(x.homogeneous(d))
        assert safe_difference(Pd(xd), xd, 2) < 1e-12
        for m in range(3):
            twice = p_d(m, "via_h_tau", G4)(Pd(L))
            want = Pd(L) if m == d else FockOperator.zero(F)
            assert safe_difference(twice, want, 2) < 1e-12


def test_p_d_term_counts_respect_linear_bound():
    for g in (G1, G2, G3, G4):
        c = group(g).c_gamma()
        assert p_d_bound_terms(g, 0) == 1
        for d in range(1, 7):
            assert p_d_bound_terms(g, d) <= c * d
            assert p_d_bound(g, d) == c * d


def test_p_d_measured_lower_bounds_stay_below_linear_bound():
    F = space(G4, M2, 4)
    rng = np.random.default_rng(6)
    for d in range(1, 4):
        x = random_element(F, rng, 3)
        lower = certified_ratio(F, x.homogeneous(d), x)
        assert 0 < lower <= p_d_bound(G4, d)


def test_radial_endpoints_and_errors():
    F = space(G3, M2, 4)
    rng = np.random.default_rng(7)
    x = random_element(F, rng, 3)
    L = F.lam(x)
    assert safe_difference(radial(1.0, mode="via_h_tau", g=G3)(L), L, 3) < 1e-12
    assert safe_difference(radial(0.0, mode="via_h_tau", g=G3)(L), p_d(0, "direct")(L), 3) < 1e-12
    with pytest.raises(ValueError):
        radial(1.5)
    xd = x.homogeneous(2)
    assert safe_difference(radial(0.6)(F.lam(xd)), 0.36 * F.lam(xd), 2) < 1e-12


def test_radial_semigroup():
    F = space(G4, C2, 5)
    rng = np.random.default_rng(8)
    x = random_element(F, rng, 3)
    L = F.lam(x)
    for r in (0.3, 0.7, 1.0):
        for s in (0.3, 0.7, 1.0):
            two = radial(r, mode="via_h_tau", g=G4)(radial(s, mode="via_h_tau", g=G4)(L))
            assert safe_difference(two, radial(r * s, mode="via_h_tau", g=G4)(L), 3) <= 1e-10


def test_radial_tail_lower_bound_below_tail_bound():
    F = space(G2, M2, 4)
    rng = np.random.default_rng(9)
    x = random_element(F, rng, 4)
    for r in (0.3, 0.7):
        for n in (1, 2, 3):
            tail = radial(r)(x) - radial(r, n)(x)
            assert certified_ratio(F, tail, x) <= radial_tail_bound(G2, r, n)


def test_ucp_product_of_identities_is_identity_and_radial_maps_give_radial():
    F = space(G4, M2, 4)
    rng = np.random.default_rng(10)
    x = random_element(F, rng, 3)
    L = F.lam(x)
    ident = graph_product_ucp([CpMap.identity(M2)] * 3, G4)
    assert safe_difference(ident.superoperator(L), L, 3) < 1e-12
    rad = graph_product_ucp([CpMap.radial(M2, 0.4)] * 3, G4)
    assert safe_difference(rad.superoperator(L), radial(0.4, mode="via_h_tau", g=G4)(L), 3) < 1e-10


def test_ucp_product_rejects_bad_vertex_maps():
    with pytest.raises(ValueError, match="vertex 1"):
        graph_product_ucp([CpMap.identity(M2), transpose_map(M2), CpMap.identity(M2)], G4)
    with pytest.raises(ValueError, match="vertex 0"):
        graph_product_ucp([CpMap.scaled(M2, 0.5), CpMap.identity(M2)], G2)


@settings(max_examples=3, deadline=None)
@given(st.integers(0, 10_000))
def test_ucp_product_dilation_identity(seed):
    rng = np.random.default_rng(seed)
    maps = [CpMap.random_ucp(M2, rng, terms=2) for _ in range(3)]
    P = graph_product_ucp(maps, G4)
    F = space(G4, M2, 3)
    x = random_element(F, rng, 2)
    assert P.certify(x, 3) <= 1e-10
    L = F.lam(x)
    assert abs(vacuum_state(P.superoperator(L)) - vacuum_state(L)) < 1e-12


def test_cb_product_examples():
    for d in (1, 2, 3):
        S, bound = graph_product_cb_on_Ad([CpMap.identity(M2)] * 3, d, G4)
        assert bound == pytest.approx(group(G4).clique_count() ** 3 * d)
        F = space(G4, M2, 3)
        x = AlgebraicElement.random(np.random.default_rng(d), [w for w in F.words if len(w) == d], F.alg_dims(), scalar=False)
        y = S(x)
        assert all(np.allclose(y.terms[w], x.terms[w]) for w in x.words())
    T = transpose_map(M2T)
    S, _ = graph_product_cb_on_Ad([T], 1, G1)
    a = M2T.center(M2T.random_element(np.random.default_rng(0)))
    x = AlgebraicElement.from_elements((0,), [a])
    assert np.allclose(S(x).terms[(0,)], M2T.hat(M2T.center(T(a)))[1:])
    with pytest.raises(ValueError):
        S(AlgebraicElement.scalar(1.0) + x)


def test_cb_product_lower_bounds_below_clique_bound():
    rng = np.random.default_rng(11)
    F = space(G3, M2T, 4)
    for _ in range(5):
        maps = [CpMap(M2T, M2T, np.block([[np.eye(1), np.zeros((1, 3))],
                                            [rng.standard_normal((3, 1)), rng.standard_normal((3, 3))]]))
                for _ in range(2)]
        for d in (1, 2, 3):
            S, bound = graph_product_cb_on_Ad(maps, d, G3)
            x = AlgebraicElement.random(rng, [w for w in F.words if len(w) == d], F.alg_dims(), scalar=False)
            assert certified_ratio(F, S(x), x) <= bound
            other = [CpMap.identity(M2T)] * 2
            S2, _ = graph_product_cb_on_Ad(other, d, G3)
            assert certified_ratio(F, S(x) - S2(x), x) <= cb_difference_bound(G3, d, maps, other)


def test_fock_product_norms():
    ident = graph_product_on_fock([CpMap.identity(M2)] * 3, 3, G4)
    assert ident.norm() == pytest.approx(1.0)
    scaled = graph_product_on_fock([CpMap.scaled(M2, 2.0), CpMap.identity(M2), CpMap.identity(M2)], 3, G4)
    assert scaled.norm() == pytest.approx(4.0)  # u w u is the longest run of u
    assert np.linalg.norm(scaled.block((0, 2, 0)), 2) == pytest.approx(4.0)
    assert np.linalg.norm(scaled.block((1, 2, 1)), 2) == pytest.approx(1.0)
    rng = np.random.default_rng(12)
    for _ in range(5):
        T = [CpMap(M2, M2, np.block([[np.eye(1), np.zeros((1, 3))], [np.zeros((3, 1)), rng.standard_normal((3, 3))]]))
             for _ in range(3)]
        S = [CpMap.radial(M2, rng.uniform()) for _ in range(3)]
        for d in (1, 2, 3):
            a, b = graph_product_on_fock(T, d, G4), graph_product_on_fock(S, d, G4)
            assert a.norm() == pytest.approx(a.norm_direct())
            assert a.difference_norm(b) <= a.difference_bound(b) * (1 + 1e-12)


def test_norm_upper_and_safe_lower_bracket_the_truncated_norm():
    F = space(G2, M2, 4)
    rng = np.random.default_rng(13)
    x = random_element(F, rng, 2)
    L = F.lam(x)
    assert safe_norm_lower(L) <= L.norm() + 1e-12
    assert L.norm() <= lambda_norm_upper(F, x) + 1e-12


def _synthetic_net(alg, count=3):
    T = transpose_map(alg)
    ident = CpMap.identity(alg)
    V = [ident + (0.5 ** (j + 1)) * (T - ident) for j in range(count)]
    U = [ident for _ in range(count)]
    return V, U


def test_ccap_net_with_identity_maps_is_truncated_radial():
    net = CcapNet(G2, [[CpMap.identity(M2)]] * 2, [[CpMap.identity(M2)]] * 2)
    F = space(G2, M2, 4)
    x = random_element(F, np.random.default_rng(14), 4)
    for N in (2, 4):
        D, E, rep = ccap_net(net, N, 0)
        r = 1 - 1 / np.sqrt(N)
        want = radial(r, N)(x)
        got = D(x)
        assert all(np.allclose(got.terms.get(w, 0), want.terms.get(w, 0)) for w in x.words())
        assert rep.epsilon == 0
        assert rep.cb_net_term == 0


def test_ccap_net_gap_upper_bound_shrinks_along_the_net():
    V, U = _synthetic_net(M2T)
    net = CcapNet(G2, [V, V], [U, U])
    F = space(G2, M2T, 3)
    rng = np.random.default_rng(15)
    samples = [random_element(F, rng, 2) for _ in range(3)]
    reps = [ccap_net(net, 4, j, F, samples)[2] for j in range(3)]
    nets = [rep.cb_net_term for rep in reps]
    assert nets[0] > nets[1] > nets[2] > 0
    assert nets[2] == pytest.approx(nets[0] / 4)
    assert all(rep.l2_net_term > 0 for rep in reps)
    for rep in reps:
        assert rep.cb_lower <= rep.cb_upper
        assert rep.l2_lower <= rep.l2_upper
        assert rep.l2op_lower <= rep.l2_upper


def test_ccap_net_converges_pointwise_along_n():
    V, U = _synthetic_net(M2T)
    net = CcapNet(G2, [V, V], [U, U])
    F = space(G2, M2T, 3)
    x = random_element(F, np.random.default_rng(16), 3)
    errs = []
    for N in (4, 16, 64, 256):
        D, _, _ = ccap_net(net, N, 2)
        errs.append(np.linalg.norm((D(x) - x).vector(F)))
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_ccap_net_rejects_non_ucp_u():
    V, _ = _synthetic_net(M2T)
    with pytest.raises(ValueError, match="vertex 0"):
        CcapNet(G1, [V], [[transpose_map(M2T)] * 3])
