"""Verification suites, check records and report emission.

Each suite runs a family of numerical checks and records, per check, the measured value,
the bound it must stay below and the tolerance allowed on top of that bound.  Records are
deterministic given the configuration and seed; wall times are kept apart from them.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from graphprod.bruteforce import all_sequences, brute_clique_triples, brute_triple_splittings, closure_normal_form
from graphprod.config import SUITES, RunConfig, check_resource_guard
from graphprod.coxeter import G1, G2, G3, G4, RhoTuple, SimpleGraph, TauTuple, group, word_str
from graphprod.fock import AlgebraicElement, FockOperator, build_fock, safe_difference, vacuum_state
from graphprod.hecke import FiniteCoxeter, trace_gram_min, verify_hecke_graph_product
from graphprod.khintchine import DilationChecker, FreeFock, contraction_search
from graphprod.multipliers import (
    CcapNet, apply_h_tau, ccap_net, certified_ratio, graph_product_cb_on_Ad, graph_product_on_fock,
    graph_product_ucp, h_tau, h_tilde_rho, p_a_projection, p_d, p_d_bound, radial, radial_tail_bound,
)
from graphprod.valg import CpMap, VertexAlgebra, cb_upper, constant_c, l2_norm, l2_op_norm

GRAPH_NAMES = {G1: "G1", G2: "G2", G3: "G3", G4: "G4"}
C2 = VertexAlgebra.cn([0.3, 0.7])
M2 = VertexAlgebra.matrix(2)
M2B = VertexAlgebra.matrix(2, [0.3, 0.7])


@dataclass
class Check:
    suite: str
    name: str
    value: float
    bound: float
    tolerance: float
    status: str  # "pass", "fail" or "skip"
    detail: str = ""
    wall_time: float = field(default=0.0, compare=False)

    def record(self) -> dict:
        """The deterministic part of the check, without timing."""
        return {
            "suite": self.suite,
            "check": self.name,
            "status": self.status,
            "value": self.value,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    seed: int = 0
    config_hash: str = ""

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)


@dataclass
class RunReport:
    suites: list
    seed: int
    config_hash: str

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    @property
    def checks(self) -> list:
        return [c for s in self.suites for c in s.checks]

    def fingerprint(self) -> dict:
        return {"seed": self.seed, "config_hash": self.config_hash, "suites": [s.suite for s in self.suites]}

    def records(self) -> list[dict]:
        return [c.record() for c in self.checks]

    def jsonl(self) -> str:
        lines = [json.dumps({"fingerprint": self.fingerprint()}, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in self.records()]
        summary = {"summary": {"passed": self.passed, "checks": len(self.checks),
                               "failed": sum(c.status == "fail" for c in self.checks)}}
        lines.append(json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"

    def text(self) -> str:
        out = [f"seed {self.seed}  config {self.config_hash}"]
        for s in self.suites:
            out.append(f"== {s.suite}: {'PASS' if s.passed else 'FAIL'} ({len(s.checks)} checks)")
            for c in s.checks:
                line = f"  {c.status.upper():4}  {c.name}  value={c.value:.3e}  bound={c.bound:.3e}  tol={c.tolerance:.0e}"
                if c.detail:
                    line += f"  [{c.detail}]"
                out.append(line)
        out.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(out) + "\n"

    def timings(self) -> dict:
        return {f"{c.suite}/{c.name}": round(c.wall_time, 6) for c in self.checks}


class Recorder:
    def __init__(self, suite: str):
        self.suite = suite
        self.checks: list[Check] = []
        self._mark = time.perf_counter()

    def check(self, name: str, value: float, bound: float = 0.0, tolerance: float = 0.0, detail: str = ""):
        value, bound = float(value), float(bound)
        ok = math.isfinite(value) and value <= bound + tolerance
        now = time.perf_counter()
        self.checks.append(Check(self.suite, name, value, bound, float(tolerance), "pass" if ok else "fail",
                                 detail, now - self._mark))
        self._mark = now

    def skip(self, name: str, detail: str):
        now = time.perf_counter()
        self.checks.append(Check(self.suite, name, 0.0, 0.0, 0.0, "skip", detail, now - self._mark))
        self._mark = now


# ---------------------------------------------------------------------------------
# cases


@dataclass(frozen=True, eq=False)
class Case:
    label: str
    graph: SimpleGraph
    algebras: tuple
    depth: int

    def space(self, cap: int):
        cdims = tuple(a.centered_dim for a in self.algebras)
        check_resource_guard(self.graph, cdims, self.depth, cap, f"{self.label} depth")
        return build_fock(self.graph, list(self.algebras), self.depth, cap)


def _case(g: SimpleGraph, alg: VertexAlgebra, depth: int, alg_name: str) -> Case:
    return Case(f"{GRAPH_NAMES[g]} {alg_name} D={depth}", g, (alg,) * g.vertex_count, depth)


class Context:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.tol = cfg.tolerances
        self._algs = None

    @property
    def acceptance(self) -> bool:
        return self.cfg.scope == "acceptance"

    def rng(self, suite: str, *salt: int) -> np.random.Generator:
        key = [self.cfg.seed, SUITES.index(suite), *salt]
        return np.random.default_rng(key)

    def algebras(self) -> tuple:
        if self._algs is None:
            self._algs = tuple(self.cfg.vertex_algebras())
        return self._algs

    def config_case(self, depth: int | None = None) -> Case:
        g = self.cfg.graph
        name = GRAPH_NAMES.get(g, f"graph({g.vertex_count}, {g.edge_list()})")
        d = self.cfg.depth if depth is None else depth
        return Case(f"{name} config D={d}", g, self.algebras(), d)

    def graphs(self, standard: Sequence[SimpleGraph]) -> list[tuple[str, SimpleGraph]]:
        if self.acceptance:
            return [(GRAPH_NAMES[g], g) for g in standard]
        g = self.cfg.graph
        return [(GRAPH_NAMES.get(g, "config"), g)]


def _basis_tensors(space, words):
    dims = space.alg_dims()
    for w in words:
        for idx in np.ndindex(*(dims[v] for v in w)):
            yield w, AlgebraicElement.basis_tensor(w, idx, dims)


def _words_of_length(W, k):
    return [w for w in W.enumerate_words(k) if len(w) == k]


# ---------------------------------------------------------------------------------
# suites


def suite_coxeter_oracle(ctx: Context, rec: Recorder):
    length = 8 if ctx.acceptance else min(8, ctx.cfg.depth + 4)
    for name, g in ctx.graphs([G1, G2, G3, G4]):
        W = group(g)
        bad = total = 0
        for seq in all_sequences(W.n, length):
            total += 1
            bad += W.normal_form(seq) != closure_normal_form(seq, W.adj)
        rec.check(f"{name} normal form = closure BFS, length <= {length}", bad, detail=f"{total} sequences")


def suite_sw_partition(ctx: Context, rec: Recorder):
    for name, g in ctx.graphs([G2, G3, G4]):
        W = group(g)
        overlaps = missing = mislabeled = words = 0
        for w in W.enumerate_words(5):
            words += 1
            owner = {}
            for rho in W.rhos(len(w)):
                for s in W.splittings_for_rho(w, rho):
                    overlaps += s in owner
                    mislabeled += W.rho_of_split(s) != rho
                    owner[s] = rho
            missing += len(set(W.triple_splittings(w)) ^ set(owner))
        rec.check(f"{name} rho-patterns disjoint on S_w, |w| <= 5", overlaps + mislabeled, detail=f"{words} words")
        rec.check(f"{name} rho-patterns cover S_w, |w| <= 5", missing, detail=f"{words} words")
        diff = sum(len(set(W.triple_splittings(w)) ^ brute_triple_splittings(W, w)) for w in W.enumerate_words(3))
        rec.check(f"{name} S_w = brute-force splittings, |w| <= 3", diff)


FROZEN_C_GAMMA = {"G1": 5, "G2": 11}


def suite_c_gamma(ctx: Context, rec: Recorder):
    for name, g in ctx.graphs([G1, G2, G3, G4]):
        W = group(g)
        fast = W.c_gamma()
        brute = sum(2 ** len(t) for _, _, t in brute_clique_triples(W))
        rec.check(f"{name} C_gamma matches brute-force triples", abs(fast - brute), detail=f"C_gamma={fast}")
        if ctx.acceptance and name in FROZEN_C_GAMMA:
            rec.check(f"{name} C_gamma = {FROZEN_C_GAMMA[name]}", abs(fast - FROZEN_C_GAMMA[name]),
                      detail=f"C_gamma={fast}")


def suite_action_partition(ctx: Context, rec: Recorder):
    if ctx.acceptance:
        cases = [_case(g, a, 4 if (g is G4 and a is M2B) else 5, an)
                 for g in (G2, G3, G4) for a, an in ((C2, "C2"), (M2B, "M2"))]
    else:
        cases = [ctx.config_case()]
    for case in cases:
        F = case.space(ctx.cfg.cap)
        W = F.group
        kmax = min(3, case.depth)
        worst, count = 0.0, 0
        for w, x in _basis_tensors(F, [w for w in W.enumerate_words(kmax) if w]):
            total = FockOperator.zero(F)
            for om in W.triple_splittings(w):
                total = total + F.lambda_triple(om, x)
            worst = max(worst, safe_difference(F.lam(x), total, len(w)))
            count += 1
        rec.check(f"{case.label} lambda = sum over S_w, |w| <= {kmax}", worst, 0.0, ctx.tol.exact,
                  detail=f"{count} basis tensors")


def suite_ptau_formula(ctx: Context, rec: Recorder):
    if ctx.acceptance:
        cases = [_case(G3, C2, 6, "C2"), _case(G4, C2, 6, "C2"), _case(G2, M2B, 4, "M2")]
    else:
        cases = [ctx.config_case()]
    max_rho = 4
    for ci, case in enumerate(cases):
        F = case.space(ctx.cfg.cap)
        W = F.group
        g = case.graph
        rng = ctx.rng("ptau-formula", ci)
        wmax = min(2, case.depth)
        worst, n_tau = 0.0, 0
        for w in W.enumerate_words(wmax):
            x = AlgebraicElement.random(rng, [w], F.alg_dims(), scalar=not w)
            for om in W.triple_splittings(w):
                L = F.lambda_triple(om, x)
                for d in range(max_rho + 1):
                    for rho in W.rhos(d):
                        for r in W.subcliques(rho.t):
                            tau = TauTuple(rho, r)
                            P = p_a_projection(tau, om, L, case.depth - len(w))
                            worst = max(worst, safe_difference(apply_h_tau(tau, L), L @ P, len(w)))
                            n_tau += 1
        rec.check(f"{case.label} H_tau(lambda_omega) = lambda_omega P_a, |rho| <= {max_rho}, |w| <= {wmax}",
                  worst, 0.0, ctx.tol.exact, detail=f"{n_tau} (tau, omega) pairs")
        wsel = min(3, case.depth)
        worst, n_rho = 0.0, 0
        for w in W.enumerate_words(wsel):
            if not w:
                continue
            x = AlgebraicElement.random(rng, [w], F.alg_dims(), scalar=False)
            for om in W.triple_splittings(w):
                L = F.lambda_triple(om, x)
                owner = W.rho_of_split(om)
                for d in range(max_rho + 1):
                    for rho in W.rhos(d):
                        want = L if rho == owner else FockOperator.zero(F)
                        worst = max(worst, safe_difference(h_tilde_rho(rho, g)(L), want, len(w)))
                        n_rho += 1
        rec.check(f"{case.label} H~_rho selects its own pattern, |rho| <= {max_rho}, |w| <= {wsel}",
                  worst, 0.0, ctx.tol.exact, detail=f"{n_rho} (rho, omega) pairs")


ZERO_TAU = TauTuple(RhoTuple(0, 0, (), (), ()), ())


def suite_pd_theorem(ctx: Context, rec: Recorder):
    if ctx.acceptance:
        cases = [_case(g, M2B, 4, "M2") for g in (G2, G3, G4)]
    else:
        cases = [ctx.config_case()]
    for ci, case in enumerate(cases):
        F = case.space(ctx.cfg.cap)
        g = case.graph
        rng = ctx.rng("pd-theorem", ci)
        kmax = min(3, case.depth)
        worst, worst0 = 0.0, 0.0
        for k in range(kmax + 1):
            x = AlgebraicElement.random(rng, F.group.enumerate_words(k), F.alg_dims())
            L = F.lam(x)
            for d in range(5):
                worst = max(worst, safe_difference(p_d(d, "direct")(L), p_d(d, "via_h_tau", g)(L), k))
            H0 = h_tau(ZERO_TAU)(L)
            worst0 = max(worst0, safe_difference(p_d(0, "via_h_tau", g)(L), H0, k),
                         safe_difference(p_d(0, "direct")(L), H0, k))
        rec.check(f"{case.label} P_d direct = via H_tau, d <= 4", worst, 0.0, ctx.tol.pd_modes)
        rec.check(f"{case.label} P_0 = H_(0,0,e,e,e,e)", worst0, 0.0, 1e-14)
        x = AlgebraicElement.random(rng, F.group.enumerate_words(kmax), F.alg_dims())
        for d in range(1, kmax + 1):
            lower = certified_ratio(F, x.homogeneous(d), x)
            rec.check(f"{case.label} cb lower bound of P_{d} <= C_gamma d", lower, p_d_bound(g, d))


def suite_semigroup(ctx: Context, rec: Recorder):
    if ctx.acceptance:
        cases = [_case(G4, C2, 5, "C2"), _case(G3, M2B, 4, "M2")]
        tail_cases = [_case(G2, M2B, 4, "M2"), _case(G4, C2, 5, "C2")]
    else:
        cases = tail_cases = [ctx.config_case()]
    for ci, case in enumerate(cases):
        F = case.space(ctx.cfg.cap)
        g = case.graph
        rng = ctx.rng("semigroup", ci)
        k = min(3, case.depth)
        x = AlgebraicElement.random(rng, F.group.enumerate_words(k), F.alg_dims())
        L = F.lam(x)
        worst = 0.0
        for r in (0.3, 0.7, 1.0):
            for s in (0.3, 0.7, 1.0):
                two = radial(r, mode="via_h_tau", g=g)(radial(s, mode="via_h_tau", g=g)(L))
                worst = max(worst, safe_difference(two, radial(r * s, mode="via_h_tau", g=g)(L), k))
        rec.check(f"{case.label} T_r T_s = T_rs", worst, 0.0, ctx.tol.exact)
        worst = 0.0
        for r in (0.2, 0.5, 0.9):
            prod_map = graph_product_ucp([CpMap.radial(a, r) for a in case.algebras], g)
            worst = max(worst, safe_difference(prod_map.superoperator(L), radial(r, mode="via_h_tau", g=g)(L), k))
        rec.check(f"{case.label} T_r = graph product of U_r on lambda(A_<=3)", worst, 0.0, ctx.tol.exact)
    for ci, case in enumerate(tail_cases):
        F = case.space(ctx.cfg.cap)
        rng = ctx.rng("semigroup", 100 + ci)
        x = AlgebraicElement.random(rng, F.group.enumerate_words(case.depth), F.alg_dims())
        for r in (0.5, 0.8):
            for n in (2, 4, 6):
                tail = radial(r)(x) - radial(r, n)(x)
                rec.check(f"{case.label} tail lower bound r={r} n={n}", certified_ratio(F, tail, x),
                          radial_tail_bound(case.graph, r, n))


def suite_ucp_product(ctx: Context, rec: Recorder):
    if ctx.acceptance:
        cases = [_case(G3, M2B, 3, "M2"), _case(G4, M2B, 3, "M2")]
    else:
        cases = [ctx.config_case()]
    families = 20
    for ci, case in enumerate(cases):
        F = case.space(ctx.cfg.cap)
        worst, worst_state = 0.0, 0.0
        for fam in range(families):
            rng = ctx.rng("ucp-product", ci, fam)
            maps = [CpMap.random_ucp(a, rng, terms=2) for a in case.algebras]
            P = graph_product_ucp(maps, case.graph)
            x = AlgebraicElement.random(rng, F.group.enumerate_words(min(2, case.depth)), F.alg_dims())
            worst = max(worst, P.certify(x, case.depth))
            L = F.lam(x)
            worst_state = max(worst_state, abs(vacuum_state(P.superoperator(L)) - vacuum_state(L)))
        rec.check(f"{case.label} Stinespring identity, {families} families", worst, 0.0, ctx.tol.exact)
        rec.check(f"{case.label} state preserved, {families} families", worst_state, 0.0, ctx.tol.state)


def suite_khintchine(ctx: Context, rec: Recorder):
    if ctx.acceptance:
        cases = [(f"{GRAPH_NAMES[g]} C2", g, (C2,) * g.vertex_count) for g in (G2, G3, G4)]
        d_max = 3
    else:
        cases = [("config", ctx.cfg.graph, ctx.algebras())]
        d_max = ctx.cfg.d_max
    samples = ctx.cfg.samples
    for ci, (label, g, algs) in enumerate(cases):
        ff = FreeFock(g, list(algs), depth=2, cap=ctx.cfg.cap)
        for d in range(1, d_max + 1):
            if not _words_of_length(ff.group, d):
                rec.skip(f"{label} dilation and contraction d={d}", f"the group has no word of length {d}")
                continue
            worst, nontrivial, gens = 0.0, 0, 0
            for w in _words_of_length(ff.group, d):
                for m in np.ndindex(*(ff.cdims[x] for x in w)):
                    chk = DilationChecker(ff, AlgebraicElement.basis_tensor(w, m, ff.cdims))
                    gens += 1
                    for rho in ff.group.rhos(d):
                        res = chk.check(rho)
                        worst = max(worst, res.residual)
                        nontrivial += res.lhs_size > 0
            rec.check(f"{label} dilation identity d={d}", worst, 0.0, ctx.tol.dilation,
                      detail=f"{gens} generators, {nontrivial} nonzero components")
            for level in (1, 2):
                res = contraction_search(ff, d, level, samples=samples, steps=8,
                                         seed=int(ctx.rng("khintchine-dilation", ci, d, level).integers(2**31)))
                rec.check(f"{label} contraction ratio d={d} level={level}", res.max_ratio, 1.0,
                          ctx.tol.contraction, detail=f"{res.samples} samples")


def _block_map(alg, rng):
    """A state-preserving map with identity on the unit and a random centered block."""
    n = alg.dim
    M = np.zeros((n, n), dtype=complex)
    M[0, 0] = 1.0
    M[1:, 0] = rng.standard_normal(n - 1)
    M[1:, 1:] = rng.standard_normal((n - 1, n - 1))
    return CpMap(alg, alg, M, "block")


def suite_norm_tables(ctx: Context, rec: Recorder):
    if ctx.acceptance:
        cases = [_case(G3, M2, 4, "M2"), _case(G4, M2, 3, "M2")]
    else:
        cases = [ctx.config_case()]
    families = 10
    for ci, case in enumerate(cases):
        F = case.space(ctx.cfg.cap)
        g = case.graph
        d_max = min(3, case.depth)
        degrees = [d for d in range(1, d_max + 1) if _words_of_length(F.group, d)]
        for d in range(1, d_max + 1):
            if d not in degrees:
                rec.skip(f"{case.label} d={d} cb bound", f"the group has no word of length {d}")
        for fam in range(families):
            rng = ctx.rng("norm-tables", ci, fam)
            maps = [_block_map(a, rng) for a in case.algebras]
            for d in degrees:
                S, bound = graph_product_cb_on_Ad(maps, d, g)
                x = AlgebraicElement.random(rng, _words_of_length(F.group, d), F.alg_dims(), scalar=False)
                lower = certified_ratio(F, S(x), x)
                rec.check(f"{case.label} family {fam} d={d} cb lower <= (#Cliq)^3 d C^d", lower, bound,
                          detail=f"C={max(constant_c(T) for T in maps):.4g}")
        worst_l2, worst_exact = -np.inf, 0.0
        for fam in range(families):
            rng = ctx.rng("norm-tables", ci, 1000 + fam)
            T = [_block_map(a, rng) for a in case.algebras]
            S = [CpMap.radial(a, rng.uniform()) for a in case.algebras]
            for d in degrees:
                a, b = graph_product_on_fock(T, d, g), graph_product_on_fock(S, d, g)
                worst_exact = max(worst_exact, abs(a.norm() - a.norm_direct()) / max(a.norm_direct(), 1e-300))
                worst_l2 = max(worst_l2, a.difference_norm(b) - a.difference_bound(b) * (1 + 1e-12))
        rec.check(f"{case.label} L2 difference estimate, {families} families", max(worst_l2, 0.0))
        rec.check(f"{case.label} Fock product norm, Kronecker vs direct", worst_exact, 0.0, 1e-10)


HECKE_Q = (0.5, 1.0, 2.0)


def _hecke_instance(ctx: Context, rec: Recorder, label: str, g: SimpleGraph, verts, depth: int):
    margins = [trace_gram_min(W, q) for W, q in verts]
    if min(margins) <= 0.0:
        rec.skip(f"{label} D={depth} relations", f"state at the identity is not faithful (gram {min(margins):.1e})")
        return
    rep = verify_hecke_graph_product(g, verts, depth, tol=ctx.tol.hecke, cap=ctx.cfg.cap)
    for c in rep.checks:
        rec.check(f"{label} D={depth} {c.name}", c.residual, 0.0, c.tolerance)


def suite_hecke(ctx: Context, rec: Recorder):
    if ctx.acceptance:
        a1, i23 = FiniteCoxeter.a1(), FiniteCoxeter.dihedral(3)
        cases = [("G3 A1,A1", G3, lambda q: [(a1, q), (a1, q)]),
                 ("G4 A1,I2(3),A1", G4, lambda q: [(a1, q), (i23, q), (a1, q)])]
        for label, g, verts in cases:
            for q in HECKE_Q:
                _hecke_instance(ctx, rec, f"{label} q={q}", g, verts(q), 6)
        return
    specs = ctx.cfg.algebras
    if any(s.kind != "hecke" for s in specs):
        rec.skip("hecke relations", "the configured vertex algebras are not Hecke algebras")
        return
    verts = [(FiniteCoxeter.parse(s.coxeter), s.q) for s in specs]
    _hecke_instance(ctx, rec, "config", ctx.cfg.graph, verts, ctx.cfg.depth)


NET_EPSILONS = (0.1, 0.01, 0.001)
NET_SIZES = (4, 16, 64, 256)


def _transpose_map(alg):
    return CpMap.from_block_function(alg, alg, lambda parts: [p.T for p in parts])


def synthetic_net(graph: SimpleGraph, algebras: Sequence[VertexAlgebra], epsilons=NET_EPSILONS) -> CcapNet:
    """V_j = id + c_j (T - id) with T the transpose (or the state map on abelian data), c_j
    chosen so that the per-vertex error is exactly epsilons[j]; U_j = id."""
    V, U = [], []
    for alg in algebras:
        ident = CpMap.identity(alg)
        T = _transpose_map(alg)
        if np.abs((T - ident).matrix).max() < 1e-12:
            T = CpMap.state_map(alg)
        D = T - ident
        base = cb_upper(D) + l2_norm(D) + l2_op_norm(D)  # the per-vertex error of the net
        V.append([ident + (eps / base) * (T - ident) for eps in epsilons])
        U.append([ident for _ in epsilons])
    return CcapNet(graph, V, U)


def suite_ccap_net(ctx: Context, rec: Recorder):
    case = _case(G3, M2, 2, "M2") if ctx.acceptance else ctx.config_case()
    F = case.space(ctx.cfg.cap)
    net = synthetic_net(case.graph, case.algebras)
    for j, eps in enumerate(NET_EPSILONS):
        rec.check(f"{case.label} net error at j={j} equals {eps}", abs(net.max_epsilon(j) - eps), 0.0, 1e-12 * eps)
    rng = ctx.rng("ccap-net", 0)
    words = F.group.enumerate_words(case.depth)
    tests = [AlgebraicElement.random(rng, words, F.alg_dims()) for _ in range(10)]
    for N in NET_SIZES[:2]:
        reps = [ccap_net(net, N, j, F, tests[:3])[2] for j in range(len(NET_EPSILONS))]
        ups = [r.cb_upper for r in reps]
        l2s = [r.l2_upper for r in reps]
        steps = sum(a <= b for a, b in zip(ups, ups[1:])) + sum(a <= b for a, b in zip(l2s, l2s[1:]))
        rec.check(f"{case.label} N={N} gap upper bounds decrease in j", steps,
                  detail="cb " + ", ".join(f"{u:.4g}" for u in ups))
        lows = max(max(r.cb_lower - r.cb_upper, r.l2_lower - r.l2_upper, r.l2op_lower - r.l2_upper) for r in reps)
        rec.check(f"{case.label} N={N} measured gaps below upper bounds", max(lows, 0.0))
    for j in range(len(NET_EPSILONS)):
        bad, first, last = 0, 0.0, 0.0
        for x in tests:
            L = F.lam(x)
            errs = [(F.lam(ccap_net(net, N, j)[0](x)) - L).norm() for N in NET_SIZES]
            bad += sum(a <= b for a, b in zip(errs, errs[1:]))
            first, last = max(first, errs[0]), max(last, errs[-1])
        rec.check(f"{case.label} j={j} ||D_N,j(lambda a) - lambda(a)|| decreases in N", bad,
                  detail=f"N={NET_SIZES[0]}: {first:.3e}, N={NET_SIZES[-1]}: {last:.3e}")


SUITE_FUNCTIONS: dict[str, Callable[[Context, Recorder], None]] = {
    "coxeter-oracle": suite_coxeter_oracle,
    "sw-partition": suite_sw_partition,
    "c-gamma": suite_c_gamma,
    "action-partition": suite_action_partition,
    "ptau-formula": suite_ptau_formula,
    "pd-theorem": suite_pd_theorem,
    "semigroup": suite_semigroup,
    "ucp-product": suite_ucp_product,
    "khintchine-dilation": suite_khintchine,
    "norm-tables": suite_norm_tables,
    "hecke": suite_hecke,
    "ccap-net": suite_ccap_net,
}
assert tuple(SUITE_FUNCTIONS) == SUITES


def run_suite(cfg: RunConfig, suite: str) -> SuiteReport:
    ctx = Context(cfg)
    rec = Recorder(suite)
    SUITE_FUNCTIONS[suite](ctx, rec)
    return SuiteReport(suite, rec.checks, cfg.seed, cfg.config_hash())


def run(cfg: RunConfig) -> RunReport:
    """Run the selected suites; the report order follows the configured suite order."""
    order = list(dict.fromkeys(cfg.suites))
    if cfg.workers > 1 and len(order) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            reports = list(pool.map(lambda s: run_suite(cfg, s), order))
    else:
        reports = [run_suite(cfg, s) for s in order]
    return RunReport(reports, cfg.seed, cfg.config_hash())


def enumerate_text(cfg: RunConfig, what: str, word: Sequence[int] | None = None) -> str:
    W = group(cfg.graph)
    lines: list[str] = []
    if what == "words":
        lines = [word_str(w) for w in W.enumerate_words(cfg.depth)]
    elif what == "cliques":
        lines = [word_str(c) for c in W.cliques()]
    elif what == "T":
        lines = [f"u_l={word_str(a)} u_r={word_str(b)} t={word_str(t)}" for a, b, t in W.enumerate_clique_triples()]
    elif what == "S_w":
        words = [W.normal_form(word)] if word is not None else W.enumerate_words(cfg.depth)
        for w in words:
            for s in W.triple_splittings(w):
                lines.append(f"{word_str(w)}: {word_str(s.w1)} | {word_str(s.w2)} | {word_str(s.w3)}")
    elif what == "C_gamma":
        lines = [str(W.c_gamma())]
        lines += [f"u_l={word_str(a)} u_r={word_str(b)} t={word_str(t)} weight={2 ** len(t)}"
                  for a, b, t in W.enumerate_clique_triples()]
    else:
        raise ValueError(f"unknown enumeration {what!r}")
    return "\n".join(lines) + "\n"
