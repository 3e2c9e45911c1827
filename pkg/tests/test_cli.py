import json
import textwrap

import pytest
from hypothesis import given, settings, strategies as st

from graphprod.cli import main
from graphprod.config import ConfigError, fock_dimension, load_config, parse_config
from graphprod.coxeter import G2, SimpleGraph
from graphprod.suites import enumerate_text, run, synthetic_net
from graphprod.valg import VertexAlgebra

SMALL = """\
graph: G3
algebras: c2
depth: 3
d_max: 2
scope: config
samples: 5
suites: [c-gamma, pd-theorem]
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def test_empty_suite_list_gives_empty_passing_report(tmp_path, capsys):
    cfg = parse_config({"suites": []})
    rep = run(cfg)
    assert rep.passed and rep.checks == []
    p = write(tmp_path, SMALL)
    out = tmp_path / "r.jsonl"
    assert main(["run", "--config", str(p), "--no-suites", "--out", str(out)]) == 0
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    assert lines[0]["fingerprint"]["suites"] == []
    assert lines[-1] == {"summary": {"checks": 0, "failed": 0, "passed": True}}


def test_self_loop_is_a_parse_error_with_location(tmp_path, capsys):
    p = write(tmp_path, """\
        graph:
          vertices: 3
          edges:
            - [0, 1]
            - [2, 2]
        """)
    with pytest.raises(ConfigError, match=r"cfg.yaml:5: graph.edges\[1\]: self-loop at vertex 2"):
        load_config(p)
    assert main(["run", "--config", str(p)]) == 2
    assert "self-loop" in capsys.readouterr().err


def test_yaml_syntax_error_reports_line(tmp_path):
    p = write(tmp_path, "graph: G3\nalgebras: [c2\nseed: 1\n")
    with pytest.raises(ConfigError, match="cfg.yaml:3"):
        load_config(p)


@pytest.mark.parametrize("data, where", [
    ({"graph": "G7"}, "graph"),
    ({"algebras": ["c2"]}, "algebras"),
    ({"algebras": {"preset": "m3"}}, "algebras.preset"),
    ({"algebras": {"hecke": "B2"}}, "algebras.hecke"),
    ({"algebras": {"blocks": [2], "densities": [[[1, 0], [0, 0]]]}}, "algebras.densities"),
    ({"suites": ["nope"]}, r"suites\[0\]"),
    ({"depth": -1}, "depth"),
    ({"colour": 1}, "colour"),
])
def test_invalid_configs_name_the_key(data, where):
    with pytest.raises(ConfigError, match=where):
        parse_config(data)


def test_resource_guard_refuses_before_allocation(tmp_path, capsys):
    # free group on two letters: 2 words of each positive length, M2 has 3 centered dims
    depth = 8
    dim = 1 + sum(2 * 3 ** k for k in range(1, depth + 1))
    assert fock_dimension(G2, (3, 3), depth) == dim
    p = write(tmp_path, f"graph: G2\nalgebras: m2\ndepth: {depth}\nscope: config\n")
    with pytest.raises(ConfigError, match=f"dimension {dim} exceeds the cap 5000"):
        load_config(p)
    assert main(["run", "--config", str(p)]) == 2
    assert str(dim) in capsys.readouterr().err


def test_enumerate_examples(tmp_path, capsys):
    g1 = write(tmp_path, "graph: G1\n", "g1.yaml")
    assert main(["enumerate", "--config", str(g1), "--what", "C_gamma"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "5"
    assert sum(int(x.rsplit("=", 1)[1]) for x in lines[1:]) == 5
    g2 = write(tmp_path, "graph: G2\n", "g2.yaml")
    main(["enumerate", "--config", str(g2), "--what", "T"])
    assert len(capsys.readouterr().out.splitlines()) == 9
    g3 = write(tmp_path, "graph: G3\ndepth: 6\n", "g3.yaml")
    main(["enumerate", "--config", str(g3), "--what", "words"])
    assert capsys.readouterr().out.splitlines() == ["e", "0", "1", "0 1"]
    main(["enumerate", "--config", str(g3), "--what", "S_w", "--word", "1 0"])
    assert len(capsys.readouterr().out.splitlines()) == 9


def test_enumerate_is_sorted_and_stable():
    cfg = parse_config({"graph": "G4", "depth": 3})
    a = enumerate_text(cfg, "cliques")
    assert a == enumerate_text(cfg, "cliques")
    assert a.splitlines() == ["e", "0", "1", "2", "0 1", "1 2"]


def test_run_writes_records_text_and_timings(tmp_path, capsys):
    p = write(tmp_path, SMALL)
    out = tmp_path / "reports" / "run.jsonl"
    assert main(["run", "--config", str(p), "--out", str(out), "--quiet"]) == 0
    assert capsys.readouterr().out.startswith("overall: PASS")
    recs = [json.loads(x) for x in out.read_text().splitlines()[1:-1]]
    assert {r["suite"] for r in recs} == {"c-gamma", "pd-theorem"}
    assert all("wall" not in json.dumps(r) for r in recs)
    names = [(r["suite"], r["check"]) for r in recs]
    assert len(names) == len(set(names))
    assert (tmp_path / "reports" / "run.txt").read_text().rstrip().endswith("overall: PASS")
    timings = json.loads((tmp_path / "reports" / "run.timings.json").read_text())
    assert len(timings) == len(recs)


def test_identical_config_and_seed_give_identical_records(tmp_path):
    p = write(tmp_path, SMALL)
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.jsonl"
        main(["run", "--config", str(p), "--out", str(out), "--quiet"])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    other = tmp_path / "seed.jsonl"
    main(["run", "--config", str(p), "--out", str(other), "--seed", "5", "--quiet"])
    assert other.read_bytes() != outs[0]


def test_workers_do_not_change_records():
    data = {"graph": "G3", "depth": 3, "scope": "config", "samples": 5,
            "suites": ["c-gamma", "sw-partition", "semigroup"]}
    one = run(parse_config(data))
    three = run(parse_config({**data, "workers": 3}))
    assert one.records() == three.records()
    assert [s.suite for s in one.suites] == data["suites"]


def test_failing_check_gives_nonzero_exit(tmp_path, capsys):
    p = write(tmp_path, SMALL.replace("suites: [c-gamma, pd-theorem]", "suites: [pd-theorem]")
              + "tolerances:\n  pd_modes: -1.0\n")
    assert main(["run", "--config", str(p)]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "overall: FAIL" in out


def test_config_scope_runs_every_suite_on_small_data():
    cfg = parse_config({"graph": "G4", "algebras": ["c2", "m2", "c2"], "depth": 3, "d_max": 2,
                        "scope": "config", "samples": 4})
    rep = run(cfg)
    assert rep.passed, [c.record() for c in rep.checks if c.status == "fail"]
    assert [s.suite for s in rep.suites] == list(cfg.suites)
    skipped = [c for c in rep.checks if c.status == "skip"]
    assert [c.suite for c in skipped] == ["hecke"]


def test_hecke_vertices_from_config(tmp_path):
    p = write(tmp_path, """\
        graph: G3
        algebras:
          - {hecke: A1, q: 0.5}
          - {hecke: A1, q: 2.0}
        depth: 3
        scope: config
        suites: [hecke]
        """)
    rep = run(load_config(p))
    assert rep.passed and any("commute" in c.name for c in rep.checks)


def test_synthetic_net_hits_the_requested_errors():
    for alg in (VertexAlgebra.matrix(2), VertexAlgebra.cn([0.3, 0.7])):
        net = synthetic_net(G2, [alg, alg], (0.2, 0.02))
        assert net.max_epsilon(0) == pytest.approx(0.2, rel=1e-12)
        assert net.max_epsilon(1) == pytest.approx(0.02, rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                                            .filter(lambda e: e[0] < e[1])))))
def test_combinatorial_suites_pass_on_random_graphs(data):
    n, edges = data
    cfg = parse_config({"graph": {"vertices": n, "edges": [list(e) for e in sorted(edges)]},
                        "depth": 3, "scope": "config", "suites": ["sw-partition", "c-gamma"]})
    assert cfg.graph == SimpleGraph.from_edges(n, edges)
    rep = run(cfg)
    assert rep.passed and len(rep.checks) == 4
