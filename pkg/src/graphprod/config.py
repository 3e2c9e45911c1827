"""Run configuration: YAML ingestion, validation with source locations, resource guard."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from graphprod.coxeter import NAMED_GRAPHS, SimpleGraph, group
from graphprod.fock import DEFAULT_CAP
from graphprod.valg import VertexAlgebra

SUITES = (
    "coxeter-oracle",
    "sw-partition",
    "c-gamma",
    "action-partition",
    "ptau-formula",
    "pd-theorem",
    "semigroup",
    "ucp-product",
    "khintchine-dilation",
    "norm-tables",
    "hecke",
    "ccap-net",
)

PRESETS = {
    "c2": lambda: VertexAlgebra.cn([0.3, 0.7]),
    "c2-uniform": lambda: VertexAlgebra.cn([0.5, 0.5]),
    "c3": lambda: VertexAlgebra.cn([0.2, 0.3, 0.5]),
    "m2": lambda: VertexAlgebra.matrix(2),
    "m2-biased": lambda: VertexAlgebra.matrix(2, [0.3, 0.7]),
}
PRESET_CENTERED_DIMS = {"c2": 1, "c2-uniform": 1, "c3": 2, "m2": 3, "m2-biased": 3}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with ``source:line: key.path``."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True)
class AlgebraSpec:
    kind: str  # "preset", "blocks" or "hecke"
    preset: str = ""
    blocks: tuple = ()
    densities: tuple = ()
    coxeter: str = ""
    q: float = 1.0

    def build(self) -> VertexAlgebra:
        if self.kind == "preset":
            return PRESETS[self.preset]()
        if self.kind == "blocks":
            return VertexAlgebra.from_blocks(list(self.blocks), [np.array(d, dtype=complex) for d in self.densities])
        from graphprod.hecke import FiniteCoxeter, hecke_vertex
        return hecke_vertex(FiniteCoxeter.parse(self.coxeter), self.q)

    def centered_dim(self) -> int:
        if self.kind == "preset":
            return PRESET_CENTERED_DIMS[self.preset]
        if self.kind == "blocks":
            return sum(n * n for n in self.blocks) - 1
        from graphprod.hecke import FiniteCoxeter
        return FiniteCoxeter.parse(self.coxeter).order - 1


@dataclass
class Tolerances:
    exact: float = 1e-10
    pd_modes: float = 1e-8
    dilation: float = 1e-8
    contraction: float = 1e-6
    hecke: float = 1e-12
    state: float = 1e-12


@dataclass
class OutputPaths:
    jsonl: str | None = None
    text: str | None = None


@dataclass
class RunConfig:
    graph: SimpleGraph
    algebras: list
    depth: int = 4
    d_max: int = 3
    seed: int = 0
    suites: list = field(default_factory=lambda: list(SUITES))
    scope: str = "acceptance"
    cap: int = DEFAULT_CAP
    samples: int = 200
    workers: int = 1
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputPaths = field(default_factory=OutputPaths)
    source: str = "<config>"
    raw: dict = field(default_factory=dict)

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def vertex_algebras(self) -> list[VertexAlgebra]:
        return [spec.build() for spec in self.algebras]

    def centered_dims(self) -> tuple:
        return tuple(spec.centered_dim() for spec in self.algebras)

    def with_suites(self, suites) -> "RunConfig":
        return replace(self, suites=list(suites), raw={**self.raw, "suites": list(suites)})

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=int(seed), raw={**self.raw, "seed": int(seed)})


def fock_dimension(graph: SimpleGraph, cdims, depth: int) -> int:
    """Basis size of the truncated Fock space, counted from words without allocating it."""
    total = 0
    for w in group(graph).enumerate_words(depth):
        total += int(np.prod([cdims[v] for v in w], dtype=np.int64))
    return total


def check_resource_guard(graph: SimpleGraph, cdims, depth: int, cap: int, where: str = "depth"):
    dim = fock_dimension(graph, cdims, depth)
    if dim > cap:
        raise ConfigError(where, f"truncated Fock dimension {dim} exceeds the cap {cap}")
    return dim


# ---------------------------------------------------------------------------------
# parsing


def _line_index(node, path=(), out=None) -> dict:
    """Map key paths to 1-based source lines from a composed YAML node tree."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _line_index(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_index(v, path + (i,), out)
    return out


class _Reader:
    def __init__(self, source: str, lines: dict):
        self.source = source
        self.lines = lines

    def where(self, path) -> str:
        key = ".".join(f"[{p}]" if isinstance(p, int) else str(p) for p in path).replace(".[", "[")
        probe = tuple(path)
        while probe and probe not in self.lines:
            probe = probe[:-1]
        line = self.lines.get(probe)
        loc = f"{self.source}:{line}" if line else self.source
        return f"{loc}: {key or '<root>'}"

    def fail(self, path, message):
        raise ConfigError(self.where(path), message)

    def integer(self, value, path, low=None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
        if low is not None and value < low:
            self.fail(path, f"must be at least {low}")
        return value

    def number(self, value, path, positive=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        if positive and value <= 0:
            self.fail(path, "must be positive")
        return float(value)


def _graph(r: _Reader, value, path=("graph",)) -> SimpleGraph:
    if isinstance(value, str):
        if value not in NAMED_GRAPHS:
            r.fail(path, f"unknown graph {value!r}; named graphs are {', '.join(NAMED_GRAPHS)}")
        return NAMED_GRAPHS[value]
    if not isinstance(value, dict):
        r.fail(path, "expected a graph name or a mapping with 'vertices' and 'edges'")
    n = r.integer(value.get("vertices"), path + ("vertices",), low=1)
    edges = value.get("edges", [])
    if not isinstance(edges, list):
        r.fail(path + ("edges",), "expected a list of vertex pairs")
    clean = []
    for i, e in enumerate(edges):
        p = path + ("edges", i)
        if not isinstance(e, list) or len(e) != 2:
            r.fail(p, f"expected a pair of vertices, got {e!r}")
        u, v = (r.integer(x, p, low=0) for x in e)
        if u == v:
            r.fail(p, f"self-loop at vertex {u}")
        if u >= n or v >= n:
            r.fail(p, f"edge {(u, v)} out of range for {n} vertices")
        clean.append((u, v))
    return SimpleGraph.from_edges(n, clean)


def _algebra(r: _Reader, value, path) -> AlgebraSpec:
    if isinstance(value, str):
        value = {"preset": value}
    if not isinstance(value, dict):
        r.fail(path, "expected a preset name or a mapping")
    if "preset" in value:
        name = value["preset"]
        if name not in PRESETS:
            r.fail(path + ("preset",), f"unknown preset {name!r}; presets are {', '.join(PRESETS)}")
        return AlgebraSpec("preset", preset=name)
    if "hecke" in value:
        from graphprod.hecke import FiniteCoxeter
        try:
            FiniteCoxeter.parse(str(value["hecke"]))
        except ValueError as exc:
            r.fail(path + ("hecke",), str(exc))
        q = r.number(value.get("q", 1.0), path + ("q",), positive=True)
        return AlgebraSpec("hecke", coxeter=str(value["hecke"]), q=q)
    if "blocks" in value:
        blocks = value["blocks"]
        if not isinstance(blocks, list) or not blocks:
            r.fail(path + ("blocks",), "expected a nonempty list of block sizes")
        blocks = tuple(r.integer(b, path + ("blocks", i), low=1) for i, b in enumerate(blocks))
        dens = value.get("densities")
        if dens is None:
            total = sum(blocks)
            dens = [np.eye(n) / total for n in blocks]
        try:
            VertexAlgebra.from_blocks(list(blocks), [np.array(d, dtype=complex) for d in dens])
        except (ValueError, TypeError) as exc:
            r.fail(path + ("densities",), str(exc))
        return AlgebraSpec("blocks", blocks=blocks, densities=tuple(np.array(d).tolist() for d in dens))
    r.fail(path, "algebra needs one of 'preset', 'blocks' or 'hecke'")


def parse_config(data: Any, source: str = "<config>", lines: dict | None = None) -> RunConfig:
    r = _Reader(source, lines or {})
    if data is None:
        data = {}
    if not isinstance(data, dict):
        r.fail((), "the configuration must be a mapping")
    known = {"graph", "algebras", "depth", "d_max", "seed", "suites", "scope", "cap", "samples", "workers",
             "tolerances", "output"}
    for k in data:
        if k not in known:
            r.fail((k,), "unknown key")
    graph = _graph(r, data.get("graph", "G3"))
    algs = data.get("algebras", "c2")
    if isinstance(algs, list):
        if len(algs) != graph.vertex_count:
            r.fail(("algebras",), f"{len(algs)} algebras given for {graph.vertex_count} vertices")
        specs = [_algebra(r, a, ("algebras", i)) for i, a in enumerate(algs)]
    else:
        specs = [_algebra(r, algs, ("algebras",))] * graph.vertex_count
    depth = r.integer(data.get("depth", 4), ("depth",), low=0)
    d_max = r.integer(data.get("d_max", 3), ("d_max",), low=0)
    seed = r.integer(data.get("seed", 0), ("seed",), low=0)
    cap = r.integer(data.get("cap", DEFAULT_CAP), ("cap",), low=1)
    samples = r.integer(data.get("samples", 200), ("samples",), low=1)
    workers = r.integer(data.get("workers", 1), ("workers",), low=1)
    scope = data.get("scope", "acceptance")
    if scope not in ("acceptance", "config"):
        r.fail(("scope",), "scope must be 'acceptance' or 'config'")
    suites = data.get("suites", list(SUITES))
    if suites is None:
        suites = []
    if not isinstance(suites, list):
        r.fail(("suites",), "expected a list of suite ids")
    for i, s in enumerate(suites):
        if s not in SUITES:
            r.fail(("suites", i), f"unknown suite {s!r}")
    tol = Tolerances()
    for k, v in (data.get("tolerances") or {}).items():
        if not hasattr(tol, k):
            r.fail(("tolerances", k), "unknown tolerance")
        setattr(tol, k, r.number(v, ("tolerances", k)))
    out = OutputPaths()
    for k, v in (data.get("output") or {}).items():
        if not hasattr(out, k):
            r.fail(("output", k), "unknown output kind")
        setattr(out, k, None if v is None else str(v))
    cdims = tuple(s.centered_dim() for s in specs)
    if scope == "config":
        check_resource_guard(graph, cdims, depth, cap, r.where(("depth",)))
    raw = {"graph": graph.vertex_count, "edges": graph.edge_list(), "algebras": [s.__dict__ for s in specs],
           "depth": depth, "d_max": d_max, "seed": seed, "suites": list(suites), "scope": scope, "cap": cap,
           "samples": samples, "tolerances": tol.__dict__}
    return RunConfig(graph, specs, depth, d_max, seed, list(suites), scope, cap, samples, workers, tol, out,
                     source, raw)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark else str(path)
        raise ConfigError(where, f"YAML syntax error: {getattr(exc, 'problem', exc)}") from None
    lines = _line_index(node) if node is not None else {}
    return parse_config(data, str(path), lines)
