"""``fracgraph <command> --config FILE [--set key=value]... [--branch pos|neg] [--out DIR]``

Exit codes: 0 ok, 1 validation failure, 2 numerical non-convergence,
3 I/O or configuration error.  Human-readable messages go to stderr.
"""
from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .calculus import (
    PotentialH,
    divergence_s,
    frac_gradient,
    ibp_residual,
    norm_report,
    write_norm_report,
)
from .errors import (
    ConfigError,
    FracGraphError,
    GraphIOError,
    NotConverged,
    NumericalError,
    ParseError,
    RangeError,
    SchemaError,
)
from .graph import generate_standard, load_graph, validate_graph
from .kernel import (
    QuadratureConfig,
    export_bounds_csv,
    export_kernel_csv,
    frac_laplacian_apply,
    kernel_diagnostics,
    ws_quadrature,
    ws_spectral,
)
from .nonlinearity import builtin_nonlinearity
from .schrodinger import SolverConfig, export_solution, ground_state_solve, mountain_pass_solve
from .spectral import eigendecompose, export_spectrum_csv, mass_check

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2, 3
COMMANDS = ("validate", "kernel", "solve", "check")

DEFAULTS = {
    "graph": None,
    "s": 0.5,
    "potential": {"constant": 1.0},
    "nonlinearity": "cubic",
    "solver": {},
    "outputs": "fracgraph_out",
    "kernel": {"compare_quadrature": False},
    "solve": {"method": "nehari", "path_nodes": 21},
    "check": {"n_random": 100, "seed": 0},
}
SECTION_KEYS = {
    "kernel": {"compare_quadrature"},
    "solve": {"method", "path_nodes"},
    "check": {"n_random", "seed"},
}
SOLVER_KEYS = {f.name for f in fields(SolverConfig)}


@dataclass
class RunConfig:
    graph: dict
    s: list
    potential: dict
    nonlinearity: dict
    solver: SolverConfig
    outputs: str
    kernel: dict = field(default_factory=dict)
    solve: dict = field(default_factory=dict)
    check: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "graph": self.graph,
            "s": self.s,
            "potential": self.potential,
            "nonlinearity": self.nonlinearity,
            "solver": asdict(self.solver),
            "outputs": self.outputs,
            "kernel": self.kernel,
            "solve": self.solve,
            "check": self.check,
        }


# -- configuration ----------------------------------------------------------

def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_override(doc, item):
    if "=" not in item:
        raise SchemaError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise SchemaError(f"bad override key {key!r}")
    node = doc
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = _parse_value(raw)


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where} must be a number, got {v!r}")
    return float(v)


def _check_s_list(s):
    vals = s if isinstance(s, list) else [s]
    if not vals:
        raise SchemaError("s must not be empty")
    out = []
    for v in vals:
        v = _number(v, "s")
        if not 0 < v < 1:
            raise RangeError(f"s must lie in (0, 1), got {v}")
        out.append(v)
    return out


def _check_graph_section(g):
    if not isinstance(g, dict):
        raise SchemaError("graph must be an object with 'file' or 'generator'")
    if ("file" in g) == ("generator" in g):
        raise SchemaError("graph needs exactly one of 'file' or 'generator'")
    if "file" in g:
        if set(g) != {"file"} or not isinstance(g["file"], str):
            raise SchemaError("graph.file must be the only key and a string")
    elif not isinstance(g["generator"], str):
        raise SchemaError("graph.generator must be a string")
    return dict(g)


def _check_potential(p):
    if isinstance(p, (int, float)) and not isinstance(p, bool):
        p = {"constant": p}
    if not isinstance(p, dict) or len(p) != 1:
        raise SchemaError("potential must have exactly one of 'constant', 'file', 'ramp'")
    (kind, val), = p.items()
    if kind == "constant":
        if _number(val, "potential.constant") <= 0:
            raise RangeError(f"potential constant must be positive, got {val}")
    elif kind == "file":
        if not isinstance(val, str):
            raise SchemaError("potential.file must be a path")
    elif kind == "ramp":
        if not isinstance(val, dict) or not set(val) <= {"a", "b", "x0"}:
            raise SchemaError("potential.ramp takes keys a, b, x0")
        a = _number(val.get("a", 1.0), "potential.ramp.a")
        b = _number(val.get("b", 1.0), "potential.ramp.b")
        if a <= 0 or b < 0:
            raise RangeError("ramp needs a > 0 and b >= 0 so that h0 > 0")
    else:
        raise SchemaError(f"unknown potential kind {kind!r}")
    return {kind: val}


def _check_nonlinearity(nl):
    if isinstance(nl, str):
        nl = {"name": nl}
    if not isinstance(nl, dict) or "name" not in nl or not set(nl) <= {"name", "p"}:
        raise SchemaError("nonlinearity must be a name or {name, p}")
    return dict(nl)


def _check_section(name, val):
    if not isinstance(val, dict):
        raise SchemaError(f"{name} must be an object")
    unknown = set(val) - SECTION_KEYS[name]
    if unknown:
        raise SchemaError(f"unknown keys in {name}: {sorted(unknown)}")
    out = dict(DEFAULTS[name])
    out.update(val)
    return out


def parse_config(path=None, overrides=(), out=None) -> RunConfig:
    """Load a JSON config (optional), apply ``key=value`` overrides and validate."""
    doc = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise GraphIOError(f"cannot read config {path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from exc
        if not isinstance(doc, dict):
            raise SchemaError("config must be a JSON object")
    doc = copy.deepcopy(doc)
    for item in overrides:
        _apply_override(doc, item)
    if out is not None:
        doc["outputs"] = out
    unknown = set(doc) - set(DEFAULTS)
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    merged = {k: copy.deepcopy(v) for k, v in DEFAULTS.items()}
    merged.update(doc)
    if merged["graph"] is None:
        raise SchemaError("config needs a 'graph' section")
    solver = merged["solver"]
    if not isinstance(solver, dict) or not set(solver) <= SOLVER_KEYS:
        raise SchemaError(f"solver keys must be among {sorted(SOLVER_KEYS)}")
    for key, val in solver.items():
        if key in ("max_iters", "seed"):
            if isinstance(val, bool) or not isinstance(val, int):
                raise SchemaError(f"solver.{key} must be an integer, got {val!r}")
        else:
            _number(val, f"solver.{key}")
    try:
        solver_cfg = SolverConfig(**solver)
    except (TypeError, ValueError) as exc:
        raise RangeError(f"solver: {exc}") from exc
    if not isinstance(merged["outputs"], str):
        raise SchemaError("outputs must be a directory path")
    return RunConfig(
        graph=_check_graph_section(merged["graph"]),
        s=_check_s_list(merged["s"]),
        potential=_check_potential(merged["potential"]),
        nonlinearity=_check_nonlinearity(merged["nonlinearity"]),
        solver=solver_cfg,
        outputs=merged["outputs"],
        kernel=_check_section("kernel", merged["kernel"]),
        solve=_check_section("solve", merged["solve"]),
        check=_check_section("check", merged["check"]),
    )


# -- materialization --------------------------------------------------------

def build_graph_from(cfg: RunConfig):
    g = cfg.graph
    if "file" in g:
        return load_graph(g["file"])
    params = {k: v for k, v in g.items() if k != "generator"}
    return generate_standard(g["generator"], params)


def build_potential(cfg: RunConfig, graph) -> PotentialH:
    (kind, val), = cfg.potential.items()
    if kind == "constant":
        return PotentialH.constant(graph, val)
    if kind == "ramp":
        x0 = val.get("x0")
        return PotentialH.ramp(graph, val.get("a", 1.0), val.get("b", 1.0), x0)
    try:
        data = json.loads(Path(val).read_text(encoding="utf-8"))
    except OSError as exc:
        raise GraphIOError(f"cannot read potential file {val}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    if not isinstance(data, dict):
        raise SchemaError("potential file must map vertex ids to values")
    h = PotentialH.from_values(graph, data)
    return h


def _threads():
    raw = os.environ.get("FRACGRAPH_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FRACGRAPH_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"FRACGRAPH_THREADS must be a positive integer, got {raw!r}")
    return n


def _pool_map(fn, items):
    items = list(items)
    n = min(_threads(), len(items)) or 1
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _prepare_out(cfg: RunConfig) -> Path:
    out = Path(cfg.outputs)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise GraphIOError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _write_json(path: Path, obj):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
    except OSError as exc:
        raise GraphIOError(f"cannot write {path}: {exc}") from exc


def _stag(s):
    return f"s{s:g}"


# -- commands ---------------------------------------------------------------

def _cmd_validate(cfg, graph, out):
    rep = validate_graph(graph)
    _write_json(out / "validation.json", rep.to_dict())
    return EXIT_OK if rep.connected and not rep.issues else EXIT_VALIDATION


def _cmd_kernel(cfg, graph, out):
    sp = eigendecompose(graph)
    export_spectrum_csv(sp, out / "spectrum.csv")
    compare = bool(cfg.kernel["compare_quadrature"])

    def one(s):
        k = ws_spectral(sp, s)
        other = ws_quadrature(sp, s, QuadratureConfig()) if compare else None
        return k, kernel_diagnostics(k, graph, sp, other)

    status = EXIT_OK
    for s, (k, diag) in zip(cfg.s, _pool_map(one, cfg.s)):
        tag = _stag(s)
        export_kernel_csv(k, out / f"kernel_{tag}.csv")
        export_bounds_csv(k, sp, out / f"bounds_{tag}.csv")
        _write_json(out / f"diagnostics_{tag}.json", diag.to_dict())
        if not diag.ok or (compare and diag.max_rel_deviation > 1e-6):
            status = EXIT_VALIDATION
    return status


def _cmd_solve(cfg, graph, out, branches):
    sp = eigendecompose(graph)
    h = build_potential(cfg, graph)
    nl = builtin_nonlinearity(cfg.nonlinearity["name"], cfg.nonlinearity.get("p"))
    method = cfg.solve["method"]
    if method not in ("nehari", "mountain_pass"):
        raise SchemaError(f"solve.method must be 'nehari' or 'mountain_pass', got {method!r}")
    status = EXIT_OK
    for s in cfg.s:
        k = ws_spectral(sp, s)
        write_norm_report(norm_report(k, h), out / f"norms_{_stag(s)}.json")
        for branch in branches:
            try:
                if method == "nehari":
                    sol = ground_state_solve(k, h, nl, branch, cfg.solver)
                else:
                    sol = mountain_pass_solve(k, h, nl, branch, cfg.solver, cfg.solve["path_nodes"])
            except NotConverged as exc:
                if exc.solution is None:
                    raise
                sol = exc.solution
                print(f"fracgraph: {branch} branch at s={s:g} did not converge: {exc}", file=sys.stderr)
                status = EXIT_NUMERIC
            export_solution(sol, out / f"solution_{branch}_{_stag(s)}.json")
    return status


def _check_suite(graph, sp, s, n_random, seed):
    k = ws_spectral(sp, s)
    diag = kernel_diagnostics(k, graph, sp)
    rng = np.random.default_rng(seed)
    op_err, ibp_err = 0.0, 0.0
    for _ in range(n_random):
        u, phi = rng.standard_normal(graph.n), rng.standard_normal(graph.n)
        lap = frac_laplacian_apply(k, u)
        op_err = max(op_err, float(np.abs(lap + divergence_s(k, frac_gradient(k, u))).max()))
        ibp_err = max(ibp_err, ibp_residual(k, u, phi))
    return {
        "s": s,
        "kernel_bounds": {"ok": diag.ok, "min_slack": diag.min_slack,
                          "symmetry_defect": diag.symmetry_defect,
                          "min_offdiagonal": diag.min_offdiagonal},
        "ibp": {"ok": op_err <= 1e-11 and ibp_err <= 1e-11,
                "divergence_defect": op_err, "ibp_residual": ibp_err},
    }


def _cmd_check(cfg, graph, out):
    sp = eigendecompose(graph)
    mass = mass_check(sp, np.logspace(-3, 3, 20))
    n_random, seed = int(cfg.check["n_random"]), int(cfg.check["seed"])
    suites = _pool_map(lambda s: _check_suite(graph, sp, s, n_random, seed), cfg.s)
    ok = mass <= 1e-10 and all(r["kernel_bounds"]["ok"] and r["ibp"]["ok"] for r in suites)
    _write_json(out / "check.json", {
        "mass": {"ok": mass <= 1e-10, "max_defect": mass},
        "per_s": suites,
        "ok": ok,
    })
    return EXIT_OK if ok else EXIT_VALIDATION


def execute(command: str, cfg: RunConfig, branches=("positive", "negative")) -> int:
    """Run one command; returns the exit code.  Errors are mapped, not raised."""
    try:
        if command not in COMMANDS:
            raise SchemaError(f"unknown command {command!r}")
        out = _prepare_out(cfg)
        _write_json(out / "config.json", cfg.to_dict())
        _write_json(out / "metadata.json", {
            "command": command,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        })
        graph = build_graph_from(cfg)
        if command == "validate":
            return _cmd_validate(cfg, graph, out)
        if command == "kernel":
            return _cmd_kernel(cfg, graph, out)
        if command == "solve":
            return _cmd_solve(cfg, graph, out, branches)
        return _cmd_check(cfg, graph, out)
    except FracGraphError as exc:
        print(f"fracgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except OSError as exc:
        print(f"fracgraph: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (GraphIOError, ParseError, ConfigError, OSError)):
        return EXIT_CONFIG
    if isinstance(exc, NumericalError):
        return EXIT_NUMERIC
    if isinstance(exc, FracGraphError):
        return EXIT_VALIDATION
    return EXIT_CONFIG


def _parser():
    p = argparse.ArgumentParser(prog="fracgraph", description="Fractional Laplacians on weighted graphs.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry (dotted keys, JSON values)")
    p.add_argument("--branch", choices=("pos", "neg"), help="solve only one branch")
    p.add_argument("--out", help="output directory")
    return p


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = parse_config(args.config, args.overrides, args.out)
    except FracGraphError as exc:
        print(f"fracgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    branches = {"pos": ("positive",), "neg": ("negative",), None: ("positive", "negative")}[args.branch]
    return execute(args.command, cfg, branches)


if __name__ == "__main__":
    sys.exit(main())
