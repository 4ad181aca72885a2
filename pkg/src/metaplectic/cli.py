"""Command-line front end.

Usage::

    metaplectic COMMAND --config cfg.json --out DIR [--seed N] [--tol-sym X]
                [--tol-free X] [--reproducible] [--override KEY=VALUE ...]

Commands: factor, flow, apply, propagate, amalgam-norm, estimate, regularity,
verify. Exit status: 0 success, 1 verify found failing checks, 2 invalid
input, 3 numerical failure (aliasing risk, factorization failure).

CSV columns written for plotting:
  profile_NNN.csv     x,abs2,re,im (n=2: x1,x2,abs2,re,im)
  profiles_index.csv  index,t,file,l2_norm
  ratios.csv          index,label,ratio,inner_factor_ratio,outer_factor_ratio
  series.csv          t,norm
  errors.csv          t,l2_error,phase
  verify.csv          check,passed,measured,tolerance,seconds,detail
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np

from . import amalgam, io
from .errors import InvalidInputError, NumericalError, ValidationError
from .operators import apply as apply_op
from .schrodinger import (
    PropagationJob,
    compare_results,
    hermite_state,
    propagate_metaplectic,
    propagate_splitstep,
)
from .symplectic import (
    TOL_FREE,
    TOL_SYM,
    QuadraticHamiltonian,
    SymplecticMatrix,
    factor_free,
    hamiltonian_flow,
    random_symplectic,
)
from .wavefunction import Axis, gaussian

COMMANDS = ("factor", "flow", "apply", "propagate", "amalgam-norm", "estimate", "regularity", "verify")

_number = {"type": "number"}
_exponent = {"anyOf": [{"type": "number", "minimum": 1}, {"enum": ["inf", "Infinity"]}]}
_matrix = {
    "anyOf": [
        {"type": "object", "required": ["rows"],
         "properties": {"n": {"type": "integer", "minimum": 1},
                        "rows": {"type": "array", "items": {"type": "array", "items": _number}}}},
        {"type": "object", "required": ["random"],
         "properties": {"random": {"type": "object", "required": ["n"],
                                   "properties": {"n": {"type": "integer", "minimum": 1}}}}},
        {"type": "object", "required": ["path"], "properties": {"path": {"type": "string"}}},
        {"type": "array", "items": {"type": "array", "items": _number}},
    ]
}
_hamiltonian = {
    "anyOf": [
        {"type": "object", "required": ["rows"],
         "properties": {"rows": {"type": "array", "items": {"type": "array", "items": _number}}}},
        {"type": "array", "items": {"type": "array", "items": _number}},
    ]
}
_grid = {"type": "object", "required": ["x0", "dx", "N"],
         "properties": {"x0": _number, "dx": {"type": "number", "exclusiveMinimum": 0},
                        "N": {"type": "integer", "minimum": 8}}}
_initial = {"type": "object", "required": ["type"],
            "properties": {"type": {"enum": ["hermite", "gaussian", "file"]},
                           "k": {"type": "integer", "minimum": 0},
                           "a": {"anyOf": [_number, {"type": "array", "items": _number,
                                                     "minItems": 2, "maxItems": 2}]},
                           "center": _number, "path": {"type": "string"}}}
_window = {"type": "object", "properties": {"type": {"enum": ["gaussian"]},
                                            "width": {"type": "number", "exclusiveMinimum": 0}}}
_times = {"type": "array", "items": _number, "minItems": 1}

SCHEMAS = {
    "factor": {"required": ["matrix"], "properties": {"matrix": _matrix}},
    "flow": {"required": ["M", "times"], "properties": {"M": _hamiltonian, "times": _times}},
    "apply": {"required": ["matrix", "grid", "initial"],
              "properties": {"matrix": _matrix, "grid": _grid, "initial": _initial,
                             "m_choice": {"enum": [0, 1]}, "hbar": _number,
                             "method": {"enum": ["fast", "direct"]}}},
    "propagate": {"required": ["M", "grid", "initial", "times"],
                  "properties": {"M": _hamiltonian, "grid": _grid, "initial": _initial, "times": _times,
                                 "hbar": _number, "method": {"enum": ["metaplectic", "splitstep"]},
                                 "dt": {"type": "number", "exclusiveMinimum": 0},
                                 "compare": {"type": "boolean"}}},
    "amalgam-norm": {"required": ["grid", "initial", "p", "q"],
                     "properties": {"grid": _grid, "initial": _initial, "p": _exponent,
                                    "q": _exponent, "window": _window, "hbar": _number}},
    "estimate": {"required": ["matrix", "p", "q", "grid"],
                 "properties": {"matrix": _matrix, "p": _exponent, "q": _exponent, "grid": _grid,
                                "kind": {"enum": ["cross", "same_space"]}, "window": _window,
                                "family": {"anyOf": [{"enum": ["default"]},
                                                     {"type": "array", "items": _initial}]},
                                "hbar": _number}},
    "regularity": {"required": ["M", "grid", "initial", "p", "q", "times"],
                   "properties": {"M": _hamiltonian, "grid": _grid, "initial": _initial, "p": _exponent,
                                  "q": _exponent, "times": _times, "window": _window,
                                  "hbar": _number}},
    "verify": {"properties": {}},
}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(config: dict, item: str) -> None:
    if "=" not in item:
        raise InvalidInputError(f"override {item!r} is not KEY=VALUE")
    key, value = item.split("=", 1)
    parts = key.split(".")
    node = config
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise InvalidInputError(f"override path {key!r} crosses a non-object")
    node[parts[-1]] = _parse_value(value)


def validate(config: dict) -> None:
    cmd = config.get("command")
    if cmd not in COMMANDS:
        raise InvalidInputError(f"unknown or missing command {cmd!r}; expected one of {COMMANDS}")
    schema = {"type": "object", **SCHEMAS[cmd]}
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidInputError(f"config invalid at {path}: {exc.message}") from exc


class Context:
    def __init__(self, config: dict, seed: int, tol_sym: float, tol_free: float):
        self.config = config
        self.seed = seed
        self.tol_sym = tol_sym
        self.tol_free = tol_free
        self.outputs: dict[str, bytes | str] = {}
        self.summary: dict = {}

    @property
    def hbar(self) -> float:
        return float(self.config.get("hbar", 1.0))

    def matrix(self, spec) -> SymplecticMatrix:
        if isinstance(spec, list):
            return SymplecticMatrix(np.array(spec, dtype=float), tol=self.tol_sym)
        if "random" in spec:
            return random_symplectic(int(spec["random"]["n"]), self.seed)
        if "path" in spec:
            return io.read_matrix(spec["path"], self.tol_sym)
        return io.matrix_from_dict(spec, self.tol_sym)

    def hamiltonian(self, spec) -> QuadraticHamiltonian:
        rows = spec if isinstance(spec, list) else spec.get("rows")
        return QuadraticHamiltonian(np.array(rows, dtype=float), tol=self.tol_sym)

    def axis(self) -> Axis:
        g = self.config["grid"]
        return Axis(float(g["x0"]), float(g["dx"]), int(g["N"]))

    def initial(self, spec, axis: Axis):
        kind = spec["type"]
        if kind == "hermite":
            return hermite_state(int(spec.get("k", 0)), axis, self.hbar)
        if kind == "gaussian":
            a = spec.get("a", 1.0)
            a = complex(*a) if isinstance(a, list) else complex(a)
            return gaussian(axis, a, self.hbar, center=float(spec.get("center", 0.0)))
        psi = io.read_wavefunction(spec["path"], self.hbar)
        if psi.axes != (axis,):
            raise InvalidInputError("initial wavefunction file grid differs from config grid")
        return psi

    def spec(self) -> amalgam.AmalgamNormSpec:
        w = self.config.get("window", {})
        return amalgam.AmalgamNormSpec(self.config["p"], self.config["q"],
                                       float(w.get("width", amalgam.DEFAULT_WINDOW_WIDTH)))

    def add(self, name: str, data) -> None:
        self.outputs[name] = data


def cmd_factor(ctx: Context) -> None:
    S = ctx.matrix(ctx.config["matrix"])
    S1, S2 = factor_free(S, ctx.tol_free)
    ctx.add("factor1.json", io.matrix_to_json(S1))
    ctx.add("factor2.json", io.matrix_to_json(S2))
    ctx.summary = {
        "product_residual": float(np.max(np.abs(S1.entries @ S2.entries - S.entries))),
        "det_B": [S1.det_B(), S2.det_B()],
    }


def cmd_flow(ctx: Context) -> None:
    H = ctx.hamiltonian(ctx.config["M"])
    flows = []
    for t in ctx.config["times"]:
        A = hamiltonian_flow(H, float(t))
        flows.append({"t": float(t), **io.matrix_to_dict(A)})
    ctx.add("flow.json", io.dumps({"flows": flows}) + "\n")


def cmd_apply(ctx: Context) -> None:
    axis = ctx.axis()
    psi = ctx.initial(ctx.config["initial"], axis)
    S = ctx.matrix(ctx.config["matrix"])
    out = apply_op(S, int(ctx.config.get("m_choice", 0)), psi,
                   method=ctx.config.get("method"), tol_free=ctx.tol_free)
    ctx.add("output.bin", io.wavefunction_to_bytes(out))
    ctx.add("output.csv", io.wavefunction_to_csv(out))
    ctx.summary = {"input_l2": psi.l2_norm(), "output_l2": out.l2_norm()}


def cmd_propagate(ctx: Context) -> None:
    cfg = ctx.config
    axis = ctx.axis()
    f0 = ctx.initial(cfg["initial"], axis)
    H = ctx.hamiltonian(cfg["M"])
    method = cfg.get("method", "metaplectic")
    job = PropagationJob(H, f0, tuple(cfg["times"]), method, cfg.get("dt"))
    if method == "metaplectic":
        result = propagate_metaplectic(job, tol_free=ctx.tol_free)
    else:
        result = propagate_splitstep(job)
    index = []
    for i, (t, psi) in enumerate(result.snapshots):
        name = f"snapshot_{i:03d}.bin"
        ctx.add(name, io.wavefunction_to_bytes(psi))
        index.append({"t": t, "file": name, "l2_norm": psi.l2_norm()})
    ctx.add("snapshots.json", io.dumps({"method": method, "snapshots": index}) + "\n")
    for name, text in io.plot_data(result).items():
        ctx.add(name, text)
    if cfg.get("compare"):
        if cfg.get("dt") is None:
            raise InvalidInputError("compare=true needs dt for the split-step reference")
        other_job = PropagationJob(H, f0, job.times, "splitstep", cfg["dt"])
        other = propagate_splitstep(other_job) if method == "metaplectic" else \
            propagate_metaplectic(PropagationJob(H, f0, job.times), tol_free=ctx.tol_free)
        report = compare_results(result, other, "up_to_global_phase")
        ctx.add("errors.csv", io.plot_data(report)["errors.csv"])
        ctx.summary["max_compare_error"] = report.max_error


def cmd_amalgam_norm(ctx: Context) -> None:
    axis = ctx.axis()
    psi = ctx.initial(ctx.config["initial"], axis)
    spec = ctx.spec()
    value = amalgam.amalgam_norm(psi, spec)
    ctx.add("norm.json", io.dumps({**spec.to_dict(), "norm": value, "l2_norm": psi.l2_norm()}) + "\n")
    ctx.summary = {"norm": value}


def cmd_estimate(ctx: Context) -> None:
    cfg = ctx.config
    axis = ctx.axis()
    S = ctx.matrix(cfg["matrix"])
    family_cfg = cfg.get("family", "default")
    if family_cfg == "default":
        family = amalgam.default_family(axis, ctx.hbar)
    else:
        family = [ctx.initial(item, axis) for item in family_cfg]
    kind = cfg.get("kind", "cross")
    run = amalgam.cross_estimate_experiment if kind == "cross" else \
        amalgam.same_space_estimate_experiment
    spec = ctx.spec()
    report = run(S, spec.p, spec.q, family, spec, tol_free=ctx.tol_free)
    ctx.add("report.json", io.dumps(report.to_dict()) + "\n")
    ctx.add("ratios.csv", io.plot_data(report)["ratios.csv"])
    ctx.summary = {"max_ratio": report.max_ratio, "factor_bound": report.factor_bound}


def cmd_regularity(ctx: Context) -> None:
    cfg = ctx.config
    axis = ctx.axis()
    f0 = ctx.initial(cfg["initial"], axis)
    H = ctx.hamiltonian(cfg["M"])
    spec = ctx.spec()
    series = amalgam.regularity_experiment(H, f0, spec.p, spec.q, cfg["times"], spec)
    ctx.add("series.csv", io.plot_data(series)["series.csv"])
    ctx.summary = {"all_finite": bool(all(np.isfinite(v) for _, v in series))}


def cmd_verify(ctx: Context) -> bool:
    from .verification import run_all

    results = run_all(seed=ctx.seed)
    lines = ["check,passed,measured,tolerance,seconds,detail"]
    for r in results:
        print(r.line())
        lines.append(f"{json.dumps(r.name)},{r.passed},{r.measured!r},{r.tolerance!r},"
                     f"{r.seconds:.3f},{json.dumps(r.detail)}")
    ctx.add("verify.csv", "\n".join(lines) + "\n")
    ok = all(r.passed for r in results)
    ctx.summary = {"all_passed": ok}
    return ok


HANDLERS = {
    "factor": cmd_factor,
    "flow": cmd_flow,
    "apply": cmd_apply,
    "propagate": cmd_propagate,
    "amalgam-norm": cmd_amalgam_norm,
    "estimate": cmd_estimate,
    "regularity": cmd_regularity,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metaplectic", description=__doc__.split("\n\n")[0],
        epilog=__doc__.split("\n\n", 2)[2], formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="overrides the config's 'command' field")
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol-sym", type=float, default=TOL_SYM)
    parser.add_argument("--tol-free", type=float, default=TOL_FREE)
    parser.add_argument("--reproducible", action="store_true",
                        help="omit the timestamp so manifests are byte-identical across runs")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="set a (dotted) config key; VALUE parsed as JSON when possible")
    return parser


def load_config(args) -> dict:
    config: dict = {}
    if args.config is not None:
        try:
            config = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(config, dict):
            raise InvalidInputError("config must be a JSON object")
    if args.command:
        config["command"] = args.command
    for item in args.override:
        apply_override(config, item)
    validate(config)
    return config


def run(args) -> int:
    try:
        config = load_config(args)
        ctx = Context(config, args.seed, args.tol_sym, args.tol_free)
        ok = HANDLERS[config["command"]](ctx)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    manifest = {
        "command": config["command"],
        "inputs": config,
        "seed": args.seed,
        "library_version": _version(),
        "tolerances": {"tol_sym": args.tol_sym, "tol_free": args.tol_free},
        "outputs": sorted(ctx.outputs),
        "summary": ctx.summary,
    }
    if not args.reproducible:
        manifest["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    ctx.add("manifest.json", io.dumps(manifest) + "\n")
    for name, data in ctx.outputs.items():
        io.write_atomic(args.out / name, data)
    if ok is False:
        return 1
    return 0


def main(argv=None) -> int:
    return run(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
