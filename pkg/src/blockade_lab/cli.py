"""Command-line entry point: sweeps, dynamics, optimal relations, validation.

Exit codes form a stable contract: 0 success, 2 configuration or schema
violation, 3 numerical failure, 4 capacity exceeded, 5 I/O failure.
Every run writes CSV data (12-significant-digit scientific notation, one
"# units: kappa2" header line), a JSON summary, and a JSON manifest whose
resolved config reproduces the run byte-identically when fed back in.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import importlib.resources
import json
import math
import os
import sys

import numpy as np

from . import __version__, analytic, scenarios
from .errors import (
    BlockadeLabError,
    CapacityError,
    ConfigError,
    InvalidArgumentError,
)
from .model import SystemParams
from .scenarios import (
    DelayedScenario,
    DynamicsScenario,
    SweepPlan,
    load_preset,
    plan_from_dict,
    plan_to_dict,
    run_delayed,
    run_dynamics,
    run_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CAPACITY = 4
EXIT_IO = 5

_FLOAT_FORMAT = "{:.11e}"  # 12 significant digits


def _schema() -> dict:
    text = importlib.resources.files("blockade_lab").joinpath("config_schema.json").read_text()
    return json.loads(text)


def parse_config(text: str) -> dict:
    """Validate raw JSON text against the published schema; returns the dict.

    Accepts either a bare config or a previously emitted manifest (whose
    resolved config is extracted), so manifests replay runs directly.
    """
    import jsonschema

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if isinstance(data, dict) and "config" in data and "artifact_version" in data:
        data = data["config"]
    validator = jsonschema.Draft7Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config field {path}: {err.message}")
    return data


def _materialize(config: dict) -> dict:
    """Fill in every default so the manifest records the complete run recipe.

    "method" stays absent unless the user set it: presets carry their own
    method selection and must not be silently overridden by a default.
    """
    out = {
        "lindblad_convention": "half",
        "workers": 1,
        "out": "out",
        "formats": ["csv", "json"],
    }
    out.update(config)
    return out


def _resolve_task(config: dict):
    """Preset name or explicit plan dict -> concrete scenario object."""
    if "preset" in config and "plan" in config:
        raise ConfigError("config must give either a preset or a plan, not both")
    if "preset" in config:
        task = load_preset(config["preset"])
    elif "plan" in config:
        raw = dict(config["plan"])
        raw.setdefault("params", _params_dict(config))
        raw.setdefault("methods", ["analytic"])
        raw["tied"] = list(raw.get("tied", {}).items())
        raw["csv_names"] = list(raw.get("csv_names", {}).items())
        raw["cutoffs"] = _cutoffs_tuple(config, raw["model"])
        task = plan_from_dict(raw)
    else:
        raise ConfigError("config needs a preset or an explicit plan")
    task = _apply_overrides(task, config)
    return task


def _params_dict(config: dict) -> dict:
    defaults = {
        "delta1": 0.0, "delta2": 0.0, "omega_m": 500.0, "lambda1": 0.95,
        "lambda2": 0.95, "g": 21.0, "E": 0.02, "kappa1": 1.0, "kappa2": 1.0,
        "gamma_m": 5e-4, "n_th": 0.0, "units": "kappa2-units",
    }
    defaults.update(config.get("params", {}))
    return defaults


def _cutoffs_tuple(config: dict, model_name: str) -> list[int]:
    cuts = config.get("cutoffs", {})
    if model_name == "full":
        return [cuts.get("a1", 4), cuts.get("a2", 4), cuts.get("b", 8)]
    return [cuts.get("a1", 4), cuts.get("a2", 4)]


def _apply_overrides(task, config: dict):
    from dataclasses import replace

    changes = {}
    if "params" in config:
        changes["params"] = task.params.updated(**config["params"])
    if "lindblad_convention" in config:
        changes["convention"] = config["lindblad_convention"]
    if "method" in config and isinstance(task, SweepPlan):
        method = config["method"]
        changes["methods"] = ("analytic", "numeric") if method == "both" else (method,)
    if "cutoffs" in config:
        changes["cutoffs"] = tuple(_cutoffs_tuple(config, task.model))
    return replace(task, **changes) if changes else task


class OutputWriter:
    """Writes CSV/JSON artifacts, tracks checksums, cleans up on failure."""

    def __init__(self, out_dir: str, formats: list[str]):
        self.out_dir = out_dir
        self.formats = formats
        self.written: list[str] = []
        self.checksums: dict[str, str] = {}
        os.makedirs(out_dir, exist_ok=True)

    def _path(self, filename: str) -> str:
        return os.path.join(self.out_dir, filename)

    def _register(self, path: str) -> None:
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        self.written.append(path)
        self.checksums[os.path.basename(path)] = digest

    def write_csv(self, filename: str, columns: list[str], rows: list[dict]) -> None:
        if "csv" not in self.formats:
            return
        path = self._path(filename)
        with open(path, "w", newline="") as fh:
            fh.write("# units: kappa2\n")
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_format_cell(row.get(col)) for col in columns) + "\n")
        self._register(path)

    def write_json(self, filename: str, payload: dict) -> None:
        if "json" not in self.formats:
            return
        path = self._path(filename)
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonify)
            fh.write("\n")
        self._register(path)

    def write_manifest(self, name: str, config: dict, extra: dict | None = None) -> None:
        manifest = {
            "artifact_version": __version__,
            "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "config": config,
            "files": dict(sorted(self.checksums.items())),
        }
        if extra:
            manifest.update(extra)
        path = self._path(f"{name}.manifest.json")
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=_jsonify)
            fh.write("\n")
        self.written.append(path)

    def cleanup(self) -> None:
        for path in self.written:
            try:
                os.unlink(path)
            except OSError:
                pass


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return _FLOAT_FORMAT.format(v)


def _jsonify(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _sweep_summary(result) -> dict:
    summary: dict = {
        "preset": result.plan.name,
        "plan": plan_to_dict(result.plan),
        "rows": len(result.rows),
        "errors": result.errors,
    }
    if len(result.plan.axes) == 1:
        axis = result.plan.axes[0].param
        dips: dict[str, list] = {}
        for obs in result.plan.observables:
            for method in result.plan.methods:
                col = f"{result.plan.csv_name(obs)}_{method}"
                xs = [r[axis] for r in result.rows if col in r and r[col] > 0]
                ys = [r[col] for r in result.rows if col in r and r[col] > 0]
                if len(xs) >= 5:
                    found = scenarios.locate_dips(xs, ys)
                    dips[col] = [{"x": x, "y": y} for x, y in found]
        summary["dips"] = dips
    return summary


def _cmd_sweep(args) -> int:
    config = _load_cli_config(args)
    task = _resolve_task(config)
    if not isinstance(task, SweepPlan):
        raise ConfigError(f"preset {task.name!r} is not a sweep preset")
    writer = OutputWriter(config["out"], config["formats"])
    try:
        result = run_sweep(task, workers=config["workers"])
        writer.write_csv(f"{task.name}.csv", result.columns, result.rows)
        writer.write_json(f"{task.name}.summary.json", _sweep_summary(result))
        writer.write_manifest(task.name, config, {"notes": [task.notes] if task.notes else []})
    except BaseException:
        writer.cleanup()
        raise
    return EXIT_OK


def _cmd_dynamics(args) -> int:
    config = _load_cli_config(args)
    task = _resolve_task(config)
    if not isinstance(task, DynamicsScenario):
        raise ConfigError(f"preset {getattr(task, 'name', '?')!r} is not a dynamics preset")
    writer = OutputWriter(config["out"], config["formats"])
    try:
        result = run_dynamics(task)
        columns = ["t", "variant", "g2", "n2", "trace_err", "herm_dev"]
        rows = []
        for label in result.variants:
            traj = result.trajectories[label]
            series = result.series[label]
            for i, t in enumerate(traj.times):
                rows.append({
                    "t": t,
                    "variant": label,
                    "g2": series["g2"][i],
                    "n2": series["n2"][i],
                    "trace_err": abs(traj.data["trace"][i] - 1.0),
                    "herm_dev": traj.data["herm_dev"][i],
                })
        writer.write_csv(f"{task.name}.csv", columns, rows)
        summary = {
            "preset": task.name,
            "variants": {
                label: {
                    "params": _params_summary(result.params_by_variant[label]),
                    "final_g2": float(result.series[label]["g2"][-1]),
                    "final_n2": float(result.series[label]["n2"][-1]),
                }
                for label in result.variants
            },
        }
        writer.write_json(f"{task.name}.summary.json", summary)
        writer.write_manifest(task.name, config)
    except BaseException:
        writer.cleanup()
        raise
    return EXIT_OK


def _cmd_gtau(args) -> int:
    config = _load_cli_config(args)
    task = _resolve_task(config)
    if not isinstance(task, DelayedScenario):
        raise ConfigError(f"preset {getattr(task, 'name', '?')!r} is not a delayed-correlation preset")
    writer = OutputWriter(config["out"], config["formats"])
    try:
        result = run_delayed(task)
        columns = ["tau", "variant", "g2_tau"]
        rows = [
            {"tau": tau, "variant": label, "g2_tau": result.g2_series[label][i]}
            for label in result.variants
            for i, tau in enumerate(result.tau)
        ]
        writer.write_csv(f"{task.name}.csv", columns, rows)
        summary = {
            "preset": task.name,
            "g2_zero": {label: result.g2_zero[label] for label in result.variants},
            "variants": {
                label: _params_summary(result.params_by_variant[label])
                for label in result.variants
            },
        }
        writer.write_json(f"{task.name}.summary.json", summary)
        writer.write_manifest(task.name, config)
    except BaseException:
        writer.cleanup()
        raise
    return EXIT_OK


def _params_summary(params: SystemParams) -> dict:
    from dataclasses import asdict

    return asdict(params)


def _cmd_optimal(args) -> int:
    chi, kappa2, lambda1 = args.chi, args.kappa2, args.lambda1
    branch = {"plus": "+", "minus": "-"}[args.branch]
    payload: dict = {"chi": chi, "kappa2": kappa2, "lambda1": lambda1, "branch": args.branch}
    if args.relation == "upb":
        point = analytic.upb_optimal(chi, kappa2, lambda1, branch)
        payload.update({"delta2": point.delta2, "lambda2": point.lambda2,
                        "product_lambda1_lambda2": lambda1 * point.lambda2})
    elif args.relation == "cpb":
        if args.lambda2 is None:
            raise ConfigError("--lambda2 is required for the cpb relation")
        locations = analytic.cpb_locations(chi, lambda1, args.lambda2)
        payload["lambda2"] = args.lambda2
        if locations is None:
            payload["delta2"] = None
            payload["real_location"] = False
        else:
            payload["delta2_plus"], payload["delta2_minus"] = locations
            payload["real_location"] = True
    else:  # conventional
        omega_m = args.omega_m
        g = math.sqrt(chi * omega_m)
        payload["lambda2"] = analytic.conventional_optimal_lambda2(g, lambda1, omega_m)
        payload["g"] = g
        payload["omega_m"] = omega_m
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    params = SystemParams(
        delta1=args.delta2, delta2=args.delta2, omega_m=args.omega_m,
        lambda1=args.lambda1, lambda2=args.lambda2, g=args.g, E=0.0,
        kappa1=args.kappa2, kappa2=args.kappa2, gamma_m=0.0,
    )
    payload: dict = {"delta2": args.delta2, "lambda1": args.lambda1,
                     "lambda2": args.lambda2, "g": args.g, "omega_m": args.omega_m}
    blocks = {}
    for n_exc in (0, 1, 2):
        values = analytic.excitation_block_spectrum(params, n_exc)
        blocks[str(n_exc)] = [[v.real, v.imag] for v in np.sort_complex(values)]
    eps_plus, eps_minus, eps_zero = analytic.single_excitation_eigenvalues(params)
    payload["blocks"] = blocks
    payload["closed_form_single_excitation"] = {
        "eps_plus": [eps_plus.real, eps_plus.imag],
        "eps_minus": [eps_minus.real, eps_minus.imag],
        "eps_zero": eps_zero,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_feasibility(args) -> int:
    report = analytic.altdrive_blockade_feasibility(args.chi, args.kappa2)
    payload = {
        "chi": report.chi,
        "kappa2": report.kappa2,
        "condition2_roots": list(report.condition2_roots),
        "condition1_residuals": list(report.condition1_residuals),
        "condition1_roots": list(report.condition1_roots),
        "feasible": report.feasible,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validate import run_all

    results = run_all()
    failed = 0
    for name, ok, detail in results:
        tag = "PASS" if ok else "FAIL"
        line = f"[{tag}] {name}"
        if detail and not ok:
            line += f": {detail}"
        print(line)
    failed = sum(1 for _, ok, _ in results if not ok)
    if failed:
        print(f"{failed} of {len(results)} invariant checks failed", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"all {len(results)} invariant checks passed")
    return EXIT_OK


def _load_cli_config(args) -> dict:
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        config = parse_config(text)
    else:
        config = {}
    if getattr(args, "preset", None):
        config["preset"] = args.preset
    if getattr(args, "out", None):
        config["out"] = args.out
    if getattr(args, "workers", None):
        config["workers"] = args.workers
    if getattr(args, "format", None):
        config["formats"] = args.format.split(",")
        for fmt in config["formats"]:
            if fmt not in ("csv", "json"):
                raise ConfigError(f"unknown output format {fmt!r}")
    config = _materialize(config)
    if "cap" in config:
        os.environ["BLOCKADE_LAB_CAP"] = str(config["cap"])
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockade-lab",
        description="Photon-blockade statistics in a nonreciprocally coupled "
        "double-cavity optomechanical model.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_args(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", help="named figure preset")
        p.add_argument("--out", help="output directory (default: out)")
        p.add_argument("--workers", type=int, help="parallel grid workers")
        p.add_argument("--format", help="comma-separated output formats (csv,json)")

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    add_run_args(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_dyn = sub.add_parser("dynamics", help="integrate the master equation in time")
    add_run_args(p_dyn)
    p_dyn.set_defaults(func=_cmd_dynamics)

    p_gtau = sub.add_parser("gtau", help="delayed second-order correlation")
    add_run_args(p_gtau)
    p_gtau.set_defaults(func=_cmd_gtau)

    p_opt = sub.add_parser("optimal", help="evaluate optimal parameter relations")
    p_opt.add_argument("--relation", choices=["upb", "cpb", "conventional"], default="upb")
    p_opt.add_argument("--chi", type=float, required=True)
    p_opt.add_argument("--kappa2", type=float, default=1.0)
    p_opt.add_argument("--lambda1", type=float, required=True)
    p_opt.add_argument("--lambda2", type=float, help="needed for the cpb relation")
    p_opt.add_argument("--omega-m", dest="omega_m", type=float, default=500.0)
    p_opt.add_argument("--branch", choices=["plus", "minus"], default="minus")
    p_opt.set_defaults(func=_cmd_optimal)

    p_spec = sub.add_parser("spectrum", help="excitation-block eigenvalues")
    p_spec.add_argument("--delta2", type=float, required=True)
    p_spec.add_argument("--lambda1", type=float, required=True)
    p_spec.add_argument("--lambda2", type=float, required=True)
    p_spec.add_argument("--g", type=float, required=True)
    p_spec.add_argument("--omega-m", dest="omega_m", type=float, default=500.0)
    p_spec.add_argument("--kappa2", type=float, default=1.0)
    p_spec.set_defaults(func=_cmd_spectrum)

    p_feas = sub.add_parser("feasibility", help="drive-on-a1 perfect-blockade feasibility")
    p_feas.add_argument("--chi", type=float, required=True)
    p_feas.add_argument("--kappa2", type=float, default=1.0)
    p_feas.set_defaults(func=_cmd_feasibility)

    p_val = sub.add_parser("validate", help="run the module invariant suite")
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidArgumentError as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except BlockadeLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
