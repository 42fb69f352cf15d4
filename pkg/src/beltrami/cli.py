"""Command line front end.

    beltrami <subcommand> [--config FILE] [--seed N] [--out DIR] [--n N] [--radius R]

Subcommands: solve, invert-structure, verify, holder, transforms-test, suite.
Every run writes ``report.json`` and ``run-config.json`` into the output
directory, plus CSV tables and field dumps.  Exit status is 0 when every
assertion passed, 1 when one failed and 2 for an invalid configuration.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import acceptance
from .acceptance import Check, check_ge, check_le, check_lt
from .grid import ComplexField, make_disk, wirtinger, write_field_csv
from .inverse import (InverseStructure, NoConvergence, h_star_detail, k_star,
                      relation_residual, verify_lipschitz_star)
from .solver import SolverConfig, contraction_trace, default_tol, solve_frozen
from .structure import freeze, power_example, structure_from_config, verify_condition
from .transforms import verify_cauchy_identities, workspace_for

SUBCOMMANDS = ("solve", "invert-structure", "verify", "holder", "transforms-test", "suite")

DEFAULTS = {
    "structure": {"kind": "linear", "mu": 0.5, "nu": 0.0},
    "domain": {"center": [0.0, 0.0], "radius": 1.0, "n": 128},
    "solver": {"tol": None, "max_iters": 200},
    "seed": 42,
    "output_dir": "out",
    "options": {},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    structure: dict
    domain: dict
    solver: dict
    seed: int
    output_dir: str
    options: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"subcommand": self.subcommand, "structure": self.structure, "domain": self.domain,
                "solver": self.solver, "seed": self.seed, "output_dir": self.output_dir,
                "options": self.options}

    # derived objects; any failure here is a configuration error
    def disk(self):
        c = self.domain.get("center", [0.0, 0.0])
        center = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        return make_disk(center, float(self.domain["radius"]), int(self.domain["n"]))

    def solver_config(self, d=None):
        d = self.disk() if d is None else d
        tol = self.solver.get("tol")
        return SolverConfig(d, tol=None if tol is None else float(tol),
                            max_iters=int(self.solver.get("max_iters", 200)))

    def H(self):
        return structure_from_config(_complexify(self.structure))


def _complexify(spec):
    """Turn ``[re, im]`` pairs and strings like ``"0.3j"`` into complex numbers."""
    out = {}
    for key, val in spec.items():
        if isinstance(val, dict):
            out[key] = _complexify(val)
        elif key in ("mu", "nu", "z0") and isinstance(val, (list, tuple)):
            out[key] = complex(val[0], val[1])
        elif key in ("mu", "nu", "z0") and isinstance(val, str):
            out[key] = complex(val.replace(" ", ""))
        else:
            out[key] = val
    return out


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config_file(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith((".yaml", ".yml")):
        import yaml

        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    tree = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            tree = _merge(tree, load_config_file(args.config))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    if args.seed is not None:
        tree["seed"] = args.seed
    if args.out is not None:
        tree["output_dir"] = args.out
    if args.n is not None:
        tree["domain"]["n"] = args.n
    if args.radius is not None:
        tree["domain"]["radius"] = args.radius
    unknown = set(tree) - set(DEFAULTS) - {"subcommand"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(subcommand=args.subcommand, structure=tree["structure"], domain=tree["domain"],
                    solver=tree["solver"], seed=int(tree["seed"]), output_dir=str(tree["output_dir"]),
                    options=dict(tree.get("options") or {}))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {cfg.subcommand!r}")
    try:
        cfg.disk()
        cfg.solver_config()
        cfg.H()
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")


# --- output -----------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> Path:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def write_json(path: Path, data) -> Path:
    return _atomic_write(path, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def emit_plot_table(path, columns: dict) -> Path:
    """Write named equal-length columns as a CSV table with a header row."""
    path = Path(path)
    lengths = {len(v) for v in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"ragged columns: lengths {sorted(lengths)}")
    names = list(columns)
    rows = zip(*(columns[k] for k in names))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    os.replace(tmp, path)
    return path


@dataclass
class Outcome:
    checks: list[Check] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)


# --- subcommands ------------------------------------------------------------


def _solve_checks(rep, H, floor) -> list[Check]:
    checks = [Check("converged", "true", float(rep.converged), rep.converged)]
    if len(rep.increments) >= 3:
        try:
            ratios = contraction_trace(rep)
            checks.append(check_le("measured contraction", max(ratios), H.k + 0.05))
        except AssertionError:
            checks.append(check_le("measured contraction", rep.measured_contraction, H.k + 0.05))
    checks.append(check_le("norm ratio", rep.norm_ratio, 2 * H.K + 0.1))
    a, b = rep.defect_norms
    dev = 0.0 if max(a, b) < acceptance.ROUNDING_FLOOR else abs(a / b - 1)
    checks.append(check_le("defect norm equality", dev, 0.05))
    checks.append(check_lt("final residual", rep.final_residual, 5 * rep_tol(rep) + floor))
    return checks


def rep_tol(rep) -> float:
    return rep.extra.get("tol", default_tol(rep.F.domain))


def _transform_floor(d) -> float:
    ws = workspace_for(d)
    return verify_cauchy_identities(ws, ComplexField.constant(d, 1.0)).dbar_residual


def cmd_solve(cfg: RunConfig, out: Path) -> Outcome:
    H = cfg.H()
    d = cfg.disk()
    scfg = cfg.solver_config(d)
    z0 = _complexify({"z0": cfg.options.get("z0", d.center)})["z0"]
    rep = solve_frozen(H, z0, scfg)
    rep.extra["tol"] = scfg.tol
    o = Outcome(results=rep.as_dict())
    o.checks = _solve_checks(rep, H, _transform_floor(d))
    o.artifacts += [str(write_field_csv(out / "F.csv", rep.F)),
                    str(write_field_csv(out / "psi.csv", rep.psi))]
    o.artifacts.append(str(emit_plot_table(out / "increments.csv", {"increment": rep.increments})))
    return o


def _read_samples(path: str):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:4] != ["re_g", "im_g", "re_xi", "im_xi"]:
        raise ConfigError(f"{path}: expected header re_g,im_g,re_xi,im_xi")
    data = np.array(rows[1:], dtype=float).reshape(-1, 4)
    return data[:, 0] + 1j * data[:, 1], data[:, 2] + 1j * data[:, 3]


def cmd_invert(cfg: RunConfig, out: Path) -> Outcome:
    H = cfg.H()
    inv = InverseStructure(H)
    rng = np.random.default_rng(cfg.seed)
    if "samples_file" in cfg.options:
        g, xi = _read_samples(cfg.options["samples_file"])
    else:
        m = int(cfg.options.get("samples", 1000))
        g = rng.normal(size=m) + 1j * rng.normal(size=m)
        xi = 5 * (rng.normal(size=m) + 1j * rng.normal(size=m))
    o = Outcome()
    try:
        det = h_star_detail(inv, g, xi)
    except (NoConvergence, AssertionError) as exc:
        o.checks.append(Check("H* evaluation", "converges", float("nan"), False))
        o.results["error"] = str(exc)
        return o
    hs = det.value
    res = relation_residual(H, g, xi, hs)
    path = out / "hstar.csv"
    fd, tmp = tempfile.mkstemp(dir=out, prefix="hstar.csv", suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_g", "im_g", "re_xi", "im_xi", "re_hstar", "im_hstar", "residual"])
        for a, b, c, r in zip(g, xi, hs, res):
            w.writerow([repr(float(v)) for v in (a.real, a.imag, b.real, b.imag, c.real, c.imag, r)])
    os.replace(tmp, path)
    o.artifacts.append(str(path))
    with np.errstate(divide="ignore", invalid="ignore"):
        contain = np.where(xi != 0, np.abs(hs) - inv.k_star * np.abs(xi), 0.0)
    lip = verify_lipschitz_star(inv, 500, rng) if H.k > 0 else 0.0
    o.checks += [
        check_le("relation residual / tol", det.relation_residual / inv.tol, 10.0),
        check_le("containment |H*| - k* |xi|", float(np.max(contain, initial=0.0)), 1e-9),
        check_le("Lipschitz constant of H*", lip, k_star(H.K) + 1e-6),
    ]
    o.results = {"k_star": inv.k_star, "iterations": det.iterations, "max_step_ratio": det.max_ratio,
                 "relation_residual": det.relation_residual, "lipschitz": lip}
    return o


def cmd_verify(cfg: RunConfig, out: Path) -> Outcome:
    H = cfg.H()
    d = cfg.disk()
    rng = np.random.default_rng(cfg.seed)
    o = Outcome()
    cond = verify_condition(H, d, int(cfg.options.get("samples", 1000)), rng)
    o.checks.append(Check("condition (Lipschitz, Hoelder, H(z,0)=0)", "metadata + 1e-6",
                          cond.max_lipschitz, cond.ok))
    scfg = cfg.solver_config(d)
    rep = solve_frozen(H, d.center, scfg)
    rep.extra["tol"] = scfg.tol
    o.checks += _solve_checks(rep, freeze(H, d.center), _transform_floor(d))
    jr = an.jacobian(rep.F)
    o.checks += [check_le("negative Jacobian fraction", jr.negative_fraction, 0.0),
                 Check("min Jacobian", "> 0", jr.min_J, jr.min_J > 0)]
    tau = rep.fd_residual / math.sqrt(math.pi) + 1e-6
    qr = an.quasiregularity_constant(rep.F)
    o.checks.append(check_le("distortion of F", qr, (1 + H.k + tau) / (1 - H.k - tau)))
    h = 4 * d.spacing
    radii = an.default_radii(d)
    decay = []
    for e, label in ((1.0, "1"), (1j, "i")):
        o.checks.append(check_le(f"distortion of F_h, e = {label}", an.difference_quotient_qr(rep.F, h, e),
                                 H.K + 0.1))
        s = an.decay_exponent(wirtinger(rep.F).directional(e), d.center, radii)
        decay.append(s)
        o.checks.append(check_ge(f"decay exponent of d_e F, e = {label}", s, 0.9))
    cac = an.caccioppoli_ratio(rep.F, 0.5 * d.radius, d.radius)
    o.checks.append(check_le("Caccioppoli ratio", cac, 100 * H.K))
    o.results = {"condition": cond.as_dict(), "solve": rep.as_dict(), "jacobian": jr.as_dict(),
                 "distortion": qr, "decay": decay, "caccioppoli": cac}
    o.artifacts.append(str(write_field_csv(out / "F.csv", rep.F)))
    return o


def cmd_holder(cfg: RunConfig, out: Path) -> Outcome:
    d = cfg.disk()
    opt = cfg.options
    kind = opt.get("field", "power")
    z = d.nodes
    if kind == "power":
        gamma = float(opt.get("gamma", 0.5))
        g = ComplexField(d, np.abs(z - d.center) ** gamma)
        target, slack = gamma, 0.03
    elif kind == "f0":
        pe = power_example(float(opt.get("K", 2.0)))
        g = ComplexField(d, pe.df0(z - d.center)[0])
        target, slack = pe.a, 0.05
    else:
        raise ConfigError(f"unknown holder field {kind!r}")
    radii = opt.get("radii") or an.default_radii(d)
    try:
        est = an.holder_exponent(g, d.center, radii)
    except an.DegenerateFit as exc:
        return Outcome(checks=[Check("Campanato fit", "non-degenerate", float("nan"), False)],
                       results={"error": str(exc)})
    o = Outcome(results=est.as_dict())
    o.checks.append(check_le("|gamma - target|", abs(est.gamma - target), slack))
    o.artifacts.append(str(emit_plot_table(out / "campanato.csv", {"rho": est.radii, "value": est.values})))
    return o


def cmd_transforms(cfg: RunConfig, out: Path) -> Outcome:
    d = cfg.disk()
    stats = acceptance.transform_stats(d, cfg.seed, int(cfg.options.get("samples", 20)))
    o = Outcome(results=stats)
    o.checks += [
        check_lt("isometry error", stats["isometry"], 0.05),
        check_lt("C(1) interior error", stats["anchor_c"], 5 * d.spacing),
        check_lt("S(1) interior error", stats["anchor_s"], 10 * d.spacing),
    ]
    return o


def cmd_suite(cfg: RunConfig, out: Path) -> Outcome:
    numbers = cfg.options.get("criteria")
    results = acceptance.run_suite(cfg.seed, numbers)
    o = Outcome()
    for r in results:
        for c in r.checks:
            o.checks.append(Check(f"criterion {r.number}: {c.name}", c.bound, c.measured, c.passed))
        o.results[str(r.number)] = {"title": r.title, "pass": r.passed, "data": r.data}
    timings = {str(r.number): r.seconds for r in results}
    o.artifacts.append(str(write_json(out / "timings.json", timings)))
    return o


COMMANDS = {"solve": cmd_solve, "invert-structure": cmd_invert, "verify": cmd_verify,
            "holder": cmd_holder, "transforms-test": cmd_transforms, "suite": cmd_suite}


def run(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "run-config.json", cfg.as_dict())
    try:
        outcome = COMMANDS[cfg.subcommand](cfg, out)
    except ConfigError:
        raise
    except (ArithmeticError, AssertionError, RuntimeError, ValueError) as exc:
        # a violated invariant deep inside a module still yields a report
        outcome = Outcome(checks=[Check(f"{cfg.subcommand} completed", "no error", float("nan"), False)],
                          results={"error": f"{type(exc).__name__}: {exc}"})
    report = {
        "subcommand": cfg.subcommand,
        "config_echo": cfg.as_dict(),
        "assertions": [c.as_dict() for c in outcome.checks],
        "results": outcome.results,
        "artifacts": sorted(os.path.relpath(a, out) for a in outcome.artifacts),
    }
    write_json(out / "report.json", report)
    return 0 if all(c.passed for c in outcome.checks) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beltrami", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="JSON or YAML config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--n", type=int, help="grid points per axis")
    p.add_argument("--radius", type=float, help="disk radius")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    t = time.perf_counter()
    try:
        status = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = json.loads((Path(cfg.output_dir) / "report.json").read_text())
    failed = [a["name"] for a in report["assertions"] if not a["pass"]]
    print(f"{cfg.subcommand}: {len(report['assertions']) - len(failed)}/{len(report['assertions'])} "
          f"assertions passed in {time.perf_counter() - t:.1f}s -> {cfg.output_dir}")
    for name in failed:
        print(f"  FAILED: {name}")
    return status


if __name__ == "__main__":
    sys.exit(main())
