"""Command-line front end: estimate / simulate / sweep / coverage / ecdf.

Exit codes: 0 success, 2 usage error, 3 data error (missing or malformed
input), 4 numeric or degeneracy error from the pipeline.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, estimators, experiments, grouping, tuning
from .errors import (
    CsvParseError,
    EmptySample,
    EstimationWarning,
    NonFiniteEntry,
    TailspecError,
)
from .simulation import SeededRng
from .types import DataMatrix, ModelSpec, Region, validate_data

SCHEMA = "tailspec/1"
_CDF_GRID = 128  # angles reported by `estimate` for d=2 input


class CliUsage(Exception):
    """Bad flag combination or unparseable flag payload (exit code 2)."""


# ---------------------------------------------------------------- CSV I/O


def read_csv(path: str | Path, skip_header: bool = False) -> DataMatrix:
    """Parse a comma-separated numeric matrix; errors carry 1-based lines."""
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1 and skip_header:
                continue
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                row = [float(p) for p in parts]
            except ValueError:
                raise CsvParseError(lineno, f"cannot parse {line!r}")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise CsvParseError(
                    lineno, f"expected {width} columns, found {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise EmptySample(f"{path}: no data rows")
    return DataMatrix(np.asarray(rows))


def write_csv(path: str | Path, values: np.ndarray) -> None:
    """Write rows with 17 significant digits (lossless float64 round-trip)."""
    a = np.atleast_2d(np.asarray(values))
    with open(path, "w", encoding="utf-8") as fh:
        for row in a:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


# ------------------------------------------------------------- JSON plumbing


def _num(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _interval_doc(ci) -> dict:
    return {"lo": _num(ci.lo), "hi": _num(ci.hi), "level": ci.level}


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, allow_nan=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# ---------------------------------------------------------------- model spec

_NAMED_DENSITIES = {
    # |cos 2 theta| / 4 integrates to 1 over [0, 2*pi)
    "abscos2t": lambda total: (lambda th: total * np.abs(np.cos(2.0 * th)) / 4.0),
    "uniform": lambda total: (lambda th: np.full_like(np.asarray(th, dtype=float),
                                                      total / (2.0 * math.pi))),
}


def parse_model(text: str) -> tuple[ModelSpec, str, int]:
    """Parse the --model JSON into (ModelSpec, sampler kind, density cells).

    Schema: {"kind": "polar"|"stable", "alpha": a, "total_mass": s,
             "beta": b?, "atoms": [[x1..xd, w], ...] | "rho": r |
             "density": "abscos2t"|"uniform", "n_atoms": K?}
    """
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise CliUsage(f"--model is not valid JSON: {e}")
    if not isinstance(cfg, dict):
        raise CliUsage("--model must be a JSON object")
    kind = cfg.get("kind", "polar")
    if kind not in ("polar", "stable"):
        raise CliUsage(f"model kind must be polar or stable, got {kind!r}")
    try:
        alpha = float(cfg["alpha"])
    except KeyError:
        raise CliUsage("--model needs an alpha")
    total = float(cfg.get("total_mass", 1.0))
    beta = float(cfg["beta"]) if "beta" in cfg else math.inf
    n_atoms = int(cfg.get("n_atoms", experiments.DEFAULT_STABLE_ATOMS))

    sources = [k for k in ("atoms", "rho", "density") if k in cfg]
    if len(sources) != 1:
        raise CliUsage("--model needs exactly one of atoms, rho, density")
    if "atoms" in cfg:
        atoms = []
        for row in cfg["atoms"]:
            vec, w = np.asarray(row[:-1], dtype=float), float(row[-1])
            atoms.append((vec, w))
        model = ModelSpec(alpha=alpha, total_mass=total, beta=beta,
                          atoms=tuple(atoms))
    elif "rho" in cfg:
        rho = float(cfg["rho"])
        if not (-1.0 <= rho <= 1.0):
            raise CliUsage(f"rho={rho} outside [-1,1]")
        atoms = []
        if rho > -1.0:
            atoms.append((np.array([1.0]), total * (1.0 + rho) / 2.0))
        if rho < 1.0:
            atoms.append((np.array([-1.0]), total * (1.0 - rho) / 2.0))
        model = ModelSpec(alpha=alpha, total_mass=total, beta=beta,
                          atoms=tuple(atoms))
    else:
        name = cfg["density"]
        if name not in _NAMED_DENSITIES:
            raise CliUsage(
                f"unknown density {name!r}; choices: {sorted(_NAMED_DENSITIES)}"
            )
        model = ModelSpec(alpha=alpha, total_mass=total, beta=beta,
                          density=_NAMED_DENSITIES[name](total))
    return model, kind, n_atoms


# ---------------------------------------------------------------- regions


def parse_region(text: str, dim: int) -> tuple[Region, str]:
    """Region syntax: arc:START:END (d=2, [START,END) radians, wraps) or
    halfspace:u1,...,ud:c meaning <theta,u> > c."""
    parts = text.split(":")
    if parts[0] == "arc":
        if dim != 2:
            raise CliUsage("arc regions need d=2 data")
        if len(parts) != 3:
            raise CliUsage(f"bad arc region {text!r}")
        try:
            start, end = float(parts[1]), float(parts[2])
        except ValueError:
            raise CliUsage(f"bad arc region {text!r}")
        start %= 2.0 * math.pi
        end %= 2.0 * math.pi

        def region(v: np.ndarray) -> bool:
            a = math.atan2(v[1], v[0]) % (2.0 * math.pi)
            if start <= end:
                return start <= a < end
            return a >= start or a < end

        return region, text
    if parts[0] == "halfspace":
        if len(parts) != 3:
            raise CliUsage(f"bad halfspace region {text!r}")
        try:
            u = np.asarray([float(x) for x in parts[1].split(",")], dtype=float)
            c = float(parts[2])
        except ValueError:
            raise CliUsage(f"bad halfspace region {text!r}")
        if u.shape[0] != dim:
            raise CliUsage(f"halfspace direction has {u.shape[0]} components, data has {dim}")
        return (lambda v: float(np.dot(v, u)) > c), text
    raise CliUsage(f"unknown region syntax {text!r}")


# ---------------------------------------------------------------- commands


def _resolve_r(args, alpha_hint: float | None) -> float:
    if args.r != "auto":
        try:
            r = float(args.r)
        except ValueError:
            raise CliUsage(f"--r must be a number or 'auto', got {args.r!r}")
        if not (0.0 < r < 1.0):
            raise CliUsage(f"--r={r} outside (0,1)")
        return r
    if alpha_hint is None:
        raise CliUsage("--r auto needs --alpha")
    beta = args.beta if args.beta is not None else tuning.DEFAULT_BETA_FACTOR * alpha_hint
    return tuning.optimal_r_alpha(alpha_hint, beta, args.epsilon)


def cmd_estimate(args) -> dict:
    data = validate_data(read_csv(args.input, skip_header=args.skip_header))
    if args.shuffle:
        if args.seed is None:
            raise CliUsage("--shuffle needs --seed")
        g = SeededRng(args.seed, stream=0xD47A).generator()
        data = DataMatrix(data.values[g.permutation(data.rows)])
    r = _resolve_r(args, args.alpha)
    scheme = grouping.plan_grouping(data.rows, r)

    captured: list[str] = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always", EstimationWarning)
        summaries = grouping.summarize_groups(data, scheme)
        alpha_est = estimators.estimate_alpha(summaries)
        spectral = estimators.estimate_spectral(summaries)

        alpha_used = args.alpha if args.alpha is not None else alpha_est.alpha_hat
        alpha_mode = "fixed" if args.alpha is not None else "plugin"
        if args.t == "auto":
            t = tuning.default_t(alpha_used, r)
        else:
            try:
                t = float(args.t)
            except ValueError:
                raise CliUsage(f"--t must be a number or 'auto', got {args.t!r}")
        mass_est = estimators.estimate_total_mass(summaries, scheme.m, alpha_used, t)
        captured.extend(str(w.message) for w in wlist
                        if issubclass(w.category, EstimationWarning))

    doc = {
        "schema": SCHEMA,
        "version": __version__,
        "command": "estimate",
        "input": {"path": str(args.input), "N": data.rows, "d": data.dim},
        "scheme": {"r": r, "n": scheme.n, "m": scheme.m,
                   "discarded": scheme.discarded},
        "alpha": {
            "hat": alpha_est.alpha_hat,
            "s_n": alpha_est.s_n,
            "kappa_var": alpha_est.kappa_var,
            "ci": _interval_doc(estimators.alpha_ci(alpha_est, args.level)),
        },
        "mass": {
            "hat": mass_est.mass_hat,
            "t": t,
            "alpha_used": alpha_used,
            "alpha_mode": alpha_mode,
            "mean_qt": mass_est.mean_qt,
            "ci": _interval_doc(estimators.total_mass_ci(mass_est, args.level)),
        },
        "spectral": {},
        # attached estimate warnings were also caught live; keep one copy
        "warnings": captured + [w for w in mass_est.warnings if w not in captured],
    }
    if alpha_mode == "plugin":
        doc["warnings"].append("mass estimate uses plug-in alpha_hat")

    regions = []
    for spec_text in args.region or []:
        region, label = parse_region(spec_text, data.dim)
        mass = estimators.spectral_mass(spectral, region)
        entry = {"spec": label, "mass": mass}
        if 0.0 < mass < 1.0:
            entry["ci"] = _interval_doc(
                estimators.spectral_ci(spectral, region, args.level))
        regions.append(entry)
    doc["spectral"]["regions"] = regions
    if data.dim == 1:
        doc["spectral"]["rho"] = estimators.rho_1d(spectral)
    if data.dim == 2:
        angles = np.linspace(0.0, 2.0 * math.pi, _CDF_GRID + 1)[1:]
        doc["spectral"]["cdf"] = [
            [a, v] for a, v in estimators.spectral_cdf_2d(spectral, angles)
        ]
    return doc


def cmd_simulate(args) -> dict:
    model, kind, n_atoms = parse_model(args.model)
    if args.seed is None:
        raise CliUsage("simulate needs --seed")
    if args.out is None:
        raise CliUsage("simulate needs --out")
    data = experiments.draw_sample(model, args.n, SeededRng(args.seed), kind,
                                   n_atoms)
    write_csv(args.out, data.values)
    meta = {
        "schema": SCHEMA,
        "version": __version__,
        "command": "simulate",
        "seed": args.seed,
        "model": json.loads(args.model if not args.model.startswith("@")
                            else Path(args.model[1:]).read_text()),
        "N": args.n,
        "d": data.dim,
        "out": str(args.out),
    }
    Path(str(args.out) + ".meta.json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return meta


def _summary_path(out: str) -> Path:
    p = Path(out)
    return p.with_suffix(".json") if p.suffix != ".json" else p.with_suffix(".summary.json")


def cmd_sweep(args) -> dict:
    model, kind, n_atoms = parse_model(args.model)
    if args.seed is None:
        raise CliUsage("sweep needs --seed")
    if args.grid:
        try:
            r_grid = [float(x) for x in args.grid.split(",")]
        except ValueError:
            raise CliUsage(f"bad --grid {args.grid!r}")
    else:
        r_grid = experiments.default_r_grid(args.n, args.target)
    res = experiments.run_r_sweep(model, args.n, r_grid, args.reps, args.target,
                                  SeededRng(args.seed), sampler=kind,
                                  n_atoms=n_atoms, workers=args.workers)
    doc = {
        "schema": SCHEMA,
        "version": __version__,
        "command": "sweep",
        "seed": args.seed,
        "target": args.target,
        "N": args.n,
        "reps": res.reps,
        "rows": res.rows(),
    }
    if args.out:
        write_csv(args.out, np.array(
            [[o, m, s, res.reps] for o, m, s, _ in res.rows()]))
        _summary_path(args.out).write_text(json.dumps(doc, indent=2) + "\n",
                                           encoding="utf-8")
    return doc


def cmd_ecdf(args) -> dict:
    model, kind, n_atoms = parse_model(args.model)
    if args.seed is None:
        raise CliUsage("ecdf needs --seed")
    r = _resolve_r(args, model.alpha)
    res = experiments.run_ecdf_compare(model, args.n, r, args.grid_size,
                                       SeededRng(args.seed), sampler=kind,
                                       n_atoms=n_atoms)
    doc = {
        "schema": SCHEMA,
        "version": __version__,
        "command": "ecdf",
        "seed": args.seed,
        "N": args.n,
        "r": r,
        "grid_size": args.grid_size,
        "sup_distance": res.sup_distance,
        "n_atoms_estimate": res.n_atoms_estimate,
    }
    if args.out:
        write_csv(args.out, np.array(res.rows()))
        _summary_path(args.out).write_text(json.dumps(doc, indent=2) + "\n",
                                           encoding="utf-8")
    else:
        doc["rows"] = res.rows()
    return doc


def cmd_coverage(args) -> dict:
    model, kind, n_atoms = parse_model(args.model)
    if args.seed is None:
        raise CliUsage("coverage needs --seed")
    region = None
    if args.kind == "spectral":
        if not args.region:
            raise CliUsage("spectral coverage needs --region")
        region, _ = parse_region(args.region[0], model.dim)
    r = None if args.r == "auto" else float(args.r)
    res = experiments.run_ci_coverage(
        model, args.n, r, args.kind, args.level, args.reps,
        SeededRng(args.seed), sampler=kind, region=region, beta=args.beta,
        epsilon=args.epsilon, n_atoms=n_atoms, workers=args.workers)
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": "coverage",
        "seed": args.seed,
        "kind": res.kind,
        "level": res.level,
        "reps": res.reps,
        "hits": res.hits,
        "coverage": res.coverage,
        "truth": res.truth,
    }


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tailspec",
        description="Tail index, spectral measure and total mass estimation "
                    "for heavy-tailed multivariate data via group maxima.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, model=False, data=False):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--level", type=float, default=0.95)
        sp.add_argument("--epsilon", type=float, default=tuning.DEFAULT_EPSILON)
        sp.add_argument("--beta", type=float, default=None)
        if model:
            sp.add_argument("--model", required=True,
                            help="model JSON or @file.json")
        if data:
            sp.add_argument("--input", required=True)
            sp.add_argument("--skip-header", action="store_true")
            sp.add_argument("--shuffle", action="store_true",
                            help="seeded row permutation before grouping")

    est = sub.add_parser("estimate", help="run all estimators on a CSV sample")
    common(est, data=True)
    est.add_argument("--r", default="auto")
    est.add_argument("--t", default="auto")
    est.add_argument("--alpha", type=float, default=None,
                     help="fixed tail index for the mass estimator (default: plug-in)")
    est.add_argument("--region", action="append",
                     help="arc:START:END or halfspace:u1,..,ud:c (repeatable)")
    est.set_defaults(fn=cmd_estimate)

    sim = sub.add_parser("simulate", help="write a simulated CSV sample")
    common(sim, model=True)
    sim.add_argument("--n", type=int, required=True)
    sim.set_defaults(fn=cmd_simulate)

    sw = sub.add_parser("sweep", help="estimator-vs-r Monte Carlo sweep")
    common(sw, model=True)
    sw.add_argument("--n", type=int, required=True)
    sw.add_argument("--reps", type=int, default=50)
    sw.add_argument("--target", choices=("alpha", "rho", "mass"), required=True)
    sw.add_argument("--grid", default=None, help="comma-separated r values")
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(fn=cmd_sweep)

    ec = sub.add_parser("ecdf", help="estimated vs exact spectral cdf (d=2)")
    common(ec, model=True)
    ec.add_argument("--n", type=int, required=True)
    ec.add_argument("--r", default="auto")
    ec.add_argument("--grid-size", type=int, default=256)
    ec.set_defaults(fn=cmd_ecdf)

    cov = sub.add_parser("coverage", help="CI coverage study")
    common(cov, model=True)
    cov.add_argument("--n", type=int, required=True)
    cov.add_argument("--reps", type=int, default=200)
    cov.add_argument("--kind", choices=("alpha", "spectral", "mass"),
                     required=True)
    cov.add_argument("--r", default="auto")
    cov.add_argument("--region", action="append")
    cov.add_argument("--workers", type=int, default=1)
    cov.set_defaults(fn=cmd_coverage)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = args.fn(args)
    except CliUsage as e:
        print(f"error[usage]: {e}", file=sys.stderr)
        return 2
    except (CsvParseError, NonFiniteEntry, EmptySample) as e:
        print(f"error[{type(e).__name__}]: {e}", file=sys.stderr)
        return 3
    except (FileNotFoundError, OSError) as e:
        print(f"error[io]: {e}", file=sys.stderr)
        return 3
    except TailspecError as e:
        print(f"error[{type(e).__name__}]: {e}", file=sys.stderr)
        return 4
    # estimate/coverage write their JSON doc to --out; the other commands
    # write files inside their handlers and echo the summary to stdout
    if args.command in ("estimate", "coverage"):
        _emit(doc, args.out)
    else:
        _emit(doc, None)
    return 0


if __name__ == "__main__":
    sys.exit(main())
