"""``depthkit`` command-line interface.

Every command reads a CSV (``-i``) or simulates data (``--simulate spec.json``
or ``--model NAME``), writes CSV/JSON results, and leaves a
``<output>.manifest.json`` next to the main output so the run can be
replayed with ``depthkit replay``.

Exit codes: 0 success, 2 usage or input error, 3 numeric degeneracy,
4 an experiment missed its acceptance band.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import ALL_METHODS, EXPERIMENTS, boundary_diagnostic, compute_depths, run_experiment
from .boundary import ShellPolicy
from .datagen import NAMED_MODELS, RNG_ALGORITHM, GeneratorSpec, generate, named_model
from .exceptions import DegenerateError, DepthError
from .geometry import METRIC_KINDS, Dataset, Metric
from .io import RunManifest, read_csv, write_csv, write_json
from .mmad import FIGURE1_LEVELS, contour_grid, depth_3mad, shell_assign
from .univariate import (DensityModel, boundary_mass_balance, depth_univariate, g_derivative,
                         g_scale, g_scale_population, g_subdifferential)

EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_BAND = 4


def _floats(text: str, name: str, count: int | None = None):
    try:
        vals = [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise DepthError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise DepthError(f"--{name}: expected {count} numbers, got {len(vals)}")
    return vals


def _default_seed() -> int:
    env = os.environ.get("DEPTHKIT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise DepthError(f"DEPTHKIT_SEED must be an integer, got {env!r}") from None


def _add_input(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("-i", "--input", help="numeric CSV (header row optional)")
    src.add_argument("--simulate", metavar="SPEC.json", help="generator spec JSON")
    src.add_argument("--model", choices=sorted(NAMED_MODELS), help="built-in simulation model")
    p.add_argument("--n", type=int, help="sample size override for --simulate/--model")
    p.add_argument("--seed", type=int, help="RNG seed (default: $DEPTHKIT_SEED or 0)")
    p.add_argument("-o", "--output", help="output CSV (default: stdout, no manifest)")


def _load(args):
    """Return (Dataset, input files, seeds, generator spec dict or None)."""
    if args.input:
        return read_csv(args.input), [args.input], [], None
    if args.simulate:
        try:
            doc = json.loads(Path(args.simulate).read_text())
        except OSError as exc:
            raise DepthError(f"cannot read {args.simulate}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DepthError(f"{args.simulate} is not valid JSON: {exc}") from exc
        if isinstance(doc, dict) and "seed" not in doc:
            doc["seed"] = _default_seed()
        spec = GeneratorSpec.from_dict(doc)
        inputs = [args.simulate]
    else:
        spec = named_model(args.model, seed=_default_seed())
        inputs = []
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    if args.n is not None:
        spec = spec.with_n(args.n)
    return generate(spec), inputs, [spec.seed], spec.to_dict()


def _metric(args, data: Dataset) -> Metric:
    return Metric.from_name(args.metric, data)


def _manifest(args, argv, params, inputs, seeds, extra_outputs=()):
    if not args.output or args.output == "-":
        return
    m = RunManifest.for_inputs(args.command, argv, params, seeds, inputs)
    m.outputs = [args.output, *extra_outputs]
    m.write(args.output + ".manifest.json")


def _sibling(output: str | None, suffix: str) -> str | None:
    if not output or output == "-":
        return None
    p = Path(output)
    return str(p.with_name(p.stem + suffix))


# -- commands -----------------------------------------------------------------------

def cmd_depth(args, argv):
    data, inputs, seeds, spec = _load(args)
    x = data.values
    queries = [_floats(q, "query", data.d) for q in args.query or []]
    q = np.array(queries) if queries else None
    phi = None
    if args.method == "3mad":
        dv = depth_3mad(x, _metric(args, data), q)
        phi, depth = dv.phi, dv.depth
        qphi, qdepth = dv.query_phi, dv.query_depth
    else:
        metric = _metric(args, data) if args.method == "spatial" else "l2"
        dseed = args.seed if args.seed is not None else _default_seed()
        depth = compute_depths(args.method, x, metric=metric,
                               n_directions=args.directions, seed=dseed)
        qphi = None
        qdepth = (compute_depths(args.method, x, q, metric=metric,
                                 n_directions=args.directions, seed=dseed)
                  if q is not None else None)
    srt = np.sort(depth)
    rank = depth.size - np.searchsorted(srt, depth, side="right") + 1
    header = ["index"] + (["phi"] if phi is not None else []) + ["depth", "rank"]
    rows = [[i] + ([phi[i]] if phi is not None else []) + [depth[i], rank[i]]
            for i in range(depth.size)]
    write_csv(args.output, header, rows)
    extra = []
    if q is not None:
        qrank = depth.size - np.searchsorted(srt, qdepth, side="right") + 1
        qheader = ["query"] + list(data.labels) + (["phi"] if qphi is not None else []) + ["depth", "rank"]
        qrows = [[k] + list(q[k]) + ([qphi[k]] if qphi is not None else []) + [qdepth[k], qrank[k]]
                 for k in range(q.shape[0])]
        qpath = _sibling(args.output, ".queries.csv")
        if qpath:
            write_csv(qpath, qheader, qrows)
            extra.append(qpath)
        for row in qrows:
            print(f"query {row[0]} depth {float(qdepth[row[0]])!r}", file=sys.stderr)
    _manifest(args, argv, {"method": args.method, "metric": args.metric,
                           "directions": args.directions, "queries": queries, "spec": spec},
              inputs, seeds, extra)


def cmd_contour(args, argv):
    data, inputs, seeds, spec = _load(args)
    if data.d != 2:
        raise DepthError(f"contour grids need 2-D data, got d={data.d}")
    if args.bounds:
        bounds = _floats(args.bounds, "bounds", 4)
    else:
        lo, hi = data.values.min(axis=0), data.values.max(axis=0)
        pad = 0.1 * np.where(hi > lo, hi - lo, 1.0)
        bounds = [lo[0] - pad[0], hi[0] + pad[0], lo[1] - pad[1], hi[1] + pad[1]]
    res = [int(r) for r in _floats(args.res, "res", 2)]
    grid = contour_grid(data.values, _metric(args, data), bounds, res, args.field)
    write_csv(args.output, ["x", "y", "value"], grid.rows(),
              comment=f"field_kind={grid.field_kind} metric={args.metric}")
    _manifest(args, argv, {"metric": args.metric, "field": args.field, "bounds": bounds,
                           "res": res, "spec": spec}, inputs, seeds)


def cmd_shells(args, argv):
    data, inputs, seeds, spec = _load(args)
    levels = _floats(args.levels, "levels")
    dv = depth_3mad(data.values, _metric(args, data))
    sa = shell_assign(dv, levels)
    write_csv(args.output, ["index", "phi", "shell_index"],
              ([i, dv.phi[i], sa.shell_index[i]] for i in range(dv.n)))
    _manifest(args, argv, {"metric": args.metric, "levels": levels, "spec": spec,
                           "thresholds": sa.thresholds, "sizes": sa.sizes()}, inputs, seeds)


def cmd_boundary(args, argv):
    data, inputs, seeds, spec = _load(args)
    center = None if args.center == "median" else _floats(args.center, "center", data.d)
    policy = ShellPolicy(epsilon=args.epsilon, m_min=args.mmin)
    shell, measure, grad = boundary_diagnostic(data.values, policy, center)
    dcols = [f"u{j + 1}" for j in range(data.d)]
    header = (["angle"] if measure.angles is not None else []) + dcols + ["weight"]
    rows = []
    for k in range(shell.size):
        rows.append(([measure.angles[k]] if measure.angles is not None else [])
                    + list(measure.directions[k]) + [measure.weights[k]])
    write_csv(args.output, header, rows)
    summary = {"center": shell.center, "radius": shell.radius, "half_width": shell.half_width,
               "shell_size": shell.size, "resultant": measure.resultant,
               "resultant_length": measure.resultant_length, "gradient": grad}
    side = _sibling(args.output, ".json")
    if side:
        write_json(side, summary)
    else:
        print(json.dumps({k: np.asarray(v).tolist() for k, v in summary.items()}), file=sys.stderr)
    _manifest(args, argv, {"center": args.center, "mmin": args.mmin, "epsilon": args.epsilon,
                           "spec": spec}, inputs, seeds, [side] if side else [])


def _matrix_rows(methods, values):
    return ([m] + list(values[i]) for i, m in enumerate(methods))


def cmd_experiment(args, argv):
    out = Path(args.output or f"experiment-{args.name}")
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else _default_seed()
    res = run_experiment(args.name, args.replicates, seed, args.n, workers=args.threads)
    files = []
    if res.kind in ("correlation", "overlap"):
        mat = res.result
        csv_path = out / f"{args.name}.csv"
        write_csv(csv_path, ["method", *mat.methods], _matrix_rows(mat.methods, mat.values))
        doc = {"methods": mat.methods, "values": mat.values, "replicates": mat.replicates}
        if res.kind == "overlap":
            doc["alpha"] = mat.alpha
        write_json(out / f"{args.name}.json", doc)
        files += [str(csv_path), str(out / f"{args.name}.json")]
    else:
        rep = res.result
        csv_path = out / f"{args.name}.csv"
        write_csv(csv_path, ["replicate", "seed_symmetric", "seed_skewed", "length_symmetric",
                             "length_skewed", "grad_symmetric_x", "grad_symmetric_y",
                             "grad_skewed_x", "grad_skewed_y"],
                  ([r, *rep.seeds[r], *rep.resultant_length[r], *rep.gradient[r, 0], *rep.gradient[r, 1]]
                   for r in range(rep.seeds.shape[0])))
        angles_path = out / f"{args.name}-angles.csv"
        write_csv(angles_path, ["replicate", "dataset", "angle", "weight"],
                  ([r, lab, a, w] for r, row in enumerate(rep.measures)
                   for lab, m in zip(rep.labels, row) for a, w in zip(m.angles, m.weights)))
        write_json(out / f"{args.name}.json",
                   {"labels": rep.labels, "median_resultant_length": rep.median_length(),
                    "resultant_length": rep.resultant_length, "gradient": rep.gradient,
                    "radius": rep.radius, "shell_size": rep.shell_size})
        files += [str(csv_path), str(angles_path), str(out / f"{args.name}.json")]
    summary = {"experiment": args.name, "passed": res.passed,
               "checks": [{"check": c, "passed": ok} for c, ok in res.checks], "params": res.params}
    write_json(out / "summary.json", summary)
    for c, ok in res.checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {args.name}: {c}")
    manifest = RunManifest.for_inputs("experiment", argv, res.params, [seed])
    manifest.outputs = files + [str(out / "summary.json")]
    manifest.write(out / "manifest.json")
    return 0 if res.passed else EXIT_BAND


def cmd_univariate(args, argv):
    if args.density:
        if not args.at:
            raise DepthError("--density needs --at evaluation points")
        params = _floats(args.params, "params") if args.params else []
        dm = DensityModel(args.density, tuple(params) if params else
                          {"normal": (0.0, 1.0), "exponential": (1.0,), "uniform": (0.0, 1.0)}[args.density])
        rows = []
        for v in _floats(args.at, "at"):
            rows.append([v, g_scale_population(v, dm), g_derivative(v, dm), boundary_mass_balance(v, dm)])
        write_csv(args.output, ["v", "G", "G_prime", "boundary_mass_left"], rows)
        _manifest(args, argv, {"density": args.density, "params": list(dm.params), "at": args.at},
                  [], [])
        return
    if not args.input:
        raise DepthError("univariate needs -i CSV or --density")
    data = read_csv(args.input)
    if not 0 <= args.column < data.d:
        raise DepthError(f"--column {args.column} out of range for {data.d} columns")
    x = data.values[:, args.column]
    q = np.array(_floats(args.at, "at")) if args.at else x
    g = g_scale(q, x)
    depth = depth_univariate(q, x)
    sub = [g_subdifferential(v, x) for v in q]
    write_csv(args.output, ["v", "G", "depth", "G_minus", "G_plus"],
              ([q[i], g[i], depth[i], sub[i].lower, sub[i].upper] for i in range(q.size)))
    _manifest(args, argv, {"column": args.column, "at": args.at}, [args.input], [])


def cmd_replay(args, argv):
    m = RunManifest.read(args.manifest)
    m.check_inputs()
    return main(m.argv)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="depthkit", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version",
                   version=f"depthkit {__version__} (rng {RNG_ALGORITHM})")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("depth", help="depth of every observation (and optional queries)")
    _add_input(d)
    d.add_argument("--method", choices=ALL_METHODS, default="3mad")
    d.add_argument("--metric", choices=METRIC_KINDS, default="l2",
                   help="3MAD distance; mahalanobis also standardises spatial depth")
    d.add_argument("--directions", type=int, default=1000, help="projection/Tukey directions")
    d.add_argument("--query", action="append", metavar="X,Y,...", help="extra query point")
    d.set_defaults(func=cmd_depth)

    c = sub.add_parser("contour", help="3MAD scale or depth on a 2-D grid")
    _add_input(c)
    c.add_argument("--metric", choices=METRIC_KINDS, default="l2")
    c.add_argument("--field", choices=("scale", "depth"), default="scale")
    c.add_argument("--bounds", metavar="XMIN,XMAX,YMIN,YMAX")
    c.add_argument("--res", default="50,50", metavar="NX,NY")
    c.set_defaults(func=cmd_contour)

    s = sub.add_parser("shells", help="quantile-shell membership")
    _add_input(s)
    s.add_argument("--metric", choices=METRIC_KINDS, default="l2")
    s.add_argument("--levels", default=",".join(f"{a:.2f}" for a in FIGURE1_LEVELS))
    s.set_defaults(func=cmd_shells)

    b = sub.add_parser("boundary", help="boundary angular measure and gradient")
    _add_input(b)
    b.add_argument("--center", default="median", help="'median' or comma-separated coordinates")
    b.add_argument("--mmin", type=int, help="minimum shell members (default max(10, ceil(n/4)))")
    b.add_argument("--epsilon", type=float, help="fixed shell half-width")
    b.set_defaults(func=cmd_boundary)

    e = sub.add_parser("experiment", help="run a canned comparison experiment")
    e.add_argument("--name", required=True, choices=sorted(EXPERIMENTS))
    e.add_argument("--replicates", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--n", type=int, help="sample size override")
    e.add_argument("-o", "--output", help="output directory")
    e.set_defaults(func=cmd_experiment)

    u = sub.add_parser("univariate", help="moving MAD of a 1-D sample or a reference density")
    u.add_argument("-i", "--input", help="CSV; the column given by --column is used")
    u.add_argument("--column", type=int, default=0)
    u.add_argument("--density", choices=("normal", "exponential", "uniform"))
    u.add_argument("--params", help="density parameters, e.g. 0,1")
    u.add_argument("--at", help="comma-separated evaluation points")
    u.add_argument("-o", "--output")
    u.set_defaults(func=cmd_univariate)

    r = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    r.add_argument("manifest")
    r.set_defaults(func=cmd_replay)

    for sp in (d, c, s, b, e, u, r):
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads (outputs do not depend on it)")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = args.func(args, argv)
    except DegenerateError as exc:
        print(f"depthkit: error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DepthError, OSError) as exc:
        print(f"depthkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
