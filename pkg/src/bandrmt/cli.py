"""Experiment runner.

    bandrmt <subcommand> --config cfg.ini --out runs/my-run [--seed S]
            [--replicas R] [--threads T] [--dense-oracle]

Subcommands: semicircle, correlation, scaling, local-scale, theory-table,
pointwise.  The config file supplies the profile, ensemble and experiment
sections (see config.py for the grammar); a JSON run manifest can be passed
instead of a config to reproduce a previous run bit-exactly.

Exit status: 0 success, 1 numerical failure (partial outputs retained,
manifest carries the failure marker), 2 invalid configuration (single-line
machine-parsable reason on stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .config import (
    SUBCOMMANDS,
    ConfigError,
    ExperimentSpec,
    load_spec,
    parse_complex,
    parse_complex_list,
    parse_grid,
)
from .profiles import make_profile
from . import experiments
from .runio import RunManifest, write_csv, write_values


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bandrmt", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS,
                    help="experiment to run (defaults to the config's kind)")
    ap.add_argument("--config", required=True, help="INI config or JSON manifest")
    ap.add_argument("--out", default="runs", help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="override base seed")
    ap.add_argument("--replicas", type=int, default=None, help="override replica count")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="worker processes (default: number of cores)")
    ap.add_argument("--dense-oracle", action="store_true",
                    help="force the dense eigendecomposition path")
    return ap


def _z_pair(spec: ExperimentSpec):
    zs = parse_complex_list(spec.experiment.get("z_points", ""))
    if len(zs) != 2:
        raise ConfigError("experiment needs exactly two z_points")
    return zs


def _resolve_replicas(spec: ExperimentSpec, args) -> int:
    if args.replicas is not None:
        return args.replicas
    try:
        return int(spec.experiment["replicas"])
    except KeyError as exc:
        raise ConfigError("experiment is missing `replicas`") from exc


def _run_semicircle(spec, args, outdir, method):
    profs = [spec.profile]
    if "profiles" in spec.experiment:
        profs = []
        for tok in spec.experiment["profiles"].split(","):
            kind, _, param = tok.strip().partition(":")
            profs.append(make_profile(kind, float(param) if param else 1.0))
    cfg = spec.ensemble_config(seed=args.seed)
    goe_n = int(spec.experiment["goe_n"]) if "goe_n" in spec.experiment else None
    rows = experiments.semicircle_study(profs, cfg.n, cfg.b, cfg.v, cfg.base_seed,
                                        goe_n=goe_n)
    outputs = {}
    for row in rows:
        name = f"eigenvalues_{row.label.replace(':', '_')}.txt"
        outputs[name] = write_values(
            outdir / name, row.eigenvalues,
            comment="sorted eigenvalues of one realization",
        )
    outputs["semicircle.csv"] = write_csv(
        outdir / "semicircle.csv",
        ["label", "N", "b", "v", "ks_distance"],
        [(r.label, r.N, r.b, r.v, r.ks_distance) for r in rows],
        comment="sup-distance between the empirical counting function and the "
                "semicircle law sqrt(4v-x^2)/(2 pi v)",
    )
    return outputs, {"ks_max": max(r.ks_distance for r in rows)}


def _run_correlation(spec, args, outdir, method):
    z1, z2 = _z_pair(spec)
    cfg = spec.ensemble_config(seed=args.seed)
    res = experiments.correlation_study(cfg, z1, z2, _resolve_replicas(spec, args),
                                        threads=args.threads, method=method)
    outputs = {
        "traces.csv": write_csv(
            outdir / "traces.csv",
            ["replica", "z_re", "z_im", "f_re", "f_im"],
            [(r, z.real, z.imag, res.traces[r, i].real, res.traces[r, i].imag)
             for r in range(res.traces.shape[0]) for i, z in enumerate((z1, z2))],
            comment="normalized resolvent trace f(z) = (1/N) tr (H - z)^-1 per replica",
        ),
        "correlation.csv": write_csv(
            outdir / "correlation.csv",
            ["z1_re", "z1_im", "z2_re", "z2_im", "C_re", "C_im", "C_stderr",
             "Nb", "NbC_re", "NbC_im", "NbC_stderr", "S_re", "S_im",
             "abs_deviation", "tolerance", "within_tolerance"],
            [(z1.real, z1.imag, z2.real, z2.imag,
              res.estimate.mean.real, res.estimate.mean.imag, res.estimate.stderr,
              cfg.N * cfg.b, res.scaled_mean.real, res.scaled_mean.imag,
              res.scaled_stderr, res.s_value.real, res.s_value.imag,
              res.abs_deviation, res.tolerance, res.within_tolerance)],
            comment="trace covariance C = Cov(f(z1), f(z2)); leading term "
                    "S = 2 v Q / ((1-v w1^2)(1-v w2^2)) with C ~ S/(N b)",
        ),
    }
    return outputs, {"within_tolerance": res.within_tolerance,
                     "NbC": [res.scaled_mean.real, res.scaled_mean.imag],
                     "S": [res.s_value.real, res.s_value.imag]}


def _run_scaling(spec, args, outdir, method):
    z1, z2 = _z_pair(spec)
    grid = parse_grid(spec.experiment.get("grid", ""))
    res = experiments.scaling_study(grid, spec.profile, spec.v, z1, z2,
                                    _resolve_replicas(spec, args),
                                    int(args.seed if args.seed is not None
                                        else spec.ensemble.get("seed", 0)),
                                    threads=args.threads)
    outputs = {
        "scaling.csv": write_csv(
            outdir / "scaling.csv",
            ["N", "b", "Nb", "C_abs", "C_stderr"],
            [(N, b, x, y, e) for (N, b), x, y, e
             in zip(res.grid, res.abscissas, res.correlations, res.stderrs)],
            comment="trace covariance magnitude against N*b; the expansion "
                    "C = S/(N b) + o(1/(N b)) predicts slope -1 on log-log axes",
        ),
        "scaling_fit.csv": write_csv(
            outdir / "scaling_fit.csv",
            ["slope", "slope_stderr", "intercept"],
            [(res.fit.slope, res.fit.slope_stderr, res.fit.intercept)],
            comment="ordinary least squares on log|C| vs log(N b)",
        ),
    }
    return outputs, {"slope": res.fit.slope, "slope_stderr": res.fit.slope_stderr}


def _run_local_scale(spec, args, outdir, method):
    exp = spec.experiment
    lam = float(exp.get("lambda", 0.0))
    dmin = float(exp.get("delta_min", 1e-4))
    dmax = float(exp.get("delta_max", 1e-2))
    count = int(exp.get("delta_count", 9))
    deltas = np.logspace(np.log10(dmin), np.log10(dmax), count)
    res = experiments.local_scale_study(spec.profile, spec.v, lam, deltas)
    outputs = {
        "local_scale.csv": write_csv(
            outdir / "local_scale.csv",
            ["lambda", "delta", "sigma_Nb", "sigma_asymptotic_Nb", "nu", "c1"],
            [(lam, d, s, a, res.nu, res.c1)
             for d, s, a in zip(res.deltas, res.sigma_values, res.asymptotic_values)],
            comment="smoothed local-scale correlation (1/(N b) prefactor stripped): "
                    "exact signed combination of S boundary values vs the small-gap "
                    "asymptote 2 B_nu(c1)/(2 rho)^(1/nu) * gap^-(2-1/nu)",
        ),
        "local_scale_fit.csv": write_csv(
            outdir / "local_scale_fit.csv",
            ["slope", "slope_expected", "nu", "c1"],
            [(res.slope, res.slope_expected, res.nu, res.c1)],
            comment="log-log slope of |sigma| against the gap",
        ),
    }
    return outputs, {"slope": res.slope, "slope_expected": res.slope_expected}


def _run_theory_table(spec, args, outdir, method):
    exp = spec.experiment
    z_points = parse_complex_list(exp.get("z_points", ""))
    z_pairs = []
    for tok in exp.get("z_pairs", "").split(";"):
        tok = tok.strip()
        if not tok:
            continue
        try:
            a, b = tok.split("&")
        except ValueError as exc:
            raise ConfigError(f"cannot parse z pair {tok!r} (expected z1 & z2)") from exc
        z_pairs.append((parse_complex(a), parse_complex(b)))
    lam = float(exp.get("lambda", 0.0))
    deltas = [float(t) for t in exp.get("deltas", "").split(",") if t.strip()]
    res = experiments.theory_table(spec.profile, spec.v, z_points, z_pairs, lam, deltas)
    outputs = {}
    if res.w_rows:
        outputs["theory_w.csv"] = write_csv(
            outdir / "theory_w.csv",
            ["z_re", "z_im", "w_re", "w_im"],
            [(z.real, z.imag, w.real, w.imag) for z, w in res.w_rows],
            comment="semicircle transform: root of v w^2 + z w + 1 = 0 with "
                    "Im w * Im z >= 0",
        )
    if res.s_rows:
        outputs["theory_s.csv"] = write_csv(
            outdir / "theory_s.csv",
            ["z1_re", "z1_im", "z2_re", "z2_im", "S_re", "S_im", "Q_re", "Q_im"],
            [(z1.real, z1.imag, z2.real, z2.imag, s.real, s.imag, q.real, q.imag)
             for z1, z2, s, q in res.s_rows],
            comment="leading trace-correlation coefficient S and its profile "
                    "integral Q",
        )
    if res.sigma_rows:
        outputs["theory_sigma.csv"] = write_csv(
            outdir / "theory_sigma.csv",
            ["lambda", "delta", "sigma_Nb", "sigma_asymptotic_Nb", "nu", "c1"],
            list(res.sigma_rows),
            comment="smoothed local-scale correlation (prefactor stripped)",
        )
    return outputs, {"rows": len(res.w_rows) + len(res.s_rows) + len(res.sigma_rows)}


def _run_pointwise(spec, args, outdir, method):
    exp = spec.experiment
    z = parse_complex(exp.get("z", "3.5j"))
    L = int(exp.get("l", exp.get("L", 2)))
    cfg = spec.ensemble_config(seed=args.seed)
    b_values = [float(t) for t in exp.get("b_list", str(cfg.b)).split(",") if t.strip()]
    rows = experiments.pointwise_study(cfg.n, b_values, spec.profile, cfg.v, z, L,
                                       _resolve_replicas(spec, args), cfg.base_seed,
                                       threads=args.threads)
    outputs = {
        "pointwise.csv": write_csv(
            outdir / "pointwise.csv",
            ["n", "b", "L", "z_re", "z_im", "replicas", "sup_bulk", "sup_stderr",
             "sup_full_range"],
            [(r.config.n, r.config.b, r.L, z.real, z.imag, r.replicas,
              r.sup, r.stderr, r.sup_full_range) for r in rows],
            comment="sup over the bulk set {|x| <= n - b L} of "
                    "|mean G(x,x;z) - w(z)|",
        ),
    }
    return outputs, {"sups": [r.sup for r in rows]}


_RUNNERS = {
    "semicircle": _run_semicircle,
    "correlation": _run_correlation,
    "scaling": _run_scaling,
    "local-scale": _run_local_scale,
    "theory-table": _run_theory_table,
    "pointwise": _run_pointwise,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = load_spec(args.config)
        if args.subcommand and args.subcommand != spec.subcommand:
            raise ConfigError(
                f"subcommand {args.subcommand!r} does not match config kind "
                f"{spec.subcommand!r}"
            )
        if spec.subcommand in ("semicircle", "correlation", "pointwise"):
            cfg = spec.ensemble_config(seed=args.seed)
            if not cfg.in_recommended_regime:
                print(f"warning: b = n^chi with chi = {cfg.chi:.3f} outside (1/3, 1)",
                      file=sys.stderr)
    except ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return 2

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else int(spec.ensemble.get("seed", 0))
    replicas = args.replicas
    if replicas is None and "replicas" in spec.experiment:
        replicas = int(spec.experiment["replicas"])
    manifest = RunManifest(
        subcommand=spec.subcommand, config=spec.resolved(), seed=seed,
        replicas=replicas, threads=args.threads,
    )
    manifest.save(outdir / "manifest.json")
    method = "dense" if args.dense_oracle else "auto"
    t0 = time.perf_counter()
    try:
        # one BLAS thread everywhere: reproducible reductions; parallelism
        # comes from the replica worker pool
        with threadpool_limits(limits=1):
            outputs, summary = _RUNNERS[spec.subcommand](spec, args, outdir, method)
    except ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure: keep partial outputs, mark manifest
        manifest.status = "failed"
        manifest.error = f"{type(exc).__name__}: {exc}"
        manifest.wall_time_s = time.perf_counter() - t0
        manifest.save(outdir / "manifest.json")
        print(f"error: {manifest.error}", file=sys.stderr)
        return 1
    manifest.status = "complete"
    manifest.outputs = outputs
    manifest.wall_time_s = time.perf_counter() - t0
    manifest.save(outdir / "manifest.json")
    for key, val in summary.items():
        print(f"{key}: {val}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
