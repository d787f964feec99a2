"""Command-line front end.

Subcommands: bounds, exact, theta, experiment, walk.  Exit codes are a
stable contract: 0 success, 1 input error, 2 singular instance,
3 non-convergence.  All outputs are pure functions of the inputs, the
seed, and the tolerances.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import mc, spectral, walk
from .dist import DriftError, ThetaNotFound, hypothesis_report, parse_model_spec, theta
from .mc import DEFAULT_SEED, ExperimentConfig, format_float
from .perm import Permutation, PermutationError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SINGULAR = 2
EXIT_NONCONVERGENCE = 3


class InputError(ValueError):
    """File or argument parse failure, with a location diagnostic."""


def read_permutation(path: str) -> Permutation:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError(f"{path}:1: empty permutation file")
    try:
        return Permutation.from_line(lines[0])
    except PermutationError as exc:
        raise InputError(f"{path}:1: {exc}") from exc


def read_diagonal(path: str) -> np.ndarray:
    """One complex entry per line as 're im'."""
    vals = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(
                f"{path}:{lineno}: expected 're im' pair, got {len(parts)} fields"
            )
        try:
            vals.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    if not vals:
        raise InputError(f"{path}:1: empty diagonal file")
    return np.asarray(vals, dtype=complex)


def _report_json(rep: spectral.GlobalBoundReport) -> str:
    return json.dumps(rep.to_dict(), indent=2, allow_nan=True) + "\n"


def _report_csv(rep: spectral.GlobalBoundReport) -> str:
    lines = ["cycle,start,length,c0,gamma,rho1,rho2,lower,upper,exact,singular"]
    for i, (r, ln, st) in enumerate(zip(rep.cycles, rep.lengths, rep.starts), start=1):
        exact = "" if r.exact is None else format_float(r.exact)
        lines.append(
            f"{i},{st},{ln},{format_float(r.c0)},{format_float(r.gamma)},"
            f"{format_float(r.rho1)},{format_float(r.rho2)},{format_float(r.lower)},"
            f"{format_float(r.upper)},{exact},{int(r.singular)}"
        )
    exact = "" if rep.exact is None else format_float(rep.exact)
    lines.append(
        f"global,,,,,,,{format_float(rep.lower)},{format_float(rep.upper)},"
        f"{exact},{int(rep.singular)}"
    )
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _verify_against_oracle(sigma, d, rep, tol: float) -> str | None:
    """Dense cross-check of the exact value; None on success."""
    from . import oracle

    if sigma.n > oracle.DEFAULT_CAP:
        return f"--verify skipped: N={sigma.n} exceeds the dense cap {oracle.DEFAULT_CAP}"
    a = oracle.assemble(sigma, d)
    s_dense = oracle.dense_smin(a)
    s_struct = 0.0 if rep.singular else math.sqrt(rep.exact)
    if abs(s_struct - s_dense) > 1e-8 * max(s_dense, 1e-300) + 1e-13:
        raise spectral.NonConvergenceError(
            f"oracle mismatch: structured {s_struct!r} vs dense {s_dense!r}"
        )
    return None


def cmd_bounds(args) -> int:
    sigma = read_permutation(args.perm)
    d = read_diagonal(args.diagonal)
    if d.size != sigma.n:
        raise InputError(
            f"{args.diagonal}:1: diagonal length {d.size} != permutation size {sigma.n}"
        )
    rep = spectral.bounds_global(sigma, d, want_exact=True, tol=args.tol)
    if args.verify:
        note = _verify_against_oracle(sigma, d, rep, args.tol)
        if note:
            sys.stderr.write(note + "\n")
    text = _report_csv(rep) if args.format == "csv" else _report_json(rep)
    _emit(text, args.out)
    return EXIT_SINGULAR if rep.singular else EXIT_OK


def cmd_exact(args) -> int:
    sigma = read_permutation(args.perm)
    d = read_diagonal(args.diagonal)
    if d.size != sigma.n:
        raise InputError(
            f"{args.diagonal}:1: diagonal length {d.size} != permutation size {sigma.n}"
        )
    s, singular = spectral.smin_global_exact(sigma, d, tol=args.tol)
    if args.verify:
        rep = spectral.bounds_global(sigma, d, want_exact=True, tol=args.tol)
        note = _verify_against_oracle(sigma, d, rep, args.tol)
        if note:
            sys.stderr.write(note + "\n")
    _emit(format_float(s) + "\n", args.out)
    return EXIT_SINGULAR if singular else EXIT_OK


def cmd_theta(args) -> int:
    model = parse_model_spec(args.model)
    rep = hypothesis_report(model)
    try:
        th = theta(model, tol=min(args.tol, 1e-10))
    except ThetaNotFound as exc:
        sys.stderr.write(f"error: {exc}\n{rep.render()}\n")
        return EXIT_INPUT
    out = f"theta = {format_float(th)}\n{rep.render()}\n"
    _emit(out, args.out)
    return EXIT_OK


def read_experiment_config(path: str, seed_override: int | None,
                           jobs: int) -> tuple[ExperimentConfig, str, str]:
    """Parse the flat key=value config with [model]/[experiment]/[output]
    sections; returns (config, experiment kind, output directory)."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InputError(f"{path}: {exc}") from exc

    def need(section: str, key: str) -> str:
        if not parser.has_option(section, key):
            raise InputError(f"{path}: missing {key!r} in [{section}]")
        return parser.get(section, key)

    if not parser.has_section("model"):
        raise InputError(f"{path}: missing [model] section")
    variant = need("model", "variant")
    params = [
        f"{k}={v}" for k, v in parser.items("model") if k != "variant"
    ]
    try:
        model = parse_model_spec(",".join([variant] + params))
    except (ValueError, DriftError) as exc:
        raise InputError(f"{path}: [model] {exc}") from exc

    kind = need("experiment", "kind").strip().lower()
    if kind not in ("lower_tail", "upper_tail", "gumbel", "t_tail", "sandwich"):
        raise InputError(f"{path}: unknown experiment kind {kind!r}")
    try:
        sizes = tuple(int(v) for v in need("experiment", "sizes").split())
        trials = int(need("experiment", "trials"))
        mode = parser.get("experiment", "mode", fallback="single_cycle")
        seed = parser.getint("experiment", "seed", fallback=DEFAULT_SEED)
        thresholds = tuple(
            float(v)
            for v in parser.get("experiment", "thresholds", fallback="1 2 4 8").split()
        )
        ladder_c = parser.getfloat("experiment", "c", fallback=1.0)
        tol = parser.getfloat("experiment", "tol", fallback=1e-9)
    except ValueError as exc:
        raise InputError(f"{path}: [experiment] {exc}") from exc
    if seed_override is not None:
        seed = seed_override
    out_dir = parser.get("output", "dir", fallback=".")
    try:
        cfg = ExperimentConfig(
            model=model, sizes=sizes, trials=trials, mode=mode, master_seed=seed,
            thresholds=thresholds, jobs=jobs, tol=tol, ladder_c=ladder_c,
        )
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return cfg, kind, out_dir


def cmd_experiment(args) -> int:
    cfg, kind, out_dir = read_experiment_config(args.config, args.seed, args.jobs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "lower_tail":
        rows, meta = mc.lower_tail_experiment(cfg)
        csv_text = mc.tail_rows_csv(rows)
    elif kind == "upper_tail":
        rows, meta = mc.upper_tail_experiment(cfg)
        csv_text = mc.tail_rows_csv(rows)
    elif kind == "gumbel":
        res = mc.gumbel_experiment(cfg.model, cfg.sizes, cfg.trials, cfg.master_seed)
        csv_text = mc.gumbel_csv(res)
        meta = {"median_ratio": res.median_ratio, "ks": res.ks, "theta": res.theta}
    elif kind == "t_tail":
        rows, meta = mc.t_tail_experiment(
            cfg.model, cfg.sizes, cfg.trials, cfg.master_seed,
            thresholds=cfg.thresholds, ladder_c=cfg.ladder_c,
        )
        csv_text = mc.tail_rows_csv(rows)
    else:
        records, meta = mc.sandwich_sweep(cfg)
        csv_text = mc.sandwich_csv(records)
    (out / f"{kind}.csv").write_text(csv_text)
    log_text = mc.experiment_log(cfg, meta)
    (out / f"{kind}.log").write_text(log_text)
    sys.stdout.write(log_text)
    return EXIT_OK


def cmd_walk(args) -> int:
    d = read_diagonal(args.diagonal)
    blk = spectral.CycleDiagonal(d)
    if np.any(np.abs(d) == 0):
        raise InputError(f"{args.diagonal}:1: walk needs nonzero entries")
    w = walk.from_diagonal(blk)
    m_n = walk.m_functional(w)
    t_n = walk.t_functional(w)
    u, u_hat = walk.u_functionals(w)
    dec = walk.ladder(w, args.c)
    report: dict = {
        "n": w.n,
        "c": args.c,
        "m_n": m_n,
        "t_n": t_n,
        "u_n": u,
        "u_hat_n": u_hat,
        "epochs": list(dec.epochs),
        "u_sums": list(dec.u_sums),
        "r_max": list(dec.r_max),
    }
    if args.c > 0:
        chk = walk.excursion_bound_check(w, args.c)
        report["k_constant"] = walk.k_constant(args.c)
        report["excursion_bound_lhs"] = chk.lhs
        report["excursion_bound_rhs"] = chk.rhs
        report["excursion_bound_holds"] = chk.holds
        report["excursion_bound_vacuous"] = chk.vacuous
    if not blk.singular:
        report["x_n"] = walk.x_functional(blk)
    if args.out:
        base = Path(args.out)
        path_lines = ["index,s"] + [
            f"{i},{format_float(v)}" for i, v in enumerate(w.s)
        ]
        base.with_suffix(".path.csv").write_text("\n".join(path_lines) + "\n")
        ladder_lines = ["i,k_i,u_i"] + [
            f"{i + 1},{k},{format_float(us)}"
            for i, (k, us) in enumerate(zip(dec.epochs, dec.u_sums))
        ]
        base.with_suffix(".ladder.csv").write_text("\n".join(ladder_lines) + "\n")
    sys.stdout.write(json.dumps(report, indent=2, allow_nan=True) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="permsmin",
        description="Bounds and exact smallest singular values of "
        "diagonal-plus-permutation matrices.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None,
                        help=f"master seed (default {DEFAULT_SEED})")
        sp.add_argument("--tol", type=float, default=1e-12,
                        help="solver tolerance")
        sp.add_argument("--verify", action="store_true",
                        help="force a dense-oracle cross check")
        sp.add_argument("--jobs", type=int, default=1, help="worker cap")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", default=None, help="output file")

    sp = sub.add_parser("bounds", help="per-cycle and global bound report")
    sp.add_argument("perm", help="permutation file (one image line)")
    sp.add_argument("diagonal", help="diagonal file ('re im' per line)")
    common(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("exact", help="exact smallest singular value")
    sp.add_argument("perm")
    sp.add_argument("diagonal")
    common(sp)
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("theta", help="tail exponent and hypothesis report")
    sp.add_argument("model", help="e.g. 'twopoint,a=0.5,b=2,p=0.6667'")
    common(sp)
    sp.set_defaults(func=cmd_theta)

    sp = sub.add_parser("experiment", help="run a config-driven experiment")
    sp.add_argument("config", help="INI config with [model]/[experiment]/[output]")
    common(sp)
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("walk", help="walk functionals of a diagonal file")
    sp.add_argument("diagonal")
    sp.add_argument("--c", type=float, default=1.0, help="ladder depth")
    common(sp)
    sp.set_defaults(func=cmd_walk)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except spectral.SingularCycleError as exc:
        sys.stderr.write(f"singular: {exc}\n")
        return EXIT_SINGULAR
    except (spectral.NonConvergenceError, RuntimeError) as exc:
        sys.stderr.write(f"non-convergence: {exc}\n")
        return EXIT_NONCONVERGENCE
    except (InputError, PermutationError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
