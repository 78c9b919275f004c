"""Command line entry point.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
usage error.  JSON goes to stdout unless ``--out`` is given; with ``--out`` a
``<out>.manifest.json`` sidecar records the run (parameters, seed, digests,
timestamps) so the main output stays byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, construct, hurwitz, numeric, pmap, regularity

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
QUAD_TOL = 1e-12
MAX_DEGREE, MAX_VARS = 12, 64


class UsageError(Exception):
    pass


def _p_arg(text: str):
    try:
        p = pmap.parse_p(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"invalid p {text!r}") from exc
    if p < 1:
        raise argparse.ArgumentTypeError("p must be at least 1")
    return p


def _dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _emit(text: str, args, inputs=()) -> None:
    if not args.out:
        sys.stdout.write(text)
        return
    started = datetime.now(timezone.utc).isoformat()
    out = Path(args.out)
    out.write_text(text, encoding="utf-8", newline="")
    params = {k: (pmap.format_p(v) if k == "p" and v is not None else v)
              for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    manifest = {
        "command": args.command,
        "parameters": params,
        "tool_version": __version__,
        "seed": getattr(args, "seed", None),
        "timestamps": {"started": started, "finished": datetime.now(timezone.utc).isoformat()},
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "outputs": {str(out): _sha256(out)},
    }
    Path(str(out) + ".manifest.json").write_text(_dumps(manifest), encoding="utf-8")


# -- subcommands -----------------------------------------------------------------


def _warn_size(n: int, k: int) -> None:
    # no hard cap; exact arithmetic just gets slow past these sizes
    if k > MAX_DEGREE or n > MAX_VARS:
        print(f"warning: n={n}, k={k} exceeds the comfortable range "
              f"(degree <= {MAX_DEGREE}, variables <= {MAX_VARS})", file=sys.stderr)


def _build(args) -> construct.HarmonicCandidate:
    _warn_size(args.n, args.k)
    try:
        return construct.build(args.n, args.method, args.k)
    except (ValueError, hurwitz.HurwitzError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_construct(args) -> int:
    _emit(_dumps(_build(args).to_json()), args)
    return EXIT_OK


def cmd_generate(args) -> int:
    h = _build(args)
    try:
        u = pmap.assemble(h, args.p)
    except pmap.AdmissibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(_dumps(u.to_json()), args)
    return EXIT_OK


def cmd_gamma(args) -> int:
    _warn_size(args.n, args.k)
    try:
        prof = pmap.gamma(args.n, args.k, args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    data = prof.to_json()
    data["quadratic_residual"] = prof.quadratic_residual()
    data["tau_residual"] = prof.tau_residual()
    _emit(_dumps(data), args)
    return EXIT_OK


def cmd_hurwitz_plan(args) -> int:
    try:
        t, plan = hurwitz.best_t(args.r, args.s, args.budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    fam = plan.replay()
    data = {
        "r": args.r,
        "s": args.s,
        "t": t,
        "budget": args.budget,
        "plan": plan.to_json(),
        "matrix_equations_hold": fam.matrix_equations_hold(),
    }
    if args.family:
        data["family"] = fam.to_json()
    _emit(_dumps(data), args)
    return EXIT_OK if data["matrix_equations_hold"] else EXIT_FAIL


def cmd_table(args) -> int:
    if args.max_n < 2:
        raise UsageError("--max-n must be at least 2")
    rows = construct.n_table(args.max_n, args.budget)
    _emit(construct.table_csv(rows), args)
    for row in rows:
        if row.gap:
            print(f"note: n={row.n}: constructed N={row.N_constructed}, reference N={row.N_paper}",
                  file=sys.stderr)
    return EXIT_OK


def cmd_curves(args) -> int:
    try:
        text = regularity.curves_csv(args.figure, args.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(text, args)
    return EXIT_OK


def _load_map(path: str, p_override):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not JSON: {exc}") from exc
    cand_data = data.get("candidate", data)
    p = p_override if p_override is not None else data.get("p")
    if p is None:
        raise UsageError("no p in the map file; pass --p")
    try:
        h = construct.HarmonicCandidate.from_json(cand_data)
        _warn_size(h.n, h.k)
        p = pmap.parse_p(p)
        return pmap.PMap(h, p, pmap.gamma(h.n, h.k, p))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed map file: {exc}") from exc


def verify_map(u: pmap.PMap, cfg: numeric.FDConfig) -> dict:
    """Exact checks followed by the finite-difference oracle; a JSON-ready report."""
    failures = []
    adm = construct.verify(u.candidate)
    failures += adm.failures()
    prof = u.profile
    p = u.p
    scale = 1.0 if pmap.is_inf(p) else max(1.0, float(p))
    quad = prof.quadratic_residual()
    if abs(quad) / scale >= QUAD_TOL:
        failures.append("quadratic")
    exact = {"admissibility": adm.to_json(), "quadratic_residual": quad,
             "tau_residual": prof.tau_residual()}
    report = {"parameters": {"n": u.n, "N": u.N, "k": u.k, "p": pmap.format_p(p),
                             "gamma": float(prof.gamma), "fd_step": cfg.step,
                             "points": cfg.sample_count, "seed": cfg.seed,
                             "annulus": list(cfg.annulus)}}
    if not pmap.is_inf(p) and p > 1:
        sym = pmap.symbolic_residual(u)
        exact["symbolic_residual"] = sym
        if abs(sym) >= QUAD_TOL * scale * max(1.0, float(prof.gamma) ** 2):
            failures.append("symbolic")
    report["exact"] = exact

    if p == 1:
        report["numeric"] = {"skipped": "p = 1: exponents only"}
        report.update(max_residual=None, mean_residual=None, per_point=[])
    else:
        res = numeric.residual_report(u, cfg)
        num = res.to_json()
        if not res.ok:
            failures.append("fd_residual")
        if pmap.is_inf(p):
            sq = numeric.grad_norm_sq_samples(u, cfg)
            target = pmap.grad_norm_sq_constant(u)
            num["grad_norm_sq"] = {"mean": float(np.mean(sq)), "variance": float(np.var(sq)),
                                   "expected": target}
            if np.var(sq) >= 1e-10 or abs(np.mean(sq) - target) >= 1e-8:
                failures.append("grad_norm_constancy")
        report["numeric"] = num
        report.update(max_residual=res.max_residual, mean_residual=res.mean_residual,
                      per_point=list(res.per_point))
    report["failures"] = failures
    report["ok"] = not failures
    return report


def cmd_verify(args) -> int:
    u = _load_map(args.map, args.p)
    kwargs = {"sample_count": args.points}
    if args.fd_step is not None:
        kwargs["step"] = args.fd_step
    if args.seed is not None:
        kwargs["seed"] = args.seed
    try:
        cfg = numeric.FDConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    args.seed = cfg.seed
    report = verify_map(u, cfg)
    _emit(_dumps(report), args, inputs=[args.map])
    return EXIT_OK if report["ok"] else EXIT_FAIL


# -- parser ----------------------------------------------------------------------


def _add_build_args(sp, default_method="hurwitz"):
    sp.add_argument("--n", type=int, required=True, help="domain dimension")
    sp.add_argument("--k", type=int, default=2, help="polynomial degree")
    sp.add_argument("--method", choices=construct.METHODS, default=default_method)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pharmonic", description="Homogeneous p-harmonic maps.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", aliases=["map"], help="build u = |x|^(gamma-k) h as JSON")
    _add_build_args(sp)
    sp.add_argument("--p", type=_p_arg, default=pmap.parse_p(2), help="p in [1, inf], e.g. 3/2 or inf")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("construct", help="emit an admissible polynomial candidate")
    _add_build_args(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("verify", help="exact and finite-difference checks of a map file")
    sp.add_argument("--map", required=True)
    sp.add_argument("--p", type=_p_arg, default=None, help="override p from the file")
    sp.add_argument("--fd-step", type=float, default=None)
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--seed", type=int, default=None, help="defaults to PHARMONIC_SEED or 42")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("gamma", help="print the exponent profile")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--p", type=_p_arg, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gamma)

    sp = sub.add_parser("hurwitz-plan", help="best composition plan for [r, s, t]")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--budget", type=int, default=hurwitz.DEFAULT_BUDGET)
    sp.add_argument("--family", action="store_true", help="include the matrices")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_hurwitz_plan)

    sp = sub.add_parser("table", help="admissible (n, N) table as CSV")
    sp.add_argument("--max-n", type=int, default=32)
    sp.add_argument("--budget", type=int, default=hurwitz.DEFAULT_BUDGET)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("curves", help="regularity curves as CSV")
    sp.add_argument("--figure", required=True, choices=regularity.FIGURES)
    sp.add_argument("--grid", type=int, default=101)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_curves)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "map":
        args.command = "generate"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
