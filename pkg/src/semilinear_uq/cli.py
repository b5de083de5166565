"""Command-line entry point: ``semilinear-uq <command> [options]``.

Exit codes: 0 all checks passed, 1 hard failure (positivity, normalisation,
gap, identity, solver failure), 3 soft failure (a fitted rate outside its band).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import experiments as ex
from .errors import SolverError
from .multiindex import (MultiIndex, all_multi_indices, check_falling_inequalities, ggcombi_lhs,
                         ggcombi_rhs, verify_gamma_against_oracle, SymbolicPoly)
from .qmc import cbc_construct, write_generating_vector

log = logging.getLogger("semilinear_uq")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", "-c", help="YAML experiment configuration")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", help=f"output directory (default: config, ${ex.OUT_ENV}, or ./results)")
    p.add_argument("--threads", type=int, default=1, help="worker processes (results do not depend on it)")


def _load(args) -> ex.ExperimentConfig:
    cfg = ex.load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _report(res: ex.StudyResult, out) -> int:
    paths = ex.write_study(res, out)
    for f in res.fits:
        status = "ok" if f.passed else "OUT OF BAND"
        print(f"{res.name} {f.quantity}: slope {f.fit.slope:+.3f} (target {f.target:+.3f}, "
              f"band [{f.lower:+.3f}, {f.upper:+.3f}]) r2={f.fit.r2:.4f} {status}")
    if res.summary:
        print(json.dumps(res.summary, default=str, indent=1))
    for msg in res.hard_failures:
        print(f"HARD FAILURE: {msg}", file=sys.stderr)
    for p in paths:
        print(f"wrote {p}")
    return res.exit_code


def cmd_solve(args) -> int:
    cfg = _load(args)
    spec = ex.build_spec(cfg)
    y = np.array([float(v) for v in args.y.split(",")]) if args.y else np.zeros(0)
    gs = ex._solve(spec, cfg, y)
    fails = ex.solve_hard_checks(spec, gs)
    rep = ex.gap_report(spec, gs, cfg.solver.tol)
    meta = ex._meta(cfg, study="solve", y=";".join(map(repr, y.tolist())), lam=gs.lam,
                    energy=gs.energy, gap=rep.gap)
    cols = [f"x{i + 1}" for i in range(spec.grid.d)] + ["u"]
    table = ex.Table(cols, [[*map(float, x), float(u)] for x, u in zip(spec.grid.coords, gs.u)], meta)
    path = ex.emit_csv(table, ex.output_dir(cfg, args.out) / "solve.csv")
    print(json.dumps({"lambda": gs.lam, "energy": gs.energy, "scf_iters": gs.scf_iters,
                      "gap": rep.gap, "witness": rep.lower_witness, "max_u": float(gs.u.max()),
                      "checks_failed": fails}, indent=1))
    print(f"wrote {path}")
    return ex.EXIT_HARD if fails else ex.EXIT_OK


def _study(runner):
    def cmd(args) -> int:
        cfg = _load(args)
        t0 = time.perf_counter()
        res = runner(cfg, threads=args.threads)
        log.info("%s finished in %.1f s", res.name, time.perf_counter() - t0)
        return _report(res, ex.output_dir(cfg, args.out))
    return cmd


def cmd_cbc(args) -> int:
    cfg = _load(args)
    s = args.s or cfg.qmc.s
    w = ex.qmc_weights(cfg, s)
    rule = cbc_construct(args.N, s, w)
    out = ex.output_dir(cfg, args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"lattice_N{args.N}_s{s}.txt"
    write_generating_vector(path, rule, w.theta)
    print(" ".join(map(str, rule.z)))
    print(f"wrote {path}")
    return ex.EXIT_OK


def cmd_verify_combinatorics(args) -> int:
    import random

    rng = random.Random(args.seed if args.seed is not None else 0)
    ok = True
    t0 = time.perf_counter()
    nus = [m for m in all_multi_indices(3, 4, min_order=1)]
    checks = 0
    for _ in range(args.polys):
        u = SymbolicPoly.random(rng, n_vars=3, max_degree=3)
        cache: dict = {}
        for p in range(2, 6):
            for nu in nus:
                checks += 1
                if not verify_gamma_against_oracle(u, p, nu, _cache=cache):
                    print(f"gamma expansion mismatch: p={p} nu={nu.pack()} u={u!r}")
                    ok = False
    print(f"gamma expansion: {checks} checks in {time.perf_counter() - t0:.1f} s -> {'ok' if ok else 'FAILED'}")
    fall = check_falling_inequalities(30)
    print(f"falling-factorial inequalities n<=30: {'ok' if fall else 'FAILED'}")
    bound_ok = all(ggcombi_lhs(p, nu) <= ggcombi_rhs(p, nu)
                   for p in range(2, 5) for nu in all_multi_indices(3, 6, min_order=1))
    print(f"partition bound |nu|<=6, p<=4: {'ok' if bound_ok else 'FAILED'}")
    return ex.EXIT_OK if ok and fall and bound_ok else ex.EXIT_HARD


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="semilinear-uq", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="ground state at one parameter value")
    _common(p)
    p.add_argument("--y", help="comma-separated parameter values in [-1/2, 1/2]")
    p.set_defaults(func=cmd_solve)

    for name, runner, hlp in [("gap-scan", ex.run_gap_scan, "spectral gap over random parameters"),
                              ("deriv-scan", ex.run_deriv_scan, "mixed-derivative bound ratios"),
                              ("qmc", ex.run_qmc_convergence, "QMC convergence study"),
                              ("truncation", ex.run_truncation, "dimension truncation study")]:
        p = sub.add_parser(name, help=hlp)
        _common(p)
        p.set_defaults(func=_study(runner))

    p = sub.add_parser("cbc", help="construct and save a lattice generating vector")
    _common(p)
    p.add_argument("--N", type=int, required=True, help="prime number of points")
    p.add_argument("--s", type=int, help="dimension (default: qmc.s)")
    p.set_defaults(func=cmd_cbc)

    p = sub.add_parser("verify-combinatorics", help="exact checks of the derivative combinatorics")
    p.add_argument("--seed", type=int)
    p.add_argument("--polys", type=int, default=20, help="random polynomials per (p, nu)")
    p.set_defaults(func=cmd_verify_combinatorics)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ex.EXIT_HARD


if __name__ == "__main__":
    sys.exit(main())
