"""Command-line entry point.

Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
Set ``SHOOTING_LOG`` to a logging level name (``INFO``, ``DEBUG``) for progress output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import io, lemma_checks, shooting, thresholds, transforms
from .errors import (DomainError, InfeasibleError, NumericalBlowUpError, RefinementError,
                     ValidationError)
from .integrator import ProblemDef, Tolerance
from .nonlinearity import Nonlinearity

COMMANDS = ("solve", "sweep", "thresholds", "check-lemmas", "reproduce-example",
            "radial", "extend-periodic")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("indefinite_neumann.cli")


def _fixture(name: str) -> dict:
    return json.loads(resources.files("indefinite_neumann").joinpath("data", name).read_text())


def example_problem() -> ProblemDef:
    """The bundled three-hump example at ``lambda = 25``, ``mu = 500``."""
    return io.problem_from_dict(_fixture("example.json"))


def _grid(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        n = int(n)
        if n < 1:
            raise ValueError
        return np.linspace(float(a), float(b), n)
    except ValueError:
        raise ValidationError(f"grid {spec!r} is not of the form a:b:n") from None


def _options(args) -> shooting.ShootingOptions:
    opts = shooting.ShootingOptions()
    changes = {}
    if args.tol_rel is not None or args.tol_abs is not None:
        changes["tol"] = Tolerance(args.tol_rel or opts.tol.rtol, args.tol_abs or opts.tol.atol)
    if args.gap_max is not None:
        changes["gap_max"] = args.gap_max
    return dataclasses.replace(opts, **changes) if changes else opts


def _problem(args) -> ProblemDef:
    if args.input is None:
        if args.command in ("reproduce-example", "extend-periodic", "thresholds",
                            "check-lemmas"):
            d = _fixture("example.json")
        else:
            raise ValidationError(f"{args.command} needs --input")
    else:
        d = io.read_json(args.input)
    p = io.problem_from_dict(d, args.lam, args.mu)
    p.weight.structure
    return p


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- writers --------------------------------------------------------------------


def _solution_rows(sols):
    for k, s in enumerate(sols):
        tr = s.trajectory
        for t, u, du in zip(tr.times, tr.x, tr.y):
            yield k, float(t), float(u), float(du)


def write_solve(out: Path, res: shooting.SolveResult) -> None:
    io.write_csv(out / "solutions.csv", io.CSV_COLUMNS["solutions.csv"],
                 _solution_rows(res.solutions))
    rows = [(c.direction, *r) for c in (res.forward, res.backward) for r in c.to_rows()]
    io.write_csv(out / "continua.csv", io.CSV_COLUMNS["continua.csv"], rows)
    payload = {
        "lambda": res.problem.lam,
        "mu": res.problem.mu,
        "intersections": [ip.to_dict() for ip in res.intersections],
        "solutions": [s.summary() for s in res.solutions],
        "rejected": [{"point": ip.to_dict(), "reason": why} for ip, why in res.rejected],
        "continua": {
            c.direction: {"nodes": len(c), "gap_achieved": c.gap_achieved,
                          "conforming": c.conforming}
            for c in (res.forward, res.backward)
        },
    }
    io.write_json(out / "intersections.json", payload, io.INTERSECTIONS_SCHEMA)


# -- commands --------------------------------------------------------------------


def cmd_solve(args) -> int:
    p = _problem(args)
    res = shooting.solve(p, _options(args))
    write_solve(_out(args), res)
    print(f"{res.count} solution(s) at lambda={p.lam:g}, mu={p.mu:g}")
    for s in res.solutions:
        print(f"  u(0) = {s.xi:.12g}   u(T) = {s.trajectory.x[-1]:.12g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    p = _problem(args)
    lam = _grid(args.grid_lambda) if args.grid_lambda else np.array([p.lam])
    mu = _grid(args.grid_mu) if args.grid_mu else np.array([p.mu])
    res = shooting.sweep(p, lam, mu, _options(args), jobs=args.jobs)
    io.write_csv(_out(args) / "sweep.csv", io.CSV_COLUMNS["sweep.csv"], res.rows())
    for (i, j), err in sorted(res.errors.items()):
        log.warning("cell lambda=%g mu=%g failed: %s", lam[i], mu[j], err)
    print(f"{lam.size * mu.size} cell(s), {len(res.errors)} failed")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    p = _problem(args)
    rep = thresholds.certify(p, lam=args.lam if args.lam is not None else None)
    io.write_json(_out(args) / "thresholds.json", rep.to_dict(), io.THRESHOLDS_SCHEMA)
    print(f"lambda* = {rep.lambda_star:.10g}, mu*(lambda={rep.lam:.10g}) = {rep.mu_star:.10g}")
    return EXIT_OK


def cmd_check_lemmas(args) -> int:
    p = _problem(args)
    rep = thresholds.certify(p)
    q = p.with_params(rep.lam, 1.01 * rep.mu_star)
    prm = lemma_checks.suite_params(rep)
    alt = lemma_checks.suite_params(rep, 1)
    n = args.trials

    def run(lid):
        cases = lemma_checks.check(lid, q, prm[lid], n, args.seed)
        if lid in ("2.6", "2.7"):
            half = n // 2
            cases = cases[:n - half] + lemma_checks.check(lid, q, alt[lid], half, args.seed + 1)
        return lid, cases

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = dict(pool.map(run, lemma_checks.LEMMAS))
    out = _out(args)
    io.write_json(out / "lemma_verdicts.json", lemma_checks.export_json(results),
                  io.LEMMA_VERDICTS_SCHEMA)
    lemma_checks.export_csv(results, out / "lemma_verdicts.csv")
    failed = 0
    for lid, s in lemma_checks.summarize(results).items():
        failed += s["failures"]
        print(f"lemma {lid}: {s['trials'] - s['failures']}/{s['trials']} passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def cmd_reproduce(args) -> int:
    return cmd_solve(args)


def cmd_radial(args) -> int:
    if args.input is None:
        d = _fixture("radial_example.json")
    else:
        d = io.read_json(args.input)
    io.validate(d, io.RADIAL_SCHEMA, "radial input")
    rs = transforms.RadialSpec.from_dict(d)
    g = Nonlinearity.from_dict(d.get("g", {"kind": "logistic2"}))
    lam = args.lam if args.lam is not None else d.get("lambda", 1.0)
    mu = args.mu if args.mu is not None else d.get("mu", 1.0)
    red = transforms.radial_reduce(rs, args.samples)
    p = red.problem(g, lam, mu)
    res = shooting.solve(p, _options(args))
    out = _out(args)
    write_solve(out, res)
    report = {**rs.to_dict(), "T": red.T, "lambda": lam, "mu": mu, "solutions": []}
    rows = []
    for k, s in enumerate(res.solutions):
        prof = transforms.radial_lift(s, red, lam, mu, g, args.radial_grid)
        report["solutions"].append({"xi": s.xi, "max_residual": prof.max_residual,
                                    "boundary_residual": list(prof.boundary_residual)})
        rows += [(k, float(r), float(u), float(du), float(e))
                 for r, u, du, e in zip(prof.r, prof.U, prof.dU, prof.residual)]
    io.write_json(out / "radial.json", report, io.RADIAL_REPORT_SCHEMA)
    io.write_csv(out / "radial_profile.csv", io.CSV_COLUMNS["radial_profile.csv"], rows)
    print(f"T = {red.T:.12g}; {res.count} reduced solution(s)")
    for s in report["solutions"]:
        print(f"  u(0) = {s['xi']:.12g}   radial residual = {s['max_residual']:.3g}")
    return EXIT_OK


def cmd_extend_periodic(args) -> int:
    p = _problem(args)
    res = shooting.solve(p, _options(args))
    report = {"T": p.T, "period": 2 * p.T, "n_periods": args.periods, "solutions": []}
    rows = []
    for k, s in enumerate(res.solutions):
        ext = transforms.periodic_extend(s, args.periods)
        resid = transforms.periodic_residual(ext, p, s)
        glue = max(abs(s.residual_y0), abs(s.residual_yT))
        report["solutions"].append({"xi": s.xi, "residual": resid, "gluing_defect": glue})
        rows += [(k, float(t), float(u), float(du)) for t, u, du in zip(ext.t, ext.u, ext.du)]
    out = _out(args)
    io.write_json(out / "periodic.json", report, io.PERIODIC_SCHEMA)
    io.write_csv(out / "periodic.csv", io.CSV_COLUMNS["periodic.csv"], rows)
    print(f"{res.count} solution(s) extended to period {2 * p.T:g}")
    return EXIT_OK


HANDLERS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "thresholds": cmd_thresholds,
    "check-lemmas": cmd_check_lemmas,
    "reproduce-example": cmd_reproduce,
    "radial": cmd_radial,
    "extend-periodic": cmd_extend_periodic,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="indefinite-neumann",
        description="Positive solutions of Neumann problems with indefinite weight.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", help="problem JSON (radial spec for 'radial')")
    ap.add_argument("--out", default="out", help="output directory (default: ./out)")
    ap.add_argument("--lambda", dest="lam", type=float, help="override lambda")
    ap.add_argument("--mu", type=float, help="override mu")
    ap.add_argument("--tol-rel", type=float, help="relative tolerance for continuum shots")
    ap.add_argument("--tol-abs", type=float, help="absolute tolerance for continuum shots")
    ap.add_argument("--gap-max", type=float, help="maximal continuum node spacing")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for sweep/check-lemmas")
    ap.add_argument("--grid-lambda", metavar="A:B:N")
    ap.add_argument("--grid-mu", metavar="A:B:N")
    ap.add_argument("--trials", type=int, default=100, help="trials per lemma")
    ap.add_argument("--periods", type=int, default=1, help="periods for extend-periodic")
    ap.add_argument("--samples", type=int, default=transforms.DEFAULT_SAMPLES,
                    help="sample count of the reduced radial weight")
    ap.add_argument("--radial-grid", type=int, default=1000, help="radius grid intervals")
    return ap


def main(argv=None) -> int:
    level = os.environ.get("SHOOTING_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return HANDLERS[args.command](args)
    except (ValidationError, DomainError, InfeasibleError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalBlowUpError, RefinementError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
