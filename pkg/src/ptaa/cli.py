"""Command-line entry point: ``ptaa <subcommand> ...``.

Energies are in units of J (J = 1 internally) and times in hbar/J. Floats
are written with 12 significant digits. Exit status: 0 on success, 2 for
bad parameters, 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import find_threshold, predict_extrema, scaling_fit
from .dynamics import boundedness_check, growth_rate, propagate, site_state
from .eigensolver import eigenvalues
from .errors import NoCrossingError, NumericalError, ParameterError
from .lattice import LatticeConfig, PotentialTerm, build_hamiltonian
from .sweep import SCHEMA_VERSION, SweepJob, fmt, run_sweep, step_grid
from .twopotential import map_boundary, single_thresholds

log = logging.getLogger("ptaa")


def _num(x):
    """Round-trip a float through the 12-digit rendering for JSON output."""
    if x is None:
        return None
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(fmt(x))


def _emit_json(doc, out=None):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _sibling(out, suffix):
    out = Path(out)
    return out.with_name(out.stem + suffix)


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def cmd_threshold(args):
    lattice = LatticeConfig(args.n)
    doc = {"schema": SCHEMA_VERSION, "n": args.n, "v0_over_j": _num(args.v0), "beta": _num(args.beta)}
    try:
        res = find_threshold(lattice, args.v0, args.beta, args.gamma_max)
    except NoCrossingError as exc:
        doc.update(status="unbroken", gamma_pt_over_j=None, gamma_max_over_j=_num(exc.gamma_max))
    else:
        doc.update(
            status="broken",
            gamma_pt_over_j=_num(res.gamma_pt),
            bracket=[_num(v) for v in res.bracket],
            presample_count=res.presample_count,
            breaking_pairs=[list(p) for p in res.sorted_pairs()],
        )
    _emit_json(doc)
    return 0


def cmd_phasediagram(args):
    betas = step_grid(args.beta_step)
    records_path = Path(args.records) if args.records else _sibling(args.out, ".jsonl")
    job = SweepJob(
        "indices-vs-beta",
        {"N": [args.n], "V0": [args.v0], "beta": betas},
        records_path,
        workers=args.workers,
        options={"gamma_max": args.gamma_max},
    )
    records = run_sweep(job)
    rows = []
    failures = 0
    for rec in records:
        beta = rec["inputs"]["beta"]
        out = rec["outputs"]
        if rec["error"] is not None:
            failures += 1
            log.error("beta=%s: %s", fmt(beta), rec["error"])
            rows.append([beta, "", "", ""])
        elif out["gamma_pt"] is None:
            rows.append([beta, "", "", ""])
        else:
            lo, hi = min(out["pairs"])
            rows.append([beta, out["gamma_pt"], lo, hi])
    _write_csv(args.out, ["beta", "gamma_pt_over_j", "breaking_lo", "breaking_hi"], rows)
    return 3 if failures else 0


def cmd_scaling(args):
    job_path = Path(args.records) if args.records else _sibling(args.out, ".jsonl")
    job = SweepJob(
        "scaling-vs-N",
        {"beta": [args.beta], "V0": [args.v0], "N": sorted(set(args.n_list))},
        job_path,
        workers=args.workers,
        options={"gamma_max": args.gamma_max},
    )
    records = run_sweep(job)
    pts = []
    for rec in records:
        if rec["error"] is not None or rec["outputs"]["gamma_pt"] is None:
            raise NumericalError(f"no threshold for N={rec['inputs']['N']}: {rec['error'] or 'unbroken'}")
        pts.append((rec["inputs"]["N"], rec["outputs"]["gamma_pt"]))
    _write_csv(args.out, ["n", "gamma_pt_over_j"], pts)
    fit = scaling_fit(pts)
    _emit_json(
        {
            "schema": SCHEMA_VERSION,
            "beta": _num(args.beta),
            "exponent": _num(fit.exponent),
            "c_beta": _num(fit.C_beta),
            "r_squared": _num(fit.r_squared),
            "sizes": list(fit.sizes),
        }
    )
    return 0


def cmd_extrema(args):
    ex = predict_extrema(args.n)
    _emit_json(
        {
            "schema": SCHEMA_VERSION,
            "n": args.n,
            "maxima": [_num(b) for b in ex.maxima],
            "minima": [_num(b) for b in ex.minima],
            "interior_maxima": [_num(b) for b in ex.interior_maxima],
            "endpoint_maxima": [_num(b) for b in ex.endpoint_maxima],
            "period": _num(1.0 / args.n),
        }
    )
    return 0


def cmd_boundary(args):
    lattice = LatticeConfig(args.n)
    pb = map_boundary(lattice, args.beta1, args.beta2, args.rmax, args.res)
    rows = []
    for i, y in enumerate(pb.axis):
        for j, x in enumerate(pb.axis):
            rows.append([float(x), float(y), int(pb.grid[i, j])])
    _write_csv(args.out, ["gamma1_scaled", "gamma2_scaled", "broken"], rows)
    _write_csv(
        _sibling(args.out, "_boundary.csv"),
        ["gamma1_scaled", "gamma2_scaled"],
        [[float(x), float(y)] for x, y in pb.boundary_points],
    )
    witness = None
    if pb.witness is not None:
        witness = {
            "varied": pb.witness.varied,
            "fixed_scaled": _num(pb.witness.fixed_value),
            "intervals": [
                {"lo": _num(iv.lo), "hi": _num(iv.hi), "phase": iv.kind.value} for iv in pb.witness.intervals
            ],
        }
    doc = {
        "schema": SCHEMA_VERSION,
        "n": args.n,
        "beta1": _num(args.beta1),
        "beta2": _num(args.beta2),
        "gamma1_pt_over_j": _num(pb.scale_factors[0]),
        "gamma2_pt_over_j": _num(pb.scale_factors[1]),
        "rmax": _num(args.rmax),
        "resolution": args.res,
        "reentrant": pb.reentrant,
        "witness": witness,
    }
    _emit_json(doc, _sibling(args.out, "_summary.json"))
    _emit_json(doc)
    return 0


def cmd_evolve(args):
    lattice = LatticeConfig(args.n)
    g1, g2 = args.gamma1, args.gamma2
    terms_betas = [(args.beta1, g1)]
    if args.beta2 is not None:
        terms_betas.append((args.beta2, g2))
    elif g2:
        raise ParameterError("--gamma2 needs --beta2")
    if args.scaled:
        if args.beta2 is None:
            scale = find_threshold(lattice, 0.0, args.beta1, with_pairs=False).gamma_pt
            terms_betas = [(args.beta1, g1 * scale)]
        else:
            s1, s2 = single_thresholds(lattice, args.beta1, args.beta2)
            terms_betas = [(args.beta1, g1 * s1), (args.beta2, g2 * s2)]
    terms = [PotentialTerm(args.v0 if k == 0 else 0.0, g, b) for k, (b, g) in enumerate(terms_betas)]
    h = build_hamiltonian(lattice, terms)
    field = propagate(h, site_state(args.n, args.site), args.t, args.steps)
    rows = []
    for ti, t in enumerate(field.times):
        for k in field.sites:
            rows.append([float(t), int(k), float(field.intensity[ti, k - 1])])
    _write_csv(args.out, ["t", "k", "intensity"], rows)
    _write_csv(_sibling(args.out, "_total.csv"), ["t", "total"], [[float(t), float(v)] for t, v in zip(field.times, field.total)])
    bounded, peak = boundedness_check(field)
    _emit_json(
        {
            "schema": SCHEMA_VERSION,
            "n": args.n,
            "gammas_over_j": [_num(t.gamma) for t in terms],
            "betas": [_num(t.beta) for t in terms],
            "site": args.site if args.site is not None else (args.n + 1) // 2,
            "t": _num(args.t),
            "steps": args.steps,
            "bounded": bounded,
            "max_total": _num(peak),
            "late_growth_rate": _num(growth_rate(field, (0.5 * args.t, args.t))),
            "max_abs_im_e": _num(eigenvalues(h).max_abs_imag),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptaa", description="PT-symmetric Aubry-Andre lattice spectra and dynamics")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="single-potential PT threshold (JSON)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--v0", type=float, default=0.0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma-max", type=float, default=10.0)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("phasediagram", help="threshold and breaking pair versus beta (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--v0", type=float, default=0.0)
    p.add_argument("--beta-step", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gamma-max", type=float, default=10.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--records", help="JSON-lines cache (default: <out stem>.jsonl)")
    p.set_defaults(func=cmd_phasediagram)

    p = sub.add_parser("scaling", help="threshold versus N with power-law fit")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--v0", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--gamma-max", type=float, default=10.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--records")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("extrema", help="predicted threshold maxima and minima (JSON)")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_extrema)

    p = sub.add_parser("boundary", help="two-potential phase raster and boundary (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float, required=True)
    p.add_argument("--rmax", type=float, default=3.0)
    p.add_argument("--res", type=int, default=121)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("evolve", help="site- and time-resolved intensity (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float)
    p.add_argument("--gamma1", type=float, required=True)
    p.add_argument("--gamma2", type=float, default=0.0)
    p.add_argument("--v0", type=float, default=0.0, help="real modulation on the first term")
    p.add_argument("--scaled", action="store_true", help="gammas are multiples of the single-potential thresholds")
    p.add_argument("--site", type=int, help="initially occupied site (default ceil(N/2))")
    p.add_argument("--t", type=float, default=30.0)
    p.add_argument("--steps", type=int, default=600)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"ptaa {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"ptaa {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"ptaa {args.command}: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
