"""Command-line front end.

Every command reads one JSON problem file (``n``, ``p``, and ``maps`` or
``kernels``; optional ``subspace``, ``q``, ``R`` and ``tubes`` blocks) and
writes a schema-versioned JSON or CSV report.  The ``tubes`` block may
list explicit ``families`` (see :func:`blgrowth.kakeya.family_from_dict`).  Exit codes: 0 success,
1 invalid input, 2 resource or basis-selection failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from . import lattice as lat
from .basis import DEFAULT_TRIALS, select_basis, verify_locbd_exponent
from .datum import PerturbationSpec, datum_from_dict, load_problem, validate
from .errors import InvalidInputError, ResourceError, SelectionFailedError
from .exponent import (CandidateOptions, bl_polytope_contains, gamma_sup, locbd_exponent,
                       stability_scan)
from .grid import GridSpec, default_grid
from .integrator import bl_ratio, empirical_blr, fit_growth
from .kakeya import (FamilySampler, default_kakeya_grid, delta_sweep, family_from_dict,
                     multiscale_ledger)
from .subspace import Subspace

SCHEMA_VERSION = 1
COMMANDS = ("exponent", "polytope", "stability", "witness", "ratio", "fit",
            "kakeya-sweep", "kakeya-ledger", "basis")


def _float_list(text: str) -> list:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blgrowth", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--problem", required=True, help="JSON problem file")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=None, help="grid points per axis (even)")
    ap.add_argument("--chunks", type=int, default=8, help="parallel grid slabs")
    ap.add_argument("--R-list", dest="R_list", type=_float_list, default=None)
    ap.add_argument("--R", dest="R", type=float, default=None, help="truncation radius")
    ap.add_argument("--delta-list", dest="delta_list", type=_float_list, default=None)
    ap.add_argument("--delta", type=float, default=None)
    ap.add_argument("--omega", type=float, default=None)
    ap.add_argument("--epsilon", type=float, default=0.2)
    ap.add_argument("--nu", type=float, default=None)
    ap.add_argument("--samples", type=int, default=None)
    ap.add_argument("--mode", choices=("witness", "empirical"), default="witness")
    ap.add_argument("--budget", type=int, default=0, help="random tuples for empirical ratios")
    ap.add_argument("--random-per-dim", dest="random_per_dim", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    ap.add_argument("--out", default="-", help="output path, '-' for stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


class Run:
    """Resolved configuration plus the loaded problem."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.doc = load_problem(args.problem)
        self.datum = datum_from_dict(self.doc, args.problem)
        report = validate(self.datum)
        if not report.ok:
            raise InvalidInputError(f"{args.problem}: " + "; ".join(report.failures))
        for name in ("R_list", "delta_list"):
            vals = getattr(args, name)
            if vals is not None and any(b <= a for a, b in zip(vals, vals[1:])):
                raise InvalidInputError(f"--{name.replace('_', '-')} must be strictly increasing")
        self.tubes = self.doc.get("tubes", {})
        if not isinstance(self.tubes, dict):
            raise InvalidInputError(f"{args.problem}: field 'tubes': expected an object")

    @property
    def opts(self) -> CandidateOptions:
        return CandidateOptions(random_per_dim=self.args.random_per_dim, seed=self.args.seed)

    def grid(self, kakeya: bool = False) -> GridSpec:
        n = self.datum.n
        if self.args.grid is not None:
            return GridSpec(self.args.grid, self.args.chunks)
        g = default_kakeya_grid(n) if kakeya else default_grid(n)
        return GridSpec(g.points_per_axis, self.args.chunks)

    def subspace(self) -> Subspace:
        basis = self.doc.get("subspace")
        if basis is None:
            return gamma_sup(self.datum, self.opts).argmax
        try:
            return Subspace.span(np.array(basis, dtype=float).reshape(-1, self.datum.n)
                                 if len(basis) else [], ambient_dim=self.datum.n)
        except (ValueError, TypeError) as exc:
            raise InvalidInputError(f"{self.args.problem}: field 'subspace': {exc}") from exc

    def tube_param(self, name, cli_value=None, default=None):
        if cli_value is not None:
            return cli_value
        return self.tubes.get(name, default)

    def config(self) -> dict:
        # the output destination does not affect results, so it stays out of the report
        cfg = {k: v for k, v in sorted(vars(self.args).items()) if k != "out"}
        cfg["problem_doc"] = self.doc
        return cfg


def cmd_exponent(run: Run) -> dict:
    rep = gamma_sup(run.datum, run.opts)
    out = rep.to_dict()
    out["locbd_exponent"] = locbd_exponent(run.datum)
    return out


def cmd_polytope(run: Run) -> dict:
    q = run.doc.get("q", list(run.datum.p))
    res = bl_polytope_contains(run.datum, q, run.opts)
    return {"q": q, "inside": res.inside, "slack": res.slack, "reason": res.reason,
            "violated_basis": None if res.violated is None else res.violated.basis.T.tolist()}


def cmd_stability(run: Run) -> dict:
    nu = run.args.nu if run.args.nu is not None else 1e-3
    samples = run.args.samples or 200
    scan = stability_scan(run.datum, PerturbationSpec(nu, run.args.seed, samples), run.opts)
    return dict(nu=nu, samples=samples, **scan.to_dict())


def _radius(run: Run) -> float:
    if run.args.R is not None:
        return run.args.R
    return float(run.doc.get("R", 8.0))


def cmd_witness(run: Run) -> dict:
    V = run.subspace()
    w = lat.witness(run.datum, V, _radius(run))
    return {"R": w.R, "c0": w.c0, "V_basis": V.basis.T.tolist(),
            "sizes": [len(s) for s in w.S],
            "functions": [json.loads(f.to_json()) for f in w.f]}


def cmd_ratio(run: Run) -> dict:
    R = _radius(run)
    if run.args.mode == "empirical":
        rep = empirical_blr(run.datum, R, run.grid(), run.args.budget, run.args.seed)
    else:
        rep = bl_ratio(run.datum, lat.witness(run.datum, run.subspace(), R).f, R, run.grid())
        rep.label = "witness"
    return rep.to_dict()


def cmd_fit(run: Run) -> dict:
    R_list = run.args.R_list or [4.0, 8.0, 16.0, 32.0, 64.0]
    V = run.subspace() if run.args.mode == "witness" else None
    fit = fit_growth(run.datum, R_list, run.grid(), run.args.mode, V, run.args.budget,
                     run.args.seed)
    return fit.to_dict()


def cmd_kakeya_sweep(run: Run) -> dict:
    deltas = run.tube_param("deltas", run.args.delta_list, [1 / 8, 1 / 16, 1 / 32, 1 / 64])
    nu = run.tube_param("nu", run.args.nu, 0.05)
    counts = run.tubes.get("counts", [32] * run.datum.J)
    families = run.tubes.get("families")
    if families is not None:
        families = [family_from_dict(doc, run.datum.n, j) for j, doc in enumerate(families)]
    res = delta_sweep(run.datum, nu, sorted(deltas, reverse=True), counts,
                      run.grid(kakeya=True), run.args.seed, run.args.epsilon, opts=run.opts,
                      families=families)
    return res.to_dict()


def cmd_kakeya_ledger(run: Run) -> dict:
    delta = run.tube_param("delta", run.args.delta, 1 / 16)
    omega = run.tube_param("omega", run.args.omega, 1 / 2)
    sampler = FamilySampler(tuple(run.tubes.get("counts", [4] * run.datum.J)),
                            run.tube_param("nu", run.args.nu, 0.0),
                            run.tube_param("samples", run.args.samples, 4))
    return multiscale_ledger(run.datum, delta, omega, sampler, run.grid(kakeya=True),
                             run.args.seed).to_dict()


def cmd_basis(run: Run) -> dict:
    sel = select_basis(run.datum, run.args.trials, run.args.seed)
    out = sel.to_dict()
    out.update(verify_locbd_exponent(run.datum, sel).to_dict())
    return out


HANDLERS = {
    "exponent": cmd_exponent, "polytope": cmd_polytope, "stability": cmd_stability,
    "witness": cmd_witness, "ratio": cmd_ratio, "fit": cmd_fit,
    "kakeya-sweep": cmd_kakeya_sweep, "kakeya-ledger": cmd_kakeya_ledger, "basis": cmd_basis,
}


def _csv_rows(command: str, result: dict) -> list:
    if command == "fit":
        rows = [["R", "integral", "ratio", "residual"]]
        rows += [[r["R"], r["integral"], r["ratio"], r["residual"]] for r in result["table"]]
        rows += [["slope", result["slope"]], ["intercept", result["intercept"]]]
        return rows
    if command == "kakeya-sweep":
        rows = [["delta", "overlap", "bound", "ratio"]]
        rows += [[r["delta"], r["overlap"], r["bound"], r["ratio"]] for r in result["rows"]]
        rows += [["slope", result["slope"]], ["intercept", result["intercept"]]]
        return rows
    rows = [["key", "value"]]
    rows += [[k, v] for k, v in sorted(result.items()) if not isinstance(v, (list, dict))]
    return rows


def render(command: str, cfg: dict, result: dict, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# blgrowth", __version__, "schema", SCHEMA_VERSION, command,
                    json.dumps(cfg, sort_keys=True)])
        w.writerows(_csv_rows(command, result))
        return buf.getvalue()
    doc = {"schema_version": SCHEMA_VERSION, "version": __version__, "command": command,
           "config": cfg, "result": result}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        r = Run(args)
        result = HANDLERS[args.command](r)
        text = render(args.command, r.config(), result, args.format)
    except InvalidInputError as exc:
        print(f"blgrowth: invalid input: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"blgrowth: cannot read problem: {exc}", file=sys.stderr)
        return 1
    except ResourceError as exc:
        print(f"blgrowth: resource limit: {exc}", file=sys.stderr)
        return 2
    except SelectionFailedError as exc:
        print(f"blgrowth: basis selection failed: {exc}", file=sys.stderr)
        return 2
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
