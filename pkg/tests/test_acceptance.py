"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""
from __future__ import annotations

import contextlib
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import random_projection_datum

from blgrowth import lattice as lat
from blgrowth.basis import ZERO_TOL, select_basis, verify_locbd_exponent
from blgrowth.datum import BLDatum, PerturbationSpec, perturb
from blgrowth.exponent import gamma_of, gamma_sup, locbd_exponent, stability_scan
from blgrowth.grid import GridSpec
from blgrowth.integrator import bl_ratio, fit_growth
from blgrowth.kakeya import Tube, TubeFamily, delta_sweep, kakeya_bound, overlap_integral
from blgrowth.subspace import Subspace

ROOT = Path(__file__).resolve().parent.parent
PROBLEMS = ROOT / "problems"

X = Subspace.coordinate(2, [0])
Y = Subspace.coordinate(2, [1])


def reviewer_datum():
    return BLDatum(2, ([[1.0, 0.0]], [[0.0, 1.0]], np.eye(2)), (0.25, 1.0, 0.5))


def lw_datum(p=(0.5, 0.5)):
    return BLDatum(2, ([[1.0, 0.0]], [[0.0, 1.0]]), p)


@contextlib.contextmanager
def criterion(number: int, title: str, limit: float | None = None):
    """Print one PASS/FAIL line; fail if the body raises or exceeds ``limit`` seconds."""
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
        elapsed = time.perf_counter() - t0
        if limit is not None:
            assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
    except BaseException as exc:
        elapsed = time.perf_counter() - t0
        print(f"\n[criterion {number:2d}] FAIL  {title} ({elapsed:.2f}s): {exc}")
        raise
    detail = ", ".join(f"{k}={v}" for k, v in info.items())
    print(f"\n[criterion {number:2d}] PASS  {title} ({elapsed:.2f}s) {detail}")


def test_01_reviewer_exponents():
    with criterion(1, "reviewer exponents 0.25 / 0.5", limit=1.0) as info:
        d = reviewer_datum()
        g = gamma_sup(d).gamma
        lb = locbd_exponent(d)
        info.update(gamma=g, locbd=lb)
        assert abs(g - 0.25) <= 1e-9
        assert abs(lb - 0.5) <= 1e-9


def test_02a_growth_lw():
    with criterion(2, "growth slope, LW p=(1/2,1/2), V=R^2", limit=60.0) as info:
        fit = fit_growth(lw_datum(), [4, 8, 16, 32, 64], GridSpec(256), "witness",
                         Subspace.full(2))
        info.update(slope=round(fit.slope, 4))
        assert abs(fit.slope - 1.0) <= 0.15


def test_02b_growth_reviewer():
    with criterion(2, "growth slope, reviewer datum, V=x-axis", limit=60.0) as info:
        fit = fit_growth(reviewer_datum(), [8, 16, 32, 64, 128], GridSpec(256), "witness", X)
        info.update(slope=round(fit.slope, 4))
        assert abs(fit.slope - 0.25) <= 0.15


def test_03_ratio_oracle():
    with criterion(3, "LW R=8 witness ratio vs 256/19", limit=5.0) as info:
        d = lw_datum()
        rep = bl_ratio(d, lat.witness(d, Subspace.full(2), 8).f, 8, GridSpec(256))
        info.update(ratio=rep.ratio)
        assert abs(rep.ratio / (256 / 19) - 1) <= 0.02


def test_04_norm_suite():
    with criterion(4, "norm_A inequalities on 500 random functions") as info:
        rng = np.random.default_rng(2024)
        violations = 0
        for i in range(500):
            m = 1 + i % 3
            f = lat.random_sparse(m, int(rng.integers(1, 40)), int(rng.integers(1, 6)), rng)
            total = lat.integral(f)
            if abs(lat.norm_A(f, 1) - total) > 1e-12 * max(total, 1.0):
                violations += 1
            for A in (1, 2, 3):
                if lat.norm_A(f, A) > A ** m * total * (1 + 1e-12):
                    violations += 1
        info.update(violations=violations)
        assert violations == 0


def _strips(centers, delta, direction, j):
    base = (lambda c: (0.0, c)) if direction is X else (lambda c: (c, 0.0))
    return TubeFamily.of(j, [Tube(direction, base(c), delta) for c in centers], direction)


def test_05_strip_equality_case():
    with criterion(5, "disjoint strips overlap 1.0", limit=10.0) as info:
        delta = 1 / 8
        cs = [-0.75, -0.25, 0.25, 0.75]
        fams = [_strips(cs, delta, X, 0), _strips(cs, delta, Y, 1)]
        v512 = overlap_integral(fams, [1, 1], GridSpec(512))
        v1024 = overlap_integral(fams, [1, 1], GridSpec(1024))
        info.update(M512=v512, M1024=v1024)
        assert abs(v512 - 1.0) <= 0.05
        assert abs(v1024 - 1.0) <= 0.01


def test_06_delta_sweep():
    with criterion(6, "delta sweep slope and bound", limit=300.0) as info:
        d = lw_datum((1.0, 1.0))
        res = delta_sweep(d, 0.05, [1 / 8, 1 / 16, 1 / 32, 1 / 64], [32, 32], seed=0,
                          epsilon=0.2)
        target = d.n - gamma_sup(d).gamma - 0.25
        info.update(slope=round(res.slope, 4), target=target, violations=res.bound_violations)
        assert res.slope >= target
        for row in res.rows:
            bound = kakeya_bound(d, row.delta, [32, 32], 0.2, res.C)
            assert row.overlap <= bound * (1 + 1e-12)


def test_07_stability():
    with criterion(7, "stability scan, reviewer datum, nu=1e-3", limit=120.0) as info:
        scan = stability_scan(reviewer_datum(), PerturbationSpec(1e-3, seed=11, samples=200))
        info.update(violations=scan.violations)
        assert scan.violations == 0


def _check_basis(d, seed):
    sel = select_basis(d, seed=seed)
    assert sel.margin > 1e-3, f"margin {sel.margin}"
    r = sel.residuals
    assert np.all((r < ZERO_TOL) | (r >= sel.margin)), "step-dim dichotomy"
    chk = verify_locbd_exponent(d, sel)
    assert abs(chk.exponent - locbd_exponent(d)) <= 1e-9
    return sel.margin


def test_08_basis_algorithm():
    with criterion(8, "basis selection on LW, reviewer, 50 perturbed", limit=120.0) as info:
        margins = [_check_basis(lw_datum(), 0), _check_basis(reviewer_datum(), 0)]
        rng = np.random.default_rng(8)
        for i in range(50):
            d0 = random_projection_datum(rng)
            d = perturb(d0, PerturbationSpec(1e-3, seed=i, samples=1), 0)
            margins.append(_check_basis(d, i))
        info.update(datasets=len(margins), min_margin=round(min(margins), 4))


def test_09_dominance():
    with criterion(9, "locbd >= gamma, equality for small p, gamma(R^n)") as info:
        rng = np.random.default_rng(9)
        violations = 0
        equal_cases = 0
        for i in range(100):
            d = random_projection_datum(rng)
            if i % 2:
                d = d.with_p(rng.random(d.J) / d.J)
            g = gamma_sup(d).gamma
            lb = locbd_exponent(d)
            if lb < g - 1e-9:
                violations += 1
            if all(pj <= 1 / d.J for pj in d.p):
                equal_cases += 1
                if abs(lb - g) > 1e-8:
                    violations += 1
            full = d.n - sum(pj * nj for pj, nj in zip(d.p, d.dims))
            if gamma_of(d, Subspace.full(d.n)) != full:
                violations += 1
        info.update(equality_cases=equal_cases, violations=violations)
        assert equal_cases >= 50
        assert violations == 0


DETERMINISM_ARGS = {
    "exponent": ["reviewer.json"],
    "polytope": ["reviewer.json"],
    "stability": ["reviewer.json", "--samples", "20"],
    "witness": ["loomis_whitney.json"],
    "ratio": ["loomis_whitney.json"],
    "fit": ["loomis_whitney.json", "--R-list", "4,8,16"],
    "kakeya-sweep": ["loomis_whitney.json", "--grid", "256"],
    "kakeya-ledger": ["loomis_whitney_p1.json"],
    "basis": ["reviewer.json"],
}


def _cli(command, args, out, workers):
    problem, *rest = args
    env = dict(os.environ, BLGROWTH_WORKERS=str(workers))
    subprocess.run([sys.executable, "-m", "blgrowth", command, "--problem",
                    str(PROBLEMS / problem), "--seed", "7", "--out", str(out), *rest],
                   check=True, env=env, capture_output=True)
    return out.read_bytes()


def test_10_determinism(tmp_path):
    with criterion(10, "byte-identical CLI reports") as info:
        for command, args in DETERMINISM_ARGS.items():
            a = _cli(command, args, tmp_path / f"{command}-a.json", workers=1)
            b = _cli(command, args, tmp_path / f"{command}-b.json", workers=4)
            assert a == b, f"{command} reports differ"
        info.update(commands=len(DETERMINISM_ARGS))
