"""Truncated multilinear integrals of lattice-constant inputs, their
normalized ratios, and growth-rate fits in the truncation radius."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lattice as lat
from .datum import BLDatum
from .errors import InvalidInputError
from .exponent import CandidateOptions, candidate_subspaces, gamma_of
from .fitting import fit_loglog
from .grid import GridSpec, default_grid, midpoint_sum
from .lattice import LatticeFn
from .rng import stream
from .subspace import Subspace


def _product_integrand(d: BLDatum, fs):
    active = [(A, f, pj) for A, f, pj in zip(d.maps, fs, d.p) if pj > 0]

    def integrand(X):
        out = np.ones(len(X))
        for A, f, pj in active:
            vals = f.eval_many(X @ A.T)
            out *= vals if pj == 1 else vals ** pj
        return out

    return integrand


def _check_inputs(d: BLDatum, fs, R: float):
    if len(fs) != d.J:
        raise InvalidInputError(f"expected {d.J} functions, got {len(fs)}")
    for j, (f, m) in enumerate(zip(fs, d.dims)):
        if f.m != m:
            raise InvalidInputError(f"fs[{j}] lives on R^{f.m}, map {j} has target R^{m}")
    if R < 1:
        raise InvalidInputError("R must be >= 1")


def bl_integral(d: BLDatum, fs, R: float, grid: GridSpec | None = None) -> float:
    """Midpoint estimate of ``int_{[-R,R]^n} prod_j f_j(pi_j x)^{p_j} dx``.

    Factors with ``p_j = 0`` are omitted.
    """
    _check_inputs(d, fs, R)
    grid = grid or default_grid(d.n)
    return midpoint_sum(_product_integrand(d, fs), d.n, -R, R, grid)


@dataclass
class RatioReport:
    R: float
    integral: float
    denominators: list
    ratio: float
    residual: float
    label: str = ""

    def to_dict(self) -> dict:
        return {"R": self.R, "integral": self.integral, "denominators": self.denominators,
                "ratio": self.ratio, "residual": self.residual, "label": self.label}


def bl_ratio(d: BLDatum, fs, R: float, grid: GridSpec | None = None) -> RatioReport:
    """Integral divided by ``prod_j (int f_j)^{p_j}``, with a two-resolution residual."""
    _check_inputs(d, fs, R)
    grid = grid or default_grid(d.n)
    dens = [lat.integral(f) for f in fs]
    denom = 1.0
    for j, (x, pj) in enumerate(zip(dens, d.p)):
        if pj > 0:
            if x <= 0:
                raise InvalidInputError(f"fs[{j}] has zero integral but p[{j}] > 0")
            denom *= x ** pj
    num = bl_integral(d, fs, R, grid)
    coarse = bl_integral(d, fs, R, grid.halved())
    residual = abs(num - coarse) / num if num > 0 else abs(coarse)
    return RatioReport(float(R), num, dens, num / denom, residual)


def _random_tuple(d: BLDatum, R: float, rng: np.random.Generator):
    fs = []
    for A in d.maps:
        m = A.shape[0]
        box = int(math.ceil(np.linalg.norm(A, 2) * R * math.sqrt(d.n))) + 1
        cap = min(4096, (2 * box) ** m)
        cells = int(rng.integers(1, cap + 1))
        fs.append(lat.random_sparse(m, cells, box, rng, values=False))
    return fs


def empirical_blr(d: BLDatum, R: float, grid: GridSpec | None = None, budget: int = 0,
                  seed: int = 0, opts: CandidateOptions | None = None) -> RatioReport:
    """Largest ratio over the witness pool and ``budget`` random indicator tuples.

    The witness pool has one witness per structured candidate subspace
    (random candidates are excluded unless ``opts`` asks for them).
    """
    if budget < 0:
        raise InvalidInputError("budget must be >= 0")
    grid = grid or default_grid(d.n)
    opts = opts or CandidateOptions(random_per_dim=0, seed=seed)
    cs = candidate_subspaces(d, opts)
    best = None
    for i, V in enumerate(cs.subspaces):
        w = lat.witness(d, V, R)
        rep = bl_ratio(d, w.f, R, grid)
        rep.label = f"witness:{i}:{cs.provenance[i]}"
        if best is None or rep.ratio > best.ratio:
            best = rep
    rng = stream(seed, "witness")
    for k in range(budget):
        fs = _random_tuple(d, R, rng)
        if any(lat.integral(f) == 0 for f, pj in zip(fs, d.p) if pj > 0):
            continue
        rep = bl_ratio(d, fs, R, grid)
        rep.label = f"random:{k}"
        if rep.ratio > best.ratio:
            best = rep
    return best


@dataclass
class GrowthFit:
    slope: float
    intercept: float
    r2: float
    table: list = field(default_factory=list)
    predicted: float | None = None

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "predicted": self.predicted, "table": [r.to_dict() for r in self.table]}


def fit_growth(d: BLDatum, R_list, grid: GridSpec | None = None, mode: str = "witness",
               V: Subspace | None = None, budget: int = 0, seed: int = 0) -> GrowthFit:
    """Slope of ``log ratio`` against ``log R``.

    ``mode="witness"`` measures the witness built on ``V``;
    ``mode="empirical"`` uses :func:`empirical_blr` at every radius.
    """
    R_list = [float(r) for r in R_list]
    if len(R_list) < 3:
        raise InvalidInputError("need at least 3 radii")
    if any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise InvalidInputError("R_list must be strictly increasing")
    table = []
    for R in R_list:
        if mode == "witness":
            if V is None:
                raise InvalidInputError("witness mode needs a subspace V")
            rep = bl_ratio(d, lat.witness(d, V, R).f, R, grid)
            rep.label = "witness"
        elif mode == "empirical":
            rep = empirical_blr(d, R, grid, budget, seed)
        else:
            raise InvalidInputError(f"unknown mode {mode!r}")
        if rep.ratio <= 0:
            raise InvalidInputError(f"ratio at R={R} is not positive")
        table.append(rep)
    fit = fit_loglog(R_list, [r.ratio for r in table])
    predicted = gamma_of(d, V) if mode == "witness" else None
    return GrowthFit(fit.slope, fit.intercept, fit.r2, table, predicted)
