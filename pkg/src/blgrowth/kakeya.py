"""Tube families, rasterized overlap integrals over ``[-1, 1]^n``, the
multilinear Kakeya bound, and the multi-scale ledger."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import subspace as sp
from .datum import BLDatum, rotate_toward
from .errors import InvalidInputError
from .exponent import CandidateOptions, gamma_sup
from .fitting import fit_loglog
from .grid import GridSpec, midpoint_sum
from .integrator import empirical_blr
from .rng import stream
from .subspace import Subspace

DEFAULT_KAKEYA_M = {2: 512, 3: 96}


def default_kakeya_grid(n: int) -> GridSpec:
    return GridSpec(DEFAULT_KAKEYA_M.get(n, 32))


@dataclass(frozen=True, eq=False)
class Tube:
    """Closed ``radius``-neighborhood of the affine subspace ``base + direction``."""

    direction: Subspace
    base: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInputError("tube radius must be positive")
        b = np.array(self.base, dtype=float).ravel()
        if b.shape[0] != self.direction.ambient_dim:
            raise InvalidInputError("base point and direction live in different spaces")
        b.setflags(write=False)
        object.__setattr__(self, "base", b)

    def distances(self, X: np.ndarray) -> np.ndarray:
        """Distance of each row of ``X`` to the core affine subspace."""
        Y = X - self.base
        D = self.direction.basis
        if D.shape[1]:
            Y = Y - (Y @ D) @ D.T
        return np.sqrt(np.sum(Y * Y, axis=1))

    def contains_many(self, X: np.ndarray) -> np.ndarray:
        return self.distances(np.asarray(X, dtype=float)) <= self.radius


def tube_membership(T: Tube, x) -> bool:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != T.direction.ambient_dim:
        raise InvalidInputError("point dimension does not match the tube")
    return bool(T.contains_many(x)[0])


@dataclass(frozen=True)
class TubeFamily:
    j: int
    tubes: tuple
    direction_center: Subspace
    max_deviation: float = 0.0

    def __post_init__(self):
        radii = {t.radius for t in self.tubes}
        if len(radii) > 1:
            raise InvalidInputError("tubes in a family must share one radius")
        object.__setattr__(self, "tubes", tuple(self.tubes))

    @classmethod
    def of(cls, j: int, tubes, center: Subspace) -> TubeFamily:
        dev = max((sp.grassmann_distance(t.direction, center) for t in tubes), default=0.0)
        return cls(j, tuple(tubes), center, dev)

    @property
    def radius(self) -> float | None:
        return self.tubes[0].radius if self.tubes else None

    def __len__(self):
        return len(self.tubes)


def random_tube_family(center: Subspace, nu: float, delta: float, count: int, seed,
                       j: int = 0) -> TubeFamily:
    """``count`` tubes of radius ``delta`` with directions within ``nu`` of ``center``.

    Bases are uniform in ``[-1, 1]^n``.  ``seed`` is an int or a Generator.
    """
    if count < 0 or nu < 0:
        raise InvalidInputError("count and nu must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed, "tubes", j)
    n = center.ambient_dim
    tubes = []
    for _ in range(count):
        target = nu * rng.random() if nu > 0 else 0.0
        Q = rotate_toward(center, target, rng)
        direction = Subspace(Q @ center.basis)
        base = rng.uniform(-1.0, 1.0, size=n)
        tubes.append(Tube(direction, base, delta))
    return TubeFamily.of(j, tubes, center)


def family_to_dict(F: TubeFamily) -> dict:
    return {"j": F.j, "center": F.direction_center.basis.T.tolist(),
            "tubes": [{"direction": t.direction.basis.T.tolist(), "base": t.base.tolist(),
                       "radius": t.radius} for t in F.tubes]}


def _span_field(rows, n: int, what: str) -> Subspace:
    try:
        M = np.array(rows, dtype=float).reshape(-1, n)
        return Subspace.span(M, ambient_dim=n)
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"{what}: expected a list of length-{n} vectors ({exc})") from exc


def family_from_dict(doc: dict, n: int, j: int = 0) -> TubeFamily:
    """Family from JSON: an explicit ``tubes`` list, or a ``center`` with
    ``nu``, ``delta``, ``count`` and ``seed`` for :func:`random_tube_family`."""
    if not isinstance(doc, dict) or "center" not in doc:
        raise InvalidInputError(f"family {j}: expected an object with a 'center' field")
    center = _span_field(doc["center"], n, f"family {j} center")
    j = int(doc.get("j", j))
    if "tubes" in doc:
        tubes = []
        for k, t in enumerate(doc["tubes"]):
            try:
                tubes.append(Tube(_span_field(t["direction"], n, f"family {j} tube {k}"),
                                  t["base"], float(t["radius"])))
            except (KeyError, TypeError) as exc:
                raise InvalidInputError(f"family {j} tube {k}: missing or bad field {exc}") from exc
        return TubeFamily.of(j, tubes, center)
    try:
        return random_tube_family(center, float(doc["nu"]), float(doc["delta"]),
                                  int(doc["count"]), int(doc.get("seed", 0)), j)
    except KeyError as exc:
        raise InvalidInputError(f"family {j}: missing field {exc}") from exc


def with_radius(F: TubeFamily, radius: float) -> TubeFamily:
    """Same directions and bases, every radius set to ``radius``."""
    return replace(F, tubes=tuple(Tube(t.direction, t.base, radius) for t in F.tubes))


def overlap_integral(families, p, grid: GridSpec | None = None) -> float:
    """Midpoint estimate of ``int_{[-1,1]^n} prod_j N_j(x)^{p_j}``,
    ``N_j(x)`` being the number of tubes of family ``j`` containing ``x``."""
    families = list(families)
    p = [float(x) for x in p]
    if len(families) != len(p):
        raise InvalidInputError("need one exponent per family")
    if not families:
        raise InvalidInputError("no families given")
    n = families[0].direction_center.ambient_dim
    active = [(F, pj) for F, pj in zip(families, p) if pj > 0]
    if any(len(F) == 0 for F, _ in active):
        return 0.0
    grid = grid or default_kakeya_grid(n)

    def integrand(X):
        out = np.ones(len(X))
        for F, pj in active:
            N = np.zeros(len(X))
            for T in F.tubes:
                N += T.contains_many(X)
            out *= N if pj == 1 else N ** pj
        return out

    return midpoint_sum(integrand, n, -1.0, 1.0, grid)


def kakeya_bound(d0: BLDatum, delta: float, counts, epsilon: float, C_eps: float,
                 opts: CandidateOptions | None = None, gamma: float | None = None) -> float:
    """``C_eps * delta^(n - epsilon - gamma) * prod_j counts_j^{p_j}``.

    ``gamma`` defaults to :func:`gamma_sup` of ``d0``.
    """
    if not 0 < delta < 1:
        raise InvalidInputError("delta must lie in (0, 1)")
    if epsilon < 0 or C_eps <= 0:
        raise InvalidInputError("need epsilon >= 0 and C_eps > 0")
    if len(counts) != d0.J:
        raise InvalidInputError("need one count per map")
    if gamma is None:
        gamma = gamma_sup(d0, opts).gamma
    prod = 1.0
    for c, pj in zip(counts, d0.p):
        if pj > 0:
            prod *= float(c) ** pj
    return C_eps * delta ** (d0.n - epsilon) * delta ** (-gamma) * prod


def inflate_family(F: TubeFamily, extra: float) -> TubeFamily:
    """Same tubes with radius increased by ``extra``."""
    if extra < 0:
        raise InvalidInputError("extra must be >= 0")
    if extra == 0:
        return F
    tubes = tuple(Tube(t.direction, t.base, t.radius + extra) for t in F.tubes)
    return replace(F, tubes=tubes)


def inflation_extra(n: int, delta: float, omega: float, c: float | None = None) -> float:
    """Radius increase ``c * delta / omega`` for the thickened tubes; ``c`` defaults to ``2 sqrt(n)``.

    The default is large enough that any grid cell of side ``delta / omega``
    meeting a tube lies inside the thickened tube.
    """
    if c is None:
        c = 2.0 * math.sqrt(n)
    if c < 0 or not 0 < omega < 1 or delta <= 0:
        raise InvalidInputError("need c >= 0, delta > 0 and omega in (0, 1)")
    return c * delta / omega


def multiscale_schedule(delta: float, epsilon: float, C_kappa: float):
    """``omega = C_kappa^(-1/epsilon)`` and the least ``ell`` with ``delta / omega^ell >= 1``."""
    if not 0 < delta < 1:
        raise InvalidInputError("delta must lie in (0, 1)")
    if epsilon <= 0 or C_kappa <= 1:
        raise InvalidInputError("need epsilon > 0 and C_kappa > 1")
    omega = C_kappa ** (-1.0 / epsilon)
    ell = max(1, math.ceil(math.log(delta) / math.log(omega) - 1e-9))
    return omega, ell


@dataclass(frozen=True)
class FamilySampler:
    """How tube families are drawn when estimating ``D(delta, omega)``."""

    counts: tuple
    nu: float = 0.0
    samples: int = 4


@dataclass
class LedgerRow:
    step: int
    scale: float
    D_hat: float
    D_hat_next: float
    bound_factor: float
    kappa_hat: float


@dataclass
class MultiscaleLedger:
    delta: float
    omega: float
    ell: int
    kappa_measured: float
    bl_hat: float
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"delta": self.delta, "omega": self.omega, "ell": self.ell,
                "kappa_measured": self.kappa_measured, "bl_hat": self.bl_hat,
                "rows": [vars(r) for r in self.rows]}


def _centers(d0: BLDatum):
    if d0.kernels is None:
        raise InvalidInputError("Kakeya simulations need orthogonal-projection data (kernels)")
    return d0.kernels


def d_hat(d0: BLDatum, scale: float, sampler: FamilySampler, grid: GridSpec,
          seed: int, tag: int = 0) -> float:
    """Largest normalized overlap ``overlap / prod_j (scale^{n_j} #T_j)^{p_j}`` over samples."""
    centers = _centers(d0)
    best = 0.0
    for s in range(sampler.samples):
        fams = [random_tube_family(K, sampler.nu, scale, c, stream(seed, "tubes", tag, s, j), j)
                for j, (K, c) in enumerate(zip(centers, sampler.counts))]
        norm = 1.0
        for nj, c, pj in zip(d0.dims, sampler.counts, d0.p):
            if pj > 0:
                norm *= (scale ** nj * c) ** pj
        best = max(best, overlap_integral(fams, d0.p, grid) / norm)
    return best


def multiscale_ledger(d0: BLDatum, delta: float, omega: float, sampler: FamilySampler,
                      grid: GridSpec | None = None, seed: int = 0,
                      bl_grid: GridSpec | None = None) -> MultiscaleLedger:
    """Measure ``D(delta/omega^s)`` at every scale and record the implied ``kappa``.

    Nothing is asserted: both sides are sampled lower surrogates of suprema.
    """
    if not (0 < delta < 1 and 0 < omega < 1):
        raise InvalidInputError("delta and omega must lie in (0, 1)")
    if delta > omega + 1e-15:
        raise InvalidInputError("delta must not exceed omega")
    if len(sampler.counts) != d0.J:
        raise InvalidInputError("need one count per map")
    ell = max(1, math.ceil(math.log(delta) / math.log(omega) - 1e-9))
    grid = grid or default_kakeya_grid(d0.n)
    scales = [delta / omega ** s for s in range(ell + 1)]
    D = [d_hat(d0, sc, sampler, grid, seed, s) for s, sc in enumerate(scales)]
    bl = empirical_blr(d0, 1.0 / omega, bl_grid).ratio
    factor = omega ** (d0.n - sum(pj * nj for pj, nj in zip(d0.p, d0.dims))) * bl
    rows = []
    for s in range(ell):
        kap = D[s] / (factor * D[s + 1]) if D[s + 1] > 0 else math.inf
        rows.append(LedgerRow(s, scales[s], D[s], D[s + 1], factor, kap))
    kappa = max(r.kappa_hat for r in rows)
    return MultiscaleLedger(delta, omega, ell, kappa, bl, rows)


@dataclass
class SweepRow:
    delta: float
    overlap: float
    bound: float
    ratio: float
    max_deviation: float


@dataclass
class SweepResult:
    slope: float
    intercept: float
    r2: float
    predicted: float
    gamma: float
    C: float
    epsilon: float
    rows: list = field(default_factory=list)

    @property
    def bound_violations(self) -> int:
        return sum(1 for r in self.rows if r.overlap > r.bound * (1 + 1e-12))

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "predicted": self.predicted, "gamma": self.gamma, "C": self.C,
                "epsilon": self.epsilon, "bound_violations": self.bound_violations,
                "rows": [vars(r) for r in self.rows]}


def delta_sweep(d0: BLDatum, nu: float, deltas, counts, grid: GridSpec | None = None,
                seed: int = 0, epsilon: float = 0.2, C: float | None = None,
                opts: CandidateOptions | None = None, families=None) -> SweepResult:
    """Overlap of random families across ``deltas`` with a log-log slope fit.

    ``counts`` is a per-family list, or a callable ``delta -> list``.  Every
    family keeps the same directions and bases at every ``delta``; only the
    radius changes.  Passing explicit ``families`` replaces the random ones
    (``counts`` is then ignored).  When ``C`` is None it is calibrated so that
    the bound is tight at the largest ``delta``.
    """
    deltas = [float(x) for x in deltas]
    if len(deltas) < 3:
        raise InvalidInputError("need at least 3 values of delta")
    centers = _centers(d0)
    if families is not None and len(families) != d0.J:
        raise InvalidInputError(f"expected {d0.J} families, got {len(families)}")
    grid = grid or default_kakeya_grid(d0.n)
    gamma = gamma_sup(d0, opts).gamma
    measured = []
    for delta in deltas:
        if families is not None:
            fams = [with_radius(F, delta) for F in families]
            cnt = [len(F) for F in fams]
        else:
            cnt = list(counts(delta) if callable(counts) else counts)
            fams = [random_tube_family(K, nu, delta, c, stream(seed, "tubes", j), j)
                    for j, (K, c) in enumerate(zip(centers, cnt))]
        ov = overlap_integral(fams, d0.p, grid)
        unit = kakeya_bound(d0, delta, cnt, epsilon, 1.0, gamma=gamma)
        dev = max((F.max_deviation for F in fams), default=0.0)
        measured.append((delta, ov, unit, dev))
    if C is None:
        top = max(measured, key=lambda m: m[0])
        C = top[1] / top[2] if top[1] > 0 else 1.0
    rows = [SweepRow(dl, ov, C * unit, ov / (C * unit), dev) for dl, ov, unit, dev in measured]
    fit = fit_loglog([r.delta for r in rows], [r.overlap for r in rows])
    return SweepResult(fit.slope, fit.intercept, fit.r2, d0.n - gamma, gamma, C, epsilon, rows)
