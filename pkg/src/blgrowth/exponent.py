"""Growth exponents of Brascamp-Lieb data.

``gamma_sup`` maximizes ``dim V - sum_j p_j dim pi_j(V)`` over a finite
candidate set of subspaces (kernel lattice closure, coordinate subspaces,
seeded random subspaces and user extras).  The result is a certified lower
bound for the supremum over all subspaces.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import subspace as sp
from .datum import BLDatum, PerturbationSpec, perturb, validate
from .errors import InvalidInputError
from .rng import stream
from .subspace import Subspace

DEDUP_TOL = 1e-8
CERTIFY_TOL = 1e-6
VIOLATION_TOL = 1e-6

PROVENANCES = ("trivial", "full", "kernel", "lattice-closure", "coordinate", "random", "user")


@dataclass(frozen=True)
class CandidateOptions:
    random_per_dim: int = 2000
    closure_cap: int = 256
    extra: tuple = ()
    seed: int = 0
    coordinate_max_n: int = 12


@dataclass
class CandidateSet:
    subspaces: list = field(default_factory=list)
    provenance: list = field(default_factory=list)
    truncated: bool = False

    def __len__(self):
        return len(self.subspaces)

    def census(self) -> dict:
        out = {k: 0 for k in PROVENANCES}
        for prov in self.provenance:
            out[prov] += 1
        return out


@dataclass
class CandidateRow:
    id: int
    provenance: str
    dim: int
    image_dims: tuple
    value: float


@dataclass
class ExponentReport:
    gamma: float
    argmax: Subspace
    argmax_id: int
    per_candidate: list
    certification: str
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "argmax_id": self.argmax_id,
            "argmax_basis": self.argmax.basis.T.tolist(),
            "argmax_dim": self.argmax.dim,
            "certification": self.certification,
            "closure_truncated": self.truncated,
            "census": [
                {"id": r.id, "provenance": r.provenance, "dim": r.dim,
                 "image_dims": list(r.image_dims), "value": r.value}
                for r in self.per_candidate
            ],
        }


def _check_datum(d: BLDatum, V: Subspace):
    if V.ambient_dim != d.n:
        raise InvalidInputError(f"subspace lives in R^{V.ambient_dim}, datum in R^{d.n}")


def gamma_of(d: BLDatum, V: Subspace, tol: float = sp.RANK_TOL) -> float:
    """``dim V - sum_j p_j dim pi_j(V)``."""
    _check_datum(d, V)
    return float(V.dim - sum(pj * sp.image_dim(A, V, tol) for A, pj in zip(d.maps, d.p)))


def _batched_image_dims(d: BLDatum, bases: np.ndarray, tol: float) -> np.ndarray:
    """Image dimensions for a stack of bases of equal dimension, shape (N, J)."""
    N, _, k = bases.shape
    out = np.zeros((N, d.J), dtype=int)
    if k == 0 or N == 0:
        return out
    for j, A in enumerate(d.maps):
        if A.shape[0] == 0:
            continue
        norm = np.linalg.norm(A, 2)
        if norm == 0:
            continue
        s = np.linalg.svd(A @ bases, compute_uv=False)
        out[:, j] = np.count_nonzero(s > tol * norm, axis=1)
    return out


class _Deduper:
    """Keeps subspaces whose projectors differ from all kept ones by >= tol."""

    def __init__(self, n: int, tol: float = DEDUP_TOL):
        self.n = n
        self.tol = tol
        self._proj: dict[int, list] = {}

    def _close(self, P: np.ndarray, kept: np.ndarray) -> bool:
        # Frobenius prefilter; confirm with the operator norm
        diff = kept - P
        frob = np.sqrt(np.sum(diff * diff, axis=(1, 2)))
        for idx in np.flatnonzero(frob < self.tol * np.sqrt(2 * self.n)):
            if np.max(np.abs(np.linalg.eigvalsh(diff[idx]))) < self.tol:
                return True
        return False

    def add(self, V: Subspace) -> bool:
        P = sp.projection_matrix(V)
        kept = self._proj.setdefault(V.dim, [])
        if kept and self._close(P, np.asarray(kept)):
            return False
        kept.append(P)
        return True

    def add_batch(self, bases: np.ndarray) -> np.ndarray:
        """Vectorized insertion of equal-dimension bases; returns a keep mask."""
        N, _, k = bases.shape
        keep = np.ones(N, dtype=bool)
        if N == 0:
            return keep
        P = np.einsum("nik,njk->nij", bases, bases)
        flat = P.reshape(N, -1)
        sq = np.sum(flat * flat, axis=1)
        thr2 = (self.tol * np.sqrt(2 * self.n)) ** 2
        kept = self._proj.setdefault(k, [])
        if kept:
            K = np.asarray(kept)
            kf = K.reshape(len(K), -1)
            d2 = sq[:, None] + np.sum(kf * kf, axis=1)[None, :] - 2 * flat @ kf.T
            for a, b in zip(*np.nonzero(d2 < thr2)):
                if keep[a] and np.max(np.abs(np.linalg.eigvalsh(P[a] - K[b]))) < self.tol:
                    keep[a] = False
        d2 = sq[:, None] + sq[None, :] - 2 * flat @ flat.T
        near = np.triu(d2 < thr2, k=1)
        for a, b in zip(*np.nonzero(near)):
            if keep[a] and keep[b] and np.max(np.abs(np.linalg.eigvalsh(P[a] - P[b]))) < self.tol:
                keep[b] = False
        kept.extend(P[keep])
        return keep


def candidate_subspaces(d: BLDatum, opts: CandidateOptions | None = None) -> CandidateSet:
    """Finite candidate set for the supremum over subspaces."""
    opts = opts or CandidateOptions()
    n = d.n
    cs = CandidateSet()
    dedup = _Deduper(n)

    def push(V: Subspace, prov: str) -> bool:
        if dedup.add(V):
            cs.subspaces.append(V)
            cs.provenance.append(prov)
            return True
        return False

    push(Subspace.zero(n), "trivial")
    push(Subspace.full(n), "full")

    kernels = list(d.kernels) if d.kernels is not None else [sp.kernel(A) for A in d.maps]
    lattice = []
    for K in kernels:
        push(K, "kernel")
        lattice.append(K)

    # closure of the kernels under + and ∩
    added = 0
    frontier = list(lattice)
    members = list(lattice)
    while frontier and not cs.truncated:
        new = []
        for A, B in itertools.product(frontier, members):
            for W in (sp.sum(A, B), sp.intersect(A, B)):
                if added >= opts.closure_cap:
                    cs.truncated = True
                    break
                if push(W, "lattice-closure"):
                    added += 1
                    new.append(W)
            if cs.truncated:
                break
        members.extend(new)
        frontier = new

    if n <= opts.coordinate_max_n:
        for k in range(1, n):
            for axes in itertools.combinations(range(n), k):
                push(Subspace.coordinate(n, axes), "coordinate")

    for V in opts.extra:
        if not isinstance(V, Subspace):
            V = Subspace.span(V, ambient_dim=n)
        if V.ambient_dim != n:
            raise InvalidInputError("extra candidate lives in the wrong ambient space")
        push(V, "user")

    if opts.random_per_dim > 0:
        rng = stream(opts.seed, "candidates")
        for k in range(1, n):
            G = rng.standard_normal((opts.random_per_dim, n, k))
            Q, _ = np.linalg.qr(G)
            keep = dedup.add_batch(Q)
            for B in Q[keep]:
                cs.subspaces.append(Subspace(B))
                cs.provenance.append("random")
    return cs


def evaluate_candidates(d: BLDatum, cs: CandidateSet, tol: float = sp.RANK_TOL) -> list:
    """Per-candidate rows in construction order."""
    dims_all = np.zeros((len(cs), d.J), dtype=int)
    by_dim: dict[int, list] = {}
    for i, V in enumerate(cs.subspaces):
        if V.ambient_dim != d.n:
            raise InvalidInputError("candidate lives in the wrong ambient space")
        by_dim.setdefault(V.dim, []).append(i)
    for k, idx in by_dim.items():
        bases = np.stack([cs.subspaces[i].basis for i in idx])
        dims_all[idx] = _batched_image_dims(d, bases, tol)
    p = np.asarray(d.p)
    rows = []
    for i, V in enumerate(cs.subspaces):
        dims = tuple(int(x) for x in dims_all[i])
        value = float(V.dim - float(np.dot(p, dims_all[i])))
        rows.append(CandidateRow(i, cs.provenance[i], V.dim, dims, value))
    return rows


def _best(rows: list) -> CandidateRow:
    # max value; ties -> smallest dim, then construction order
    top = max(r.value for r in rows)
    tied = [r for r in rows if r.value >= top - 1e-12]
    return min(tied, key=lambda r: (r.dim, r.id))


def gamma_sup(d: BLDatum, opts: CandidateOptions | None = None, tol: float = sp.RANK_TOL,
              candidates: CandidateSet | None = None) -> ExponentReport:
    """Maximize ``gamma_of`` over the candidate set."""
    report = validate(d)
    if not report.ok:
        raise InvalidInputError("; ".join(report.failures))
    cs = candidates if candidates is not None else candidate_subspaces(d, opts)
    rows = evaluate_candidates(d, cs, tol)
    best = _best(rows)
    structured = [r for r in rows if r.provenance != "random"]
    sampled = [r for r in rows if r.provenance == "random"]
    if sampled and max(r.value for r in sampled) <= _best(structured).value + CERTIFY_TOL:
        cert = "lattice-enumerated"
    else:
        cert = "lattice+sampled"
    return ExponentReport(best.value, cs.subspaces[best.id], best.id, rows, cert, cs.truncated)


def locbd_exponent(d: BLDatum) -> float:
    """``sum_{r=1}^n max(1 - sum_{j: n_j >= r} p_j, 0)``."""
    report = validate(d)
    if not report.ok:
        raise InvalidInputError("; ".join(report.failures))
    total = 0.0
    for r in range(1, d.n + 1):
        s = sum(pj for pj, nj in zip(d.p, d.dims) if nj >= r)
        total += max(1.0 - s, 0.0)
    return total


@dataclass
class PolytopeResult:
    inside: bool
    violated: Subspace | None = None
    slack: float = 0.0
    reason: str = ""

    def __bool__(self):
        return self.inside


def bl_polytope_contains(d: BLDatum, q, opts: CandidateOptions | None = None,
                         tol: float = 1e-12) -> PolytopeResult:
    """Membership of ``q`` in the exponent polytope over the candidate set.

    Checks the box ``[0,1]^J`` and ``n - sum q_j n_j >= dim V - sum q_j dim pi_j(V)``
    for every candidate.  On failure the most violated halfspace is returned.
    """
    q = [float(x) for x in q]
    if len(q) != d.J:
        raise InvalidInputError(f"q has length {len(q)}, expected {d.J}")
    for j, x in enumerate(q):
        if not 0.0 <= x <= 1.0:
            return PolytopeResult(False, None, min(x, 1.0 - x), f"box: q[{j}] = {x}")
    dq = d.with_p(q)
    cs = candidate_subspaces(dq, opts)
    rows = evaluate_candidates(dq, cs)
    lhs = d.n - sum(x * nj for x, nj in zip(q, d.dims))
    worst = _best(rows)
    slack = lhs - worst.value
    if slack < -tol:
        return PolytopeResult(False, cs.subspaces[worst.id], slack, "halfspace")
    return PolytopeResult(True, None, slack, "")


@dataclass
class ScanReport:
    gamma_base: float
    max_gamma: float
    violations: int
    gammas: list
    distances: list  # per sample, per j

    def to_dict(self) -> dict:
        return {"gamma_base": self.gamma_base, "max_gamma": self.max_gamma,
                "violations": self.violations, "gammas": self.gammas,
                "distances": self.distances}


def stability_scan(d: BLDatum, spec: PerturbationSpec,
                   opts: CandidateOptions | None = None) -> ScanReport:
    """Exponent of ``spec.samples`` perturbations of ``d`` against the base value."""
    if d.kernels is None:
        raise InvalidInputError("stability_scan requires kernels")
    opts = opts or CandidateOptions()
    base = gamma_sup(d, opts)
    gammas, distances = [], []
    violations = 0
    for i in range(spec.samples):
        dp = perturb(d, spec, i)
        local = CandidateOptions(opts.random_per_dim, opts.closure_cap,
                                 tuple(opts.extra) + (base.argmax,), opts.seed,
                                 opts.coordinate_max_n)
        g = gamma_sup(dp, local).gamma
        gammas.append(g)
        distances.append([sp.grassmann_distance(K, K0) for K, K0 in zip(dp.kernels, d.kernels)])
        if g > base.gamma + VIOLATION_TOL:
            violations += 1
    max_gamma = max(gammas) if gammas else base.gamma
    return ScanReport(base.gamma, max_gamma, violations, gammas, distances)


def nu_estimate(d: BLDatum, seed: int = 0, samples: int = 200,
                opts: CandidateOptions | None = None, kmax: int = 20) -> float:
    """Largest ``2^-k`` (k = 1..kmax) whose stability scan shows no violations."""
    for k in range(1, kmax + 1):
        nu = 2.0 ** -k
        scan = stability_scan(d, PerturbationSpec(nu, seed, samples), opts)
        if scan.violations == 0:
            return nu
    return 0.0
