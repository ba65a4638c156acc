"""Brascamp-Lieb data: maps, exponents, validation, JSON I/O and perturbation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from . import subspace as sp
from .errors import InvalidInputError
from .rng import stream
from .subspace import Subspace


def operator_norm(M) -> float:
    """Largest singular value of ``M``."""
    A = np.asarray(M, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(np.atleast_2d(A), 2))


def _has_orthonormal_rows(M: np.ndarray, atol: float = 1e-10) -> bool:
    return M.shape[0] <= M.shape[1] and np.allclose(M @ M.T, np.eye(M.shape[0]), atol=atol)


@dataclass(frozen=True, eq=False)
class BLDatum:
    """A tuple of linear maps ``pi_j: R^n -> R^{n_j}`` with exponents ``p_j``.

    ``kernels`` is filled in automatically when every map has orthonormal
    rows (an orthogonal projection onto the complement of its kernel).
    """

    n: int
    maps: tuple
    p: tuple
    kernels: tuple | None = None

    def __post_init__(self):
        maps = []
        for j, M in enumerate(self.maps):
            A = np.array(M, dtype=float)
            if A.ndim == 1:
                A = A.reshape(1, -1)
            if A.ndim != 2 or A.shape[1] != self.n:
                raise InvalidInputError(f"maps[{j}] must have {self.n} columns")
            if not np.all(np.isfinite(A)):
                raise InvalidInputError(f"maps[{j}] has non-finite entries")
            A.setflags(write=False)
            maps.append(A)
        object.__setattr__(self, "maps", tuple(maps))
        p = tuple(float(x) for x in self.p)
        if len(p) != len(maps):
            raise InvalidInputError(f"got {len(maps)} maps but {len(p)} exponents")
        object.__setattr__(self, "p", p)
        kernels = self.kernels
        if kernels is None and maps and all(_has_orthonormal_rows(A) for A in maps):
            kernels = tuple(sp.kernel(A) for A in maps)
        if kernels is not None:
            kernels = tuple(kernels)
            if len(kernels) != len(maps):
                raise InvalidInputError("kernels and maps have different lengths")
        object.__setattr__(self, "kernels", kernels)

    @property
    def J(self) -> int:
        return len(self.maps)

    @property
    def dims(self) -> tuple:
        """Target dimensions ``n_j``."""
        return tuple(A.shape[0] for A in self.maps)

    @classmethod
    def from_kernels(cls, n: int, kernels, p) -> BLDatum:
        """Datum of orthogonal projections onto the complements of ``kernels``."""
        kers = []
        for K in kernels:
            if not isinstance(K, Subspace):
                K = Subspace.span(K, ambient_dim=n)
            if K.ambient_dim != n:
                raise InvalidInputError("kernel lives in the wrong ambient space")
            kers.append(K)
        maps = [sp.complement(K).basis.T for K in kers]
        return cls(n, tuple(maps), tuple(p), tuple(kers))

    def with_p(self, p) -> BLDatum:
        return BLDatum(self.n, self.maps, tuple(p), self.kernels)


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok


def validate(d: BLDatum, tol: float = sp.RANK_TOL) -> ValidationReport:
    """Check surjectivity, exponent range and kernel consistency."""
    report = ValidationReport()
    for j, A in enumerate(d.maps):
        if A.shape[0] == 0:
            continue
        if sp.rank(A, tol, scale=1.0) != A.shape[0] or operator_norm(A) == 0:
            report.failures.append(f"maps[{j}]: not surjective (rank < {A.shape[0]})")
    for j, pj in enumerate(d.p):
        if not (0.0 <= pj <= 1.0) or not np.isfinite(pj):
            report.failures.append(f"p[{j}] = {pj}: exponent out of [0,1]")
    if d.kernels is not None:
        for j, (A, K) in enumerate(zip(d.maps, d.kernels)):
            if K.ambient_dim != d.n:
                report.failures.append(f"kernels[{j}]: wrong ambient dimension")
            elif K.dim and np.max(np.abs(A @ K.basis)) > 1e-8:
                report.failures.append(f"kernels[{j}]: not annihilated by maps[{j}]")
            elif K.dim != d.n - A.shape[0]:
                report.failures.append(f"kernels[{j}]: dimension {K.dim} != n - n_j")
    return report


@dataclass(frozen=True)
class PerturbationSpec:
    nu: float
    seed: int = 0
    samples: int = 1

    def __post_init__(self):
        if self.nu < 0:
            raise InvalidInputError("nu must be nonnegative")
        if self.samples < 1:
            raise InvalidInputError("samples must be >= 1")


def _mixing_generator(K: Subspace, rng: np.random.Generator) -> np.ndarray | None:
    """Unit-norm skew-symmetric matrix that moves ``K`` off itself."""
    k, n = K.dim, K.ambient_dim
    if k == 0 or k == n:
        return None
    C = sp.complement(K).basis
    B = rng.standard_normal((n - k, k))
    B /= np.linalg.norm(B, 2)
    X = C @ B @ K.basis.T  # maps K into its complement
    return X - X.T


def rotate_toward(K: Subspace, nu: float, rng: np.random.Generator, tol: float = 1e-6):
    """Rotation ``Q`` with ``grassmann_distance(Q K, K)`` equal to ``nu`` (capped at 1).

    The rotation angle is found by bisection and taken from the lower side so
    the returned distance never exceeds ``nu``.
    """
    n = K.ambient_dim
    A = _mixing_generator(K, rng)
    if A is None or nu == 0:
        return np.eye(n)

    def dist(theta):
        return sp.grassmann_distance(Subspace(expm(theta * A) @ K.basis), K)

    # principal angles grow linearly in theta; distance 1 is reached at pi/2
    hi = np.pi / 2
    if nu >= dist(hi):
        return expm(hi * A)
    lo = 0.0
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        d = dist(mid)
        if d <= nu:
            lo = mid
            if nu - d <= tol:
                break
        else:
            hi = mid
    return expm(lo * A)


def perturb(d: BLDatum, spec: PerturbationSpec, index: int) -> BLDatum:
    """Rotate every kernel to Grassmannian distance ``spec.nu`` of the original.

    Maps become ``pi_j Q_j^T``: orthogonal projections with the rotated
    kernel.  Deterministic per ``(spec.seed, index)``.
    """
    if d.kernels is None:
        raise InvalidInputError("perturb requires a datum with kernels (orthogonal projections)")
    if not 0 <= index < spec.samples:
        raise InvalidInputError(f"index {index} outside [0, {spec.samples})")
    if spec.nu == 0:
        return d
    rng = stream(spec.seed, "perturbations", index)
    maps, kers = [], []
    for A, K in zip(d.maps, d.kernels):
        Q = rotate_toward(K, spec.nu, rng)
        P = A @ Q.T
        if _has_orthonormal_rows(A):
            maps.append(P)
        else:
            maps.append(sp.complement(Subspace(Q @ K.basis)).basis.T)
        kers.append(Subspace(Q @ K.basis))
    return BLDatum(d.n, tuple(maps), d.p, tuple(kers))


# -- JSON problem documents -------------------------------------------------

def _field_error(path, name, msg):
    where = f"{path}: " if path else ""
    return InvalidInputError(f"{where}field '{name}': {msg}")


def datum_from_dict(doc: dict, path: str | None = None) -> BLDatum:
    """Build a datum from a parsed problem document."""
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{path or 'problem'}: top level must be an object")
    if "n" not in doc:
        raise _field_error(path, "n", "missing")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise _field_error(path, "n", f"expected a positive integer, got {n!r}")
    if "p" not in doc:
        raise _field_error(path, "p", "missing")
    p = doc["p"]
    if not isinstance(p, list) or not all(isinstance(x, (int, float)) for x in p):
        raise _field_error(path, "p", "expected an array of numbers")
    has_maps, has_kernels = "maps" in doc, "kernels" in doc
    if has_maps == has_kernels:
        raise _field_error(path, "maps/kernels", "exactly one of 'maps' or 'kernels' is required")
    try:
        if has_maps:
            maps = doc["maps"]
            if not isinstance(maps, list):
                raise _field_error(path, "maps", "expected an array of matrices")
            arrs = []
            for j, M in enumerate(maps):
                A = np.array(M, dtype=float)
                if A.ndim == 1:
                    A = A.reshape(1, -1)
                if A.ndim != 2 or A.shape[1] != n:
                    raise _field_error(path, f"maps[{j}]", f"expected a matrix with {n} columns")
                arrs.append(A)
            return BLDatum(n, tuple(arrs), tuple(p))
        kernels = doc["kernels"]
        if not isinstance(kernels, list):
            raise _field_error(path, "kernels", "expected an array of basis lists")
        kers = []
        for j, K in enumerate(kernels):
            A = np.array(K, dtype=float).reshape(-1, n) if len(K) else np.zeros((0, n))
            kers.append(Subspace.span(A, ambient_dim=n))
        return BLDatum.from_kernels(n, kers, p)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"{path or 'problem'}: {exc}") from exc


def datum_to_dict(d: BLDatum) -> dict:
    return {"n": d.n, "p": list(d.p), "maps": [A.tolist() for A in d.maps]}


def load_problem(path) -> dict:
    """Parse a problem file; JSON syntax errors carry line and column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
