"""Floating-point arithmetic on linear subspaces of R^n.

Subspaces are stored as an orthonormal basis (columns of an ``n x k`` array).
All functions are pure and return new immutable objects.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

#: Relative SVD threshold shared by every dimension count in the package.
RANK_TOL = 1e-8


def _as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise InvalidInputError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    return A


def rank(M, tol: float = RANK_TOL, scale: float | None = None) -> int:
    """Numerical rank of ``M``.

    Counts singular values above ``tol * scale``.  ``scale`` defaults to the
    largest singular value of ``M`` (or 1 when ``M`` is zero).
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    A = _as_matrix(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if scale is None:
        scale = s[0] if s[0] > 0 else 1.0
    return int(np.count_nonzero(s > tol * scale))


def _orth(A: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis for the column space of ``A`` (absolute scale 1)."""
    n = A.shape[0]
    if A.size == 0:
        return np.zeros((n, 0))
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    k = int(np.count_nonzero(s > tol * max(1.0, s[0])))
    return u[:, :k]


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of R^n held as an orthonormal basis ``basis`` (n x dim)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2:
            raise InvalidInputError("basis must be a 2-d array")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None, tol: float = RANK_TOL) -> Subspace:
        """Span of the given vectors (rows of ``vectors``)."""
        V = np.asarray(vectors, dtype=float)
        if V.size == 0:
            if ambient_dim is None:
                raise InvalidInputError("ambient_dim required for an empty span")
            return cls.zero(ambient_dim)
        if V.ndim == 1:
            V = V.reshape(1, -1)
        if ambient_dim is not None and V.shape[1] != ambient_dim:
            raise InvalidInputError("vector length does not match ambient_dim")
        if not np.all(np.isfinite(V)):
            raise InvalidInputError("vectors have non-finite entries")
        return cls(_orth(V.T, tol))

    @classmethod
    def zero(cls, n: int) -> Subspace:
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> Subspace:
        return cls(np.eye(n))

    @classmethod
    def coordinate(cls, n: int, axes) -> Subspace:
        return cls(np.eye(n)[:, sorted(axes)])

    def contains(self, W: Subspace, atol: float = 1e-8) -> bool:
        """True when ``W`` is a subspace of ``self``."""
        if W.dim == 0:
            return True
        resid = W.basis - self.basis @ (self.basis.T @ W.basis)
        return bool(np.max(np.abs(resid)) <= atol)

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _check_same_ambient(V: Subspace, W: Subspace):
    if V.ambient_dim != W.ambient_dim:
        raise InvalidInputError(
            f"ambient dimensions differ: {V.ambient_dim} vs {W.ambient_dim}"
        )


def image_dim(M, V: Subspace, tol: float = RANK_TOL) -> int:
    """``dim M(V)``.

    The rank threshold is relative to the operator norm of ``M`` so that a
    subspace lying in the kernel maps to dimension 0 even though its image
    consists of rounding noise only.
    """
    A = _as_matrix(M)
    if A.shape[1] != V.ambient_dim:
        raise InvalidInputError(
            f"map has {A.shape[1]} columns but subspace lives in R^{V.ambient_dim}"
        )
    if V.dim == 0 or A.shape[0] == 0:
        return 0
    norm = np.linalg.norm(A, 2)
    return rank(A @ V.basis, tol, scale=norm if norm > 0 else 1.0)


def image(M, V: Subspace, tol: float = RANK_TOL) -> Subspace:
    """The subspace ``M(V)`` of the codomain."""
    A = _as_matrix(M)
    if A.shape[1] != V.ambient_dim:
        raise InvalidInputError("dimension mismatch between map and subspace")
    if V.dim == 0:
        return Subspace.zero(A.shape[0])
    norm = np.linalg.norm(A, 2)
    img = A @ V.basis
    if norm == 0:
        return Subspace.zero(A.shape[0])
    return Subspace(_orth(img / norm, tol))


def kernel(M, tol: float = RANK_TOL) -> Subspace:
    """Null space of ``M`` as a subspace of its domain."""
    A = _as_matrix(M)
    n = A.shape[1]
    if A.shape[0] == 0:
        return Subspace.full(n)
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    r = int(np.count_nonzero(s > tol * scale))
    return Subspace(vh[r:].T.copy())


def sum(V: Subspace, W: Subspace) -> Subspace:  # noqa: A001
    """``V + W``."""
    _check_same_ambient(V, W)
    return Subspace(_orth(np.hstack([V.basis, W.basis])))


def complement(V: Subspace) -> Subspace:
    """Orthogonal complement of ``V`` in R^n."""
    n = V.ambient_dim
    if V.dim == 0:
        return Subspace.full(n)
    if V.dim == n:
        return Subspace.zero(n)
    q, _ = np.linalg.qr(V.basis, mode="complete")
    return Subspace(q[:, V.dim:].copy())


def intersect(V: Subspace, W: Subspace) -> Subspace:
    """``V ∩ W`` computed as ``(V^⊥ + W^⊥)^⊥``."""
    _check_same_ambient(V, W)
    return complement(sum(complement(V), complement(W)))


def orthocomplement(V: Subspace, H: Subspace, atol: float = 1e-8) -> Subspace:
    """Orthogonal complement of ``V`` inside ``H``; requires ``V ⊆ H``."""
    _check_same_ambient(V, H)
    if not H.contains(V, atol):
        raise InvalidInputError("V is not contained in H")
    if V.dim == 0:
        return H
    coords = H.basis.T @ V.basis  # V in H-coordinates
    q, _ = np.linalg.qr(coords, mode="complete")
    rest = q[:, V.dim:]
    return Subspace(H.basis @ rest)


def projection_matrix(V: Subspace) -> np.ndarray:
    """Orthogonal projector onto ``V``."""
    P = V.basis @ V.basis.T
    return 0.5 * (P + P.T)


def grassmann_distance(V: Subspace, W: Subspace) -> float:
    """Operator norm of the difference of the orthogonal projectors."""
    _check_same_ambient(V, W)
    if V.dim != W.dim:
        raise InvalidInputError(f"subspace dimensions differ: {V.dim} vs {W.dim}")
    D = projection_matrix(V) - projection_matrix(W)
    if D.size == 0:
        return 0.0
    return float(min(1.0, np.max(np.abs(np.linalg.eigvalsh(D)))))


def random_subspace(n: int, k: int, seed) -> Subspace:
    """Orthonormalized span of ``k`` standard-normal vectors in R^n.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if not 0 <= k <= n:
        raise InvalidInputError(f"need 0 <= k <= n, got k={k}, n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if k == 0:
        return Subspace.zero(n)
    G = rng.standard_normal((n, k))
    q, _ = np.linalg.qr(G)
    return Subspace(q)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))
