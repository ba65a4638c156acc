"""Greedy orthonormal basis selection for orthogonal-projection data.

Each new vector is drawn from the orthogonal complement of the chosen
prefix and maximizes, over ``trials`` random candidates, the smallest
residual ``|P_{H_j^perp} pi_j(e)|`` among the maps that still have room
(``H_j`` is the span of the images of the prefix).  The per-step residuals
give the dimension table behind the local-boundedness exponent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import subspace as sp
from .datum import BLDatum
from .errors import InvalidInputError, SelectionFailedError
from .exponent import locbd_exponent
from .rng import stream

ZERO_TOL = 1e-10
MIN_MARGIN = 1e-6
DEFAULT_TRIALS = 4096


@dataclass
class BasisSelection:
    e: np.ndarray  # (n, n); column r is e_{r+1}
    margin: float
    step_dims: np.ndarray  # (n, J), entries 0/1
    residuals: np.ndarray  # (n, J)
    J_r_sets: list

    def to_dict(self) -> dict:
        return {"basis": self.e.T.tolist(), "margin": self.margin,
                "step_dims": self.step_dims.tolist(), "residuals": self.residuals.tolist(),
                "J_r_sets": [sorted(s) for s in self.J_r_sets]}


def _image_complement(A: np.ndarray, prefix: np.ndarray) -> np.ndarray:
    """Projector onto the orthogonal complement of ``span(A @ prefix)``."""
    m = A.shape[0]
    if prefix.shape[1] == 0 or m == 0:
        return np.eye(m)
    Q = sp._orth(A @ prefix)
    return np.eye(m) - Q @ Q.T


def step_residuals(d: BLDatum, prefix: np.ndarray, cand: np.ndarray) -> np.ndarray:
    """``|P_{H_j^perp} pi_j e|`` for each candidate column of ``cand``; shape (N, J)."""
    out = np.zeros((cand.shape[1], d.J))
    for j, A in enumerate(d.maps):
        if A.shape[0] == 0:
            continue
        R = _image_complement(A, prefix) @ (A @ cand)
        out[:, j] = np.linalg.norm(R, axis=0)
    return out


def _canonical_sign(C: np.ndarray) -> np.ndarray:
    # first entry above noise made positive, so e and -e compare equal
    idx = np.argmax(np.abs(C) > 1e-12, axis=0)
    s = np.sign(C[idx, np.arange(C.shape[1])])
    s[s == 0] = 1.0
    return C * s


def _pick(scores: np.ndarray, cand: np.ndarray) -> int:
    top = scores.max()
    tied = np.flatnonzero(scores >= top - 1e-15)
    if len(tied) == 1:
        return int(tied[0])
    # lexicographically largest coordinate vector
    keys = [tuple(cand[:, i]) for i in tied]
    return int(tied[max(range(len(tied)), key=lambda k: keys[k])])


def select_basis(d0: BLDatum, trials: int = DEFAULT_TRIALS, seed: int = 0) -> BasisSelection:
    """Greedy margin-maximizing basis; raises SelectionFailedError on a degenerate datum."""
    if d0.kernels is None:
        raise InvalidInputError("select_basis requires orthogonal-projection data (kernels)")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    n, J = d0.n, d0.J
    dims = d0.dims
    E = np.zeros((n, 0))
    J_sets = []
    while E.shape[1] < n:
        r = E.shape[1]
        active = [j for j in range(J)
                  if (sp.rank(d0.maps[j] @ E, scale=1.0) if r else 0) < dims[j]]
        J_sets.append(set(active))
        comp = sp.complement(sp.Subspace(E)).basis if r else np.eye(n)
        if not active:
            E = np.hstack([E, comp])
            J_sets.extend(set() for _ in range(comp.shape[1] - 1))
            break
        if comp.shape[1] == 1:
            cand = comp.copy()
        else:
            rng = stream(seed, "basis", r)
            G = rng.standard_normal((comp.shape[1], trials))
            cand = comp @ (G / np.linalg.norm(G, axis=0))
        cand = _canonical_sign(cand)
        res = step_residuals(d0, E, cand)
        scores = res[:, active].min(axis=1)
        best = _pick(scores, cand)
        if scores[best] < MIN_MARGIN:
            raise SelectionFailedError(
                f"step {r + 1}: best margin {scores[best]:.3g} after {trials} trials")
        e = cand[:, best]
        E = np.hstack([E, (e / np.linalg.norm(e))[:, None]])
    residuals = np.vstack([step_residuals(d0, E[:, :r], E[:, r:r + 1]) for r in range(n)])
    step_dims = (residuals > ZERO_TOL).astype(int)
    # certified from the final (normalized) basis rather than the search scores
    accepted = [residuals[r, j] for r, act in enumerate(J_sets) for j in act]
    margin = float(min(accepted)) if accepted else 1.0
    return BasisSelection(E, margin, step_dims, residuals, J_sets)


def factor_map(d: BLDatum, sel: BasisSelection, j: int, r: int) -> np.ndarray:
    """Ambient matrix of ``P_{(H_j^r)^perp} o pi_j`` restricted to ``span(e_{r+1}, ..., e_n)``.

    The restriction is realized by composing with the orthogonal projector
    onto that span, so ``r = 0`` returns ``pi_j`` itself.
    """
    if not 0 <= j < d.J:
        raise InvalidInputError(f"map index {j} out of range")
    n = d.n
    if not 0 <= r < n:
        raise InvalidInputError(f"step {r} out of range [0, {n})")
    A = d.maps[j]
    if r == 0:
        return A.copy()
    tail = sel.e[:, r:]
    return _image_complement(A, sel.e[:, :r]) @ A @ (tail @ tail.T)


@dataclass
class LocbdCheck:
    exponent: float
    expected: float
    match: bool
    step_dims: np.ndarray
    residuals: np.ndarray

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "expected": self.expected, "match": self.match,
                "step_dims": self.step_dims.tolist()}


def verify_locbd_exponent(d: BLDatum, sel: BasisSelection, tol: float = 1e-9) -> LocbdCheck:
    """Exponent ``sum_r max(1 - sum_j p_j dim<L_j^(r-1)(e_r)>, 0)`` from measured step dims."""
    n = d.n
    residuals = np.vstack([step_residuals(d, sel.e[:, :r], sel.e[:, r:r + 1]) for r in range(n)])
    dims = (residuals > ZERO_TOL).astype(int)
    p = np.asarray(d.p)
    value = float(sum(max(1.0 - float(p @ dims[r]), 0.0) for r in range(n)))
    expected = locbd_exponent(d)
    return LocbdCheck(value, expected, abs(value - expected) <= tol, dims, residuals)
