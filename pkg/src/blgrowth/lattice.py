"""Functions constant on unit lattice cells, windowed norms, and the
indicator witnesses that realize the lower growth bound."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from . import subspace as sp
from .datum import BLDatum, operator_norm
from .errors import InvalidInputError
from .subspace import Subspace


class LatticeFn:
    """Nonnegative function on R^m, constant on each cell ``v + [0,1)^m``.

    Stored sparsely as a mapping from integer cell vectors to values.
    """

    def __init__(self, m: int, cells=None):
        self.m = int(m)
        self._cells: dict[tuple, float] = {}
        for v, val in (cells.items() if isinstance(cells, dict) else (cells or ())):
            key = tuple(int(x) for x in v)
            if len(key) != self.m:
                raise InvalidInputError(f"cell {key} is not in Z^{self.m}")
            val = float(val)
            if not math.isfinite(val) or val < 0:
                raise InvalidInputError(f"cell value {val} must be finite and >= 0")
            if val > 0:
                self._cells[key] = val
        self._dense = None

    @classmethod
    def indicator(cls, m: int, cells) -> LatticeFn:
        return cls(m, {tuple(v): 1.0 for v in cells})

    @property
    def cells(self) -> dict:
        return dict(self._cells)

    def __len__(self):
        return len(self._cells)

    def scaled(self, lam: float) -> LatticeFn:
        return LatticeFn(self.m, {v: lam * x for v, x in self._cells.items()})

    def max_value(self) -> float:
        return max(self._cells.values(), default=0.0)

    def _table(self):
        # dense lookup table over the support's bounding box
        if self._dense is None:
            if not self._cells:
                self._dense = (np.zeros(self.m, dtype=np.int64), np.zeros((1,) * self.m))
            else:
                keys = np.array(list(self._cells), dtype=np.int64)
                lo = keys.min(axis=0)
                shape = tuple(keys.max(axis=0) - lo + 1)
                table = np.zeros(shape)
                table[tuple((keys - lo).T)] = list(self._cells.values())
                self._dense = (lo, table)
        return self._dense

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Values at the rows of ``X`` (shape (N, m))."""
        X = np.asarray(X, dtype=float).reshape(-1, self.m)
        lo, table = self._table()
        idx = np.floor(X).astype(np.int64) - lo
        inside = np.all((idx >= 0) & (idx < np.array(table.shape)), axis=1)
        out = np.zeros(len(X))
        if np.any(inside) and self._cells:
            out[inside] = table[tuple(idx[inside].T)]
        return out

    def to_json(self) -> str:
        return json.dumps([[list(v), x] for v, x in sorted(self._cells.items())])

    @classmethod
    def from_json(cls, m: int, text: str) -> LatticeFn:
        return cls(m, [(v, x) for v, x in json.loads(text)])

    def __repr__(self):
        return f"LatticeFn(m={self.m}, cells={len(self._cells)})"


def integral(f: LatticeFn) -> float:
    """Integral over R^m (each cell has unit volume)."""
    return float(math.fsum(f.cells.values()))


def eval(f: LatticeFn, x) -> float:  # noqa: A001
    """Value at ``x``; cells are half-open, located by componentwise floor."""
    key = tuple(int(math.floor(t)) for t in np.ravel(x))
    if len(key) != f.m:
        raise InvalidInputError(f"point has {len(key)} coordinates, expected {f.m}")
    return f.cells.get(key, 0.0)


def norm_A(f: LatticeFn, A: float, lattice="all") -> float:
    """Sum over lattice points ``v`` of the largest value on ``v + [0, A)^m``.

    ``lattice`` is ``"all"`` for Z^m or an iterable of integer vectors.
    """
    if A < 1:
        raise InvalidInputError("A must be >= 1")
    # cell u meets [v, v+A) iff u - A < v <= u
    offsets = range(math.floor(-A) + 1, 1)
    best: dict[tuple, float] = {}
    for u, val in f.cells.items():
        for shift in itertools.product(offsets, repeat=f.m):
            v = tuple(a + b for a, b in zip(u, shift))
            if best.get(v, -1.0) < val:
                best[v] = val
    if lattice != "all":
        allowed = {tuple(int(x) for x in v) for v in lattice}
        return float(math.fsum(x for v, x in best.items() if v in allowed))
    return float(math.fsum(best.values()))


@dataclass
class WitnessSet:
    V: Subspace
    R: float
    S: list  # integer cell arrays, one (N_j, n_j) array per map
    f: list  # indicator LatticeFn per map
    c0: float

    def sample_slab(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform-ish points of ``{v + w : v in V, |v| <= c0 R, w in V^perp, |w| <= c0}``."""
        n = self.V.ambient_dim
        W = sp.complement(self.V)
        out = np.zeros((count, n))
        for basis, radius in ((self.V.basis, self.c0 * self.R), (W.basis, self.c0)):
            k = basis.shape[1]
            if k == 0:
                continue
            g = rng.standard_normal((count, k))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            r = radius * rng.random(count) ** (1.0 / k)
            out += (g * r[:, None]) @ basis.T
        return out


def witness_cells(pi: np.ndarray, V: Subspace, R: float, n: int) -> np.ndarray:
    """Integer vectors ``v`` with ``|P_{pi(V)} v| <= R + sqrt(n)`` and
    ``|P_{pi(V)^perp} v| <= 1 + sqrt(n)``."""
    m = pi.shape[0]
    W = sp.image(pi, V)
    P = sp.projection_matrix(W)
    a, b = R + math.sqrt(n), 1 + math.sqrt(n)
    bound = int(math.floor(R + math.sqrt(n) + 1))
    axis = np.arange(-bound, bound + 1)
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)

    def keep(pts):
        pv = pts @ P
        along = np.linalg.norm(pv, axis=1)
        across = np.linalg.norm(pts - pv, axis=1)
        return pts[(along <= a + 1e-12) & (across <= b + 1e-12)]

    if m == 1:
        return keep(axis[:, None]).astype(np.int64)
    # enumerate the box slab by slab along the first axis to bound memory
    tail = np.array(list(itertools.product(axis, repeat=m - 1)), dtype=np.int64)
    found = [keep(np.hstack([np.full((len(tail), 1), x0), tail])) for x0 in axis]
    return np.vstack(found).astype(np.int64)


def witness(d: BLDatum, V: Subspace, R: float) -> WitnessSet:
    """Indicator functions supported on lattice cells near ``pi_j(V)``."""
    if R < 1:
        raise InvalidInputError("R must be >= 1")
    if V.ambient_dim != d.n:
        raise InvalidInputError("subspace dimension does not match the datum")
    S, fs = [], []
    for A in d.maps:
        cells = witness_cells(A, V, R, d.n)
        S.append(cells)
        fs.append(LatticeFn.indicator(A.shape[0], map(tuple, cells)))
    norms = [operator_norm(A) for A in d.maps]
    c0 = min([1 / (2 * x) for x in norms if x > 0] + [1 / math.sqrt(2)])
    return WitnessSet(V, float(R), S, fs, c0)


def random_sparse(m: int, cells: int, box: int, rng: np.random.Generator,
                  values: bool = True) -> LatticeFn:
    """Random nonnegative lattice function with up to ``cells`` cells in ``[-box, box)^m``."""
    keys = rng.integers(-box, box, size=(cells, m))
    vals = rng.exponential(1.0, size=cells) if values else np.ones(cells)
    return LatticeFn(m, {tuple(k): v for k, v in zip(keys.tolist(), vals)})
