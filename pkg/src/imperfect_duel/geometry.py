"""Action spaces: membership, Euclidean projection, unit-sphere sampling.

Three variants are supported:

- ``Ball``: Euclidean ball of radius R centered at the origin.
- ``HalfspacePolytope``: bounded intersection of halfspaces c.a <= b,
  optionally with per-coordinate nonnegativity constraints.
- ``DiscreteEmbeddingSet``: a finite catalog of embedding vectors inside
  an enclosing ball.

Polytope projection is exact: it enumerates active sets over the (few)
constraints, which is cheap for the d <= 3 instances we run.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Ball",
    "HalfspacePolytope",
    "DiscreteEmbeddingSet",
    "sample_unit_sphere",
]


def _check_dim(space_dim: int, x: np.ndarray) -> None:
    if x.shape != (space_dim,):
        raise ValueError(f"dimension mismatch: space has d={space_dim}, point has shape {x.shape}")


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {a : ||a||_2 <= radius} centered at the origin."""

    radius: float
    dim: int

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")

    def project(self, x: np.ndarray) -> np.ndarray:
        _check_dim(self.dim, x)
        sq = float(x @ x)
        if sq <= self.radius**2:
            return np.array(x, dtype=float)
        return x * (self.radius / math.sqrt(sq))

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        _check_dim(self.dim, x)
        return math.sqrt(float(x @ x)) <= self.radius + tol


@dataclass(frozen=True)
class HalfspacePolytope:
    """Bounded polytope {a : C a <= b, a_i >= 0 for flagged i}.

    Must contain the origin and be bounded; both are checked at
    construction (boundedness via per-coordinate LP-free interval checks
    on a coarse set of directions would be loose, so we require an
    explicit enclosing radius computed from the vertices of the active
    sets instead).
    """

    rows: tuple[tuple[tuple[float, ...], float], ...]
    nonneg: tuple[bool, ...]

    # Derived constraint system (C a <= b including nonnegativity rows) and
    # precomputed affine maps x -> P_S x + q_S solving the equality-constrained
    # least-squares subproblem for every active set S.
    _C: np.ndarray = field(init=False, repr=False, compare=False)
    _b: np.ndarray = field(init=False, repr=False, compare=False)
    _P: np.ndarray = field(init=False, repr=False, compare=False)
    _q: np.ndarray = field(init=False, repr=False, compare=False)
    _rows2: tuple | None = field(init=False, repr=False, compare=False)
    _maps2: tuple | None = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        d = len(self.nonneg)
        if d < 1:
            raise ValueError("polytope dimension must be >= 1")
        C_rows = []
        b_vals = []
        for c, bb in self.rows:
            if len(c) != d:
                raise ValueError("constraint row length does not match dimension")
            C_rows.append(list(c))
            b_vals.append(float(bb))
        for i, flag in enumerate(self.nonneg):
            if flag:
                row = [0.0] * d
                row[i] = -1.0
                C_rows.append(row)
                b_vals.append(0.0)
        C = np.array(C_rows, dtype=float)
        b = np.array(b_vals, dtype=float)
        object.__setattr__(self, "_C", C)
        object.__setattr__(self, "_b", b)
        if np.any(b < -1e-12):
            raise ValueError("polytope must contain the origin")
        # Boundedness check: every vertex candidate finite and the recession
        # cone trivial.  For the small instances here we verify that for each
        # coordinate direction +-e_i the support is finite by checking that
        # some constraint has a positive inner product with the direction.
        for i in range(d):
            for sgn in (1.0, -1.0):
                e = np.zeros(d)
                e[i] = sgn
                if not np.any(C @ e > 1e-12):
                    raise ValueError("polytope is unbounded")
        # Active-set affine maps: for S with rows Cs, the minimizer of
        # ||a - x||^2 s.t. Cs a = bs is a = (I - Cs^T G^-1 Cs) x + Cs^T G^-1 bs.
        m = C.shape[0]
        Ps = []
        qs = []
        eye = np.eye(d)
        for k in range(1, d + 1):
            for subset in itertools.combinations(range(m), k):
                Cs = C[list(subset)]
                bs = b[list(subset)]
                G = Cs @ Cs.T
                try:
                    Gi = np.linalg.inv(G)
                except np.linalg.LinAlgError:
                    continue
                Ps.append(eye - Cs.T @ Gi @ Cs)
                qs.append(Cs.T @ Gi @ bs)
        object.__setattr__(self, "_P", np.array(Ps))
        object.__setattr__(self, "_q", np.array(qs))
        # Scalar copies for the d=2 fast path in project().
        object.__setattr__(self, "_rows2", tuple((float(r[0]), float(r[1]), float(bb))
                                                 for r, bb in zip(C, b)) if d == 2 else None)
        object.__setattr__(
            self, "_maps2",
            tuple((float(P[0, 0]), float(P[0, 1]), float(P[1, 0]), float(P[1, 1]),
                   float(q[0]), float(q[1])) for P, q in zip(Ps, qs)) if d == 2 else None,
        )

    @property
    def dim(self) -> int:
        return len(self.nonneg)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        _check_dim(self.dim, x)
        return bool(np.all(self._C @ x <= self._b + tol))

    def vertices(self) -> np.ndarray:
        """All polytope vertices (feasible intersections of d active rows)."""
        C, b = self._C, self._b
        d = self.dim
        verts: list[np.ndarray] = []
        for subset in itertools.combinations(range(C.shape[0]), d):
            Cs = C[list(subset)]
            if abs(np.linalg.det(Cs)) < 1e-12:
                continue
            v = np.linalg.solve(Cs, b[list(subset)])
            if np.all(C @ v <= b + 1e-9) and not any(
                np.allclose(v, w, atol=1e-9) for w in verts
            ):
                verts.append(v)
        return np.array(verts)

    def diameter(self) -> float:
        """sup over pairs of points of their distance (attained at vertices)."""
        verts = self.vertices()
        diffs = verts[:, None, :] - verts[None, :, :]
        return float(np.sqrt(np.einsum("ijk,ijk->ij", diffs, diffs).max()))

    def project(self, x: np.ndarray) -> np.ndarray:
        _check_dim(self.dim, x)
        if self._maps2 is not None:
            return self._project2(x)
        C, b = self._C, self._b
        if ((C @ x) <= b + 1e-12).all():
            return np.array(x, dtype=float)
        # Evaluate every active-set candidate at once and keep the closest
        # feasible one.
        cands = self._P @ x + self._q
        feasible = ((C @ cands.T) <= b[:, None] + 1e-9).all(axis=0)
        assert feasible.any(), "projection failed: no feasible active set (empty polytope?)"
        diffs = cands - x
        dists = np.einsum("ij,ij->i", diffs, diffs)
        dists[~feasible] = np.inf
        return cands[int(np.argmin(dists))]

    def _project2(self, x: np.ndarray) -> np.ndarray:
        """Scalar active-set enumeration; hot path for the d=2 instances."""
        x0 = float(x[0])
        x1 = float(x[1])
        rows = self._rows2
        if all(c0 * x0 + c1 * x1 <= bb + 1e-12 for c0, c1, bb in rows):
            return np.array(x, dtype=float)
        best0 = best1 = 0.0
        best_dist = np.inf
        for p00, p01, p10, p11, q0, q1 in self._maps2:
            y0 = p00 * x0 + p01 * x1 + q0
            y1 = p10 * x0 + p11 * x1 + q1
            if all(c0 * y0 + c1 * y1 <= bb + 1e-9 for c0, c1, bb in rows):
                dist = (y0 - x0) ** 2 + (y1 - x1) ** 2
                if dist < best_dist:
                    best_dist = dist
                    best0, best1 = y0, y1
        assert best_dist < np.inf, "projection failed: no feasible active set"
        return np.array((best0, best1))


@dataclass(frozen=True)
class DiscreteEmbeddingSet:
    """Finite catalog of N embedding rows inside an enclosing ball."""

    items: np.ndarray
    enclosing_radius: float

    def __post_init__(self) -> None:
        items = np.asarray(self.items, dtype=float)
        object.__setattr__(self, "items", items)
        if items.ndim != 2 or items.shape[0] < 1:
            raise ValueError("items must be a nonempty N x d matrix")
        if self.enclosing_radius <= 0:
            raise ValueError("enclosing_radius must be positive")
        norms = np.linalg.norm(items, axis=1)
        if np.any(norms > self.enclosing_radius + 1e-9):
            raise ValueError("every item must lie within the enclosing radius")

    @property
    def dim(self) -> int:
        return self.items.shape[1]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Nearest catalog row; ties broken by lowest index."""
        _check_dim(self.dim, x)
        diffs = self.items - x
        idx = int(np.argmin(np.einsum("ij,ij->i", diffs, diffs)))
        return np.array(self.items[idx], dtype=float)

    def project_index(self, x: np.ndarray) -> int:
        diffs = self.items - x
        return int(np.argmin(np.einsum("ij,ij->i", diffs, diffs)))

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        _check_dim(self.dim, x)
        return bool(np.any(np.max(np.abs(self.items - x), axis=1) <= tol))


ActionSpace = Ball | HalfspacePolytope | DiscreteEmbeddingSet


def sample_unit_sphere(rng: np.random.Generator, d: int) -> np.ndarray:
    """Uniform draw from the unit sphere via normalized Gaussians."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    while True:
        u = rng.standard_normal(d)
        nrm = math.sqrt(float(u @ u))
        if nrm > 1e-12:
            return u / nrm


def bulk_unit_sphere(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """n uniform unit-sphere draws as rows; bulk variant for hot loops."""
    if d < 1 or n < 0:
        raise ValueError("need d >= 1 and n >= 0")
    U = rng.standard_normal((n, d))
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    # A zero draw has probability zero; guard anyway.
    norms[norms < 1e-12] = 1.0
    return U / norms
