"""Uniform lattice discretization of a bounded domain and its exterior collar.

Nodes sit at integer multiples of the spacing h inside the truncated
universe {|x - center| <= R_trunc}; each node represents the cell of measure
h^n centered at it, and set membership is always decided by the cell center.
Interior nodes are those strictly inside the open domain; everything else in
the universe carries exterior data.  Geometric pair streams (unordered, at
least one endpoint interior, weight h^(2n)) feed the energy assembly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .errors import CapacityError

__all__ = [
    "Ball",
    "Box",
    "DiscreteDomain",
    "GridFunction",
    "build_domain",
    "interaction_pairs",
    "impose_exterior_data",
]

DEFAULT_NODE_LIMIT = 600_000


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def anchor(self) -> np.ndarray:
        return np.asarray(self.center, float)

    @property
    def circumradius(self) -> float:
        return self.radius

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return np.linalg.norm(pts - self.anchor, axis=1) < self.radius


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(
            l >= h for l, h in zip(self.lo, self.hi)
        ):
            raise ValueError("box needs lo < hi componentwise")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def anchor(self) -> np.ndarray:
        return (np.asarray(self.lo, float) + np.asarray(self.hi, float)) / 2.0

    @property
    def circumradius(self) -> float:
        return float(np.linalg.norm((np.asarray(self.hi) - np.asarray(self.lo)) / 2.0))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo, float)
        hi = np.asarray(self.hi, float)
        return np.all((pts > lo) & (pts < hi), axis=1)


class DiscreteDomain:
    """Lattice nodes, interior/exterior split, and cached pair structure."""

    def __init__(self, shape, h: float, R_trunc: float, coords, lattice, interior):
        self.shape = shape
        self.n = shape.dim
        self.h = float(h)
        self.R_trunc = float(R_trunc)
        self.coords = coords  # (N, n) node positions
        self.lattice = lattice  # (N, n) integer lattice indices
        self.interior_mask = interior
        self.interior_idx = np.flatnonzero(interior)
        self.exterior_idx = np.flatnonzero(~interior)
        self._pairs = None
        self._pair_dist = None
        self._neighbors = None

    @property
    def node_count(self) -> int:
        return self.coords.shape[0]

    @property
    def cell_measure(self) -> float:
        return self.h**self.n

    def axis_coords(self, pts=None) -> np.ndarray:
        """Coordinates as columns (convenience for point-function evaluation)."""
        pts = self.coords if pts is None else pts
        return [pts[:, k] for k in range(self.n)]

    def nodes_in_ball(self, x0, rho: float) -> np.ndarray:
        x0 = np.atleast_1d(np.asarray(x0, float))
        return np.flatnonzero(np.linalg.norm(self.coords - x0, axis=1) < rho)

    def neighbors(self):
        """Per-axis (plus, minus) node index arrays; -1 where missing."""
        if self._neighbors is None:
            key = {tuple(k): i for i, k in enumerate(self.lattice)}
            plus = np.full((self.n, self.node_count), -1, dtype=np.int64)
            minus = np.full((self.n, self.node_count), -1, dtype=np.int64)
            for i, k in enumerate(self.lattice):
                k = tuple(k)
                for ax in range(self.n):
                    up = list(k)
                    up[ax] += 1
                    dn = list(k)
                    dn[ax] -= 1
                    plus[ax, i] = key.get(tuple(up), -1)
                    minus[ax, i] = key.get(tuple(dn), -1)
            self._neighbors = (plus, minus)
        return self._neighbors


def build_domain(
    shape, h: float, R_trunc: float, node_limit: int = DEFAULT_NODE_LIMIT
) -> DiscreteDomain:
    """Lay a lattice of spacing h over {|x - center| <= R_trunc}.

    R_trunc must be at least 4x the domain's circumradius so interior
    stencils see a full exterior collar before truncation.
    """
    if h <= 0:
        raise ValueError("spacing h must be positive")
    if shape.dim not in (1, 2):
        raise ValueError("only n in {1, 2} is supported")
    if R_trunc < 4.0 * shape.circumradius:
        raise ValueError(
            f"R_trunc = {R_trunc} is below 4x the domain circumradius "
            f"({4.0 * shape.circumradius}); the exterior collar would be too thin"
        )
    center = shape.anchor
    K = int(np.floor(R_trunc / h + 1e-9))
    expect = (2 * K + 1) ** shape.dim
    if expect > 4 * node_limit:
        raise CapacityError(f"lattice candidate count {expect} exceeds budget")
    rng = np.arange(-K, K + 1, dtype=np.int64)
    if shape.dim == 1:
        lattice = rng.reshape(-1, 1)
    else:
        A, B = np.meshgrid(rng, rng, indexing="ij")
        lattice = np.column_stack([A.ravel(), B.ravel()])
    coords = lattice * h + center
    keep = np.linalg.norm(coords - center, axis=1) <= R_trunc + 1e-9 * max(h, 1.0)
    lattice = lattice[keep]
    coords = coords[keep]
    if coords.shape[0] > node_limit:
        raise CapacityError(
            f"{coords.shape[0]} nodes exceed the configured limit {node_limit}"
        )
    interior = shape.contains(coords)
    if not np.any(interior):
        raise ValueError("no interior nodes; refine h or enlarge the domain")
    return DiscreteDomain(shape, h, R_trunc, coords, lattice, interior)


def interaction_pairs(domain: DiscreteDomain):
    """Unordered node pairs covering the interaction region.

    Returns (ii, jj, w): index arrays plus the constant quadrature weight
    w = h^(2n).  Every pair with at least one interior endpoint appears
    exactly once; exterior-exterior pairs never appear; no self pairs.
    """
    if domain._pairs is None:
        I = domain.interior_idx
        E = domain.exterior_idx
        a, b = np.triu_indices(I.size, k=1)
        ii_int = I[a]
        jj_int = I[b]
        ii_mix = np.repeat(I, E.size)
        jj_mix = np.tile(E, I.size)
        ii = np.concatenate([ii_int, ii_mix])
        jj = np.concatenate([jj_int, jj_mix])
        domain._pairs = (ii, jj)
    ii, jj = domain._pairs
    return ii, jj, domain.cell_measure**2


def pair_distances(domain: DiscreteDomain) -> np.ndarray:
    if domain._pair_dist is None:
        ii, jj, _ = interaction_pairs(domain)
        diff = domain.coords[ii] - domain.coords[jj]
        domain._pair_dist = np.linalg.norm(diff, axis=1)
    return domain._pair_dist


@dataclass
class GridFunction:
    domain: DiscreteDomain
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.values.shape != (self.domain.node_count,):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{self.domain.node_count} nodes"
            )

    @property
    def interior_values(self) -> np.ndarray:
        return self.values[self.domain.interior_idx]

    @property
    def exterior_values(self) -> np.ndarray:
        return self.values[self.domain.exterior_idx]

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.domain, np.asarray(values, float))

    def transformed(self, fn: Callable) -> "GridFunction":
        return GridFunction(self.domain, fn(self.values))


def sample_point_function(domain: DiscreteDomain, fn, pts=None) -> np.ndarray:
    """Evaluate fn on nodes: fn(x) in 1D, fn(x, y) in 2D (vectorized)."""
    pts = domain.coords if pts is None else pts
    out = np.asarray(fn(*domain.axis_coords(pts)), float)
    return np.broadcast_to(out, (pts.shape[0],)).astype(float)


def impose_exterior_data(domain: DiscreteDomain, g) -> GridFunction:
    """Exterior nodes take g; interior nodes copy their nearest exterior value.

    g may be a scalar, a callable (per-axis vectorized), an array over all
    nodes, or an array over exterior nodes only.
    """
    values = np.empty(domain.node_count, float)
    ext = domain.exterior_idx
    if callable(g):
        gv = sample_point_function(domain, g, domain.coords[ext])
    elif np.ndim(g) == 0:
        gv = np.full(ext.size, float(g))
    else:
        g = np.asarray(g, float)
        if g.shape == (domain.node_count,):
            gv = g[ext]
        elif g.shape == (ext.size,):
            gv = g
        else:
            raise ValueError(
                f"exterior data shape {g.shape} matches neither all nodes "
                f"({domain.node_count}) nor exterior nodes ({ext.size})"
            )
    if not np.all(np.isfinite(gv)):
        raise ValueError("exterior data must be finite")
    values[ext] = gv
    tree = cKDTree(domain.coords[ext])
    _, nearest = tree.query(domain.coords[domain.interior_idx])
    values[domain.interior_idx] = gv[nearest]
    return GridFunction(domain, values)
