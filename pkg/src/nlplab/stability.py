"""The s -> 1 limit: normalized nonlocal energies against local p-Dirichlet
energy, and nonlocal solutions against the local p-Laplace solution.

For a kernel family s -> phi_s the normalized energy

    E_s(f) = (1/Phi_s(r)) iint |f(x)-f(y)|^p / |x-y|^p  phi_s(|x-y|)/|x-y|^n

converges, as s -> 1, to  (int_{S^(n-1)} |sigma.e|^p dsigma) int |Df|^p
for f in W^(1,p) — in one dimension the sphere factor is 2.  The |x-y| >= r
far range dies like (1-s)/s, uniformly in f through ||f||_p.

Quadrature matters here: as s -> 1 the weight phi_s(z)/z piles its mass
below ANY fixed offset (the fraction of Phi_s(r) carried by z < delta is
1 - (delta/r)^((1-s)p) -> 1), so evaluating the kernel at nodal pair
distances loses the limit no matter how the mesh refines with s.  The curve
is therefore computed in difference-quotient form: the smooth factor
|f(m+z/2)-f(m-z/2)|^p / z^p is frozen per offset segment at even lattice
spans (a centered difference at segment zero), while the singular factor
phi(z)/z is integrated exactly over each segment via the Phi table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import CapacityError, ResolutionError
from .grid import Ball, build_domain, sample_point_function
from .kernels import (
    KernelSpec,
    Power,
    capital_phi,
    exterior_kernel_mass,
    get_phi_table,
    phi_eval,
    sphere_area,
)
from .solver import SolveOptions, solve_dirichlet
from .energy import EnergyParams
from .tail import FarFieldModel, nonlocal_tail

__all__ = [
    "BBMPoint",
    "LocalLimitRow",
    "bbm_limit_constant",
    "bbm_energy_curve",
    "extrapolate_limit",
    "bbm_reference_limit",
    "local_limit_solution_study",
]


@dataclass(frozen=True)
class BBMPoint:
    s: float
    normalized_energy: float
    near_part: float  # |x-y| < r contribution, normalized
    far_part: float  # |x-y| >= r contribution, normalized
    far_bound: float  # (1-s)/s * 2^p L^2 omega_n r^-p ||f||_p^p, normalized units
    h: float
    nodes: int


@dataclass(frozen=True)
class LocalLimitRow:
    s: float
    lp_distance: float
    tail_g_plus: float


def bbm_limit_constant(n: int, p: float, numeric: bool = False) -> float:
    """int_{S^(n-1)} |sigma . e|^p dsigma.

    Closed form 2 pi^((n-1)/2) Gamma((p+1)/2) / Gamma((n+p)/2); the numeric
    path integrates directly (n <= 2) as an independent cross-check.
    """
    if numeric:
        if n == 1:
            return 2.0
        if n == 2:
            val, _ = integrate.quad(
                lambda th: abs(math.cos(th)) ** p, 0.0, 2.0 * math.pi
            )
            return val
        raise ValueError("numeric sphere integral implemented for n <= 2")
    return (
        2.0
        * math.pi ** ((n - 1) / 2.0)
        * math.gamma((p + 1.0) / 2.0)
        / math.gamma((n + p) / 2.0)
    )


def _quotient_energy_1d(
    f: Callable,
    center: float,
    radius: float,
    spec: KernelSpec,
    r: float,
    h: float,
    z_cap: float,
    node_limit: int | None = None,
) -> tuple[float, float, float]:
    """(near, far, ||f||_p^p) of iint |f(x)-f(y)|^p phi(z)/z^(1+p), z = x-y,
    split at |z| < r, for f supported in (center-radius, center+radius).

    Offsets run over even lattice spans z_k = 2kh so both endpoints
    m +/- kh lie on the midpoint lattice; segment k covers (z_k-h, z_k+h]
    (segment zero covers (0, h] with a centered difference quotient).  The
    singular near weight int phi(z) dz/z is taken exactly per segment from
    the Phi table; the far region is regular and uses midpoint weights plus
    the analytic remainder beyond z_cap.
    """
    if 3.0 * h >= r:
        raise ResolutionError(f"offset mesh h = {h} cannot resolve the range z < {r}")
    p = spec.p
    K = int(math.ceil(z_cap / (2.0 * h)))
    M = int(math.ceil((radius + K * h) / h)) + 1
    n_m = 2 * M + 1
    if node_limit is not None and n_m > node_limit:
        raise CapacityError(f"{n_m} offset-lattice nodes exceed limit {node_limit}")
    x_ext = center + h * np.arange(-(M + K), M + K + 1)
    F = np.asarray(f(x_ext), float)
    mid = slice(K, K + n_m)  # the m-lattice inside the extended samples

    table = get_phi_table(spec)
    lp = h * float(np.sum(np.abs(F[mid]) ** p))

    # segment 0: z in (0, h], quotient from the centered difference over 2h
    q0 = (F[K + 1 : K + 1 + n_m] - F[K - 1 : K - 1 + n_m]) / (2.0 * h)
    near = float(np.sum(np.abs(q0) ** p)) * capital_phi(table, min(h, r))
    far = 0.0
    for k in range(1, K + 1):
        dv = np.abs(F[K + k : K + k + n_m] - F[K - k : K - k + n_m])
        if not np.any(dv):
            continue
        z = 2.0 * k * h
        a, b = z - h, z + h
        if a < r:
            w = capital_phi(table, min(b, r)) - capital_phi(table, a)
            near += float(np.sum((dv / z) ** p)) * w
        if b > r:
            lo = max(a, r)
            zm = 0.5 * (lo + b)
            w = (b - lo) * float(phi_eval(spec, zm)) / zm ** (1.0 + p)
            far += float(np.sum(dv**p)) * w
    near *= 2.0 * h  # m-measure and the +/- z symmetry
    far *= 2.0 * h
    # pairs with |z| beyond z_cap see at most one endpoint in the support
    far += 2.0 * lp * exterior_kernel_mass(spec, max(z_cap, r), n=1)
    return near, far, lp


def bbm_energy_curve(
    f: Callable,
    shape: Ball,
    r: float,
    s_list: Sequence[float],
    p: float = 2.0,
    base_h: float = 0.05,
    R_trunc: float | None = None,
    family: Callable[[float], KernelSpec] | None = None,
    node_limit: int | None = None,
) -> list[BBMPoint]:
    """Normalized nonlocal energies of f along s_list (one-dimensional).

    The offset lattice refines with s (h <= (1-s) diam/4); f must be
    compactly supported inside the shape and is evaluated analytically on
    each lattice.
    """
    if shape.dim != 1:
        raise ValueError("the energy curve is one-dimensional")
    if family is None:
        family = lambda s: KernelSpec(Power(s=s), p=p, s=s)
    diam = 2.0 * shape.circumradius
    if R_trunc is None:
        R_trunc = 4.0 * shape.circumradius
    center, radius = float(shape.center[0]), shape.radius
    points = []
    for s in s_list:
        spec = family(s)
        if spec.p != p:
            raise ValueError("kernel family changes p along the curve")
        h = min(base_h, (1.0 - s) * diam / 4.0)
        near, far, lp = _quotient_energy_1d(
            f, center, radius, spec, r, h, z_cap=2.0 * R_trunc, node_limit=node_limit
        )
        norm = float(capital_phi(get_phi_table(spec), r))
        # bound on the normalized far part: phi/Phi <= L(1-s)p and the
        # exterior-mass estimate combine to (1-s)/s 2^p L^2 omega_n r^-p ||f||_p^p
        bound = (1.0 - s) / s * 2.0**p * spec.L**2 * sphere_area(1) * r**-p * lp
        points.append(
            BBMPoint(
                s=s,
                normalized_energy=(near + far) / norm,
                near_part=near / norm,
                far_part=far / norm,
                far_bound=bound,
                h=h,
                nodes=int(2.0 * (radius + R_trunc) / h) + 1,
            )
        )
    return points


def extrapolate_limit(points: Sequence[BBMPoint], s_min: float = 0.9) -> tuple[float, float]:
    """Fit normalized_energy = a + b (1-s) on the s >= s_min subset; return (a, b)."""
    xs = np.array([1.0 - q.s for q in points if q.s >= s_min])
    ys = np.array([q.normalized_energy for q in points if q.s >= s_min])
    if xs.size < 2:
        raise ValueError(f"need at least two curve points with s >= {s_min}")
    b, a = np.polyfit(xs, ys, 1)
    return float(a), float(b)


def bbm_reference_limit(
    f: Callable,
    shape: Ball,
    r: float,
    p: float = 2.0,
    s_pair: tuple[float, float] = (0.99, 0.995),
    R_trunc: float | None = None,
    node_limit: int | None = None,
) -> float:
    """Independent fine-s limit: evaluate the Power-family normalized energy at
    two s near 1 and Richardson-extrapolate linearly in (1-s)."""
    s0, s1 = sorted(s_pair)
    pts = bbm_energy_curve(
        f, shape, r, [s0, s1], p=p, R_trunc=R_trunc, node_limit=node_limit
    )
    e0, e1 = pts[0].normalized_energy, pts[1].normalized_energy
    x0, x1 = 1.0 - s0, 1.0 - s1
    # linear model e = e* + b x through both points, evaluated at x = 0
    return float(e1 + (e0 - e1) * (0.0 - x1) / (x0 - x1))


def local_limit_solution_study(
    g: Callable,
    s_list: Sequence[float],
    shape: Ball,
    h: float = 0.05,
    R_trunc: float | None = None,
    p: float = 2.0,
    tail_r: float | None = None,
    far_field: FarFieldModel | None = None,
    solve_options: SolveOptions | None = None,
) -> list[LocalLimitRow]:
    """1d only: per-s nonlocal solve against the local p-Laplace solution,
    which is the affine interpolant of the boundary trace (|u'|^(p-2) u'
    constant in one dimension), plus the Tail(g_+; r) decay alongside."""
    if shape.dim != 1:
        raise ValueError("local-limit study is one-dimensional")
    if R_trunc is None:
        R_trunc = 4.0 * shape.circumradius
    domain = build_domain(shape, h, R_trunc)
    c = shape.center[0]
    a, b = c - shape.radius, c + shape.radius
    ga, gb = float(g(np.asarray(a))), float(g(np.asarray(b)))
    x_int = domain.coords[domain.interior_idx, 0]
    u_local = ga + (gb - ga) * (x_int - a) / (b - a)
    if tail_r is None:
        tail_r = shape.radius
    rows = []
    for s in s_list:
        spec = KernelSpec(Power(s=s), p=p, s=s)
        res = solve_dirichlet(domain, g, EnergyParams(spec), options=solve_options)
        diff = res.u.values[domain.interior_idx] - u_local
        dist = (domain.cell_measure * float(np.sum(np.abs(diff) ** p))) ** (1.0 / p)
        g_grid = res.u.with_values(
            np.maximum(sample_point_function(domain, g), 0.0)
        )
        tail = nonlocal_tail(
            g_grid, shape.center, tail_r, spec, far_field=far_field
        ).value
        rows.append(LocalLimitRow(s=s, lp_distance=dist, tail_g_plus=tail))
    return rows
