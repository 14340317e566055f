"""Nonlocal tails: weighted exterior averages that carry far-away data.

    Tail(f; x0, r) = ( r^p / Phi(r) *
        int_{R^n \\ B_r(x0)} |f(x)|^(p-1) phi(|x-x0|) |x-x0|^(-n-p) dx
    ) ^ (1/(p-1)),

with Phi the kernel order primitive.  On a truncated grid the integral is
split into a clipped cell sum over stored nodes and an analytic radial
remainder driven by a declared far-field growth model
|f(y)| <= A (1 + |y|)^beta, integrable iff beta (p-1) < s p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError
from .grid import DiscreteDomain, GridFunction
from .kernels import (
    KernelSpec,
    _exterior_weighted_mass,
    capital_phi,
    get_phi_table,
    phi_eval,
    sphere_area,
)

__all__ = [
    "FarFieldModel",
    "TailQuery",
    "TailResult",
    "tail_scale",
    "clipped_exterior_cells",
    "far_field_integral",
    "truncation_remainder_bound",
    "nonlocal_tail",
    "compute_tail",
    "analytic_tail_of_one",
]


@dataclass(frozen=True)
class FarFieldModel:
    """|f(y)| <= amplitude * (1 + |y|)^exponent beyond the stored grid
    (|y| the absolute position, not the distance to the tail center).

    kind "zero" drops the remainder; "constant" pins exponent to 0 and means
    |f| = amplitude exactly out there.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "power"):
            raise ValueError(f"unknown far-field kind {self.kind!r}")
        if self.kind == "zero" and self.amplitude != 0.0:
            raise ValueError("zero far field cannot carry an amplitude")
        if self.kind == "constant" and self.exponent != 0.0:
            raise ValueError("constant far field has exponent 0")
        if self.amplitude < 0.0:
            raise ValueError("far-field amplitude is a magnitude (>= 0)")

    def relative_power_majorant(self, center_norm: float, cutoff: float):
        """(coefficient, power) with |f(y)| <= coefficient * |y-x0|^power for
        |y - x0| >= cutoff; exact for kind constant/zero, a majorant else."""
        if self.kind == "zero":
            return 0.0, 0.0
        if self.kind == "constant" or self.exponent == 0.0:
            return self.amplitude, 0.0
        b = self.exponent
        if b > 0:
            # 1 + |y| <= (1 + (1 + center_norm)/cutoff) * d
            coef = self.amplitude * (1.0 + (1.0 + center_norm) / cutoff) ** b
        else:
            # 1 + |y| >= d - center_norm >= (1 - center_norm/cutoff) * d
            shrink = 1.0 - center_norm / cutoff
            if shrink <= 0.0:
                raise ValueError(
                    "decaying far-field model needs cutoff > |center|"
                )
            coef = self.amplitude * shrink**b
        return coef, b


@dataclass(frozen=True)
class TailQuery:
    f: GridFunction
    x0: tuple | float
    r: float
    far_field: FarFieldModel | None = None


@dataclass(frozen=True)
class TailResult:
    value: float
    scale: float  # r^p / Phi(r)
    grid_integral: float  # clipped cell sum over stored exterior-of-ball nodes
    far_integral: float  # analytic remainder beyond the truncation radius
    remainder_bound: float  # tail-units bound on mass beyond the cutoff
    cutoff_radius: float  # where the grid part hands over to the model


def tail_scale(spec: KernelSpec, r: float) -> float:
    if r <= 0:
        raise ValueError("tail radius must be positive")
    table = get_phi_table(spec)
    return r**spec.p / float(capital_phi(table, r))


def clipped_exterior_cells(
    domain: DiscreteDomain,
    center: np.ndarray,
    r: float,
    subsamples: int = 4,
) -> tuple[np.ndarray, np.ndarray]:
    """(node indices, cell volumes) of the part of each grid cell outside
    B_r(center).

    1d clips cell intervals against the ball exactly; 2d subsamples
    boundary-straddling cells on a subsamples x subsamples stencil.
    """
    c = np.asarray(center, float)
    x = domain.coords
    h = domain.h
    d = np.linalg.norm(x - c, axis=1)
    if domain.n == 1:
        lo = x[:, 0] - h / 2.0
        hi = x[:, 0] + h / 2.0
        # overlap of [lo, hi] with (c - r, c + r), removed from the cell
        inside = np.clip(
            np.minimum(hi, c[0] + r) - np.maximum(lo, c[0] - r), 0.0, None
        )
        vol = (hi - lo) - inside
    else:
        half_diag = h * np.sqrt(domain.n) / 2.0
        vol = np.where(d >= r + half_diag, float(domain.cell_measure), 0.0)
        strad = (d > r - half_diag) & (d < r + half_diag)
        if np.any(strad):
            offs = (np.arange(subsamples) + 0.5) / subsamples - 0.5
            ox, oy = np.meshgrid(offs, offs, indexing="ij")
            sub = np.stack([ox.ravel(), oy.ravel()], axis=1) * h  # (S, 2)
            pts = x[strad][:, None, :] + sub[None, :, :]
            dd = np.linalg.norm(pts - c, axis=2)
            frac = np.mean(dd >= r, axis=1)
            vol[strad] = domain.cell_measure * frac
    keep = vol > 0.0
    return np.nonzero(keep)[0], vol[keep]


def far_field_integral(
    spec: KernelSpec,
    coefficient: float,
    power: float,
    cutoff: float,
    n: int,
) -> float:
    """omega_n C^(p-1) int_cutoff^inf rho^(power (p-1)) phi(rho) rho^(-p-1) drho
    for the relative-distance model |f| = C rho^power beyond the cutoff."""
    if coefficient == 0.0:
        return 0.0
    q = power * (spec.p - 1.0)
    if q >= spec.s * spec.p:
        raise DivergenceError(
            f"far-field growth exponent {power:g} makes the tail diverge: "
            f"needs exponent * (p-1) < s*p = {spec.s * spec.p:g}"
        )
    return coefficient ** (spec.p - 1.0) * _exterior_weighted_mass(
        spec, cutoff, n, extra_power=q
    )


def truncation_remainder_bound(
    spec: KernelSpec,
    far_bound: float,
    cutoff: float,
    n: int,
    growth_power: float = 0.0,
) -> float:
    """Upper bound for the raw mass dropped beyond the cutoff when
    |f(y)| <= far_bound * (|y-x0|/cutoff)^growth_power there, via the
    almost-decreasing power majorant of phi:

        omega_n far_bound^(p-1) L phi(cutoff) cutoff^-p / (s p - q),

    q = growth_power (p-1) < s p."""
    omega = sphere_area(n)
    sp = spec.s * spec.p
    q = growth_power * (spec.p - 1.0)
    if q >= sp:
        raise DivergenceError(
            f"far-field growth {growth_power:g} leaves no integrable remainder "
            f"(needs growth * (p-1) < s*p = {sp:g})"
        )
    return (
        omega
        * far_bound ** (spec.p - 1.0)
        * spec.L
        * float(phi_eval(spec, cutoff))
        * cutoff**-spec.p
        / (sp - q)
    )


def nonlocal_tail(
    f: GridFunction,
    center,
    r: float,
    spec: KernelSpec,
    far_field: FarFieldModel | None = None,
    subsamples: int = 4,
) -> TailResult:
    dom = f.domain
    c = np.zeros(dom.n) if center is None else np.atleast_1d(np.asarray(center, float))
    if c.shape != (dom.n,):
        raise ValueError(f"center must have {dom.n} coordinates")
    if r <= 0:
        raise ValueError("tail radius must be positive")
    c_norm = float(np.linalg.norm(c))
    # the stored grid surrounds the center out to the inscribed radius only;
    # hand over to the radial model there to stay gap-free for off-center x0
    cutoff = dom.R_trunc + dom.h / 2.0 - c_norm
    if cutoff <= r and far_field is None:
        raise ValueError(
            "tail ball reaches the truncation radius and no far-field model is given"
        )
    cutoff = max(cutoff, r)
    idx, vol = clipped_exterior_cells(dom, c, r, subsamples=subsamples)
    d = np.linalg.norm(dom.coords[idx] - c, axis=1)
    inside = d < cutoff
    idx, vol, d = idx[inside], vol[inside], d[inside]
    p = spec.p
    grid_part = 0.0
    if idx.size:
        dens = np.abs(f.values[idx]) ** (p - 1.0) * phi_eval(spec, d) / d ** (dom.n + p)
        grid_part = float(np.dot(dens, vol))
    far_part = 0.0
    bound = 0.0
    scale = tail_scale(spec, r)
    if far_field is not None and far_field.kind != "zero":
        coef, power = far_field.relative_power_majorant(c_norm, cutoff)
        far_part = far_field_integral(spec, coef, power, cutoff, dom.n)
        bound_mass = truncation_remainder_bound(
            spec, coef * cutoff**power, cutoff, dom.n, growth_power=power
        )
        bound = (scale * bound_mass) ** (1.0 / (p - 1.0))
    total = scale * (grid_part + far_part)
    return TailResult(
        value=total ** (1.0 / (p - 1.0)),
        scale=scale,
        grid_integral=grid_part,
        far_integral=far_part,
        remainder_bound=bound,
        cutoff_radius=cutoff,
    )


def compute_tail(q: TailQuery, spec: KernelSpec) -> float:
    return nonlocal_tail(q.f, q.x0, q.r, spec, far_field=q.far_field).value


def analytic_tail_of_one(spec: KernelSpec, r: float, n: int = 1) -> float:
    """Tail of f = 1 by pure radial quadrature (no grid):

        ( r^p/Phi(r) * omega_n int_r^inf phi rho^(-p-1) drho )^(1/(p-1)).
    """
    mass = _exterior_weighted_mass(spec, r, n, extra_power=0.0)
    return (tail_scale(spec, r) * mass) ** (1.0 / (spec.p - 1.0))
