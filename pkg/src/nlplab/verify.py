"""Measured-constant reports for the regularity inequalities.

Each report evaluates both sides of one inequality on concrete grid data and
returns the implied constant.  The inequalities hold with *existential*
constants, so "pass" means the measured constant stays under a configurable
ceiling (default 1e4), never that it matches a theoretical value.  A report
whose left-hand side vanishes passes vacuously.

Conventions: discrete sup/inf/osc are nodal max/min over ball-member nodes
(strict membership |x - x0| < radius); dashed integrals are plain node
averages; plain integrals carry the cell measure h^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import gagliardo_seminorm_p, local_p_dirichlet_energy
from .errors import ResolutionError
from .grid import Ball, GridFunction
from .kernels import KernelSpec, Power, capital_phi, get_phi_table, phi_eval
from .tail import FarFieldModel, nonlocal_tail

__all__ = [
    "DEFAULT_CEILING",
    "InequalityReport",
    "p_star",
    "sobolev_poincare_report",
    "caccioppoli_report",
    "log_estimate_report",
    "log_oscillation_composite_report",
    "local_boundedness_report",
    "holder_exponent_fit",
    "harnack_report",
    "weak_harnack_report",
    "embedding_report",
]

DEFAULT_CEILING = 1e4


@dataclass
class InequalityReport:
    """Both sides of one inequality, evaluated.

    measured_constant carries the displayed constant's slot: lhs divided by
    the sum of rhs_parts, except where the display attaches the constant to a
    single term (local boundedness), which the report's docstring states.
    """

    name: str
    lhs: float
    rhs_parts: dict[str, float]
    measured_constant: float
    passed: bool
    ceiling: float = DEFAULT_CEILING
    metadata: dict = field(default_factory=dict)

    @property
    def rhs_total(self) -> float:
        return float(sum(self.rhs_parts.values()))


def p_star(n: int, p: float, s: float) -> float:
    """Critical exponent np/(n - sp); requires sp < n."""
    if s * p >= n:
        raise ValueError(f"p_star needs s*p < n, got s*p = {s * p:g}, n = {n}")
    return n * p / (n - s * p)


def _clean_parts(parts: dict[str, float]) -> dict[str, float]:
    out = {}
    for key, val in parts.items():
        v = float(val)
        if not math.isfinite(v):
            raise ValueError(f"rhs part {key!r} is not finite: {v}")
        if v < -1e-12:
            raise ValueError(f"rhs part {key!r} is negative: {v}")
        out[key] = max(v, 0.0)
    return out


def _assemble(
    name: str,
    lhs: float,
    parts: dict[str, float],
    ceiling: float,
    metadata: dict,
    constant: float | None = None,
) -> InequalityReport:
    parts = _clean_parts(parts)
    lhs = float(lhs)
    if not math.isfinite(lhs):
        raise ValueError(f"{name}: lhs is not finite")
    lhs = max(lhs, 0.0)
    total = sum(parts.values())
    if constant is None:
        if lhs == 0.0:
            constant = 0.0
        elif total == 0.0:
            constant = math.inf
        else:
            constant = lhs / total
    passed = lhs == 0.0 or (math.isfinite(constant) and constant <= ceiling)
    return InequalityReport(
        name=name,
        lhs=lhs,
        rhs_parts=parts,
        measured_constant=float(constant),
        passed=passed,
        ceiling=ceiling,
        metadata=metadata,
    )


def _ball_idx(f: GridFunction, center, radius: float) -> tuple[np.ndarray, np.ndarray]:
    dom = f.domain
    c = np.zeros(dom.n) if center is None else np.atleast_1d(np.asarray(center, float))
    idx = dom.nodes_in_ball(c, radius)
    if idx.size == 0:
        raise ResolutionError(
            f"no grid nodes inside the ball of radius {radius:g} (h = {dom.h:g})"
        )
    return idx, c


def _phi_of(spec: KernelSpec, t: float) -> float:
    return float(phi_eval(spec, t))


def _Phi_of(spec: KernelSpec, t: float) -> float:
    return float(capital_phi(get_phi_table(spec), t))


def _meta(spec: KernelSpec, f: GridFunction, **extra) -> dict:
    md = {
        "kernel": type(spec.variant).__name__,
        "p": spec.p,
        "s": spec.s,
        "s_tilde": spec.s_tilde,
        "h": f.domain.h,
        "n": f.domain.n,
    }
    md.update(extra)
    return md


def tail_factor(spec: KernelSpec, r: float, R: float) -> float:
    """(r^p/Phi(r) * Phi(R)/R^p)^(1/(p-1)), the tail's scale bridge."""
    val = (r**spec.p / _Phi_of(spec, r)) * (_Phi_of(spec, R) / R**spec.p)
    return val ** (1.0 / (spec.p - 1.0))


def sobolev_poincare_report(
    f: GridFunction,
    ball: Ball,
    spec: KernelSpec,
    exponent_choice: float | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> InequalityReport:
    """(mean |f - (f)|^q)^(p/q) vs the normalized kernel-weighted seminorm.

    q = np/(n-sp) with coefficient 1/(s^p (n-sp)^(p-1)) when sp < n; otherwise
    q = exponent_choice (> p, default 2p) with coefficient q^(2p-1)/(q-p)^p.
    """
    dom = f.domain
    idx, c = _ball_idx(f, tuple(ball.center), ball.radius)
    p, s, n = spec.p, spec.s, dom.n
    sp = s * p
    if sp < n:
        if exponent_choice is not None and exponent_choice != p_star(n, p, s):
            raise ValueError("exponent is determined by p* = np/(n-sp) when sp < n")
        q = p_star(n, p, s)
        coef = 1.0 / (s**p * (n - sp) ** (p - 1.0))
        branch = "subcritical"
    else:
        q = 2.0 * p if exponent_choice is None else float(exponent_choice)
        if q <= p:
            raise ValueError(f"supercritical branch needs exponent > p = {p:g}")
        coef = q ** (2.0 * p - 1.0) / (q - p) ** p
        branch = "supercritical"

    vals = f.values[idx]
    mean = float(np.mean(vals))
    lhs = float(np.mean(np.abs(vals - mean) ** q)) ** (p / q)
    measure = idx.size * dom.cell_measure
    gag = gagliardo_seminorm_p(f, spec, region=idx)
    r = ball.radius
    rhs = coef * (r**p / _Phi_of(spec, r)) * gag / measure
    return _assemble(
        "sobolev_poincare",
        lhs,
        {"seminorm_term": rhs},
        ceiling,
        _meta(spec, f, r=r, branch=branch, exponent=q, nodes=int(idx.size)),
    )


def caccioppoli_report(
    u: GridFunction,
    k: float,
    rho: float,
    r: float,
    spec: KernelSpec,
    center=None,
    sign: str = "+",
    far_field: FarFieldModel | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> InequalityReport:
    """Seminorm of the truncation w = (u-k)_+/- on B_rho vs
    Phi(r)/(r-rho)^p int w^p + (r/(r-rho))^(n+s~p) Phi(r)/r^p Tail(w;r)^(p-1) int w."""
    if rho >= r:
        raise ValueError("caccioppoli needs rho < r")
    if sign not in ("+", "-"):
        raise ValueError("sign is '+' or '-'")
    dom = u.domain
    diff = u.values - k
    w = u.with_values(np.maximum(diff if sign == "+" else -diff, 0.0))
    idx_rho, c = _ball_idx(u, center, rho)
    idx_r, _ = _ball_idx(u, center, r)
    p = spec.p
    lhs = gagliardo_seminorm_p(w, spec, region=idx_rho)
    int_wp = dom.cell_measure * float(np.sum(w.values[idx_r] ** p))
    int_w = dom.cell_measure * float(np.sum(w.values[idx_r]))
    phi_cap_r = _Phi_of(spec, r)
    term1 = phi_cap_r / (r - rho) ** p * int_wp
    tail = nonlocal_tail(w, c, r, spec, far_field=far_field).value
    term2 = (
        (r / (r - rho)) ** (dom.n + spec.s_tilde * p)
        * (phi_cap_r / r**p)
        * tail ** (p - 1.0)
        * int_w
    )
    return _assemble(
        "caccioppoli",
        lhs,
        {"zero_order_term": term1, "tail_term": term2},
        ceiling,
        _meta(spec, u, k=k, rho=rho, r=r, sign=sign, tail=tail),
    )


def log_estimate_report(
    u: GridFunction,
    d: float,
    r: float,
    R: float,
    spec: KernelSpec,
    center=None,
    far_field: FarFieldModel | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> InequalityReport:
    """Seminorm of log(u+d) on B_r vs r^(n-p) Phi(r) {1 + d^(1-p) bridge Tail^(p-1)}
    for u >= 0 on B_R, r <= R/2."""
    if d <= 0:
        raise ValueError("log estimate needs d > 0")
    if r > R / 2.0:
        raise ValueError("log estimate needs r <= R/2")
    dom = u.domain
    idx_r, c = _ball_idx(u, center, r)
    idx_R, _ = _ball_idx(u, center, R)
    if float(np.min(u.values[idx_R])) < 0.0:
        raise ValueError("log estimate needs u >= 0 on B_R")
    p = spec.p
    logv = u.with_values(np.log(np.maximum(u.values + d, 1e-300)))
    lhs = gagliardo_seminorm_p(logv, spec, region=idx_r)
    base = r ** (dom.n - p) * _Phi_of(spec, r)
    u_minus = u.with_values(np.maximum(-u.values, 0.0))
    tail = nonlocal_tail(u_minus, c, R, spec, far_field=far_field).value
    bridge = (r**p / _Phi_of(spec, r)) * (_Phi_of(spec, R) / R**p)
    tail_term = base * d ** (1.0 - p) * bridge * tail ** (p - 1.0)
    return _assemble(
        "log_estimate",
        lhs,
        {"base_term": base, "tail_term": tail_term},
        ceiling,
        _meta(spec, u, d=d, r=r, R=R, tail=tail),
    )


def log_oscillation_composite_report(
    u: GridFunction,
    a: float,
    b: float,
    d: float,
    r: float,
    R: float,
    spec: KernelSpec,
    center=None,
    far_field: FarFieldModel | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> InequalityReport:
    """Mean p-oscillation of v = min{(log(a+d) - log(u+d))_+, log b} on B_r vs
    1 + d^(1-p) bridge Tail(u_-;R)^(p-1) — the composed consequence of the
    log estimate and the mean-Poincare machinery."""
    if d <= 0 or a <= 0 or b <= 1:
        raise ValueError("composite log report needs a, d > 0 and b > 1")
    if r > R / 2.0:
        raise ValueError("composite log report needs r <= R/2")
    dom = u.domain
    idx_r, c = _ball_idx(u, center, r)
    idx_R, _ = _ball_idx(u, center, R)
    if float(np.min(u.values[idx_R])) < 0.0:
        raise ValueError("composite log report needs u >= 0 on B_R")
    p = spec.p
    vvals = np.minimum(
        np.maximum(math.log(a + d) - np.log(np.maximum(u.values + d, 1e-300)), 0.0),
        math.log(b),
    )
    vals = vvals[idx_r]
    lhs = float(np.mean(np.abs(vals - np.mean(vals)) ** p))
    u_minus = u.with_values(np.maximum(-u.values, 0.0))
    tail = nonlocal_tail(u_minus, c, R, spec, far_field=far_field).value
    bridge = (r**p / _Phi_of(spec, r)) * (_Phi_of(spec, R) / R**p)
    tail_term = d ** (1.0 - p) * bridge * tail ** (p - 1.0)
    return _assemble(
        "log_oscillation_composite",
        lhs,
        {"constant_term": 1.0, "tail_term": tail_term},
        ceiling,
        _meta(spec, u, a=a, b=b, d=d, r=r, R=R, tail=tail),
    )


def local_boundedness_report(
    u: GridFunction,
    r: float,
    epsilon: float,
    spec: KernelSpec,
    center=None,
    far_field: FarFieldModel | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> InequalityReport:
    """sup over B_(r/2) of u vs
    eps^(-n(p-1)/(sp^2)) (mean_(B_r) u_+^p)^(1/p) + eps Tail(u_+; r/2).

    The display's constant multiplies only the first term, so
    measured_constant = (lhs - tail term)_+ / first term.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    dom = u.domain
    idx_half, c = _ball_idx(u, center, r / 2.0)
    idx_r, _ = _ball_idx(u, center, r)
    p, s, n = spec.p, spec.s, dom.n
    sup_u = float(np.max(u.values[idx_half]))
    lhs = max(sup_u, 0.0)
    u_plus = u.with_values(np.maximum(u.values, 0.0))
    mean_up = float(np.mean(u_plus.values[idx_r] ** p)) ** (1.0 / p)
    t1 = epsilon ** (-n * (p - 1.0) / (s * p * p)) * mean_up
    tail = nonlocal_tail(u_plus, c, r / 2.0, spec, far_field=far_field).value
    t2 = epsilon * tail
    effective = max(lhs - t2, 0.0)
    if lhs == 0.0 or effective == 0.0:
        constant = 0.0
    elif t1 == 0.0:
        constant = math.inf
    else:
        constant = effective / t1
    return _assemble(
        "local_boundedness",
        lhs,
        {"mean_term": t1, "tail_term": t2},
        ceiling,
        _meta(spec, u, r=r, epsilon=epsilon, tail=tail),
        constant=constant,
    )


def holder_exponent_fit(
    u: GridFunction,
    x0,
    r: float,
    min_levels: int = 5,
    max_levels: int = 12,
) -> tuple[float, dict]:
    """Least-squares slope of log osc(B_rho) against log rho over dyadic radii
    rho_k = r 2^-k.

    The abscissa uses the realized nodal radius (largest member-node distance)
    rather than the nominal rho, which removes the O(h) snap bias on coarse
    levels.  Returns (alpha_hat, fit_report).
    """
    dom = u.domain
    c = np.zeros(dom.n) if x0 is None else np.atleast_1d(np.asarray(x0, float))
    radii, oscs, realized = [], [], []
    for k in range(max_levels):
        rho = r * 2.0**-k
        idx = dom.nodes_in_ball(c, rho)
        if idx.size < 2:
            break
        vals = u.values[idx]
        osc = float(np.max(vals) - np.min(vals))
        rr = float(np.max(np.linalg.norm(dom.coords[idx] - c, axis=1)))
        if rr == 0.0:
            break
        radii.append(rho)
        oscs.append(osc)
        realized.append(rr)
    if len(radii) < min_levels:
        raise ResolutionError(
            f"only {len(radii)} dyadic radii resolvable (need {min_levels}); "
            "refine the mesh or enlarge r"
        )
    oscs_arr = np.asarray(oscs)
    realized_arr = np.asarray(realized)
    positive = oscs_arr > 0.0
    report = {
        "radii": radii,
        "realized_radii": realized,
        "oscillations": oscs,
        "levels": len(radii),
        "degenerate": False,
    }
    if np.count_nonzero(positive) < 2:
        report["degenerate"] = True
        report["note"] = "oscillation vanishes at (almost) all radii: constant data"
        return math.inf, report
    lx = np.log(realized_arr[positive])
    ly = np.log(oscs_arr[positive])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    # osc <= c_hat * (realized/r)^alpha normalization
    c_hat = float(np.exp(np.max(resid) + intercept) * r**slope)
    report["residuals"] = resid.tolist()
    report["c_hat"] = c_hat
    report["intercept"] = float(intercept)
    return float(slope), report


def harnack_report(
    u: GridFunction,
    r: float,
    R: float,
    spec: KernelSpec,
    center=None,
    far_field: FarFieldModel | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> InequalityReport:
    """sup over B_r of u vs inf over B_r + bridge * Tail(u_-; R), u >= 0 on B_R,
    r <= R/2."""
    if r > R / 2.0:
        raise ValueError("harnack needs r <= R/2")
    dom = u.domain
    idx_r, c = _ball_idx(u, center, r)
    idx_R, _ = _ball_idx(u, center, R)
    if float(np.min(u.values[idx_R])) < 0.0:
        raise ValueError("harnack needs u >= 0 on B_R")
    vals = u.values[idx_r]
    lhs = float(np.max(vals))
    inf_u = float(np.min(vals))
    u_minus = u.with_values(np.maximum(-u.values, 0.0))
    tail = nonlocal_tail(u_minus, c, R, spec, far_field=far_field).value
    tail_term = tail_factor(spec, r, R) * tail
    return _assemble(
        "harnack",
        lhs,
        {"infimum_term": inf_u, "tail_term": tail_term},
        ceiling,
        _meta(spec, u, r=r, R=R, tail=tail),
    )


def weak_harnack_report(
    u: GridFunction,
    r: float,
    R: float,
    spec: KernelSpec,
    t: float | None = None,
    center=None,
    far_field: FarFieldModel | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> InequalityReport:
    """(mean over B_(r/2) of u^t)^(1/t) vs inf over B_r + bridge Tail(u_-;R),
    for t below t_bar = n(p-1)/(n-sp) (infinite once sp >= n)."""
    if r > R / 2.0:
        raise ValueError("weak harnack needs r <= R/2")
    dom = u.domain
    p, s, n = spec.p, spec.s, dom.n
    t_bar = math.inf if s * p >= n else n * (p - 1.0) / (n - s * p)
    if t is None:
        t = 1.0 if math.isinf(t_bar) else t_bar / 2.0
    if not 0.0 < t < t_bar:
        raise ValueError(f"weak harnack needs t in (0, {t_bar:g}), got {t:g}")
    idx_half, c = _ball_idx(u, center, r / 2.0)
    idx_r, _ = _ball_idx(u, center, r)
    idx_R, _ = _ball_idx(u, center, R)
    if float(np.min(u.values[idx_R])) < 0.0:
        raise ValueError("weak harnack needs u >= 0 on B_R")
    lhs = float(np.mean(u.values[idx_half] ** t)) ** (1.0 / t)
    inf_u = float(np.min(u.values[idx_r]))
    u_minus = u.with_values(np.maximum(-u.values, 0.0))
    tail = nonlocal_tail(u_minus, c, R, spec, far_field=far_field).value
    tail_term = tail_factor(spec, r, R) * tail
    return _assemble(
        "weak_harnack",
        lhs,
        {"infimum_term": inf_u, "tail_term": tail_term},
        ceiling,
        _meta(spec, u, r=r, R=R, t=t, t_bar=t_bar, tail=tail),
    )


def embedding_report(
    f: GridFunction,
    spec: KernelSpec,
    ball: Ball | None = None,
    ceiling: float = DEFAULT_CEILING,
) -> dict[str, InequalityReport]:
    """Three comparison reports for the seminorm scales:

    gradient_ball:         [f]^p_(phi,B_r)  vs  Phi(2r) int_(B_r) |Df|^p
    compact_support:       full interaction energy of f (zero outside the
                           interior) vs Phi(R) int |Df|^p + phi(R)/R^p int |f|^p
    fractional_comparison: [f]^p_(s,Omega)  vs  L R^((1-s)p)/phi(R) [f]^p_(phi,Omega)
    """
    from .energy import EnergyParams, NonlocalEnergy

    dom = f.domain
    if ball is None:
        if isinstance(dom.shape, Ball):
            ball = dom.shape
        else:
            raise ValueError("embedding_report needs an explicit ball for this shape")
    idx_ball, _ = _ball_idx(f, tuple(ball.center), ball.radius)
    p = spec.p
    r = ball.radius
    R = 2.0 * dom.shape.circumradius

    lhs_i = gagliardo_seminorm_p(f, spec, region=idx_ball)
    rhs_i = _Phi_of(spec, 2.0 * r) * local_p_dirichlet_energy(f, p=p, region=idx_ball)
    rep_i = _assemble(
        "embedding_gradient_ball",
        lhs_i,
        {"gradient_term": rhs_i},
        ceiling,
        _meta(spec, f, r=r),
    )

    interior = dom.interior_idx
    if float(np.max(np.abs(f.values[dom.exterior_idx]), initial=0.0)) > 0.0:
        raise ValueError("compact-support embedding needs f = 0 on exterior nodes")
    energy = NonlocalEnergy(dom, EnergyParams(spec))
    lhs_ii = energy.value(f.values)
    grad_term = _Phi_of(spec, R) * local_p_dirichlet_energy(f, p=p, region=interior)
    zero_term = (
        _phi_of(spec, R)
        / R**p
        * dom.cell_measure
        * float(np.sum(np.abs(f.values[interior]) ** p))
    )
    rep_ii = _assemble(
        "embedding_compact_support",
        lhs_ii,
        {"gradient_term": grad_term, "zero_order_term": zero_term},
        ceiling,
        _meta(spec, f, R=R),
    )

    frac_spec = KernelSpec(Power(s=spec.s), p=p, s=spec.s)
    lhs_iii = gagliardo_seminorm_p(f, frac_spec, region=interior)
    factor = spec.L * R ** ((1.0 - spec.s) * p) / _phi_of(spec, R)
    rhs_iii = factor * gagliardo_seminorm_p(f, spec, region=interior)
    rep_iii = _assemble(
        "embedding_fractional_comparison",
        lhs_iii,
        {"weighted_seminorm_term": rhs_iii},
        ceiling,
        _meta(spec, f, R=R, factor=factor),
    )

    return {
        "gradient_ball": rep_i,
        "compact_support": rep_ii,
        "fractional_comparison": rep_iii,
    }
