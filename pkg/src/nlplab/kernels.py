"""Kernel order functions for nonlocal p-Laplace energies.

An admissible interaction kernel is comparable to a radial model

    Lambda^-1  phi(|x-y|) / |x-y|^(n+p)  <=  K(x,y)  <=  Lambda  phi(|x-y|) / |x-y|^(n+p)

whose order function phi : [0, inf) -> [0, inf) satisfies

  * the Dini condition      int_0^1 phi(t) dt/t  <  inf,
  * phi(t) / t^((1-s)p)         almost decreasing  (constant L >= 1),
  * phi(t) / t^((1-s_tilde)p)   almost increasing  (same L),

for indices 0 < s < s_tilde.  The growth normalizer

    Phi(t) = int_0^t phi(tau) dtau / tau

replaces the usual fractional scale factor; for admissible phi it obeys
Phi(t) >= phi(t) / (L (1-s) p).

This module provides the stock order functions (the "zoo"), declared-index
validation by sampling, the Dini classifier, Phi evaluation, and the exterior
kernel mass

    int_{|y| > r} phi(|y|) / |y|^(n+p) dy  <=  L (omega_n / (s p)) phi(r) / r^p,

with omega_n the surface measure of the unit sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize

from .errors import DivergenceError

__all__ = [
    "Power",
    "Sum",
    "Min",
    "LogPerturbedPower",
    "LogBorderline",
    "PureLog",
    "Tabulated",
    "KernelSpec",
    "PhiTable",
    "DiniResult",
    "ScalingBounds",
    "sphere_area",
    "phi_eval",
    "get_phi_table",
    "capital_phi",
    "check_dini",
    "check_scaling_bounds",
    "exterior_kernel_mass",
]

_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-12, limit=300)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 for n=1, 2*pi for n=2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _vectorized(t):
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    scalar = np.ndim(t) == 0
    if np.any(arr < 0):
        raise ValueError("order functions are defined for t >= 0")
    return arr, scalar


# ---------------------------------------------------------------------------
# order-function variants


@dataclass(frozen=True)
class Power:
    """phi(t) = t^((1-s)p): the fractional model of differentiability order s."""

    s: float

    def _exponent(self, p: float) -> float:
        return (1.0 - self.s) * p

    def validate(self, p: float) -> None:
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"Power index must lie in (0,1), got s={self.s}")

    def phi(self, t: np.ndarray, p: float) -> np.ndarray:
        return t ** self._exponent(p)

    phi_extended = phi

    def primitive(self, t: float, p: float) -> float:
        a = self._exponent(p)
        return t**a / a

    def breakpoints_t(self, p: float) -> tuple[float, ...]:
        return ()

    def default_s(self, p: float) -> float:
        return self.s

    def default_s_tilde(self, p: float) -> float:
        return max(1.25, self.s + 0.25)

    def default_L(self, p: float) -> float:
        return 1.0

    def dini_known_divergent(self, p: float) -> bool:
        return False

    dini_upper = 1.0


@dataclass(frozen=True)
class Sum:
    """phi(t) = t^((1-s)p) + t^((1-s_upper)p), two superposed orders."""

    s: float
    s_upper: float

    def validate(self, p: float) -> None:
        if not 0.0 < self.s < self.s_upper < 1.0:
            # s_upper >= 1 makes the second term non-integrable at 0.
            raise ValueError("Sum requires 0 < s < s_upper < 1")

    def phi(self, t: np.ndarray, p: float) -> np.ndarray:
        return t ** ((1.0 - self.s) * p) + t ** ((1.0 - self.s_upper) * p)

    phi_extended = phi

    def breakpoints_t(self, p: float) -> tuple[float, ...]:
        return ()

    def default_s(self, p: float) -> float:
        return self.s

    def default_s_tilde(self, p: float) -> float:
        return max(1.25, self.s_upper)

    def default_L(self, p: float) -> float:
        return 1.0

    def dini_known_divergent(self, p: float) -> bool:
        return False

    dini_upper = 1.0


@dataclass(frozen=True)
class Min:
    """phi(t) = min(t^((1-s)p), t^((1-s_upper)p)).

    Picks the lower order near zero and the higher decay at infinity; the
    kink sits at t = 1.
    """

    s: float
    s_upper: float

    def validate(self, p: float) -> None:
        if not 0.0 < self.s < self.s_upper:
            raise ValueError("Min requires 0 < s < s_upper")

    def phi(self, t: np.ndarray, p: float) -> np.ndarray:
        a = (1.0 - self.s) * p
        b = (1.0 - self.s_upper) * p
        out = np.empty_like(t)
        low = t <= 1.0
        out[low] = t[low] ** a
        out[~low] = t[~low] ** b
        return out

    phi_extended = phi

    def breakpoints_t(self, p: float) -> tuple[float, ...]:
        return (1.0,)

    def default_s(self, p: float) -> float:
        return self.s

    def default_s_tilde(self, p: float) -> float:
        return max(1.25, self.s_upper)

    def default_L(self, p: float) -> float:
        return 1.0

    def dini_known_divergent(self, p: float) -> bool:
        return False

    dini_upper = 1.0


@dataclass(frozen=True)
class LogPerturbedPower:
    """phi(t) = t^((1-s)p) * log(1 + 1/t)^gamma, gamma > 0."""

    s: float
    gamma: float

    def validate(self, p: float) -> None:
        if not 0.0 < self.s < 1.0:
            raise ValueError("LogPerturbedPower requires s in (0,1)")
        if self.gamma <= 0.0:
            raise ValueError("LogPerturbedPower requires gamma > 0")

    def phi(self, t: np.ndarray, p: float) -> np.ndarray:
        a = (1.0 - self.s) * p
        out = np.zeros_like(t)
        pos = t > 0.0
        tp = t[pos]
        out[pos] = tp**a * np.log1p(1.0 / tp) ** self.gamma
        return out

    phi_extended = phi

    def breakpoints_t(self, p: float) -> tuple[float, ...]:
        return ()

    def default_s(self, p: float) -> float:
        return self.s

    def default_s_tilde(self, p: float) -> float:
        # phi(t)/t^((1-q)p) is nondecreasing exactly when (q - s) p >= gamma.
        return self.s + self.gamma / p

    def default_L(self, p: float) -> float:
        return 1.0

    def dini_known_divergent(self, p: float) -> bool:
        return False

    dini_upper = 1.0


@dataclass(frozen=True)
class LogBorderline:
    """Borderline order function with logarithmic behaviour at zero.

    On (0, 1/e] this is the literal  max( (-log t)^-gamma, t^((1-s)p) );
    past 1/e the raw maximum would blow up at t = 1, so the ratio
    phi(t)/t^((1-s)p) is frozen at its t = 1/e value, giving the
    scale-consistent continuation phi(t) = (e t)^((1-s)p) (continuous at 1/e,
    where both pieces equal 1).  Requires gamma > 1 for the Dini condition.

    The decreasing-ratio constant is exactly 1 only when gamma <= (1-s)p;
    otherwise the ratio dips at t* = exp(-gamma/((1-s)p)) and the honest
    constant is min( e^((1-s)p-gamma) (gamma/((1-s)p))^gamma, e^((1-s)p) ).
    """

    gamma: float
    s: float

    def validate(self, p: float) -> None:
        if not 0.0 < self.s < 1.0:
            raise ValueError("LogBorderline requires s in (0,1)")
        if self.gamma <= 1.0:
            raise ValueError("LogBorderline requires gamma > 1")

    def phi(self, t: np.ndarray, p: float) -> np.ndarray:
        a = (1.0 - self.s) * p
        out = np.empty_like(t)
        zero = t == 0.0
        low = (t <= math.exp(-1.0)) & ~zero
        high = t > math.exp(-1.0)
        out[zero] = 0.0
        tl = t[low]
        u = -np.log(tl)
        out[low] = np.maximum(u**-self.gamma, tl**a)
        out[high] = (math.e * t[high]) ** a
        return out

    phi_extended = phi

    def _crossings_u(self, p: float) -> tuple[float, ...]:
        # Roots of a*u = gamma*log(u) with a = (1-s)p; none when a >= gamma/e.
        a = (1.0 - self.s) * p
        if a * math.e >= self.gamma:
            return ()
        g = lambda u: a * u - self.gamma * math.log(u)
        u_mid = self.gamma / a
        u1 = optimize.brentq(g, 1.0, u_mid)
        hi = u_mid
        while g(hi) <= 0.0:
            hi *= 2.0
        u2 = optimize.brentq(g, u_mid, hi)
        return (u1, u2)

    def breakpoints_t(self, p: float) -> tuple[float, ...]:
        pts = [math.exp(-1.0)]
        pts.extend(math.exp(-u) for u in self._crossings_u(p))
        return tuple(sorted(pts))

    def default_s(self, p: float) -> float:
        return self.s

    def default_s_tilde(self, p: float) -> float:
        # the increasing-ratio check needs s_tilde >= 1 here
        return 1.25

    def default_L(self, p: float) -> float:
        a = (1.0 - self.s) * p
        if self.gamma <= a:
            return 1.0
        dip = math.exp(self.gamma) * (a / self.gamma) ** self.gamma  # ratio at t*
        return math.exp(a) / max(dip, 1.0)

    def dini_known_divergent(self, p: float) -> bool:
        return False

    dini_upper = 1.0


@dataclass(frozen=True)
class PureLog:
    """Dini-classifier probe phi(t) = (-log t)^-gamma on [0, 1).

    Not an admissible kernel (no power index majorizes it near 1); it exists
    to exercise the divergence detector: gamma = 1 is the divergent
    borderline, gamma > 1 integrates to 1/(gamma-1) over (0, 1/e].
    """

    gamma: float

    def validate(self, p: float) -> None:
        if self.gamma <= 0.0:
            raise ValueError("PureLog requires gamma > 0")

    def phi(self, t: np.ndarray, p: float) -> np.ndarray:
        if np.any(t >= 1.0):
            raise ValueError("PureLog probe is defined on [0, 1) only")
        out = np.zeros_like(t)
        pos = t > 0.0
        out[pos] = (-np.log(t[pos])) ** -self.gamma
        return out

    phi_extended = phi

    def breakpoints_t(self, p: float) -> tuple[float, ...]:
        return ()

    def default_s(self, p: float) -> float:
        return 0.5  # placeholder; the probe has no admissible index

    def default_s_tilde(self, p: float) -> float:
        return 1.25

    def default_L(self, p: float) -> float:
        return 1.0

    def dini_known_divergent(self, p: float) -> bool:
        return self.gamma <= 1.0

    dini_upper = math.exp(-1.0)


@dataclass(frozen=True)
class Tabulated:
    """Order function given by samples, interpolated piecewise-linearly in
    log-log coordinates (each segment is an exact power law).

    Evaluation outside [t[0], t[-1]] is a range error; internal quadratures
    (Phi, Dini shells, exterior mass) extend the first/last segment's power
    law, which keeps those integrals well-defined.
    """

    t: tuple[float, ...]
    values: tuple[float, ...]

    def validate(self, p: float) -> None:
        ts = np.asarray(self.t, float)
        vs = np.asarray(self.values, float)
        if ts.size < 2 or ts.size != vs.size:
            raise ValueError("Tabulated needs matching t/value samples, >= 2 points")
        if np.any(ts <= 0) or np.any(np.diff(ts) <= 0):
            raise ValueError("Tabulated abscissae must be positive and increasing")
        if np.any(vs <= 0):
            raise ValueError("Tabulated values must be positive")
        if np.any(np.diff(vs) < 0):
            raise ValueError("Tabulated values must be monotone nondecreasing")

    def _interp(self, t: np.ndarray, clip: bool) -> np.ndarray:
        ts = np.asarray(self.t, float)
        vs = np.asarray(self.values, float)
        lt, lts, lvs = np.log(t), np.log(ts), np.log(vs)
        if clip:
            out = np.interp(lt, lts, lvs)
            below = lt < lts[0]
            above = lt > lts[-1]
            if np.any(below):
                m0 = (lvs[1] - lvs[0]) / (lts[1] - lts[0])
                out[below] = lvs[0] + m0 * (lt[below] - lts[0])
            if np.any(above):
                m1 = (lvs[-1] - lvs[-2]) / (lts[-1] - lts[-2])
                out[above] = lvs[-1] + m1 * (lt[above] - lts[-1])
        else:
            out = np.interp(lt, lts, lvs)
        return np.exp(out)

    def phi(self, t: np.ndarray, p: float) -> np.ndarray:
        if np.any((t < self.t[0]) | (t > self.t[-1])):
            raise ValueError(
                f"Tabulated query outside sampled range [{self.t[0]}, {self.t[-1]}]"
            )
        return self._interp(t, clip=False)

    def phi_extended(self, t: np.ndarray, p: float) -> np.ndarray:
        out = np.zeros_like(t)
        pos = t > 0.0
        out[pos] = self._interp(t[pos], clip=True)
        return out

    def breakpoints_t(self, p: float) -> tuple[float, ...]:
        return tuple(self.t)

    def _first_slope(self) -> float:
        return math.log(self.values[1] / self.values[0]) / math.log(self.t[1] / self.t[0])

    def default_s(self, p: float) -> float:
        raise ValueError("Tabulated kernels need an explicit declared s")

    def default_s_tilde(self, p: float) -> float:
        raise ValueError("Tabulated kernels need an explicit declared s_tilde")

    def default_L(self, p: float) -> float:
        return 1.0

    def dini_known_divergent(self, p: float) -> bool:
        return self._first_slope() <= 0.0

    dini_upper = 1.0


_VARIANTS = (Power, Sum, Min, LogPerturbedPower, LogBorderline, PureLog, Tabulated)


# ---------------------------------------------------------------------------
# kernel specification


@dataclass(frozen=True)
class KernelSpec:
    """An order function together with its declared admissibility data.

    s / s_tilde are the declared almost-monotonicity indices, L the shared
    constant and Lambda the allowed pointwise comparability factor for
    kernel multipliers.  Omitted fields default to honest values for the
    variant's own structure.
    """

    variant: object
    p: float
    s: float | None = None
    s_tilde: float | None = None
    L: float | None = None
    Lambda: float = 1.0

    def __post_init__(self):
        if not isinstance(self.variant, _VARIANTS):
            raise ValueError(f"unknown kernel variant {type(self.variant).__name__}")
        if not self.p > 1.0:
            raise ValueError(f"growth exponent must satisfy p > 1, got {self.p}")
        self.variant.validate(self.p)
        if self.s is None:
            object.__setattr__(self, "s", self.variant.default_s(self.p))
        if self.s_tilde is None:
            default = self.variant.default_s_tilde(self.p)
            object.__setattr__(self, "s_tilde", max(default, self.s + 1e-9))
        if self.L is None:
            object.__setattr__(self, "L", self.variant.default_L(self.p))
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"declared s must lie in (0,1), got {self.s}")
        if not self.s_tilde > self.s:
            raise ValueError("declared s_tilde must exceed s")
        if self.L < 1.0 or self.Lambda < 1.0:
            raise ValueError("L and Lambda are >= 1 by definition")


def phi_eval(spec: KernelSpec, t):
    """Evaluate phi at t (scalar or array), with phi(0) = 0."""
    arr, scalar = _vectorized(t)
    out = spec.variant.phi(arr, spec.p)
    return float(out[0]) if scalar else out


def _phi_internal(spec: KernelSpec, t: float) -> float:
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    return float(spec.variant.phi_extended(arr, spec.p)[0])


# ---------------------------------------------------------------------------
# Phi = int_0^t phi(tau) dtau/tau


class PhiTable:
    """Memoized Phi evaluations for one kernel spec.

    Power uses the closed form t^((1-s)p) / ((1-s)p); everything else goes
    through adaptive quadrature after the substitution tau = e^-u, which
    turns the integral into int_{-log t}^inf phi(e^-u) du and tames the
    origin.  Known kinks of the integrand are passed as breakpoints.
    """

    def __init__(self, spec: KernelSpec):
        self.spec = spec
        self.analytic = isinstance(spec.variant, Power)
        self._memo: dict[float, float] = {}
        if spec.variant.dini_known_divergent(spec.p):
            raise DivergenceError("order function fails the Dini condition")

    def value(self, t: float) -> float:
        t = float(t)
        if t < 0:
            raise ValueError("Phi is defined for t >= 0")
        if t == 0.0:
            return 0.0
        if isinstance(self.spec.variant, PureLog) and t >= 1.0:
            raise ValueError("PureLog probe restricts Phi to t < 1")
        got = self._memo.get(t)
        if got is None:
            if self.analytic:
                got = self.spec.variant.primitive(t, self.spec.p)
            else:
                got = _phi_log_quad(self.spec, -math.log(t))
            self._memo[t] = got
        return got

    def grid(self, lo: float, hi: float, count: int = 33):
        ts = np.geomspace(lo, hi, count)
        return ts, np.array([self.value(t) for t in ts])


@lru_cache(maxsize=128)
def get_phi_table(spec: KernelSpec) -> PhiTable:
    return PhiTable(spec)


def capital_phi(table: PhiTable, t) -> float:
    """Phi(t) from a table; accepts scalars or arrays."""
    if np.ndim(t) == 0:
        return table.value(t)
    return np.array([table.value(ti) for ti in np.asarray(t, float)])


def _u_integrand(spec: KernelSpec):
    return lambda u: _phi_internal(spec, math.exp(-u))


def _u_breakpoints(spec: KernelSpec) -> list[float]:
    return sorted(-math.log(tb) for tb in spec.variant.breakpoints_t(spec.p) if tb > 0)


# Beyond u ~ 745, e^-u underflows to zero and the t-space round trip loses the
# integrand entirely, even though log-branch order functions still carry
# polynomial u^-gamma mass out there.  Truncate quadrature at this horizon and
# append the tail analytically from a local power-law fit in u (exact for the
# pure log branch, vanishing for exponentially decaying integrands).
_U_HORIZON = 700.0


def _beyond_horizon_mass(f, u0: float) -> float:
    f0 = f(u0)
    if f0 <= 0.0:
        return 0.0
    u1 = 0.93 * u0
    f1 = f(u1)
    if f1 <= f0:  # not decaying like a power; exponential-decay fit noise
        return 0.0
    q = math.log(f1 / f0) / math.log(u0 / u1)
    if q <= 1.0 + 1e-9:
        raise DivergenceError(
            "order function mass beyond the underflow horizon does not decay"
        )
    return f0 * u0 / (q - 1.0)


def _phi_log_quad(spec: KernelSpec, u_lo: float, u_hi: float = math.inf) -> float:
    """integral of phi(e^-u) du over [u_lo, u_hi], kink-aware."""
    f = _u_integrand(spec)
    bps = [b for b in _u_breakpoints(spec) if u_lo < b < u_hi]
    if math.isinf(u_hi):
        if u_lo >= _U_HORIZON:
            return _beyond_horizon_mass(f, u_lo)
        split = min(max([u_lo] + bps) + 1.0, _U_HORIZON)
        head, _ = integrate.quad(f, u_lo, split, points=bps or None, **_QUAD_OPTS)
        tail, _ = integrate.quad(f, split, _U_HORIZON, **_QUAD_OPTS)
        return head + tail + _beyond_horizon_mass(f, _U_HORIZON)
    val, _ = integrate.quad(f, u_lo, u_hi, points=bps or None, **_QUAD_OPTS)
    return val


# ---------------------------------------------------------------------------
# Dini classifier


class DiniResult(NamedTuple):
    converges: bool
    value: float


def check_dini(
    spec: KernelSpec,
    tolerance: float = 1e-8,
    upper: float | None = None,
    shells: int = 50,
) -> DiniResult:
    """Classify int_0^upper phi(t) dt/t by dyadic-shell partial sums.

    Shell k covers t in (upper 2^-(k+1), upper 2^-k]; the sequence of shell
    integrals must form a Cauchy tail within `shells` shells.  Geometric
    decay is accepted directly once the projected tail drops below
    `tolerance` relative to the partial sum; otherwise the shell decay
    exponent q (shell_k ~ k^-q) is fitted in log-log and the tail is
    summable iff q > 1 with margin.  The returned value of a convergent
    integral is recomputed by adaptive quadrature (the truncated shell sum
    alone is far less accurate); divergent integrals report value = inf.
    """
    if upper is None:
        upper = spec.variant.dini_upper
    if upper <= 0:
        raise ValueError("upper must be positive")
    u0 = -math.log(upper)
    ln2 = math.log(2.0)
    s_k = np.array(
        [_phi_log_quad(spec, u0 + k * ln2, u0 + (k + 1) * ln2) for k in range(shells)]
    )
    total = float(np.sum(s_k))
    if total == 0.0:
        return DiniResult(True, 0.0)

    converges: bool
    # fast path: projected geometric tail already negligible
    if s_k[-1] * shells <= tolerance * total:
        converges = True
    else:
        ks = np.arange(shells // 2, shells, dtype=float)
        seg = s_k[shells // 2 :]
        if np.any(seg <= 0.0):
            converges = True  # underflow: decay is super-polynomial
        else:
            slope = np.polyfit(np.log(ks + 1.0), np.log(seg), 1)[0]
            converges = -slope >= 1.2
    if not converges:
        return DiniResult(False, math.inf)
    return DiniResult(True, _phi_log_quad(spec, u0))


# ---------------------------------------------------------------------------
# sampled scaling-bound verification


class ScalingBounds(NamedTuple):
    L_dec: float
    L_inc: float


def default_scaling_grid() -> np.ndarray:
    return np.geomspace(1e-4, 1e2, 97)


def check_scaling_bounds(spec: KernelSpec, t_grid=None) -> ScalingBounds:
    """Smallest empirical constants for the declared index pair on a grid.

    L_dec is the least L with phi(t2)/t2^((1-s)p) <= L phi(t1)/t1^((1-s)p)
    over all grid pairs t1 <= t2, L_inc the analogue for the increasing
    ratio at s_tilde; both are clipped below at 1 (the constants are >= 1
    by definition, and strictly decreasing ratios would otherwise report
    their sup < 1).
    """
    if t_grid is None:
        t_grid = default_scaling_grid()
    t_grid = np.asarray(t_grid, float)
    if t_grid.size < 2 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be increasing with at least two points")
    phi = phi_eval(spec, t_grid)
    r_dec = phi / t_grid ** ((1.0 - spec.s) * spec.p)
    r_inc = phi / t_grid ** ((1.0 - spec.s_tilde) * spec.p)
    # worst later/earlier ratio via running extrema
    prefix_min = np.minimum.accumulate(r_dec)
    L_dec = float(np.max(r_dec / prefix_min))
    suffix_min = np.minimum.accumulate(r_inc[::-1])[::-1]
    L_inc = float(np.max(r_inc / suffix_min))
    return ScalingBounds(max(1.0, L_dec), max(1.0, L_inc))


# ---------------------------------------------------------------------------
# exterior kernel mass


def _exterior_weighted_mass(
    spec: KernelSpec,
    r: float,
    n: int = 1,
    extra_power: float = 0.0,
    rel_tol: float = 1e-7,
    max_segments: int = 2048,
) -> float:
    """omega_n * int_r^inf rho^extra_power phi(rho) rho^(-p-1) drho.

    Radial quadrature in log coordinates over doubling segments, closed by
    the almost-decreasing majorant tail L phi(R) R^(q-p) / (s p - q),
    q = extra_power, once that majorant is below rel_tol of the total.
    Diverges (for the declared decay) as soon as q >= s p.
    """
    if r <= 0:
        raise ValueError("exterior mass needs r > 0")
    if isinstance(spec.variant, PureLog):
        raise ValueError("PureLog probe has no exterior mass (domain is t < 1)")
    q = extra_power
    sp = spec.s * spec.p
    if q >= sp:
        raise DivergenceError(
            f"exterior integral with weight rho^{q:g} diverges: "
            f"needs weight power < s*p = {sp:g}"
        )
    omega = sphere_area(n)
    f = lambda v: _phi_internal(spec, math.exp(v)) * math.exp((q - spec.p) * v)
    bps_v = sorted(math.log(tb) for tb in spec.variant.breakpoints_t(spec.p) if tb > 0)
    ln2 = math.log(2.0)
    v_lo = math.log(r)
    acc = 0.0
    for k in range(max_segments):
        v_hi = v_lo + ln2
        pts = [b for b in bps_v if v_lo < b < v_hi]
        seg, _ = integrate.quad(f, v_lo, v_hi, points=pts or None, **_QUAD_OPTS)
        acc += seg
        R = math.exp(v_hi)
        majorant = spec.L * _phi_internal(spec, R) * R ** (q - spec.p) / (sp - q)
        if majorant <= rel_tol * (acc + majorant):
            return omega * (acc + majorant)
        v_lo = v_hi
    raise DivergenceError(
        "exterior kernel mass tail did not fall below tolerance "
        f"within {max_segments} doublings (s*p - q = {sp - q:g} too small?)"
    )


def exterior_kernel_mass(
    spec: KernelSpec,
    r: float,
    n: int = 1,
    rel_tol: float = 1e-7,
    max_segments: int = 2048,
) -> float:
    """omega_n * int_r^inf phi(rho) rho^(-p-1) drho.

    The result always satisfies the exterior bound
    mass <= L (omega_n/(s p)) phi(r) / r^p for honestly declared (s, L).
    """
    return _exterior_weighted_mass(
        spec, r, n, extra_power=0.0, rel_tol=rel_tol, max_segments=max_segments
    )
