"""Discrete nonlocal energies, their gradients, and local comparison energies.

The central object is the pair-sum form of

    F(w) = iint_{C_Omega} |w(x) - w(y)|^p K(x, y) dx dy,

over the interaction region C_Omega (all pairs except exterior-exterior),
with K(x,y) = m(x,y) phi(|x-y|) / |x-y|^(n+p) and m a bounded multiplier in
[Lambda^-1, Lambda].  The double integral is ordered, i.e. twice the
unordered pair sum, so that

    grad_i F = 2 p sum_j sigma_eps(w_i - w_j) K_ij h^(2n)

holds literally for interior i, with the regularized odd power
sigma_eps(t) = (t^2 + eps^2)^((p-2)/2) t (eps matters only for p < 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import DiscreteDomain, GridFunction, interaction_pairs, pair_distances
from .kernels import KernelSpec, phi_eval

__all__ = [
    "EnergyParams",
    "NonlocalEnergy",
    "gagliardo_seminorm_p",
    "nonlocal_energy_F",
    "energy_gradient",
    "local_p_dirichlet_energy",
]


@dataclass
class EnergyParams:
    spec: KernelSpec
    epsilon_reg: float | None = None  # auto: 0 for p >= 2, else 1e-8 x value scale
    multiplier: Callable | None = None  # m(x_pts, y_pts) -> per-pair factor

    def __post_init__(self):
        if self.epsilon_reg is not None:
            if self.epsilon_reg < 0:
                raise ValueError("epsilon_reg must be >= 0")
            if self.epsilon_reg == 0.0 and self.spec.p < 2.0:
                raise ValueError("epsilon_reg = 0 needs p >= 2 (sigma blows up at 0)")

    def epsilon_for(self, diffs: np.ndarray) -> float:
        if self.epsilon_reg is not None:
            return self.epsilon_reg
        if self.spec.p >= 2.0:
            return 0.0
        scale = float(np.max(np.abs(diffs))) if diffs.size else 0.0
        return 1e-8 * (scale + 1.0)


def _sigma(diffs: np.ndarray, p: float, eps: float) -> np.ndarray:
    if p == 2.0 and eps == 0.0:
        return diffs
    return (diffs * diffs + eps * eps) ** ((p - 2.0) / 2.0) * diffs


class NonlocalEnergy:
    """Pair-assembled energy on a fixed domain/kernel (assemble once, evaluate often)."""

    def __init__(self, domain: DiscreteDomain, params: EnergyParams):
        self.domain = domain
        self.params = params
        self.ii, self.jj, w = interaction_pairs(domain)
        d = pair_distances(domain)
        spec = params.spec
        kvals = phi_eval(spec, d) / d ** (domain.n + spec.p)
        if params.multiplier is not None:
            m = np.asarray(
                params.multiplier(domain.coords[self.ii], domain.coords[self.jj]),
                float,
            )
            lam = spec.Lambda
            if np.any(m < 1.0 / lam - 1e-12) or np.any(m > lam + 1e-12):
                raise ValueError("multiplier leaves the [1/Lambda, Lambda] band")
            kvals = kvals * m
        self.coef = kvals * w
        if not np.all(np.isfinite(self.coef)):
            raise ValueError("kernel coefficients are not finite")

    def _diffs(self, values: np.ndarray) -> np.ndarray:
        return values[self.ii] - values[self.jj]

    def value(self, values: np.ndarray) -> float:
        dv = self._diffs(values)
        p = self.params.spec.p
        e = 2.0 * float(np.dot(self.coef, np.abs(dv) ** p))
        return e

    def gradient(self, values: np.ndarray) -> np.ndarray:
        p = self.params.spec.p
        dv = self._diffs(values)
        eps = self.params.epsilon_for(dv)
        flux = 2.0 * p * self.coef * _sigma(dv, p, eps)
        n = self.domain.node_count
        g = np.bincount(self.ii, weights=flux, minlength=n) - np.bincount(
            self.jj, weights=flux, minlength=n
        )
        g[self.domain.exterior_idx] = 0.0
        return g

    def quadratic_matvec(self, v: np.ndarray) -> np.ndarray:
        """Action of the p=2 Hessian (4x weighted graph Laplacian), interior block."""
        dv = self._diffs(v)
        flux = 4.0 * self.coef * dv
        n = self.domain.node_count
        out = np.bincount(self.ii, weights=flux, minlength=n) - np.bincount(
            self.jj, weights=flux, minlength=n
        )
        out[self.domain.exterior_idx] = 0.0
        return out


def nonlocal_energy_F(w: GridFunction, params: EnergyParams, domain=None) -> float:
    domain = w.domain if domain is None else domain
    return NonlocalEnergy(domain, params).value(w.values)


def energy_gradient(w: GridFunction, params: EnergyParams, domain=None) -> np.ndarray:
    domain = w.domain if domain is None else domain
    return NonlocalEnergy(domain, params).gradient(w.values)


def gagliardo_seminorm_p(
    f: GridFunction,
    spec: KernelSpec,
    region=None,
    chunk: int = 512,
) -> float:
    """p-th power of the kernel-weighted Gagliardo seminorm over a node set U:

        sum over unordered pairs in U x U of
            2 |f_i - f_j|^p  phi(d_ij) d_ij^(-n-p)  h^(2n).

    (Equivalently, |f(x)-f(y)|^p / d^p times the kernel measure phi(d)/d^n.)
    """
    dom = f.domain
    idx = np.arange(dom.node_count) if region is None else np.asarray(region)
    X = dom.coords[idx]
    v = f.values[idx]
    w = dom.cell_measure**2
    p = spec.p
    total = 0.0
    m = idx.size
    for a in range(0, m, chunk):
        sl = slice(a, min(a + chunk, m))
        D = np.linalg.norm(X[sl, None, :] - X[None, :, :], axis=2)
        dv = np.abs(v[sl, None] - v[None, :])
        cols = np.arange(m)[None, :]
        rows = np.arange(a, sl.stop)[:, None]
        upper = cols > rows  # each unordered pair once
        Du = D[upper]
        total += 2.0 * w * float(np.sum(dv[upper] ** p * phi_eval(spec, Du) / Du ** (dom.n + p)))
    return total


def local_p_dirichlet_energy(
    f: GridFunction, p: float = 2.0, domain=None, region=None
) -> float:
    """sum over region nodes of h^n |grad_h f|^p, centered differences
    (one-sided where a lattice neighbor is missing at the truncation edge)."""
    dom = f.domain if domain is None else domain
    v = f.values
    plus, minus = dom.neighbors()
    grad_sq = np.zeros(dom.node_count)
    for ax in range(dom.n):
        ip = plus[ax]
        im = minus[ax]
        has_p = ip >= 0
        has_m = im >= 0
        d = np.zeros(dom.node_count)
        both = has_p & has_m
        d[both] = (v[ip[both]] - v[im[both]]) / (2.0 * dom.h)
        only_p = has_p & ~has_m
        d[only_p] = (v[ip[only_p]] - v[only_p.nonzero()[0]]) / dom.h
        only_m = has_m & ~has_p
        d[only_m] = (v[only_m.nonzero()[0]] - v[im[only_m]]) / dom.h
        grad_sq += d * d
    idx = np.arange(dom.node_count) if region is None else np.asarray(region)
    return float(dom.cell_measure * np.sum(grad_sq[idx] ** (p / 2.0)))
