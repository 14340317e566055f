"""Acceptance suite: eleven numbered criteria, one printed verdict line each.

Each test measures its criterion with the stated tolerance and prints a
single ``[criterion NN] PASS/FAIL`` line directly to the terminal (bypassing
capture, so the verdicts are visible in plain ``pytest -v`` output) before
asserting.  Runtime budgets are part of the criteria and are enforced.
"""

import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from nlplab import (
    Ball,
    EnergyParams,
    FarFieldModel,
    GridFunction,
    KernelSpec,
    LogBorderline,
    LogPerturbedPower,
    Min,
    NonlocalEnergy,
    Power,
    PureLog,
    SolveOptions,
    Sum,
    build_domain,
    capital_phi,
    check_dini,
    exterior_kernel_mass,
    get_phi_table,
    impose_exterior_data,
    nonlocal_tail,
    phi_eval,
    solve_dirichlet,
    sphere_area,
)
from nlplab import verify
from nlplab.stability import bbm_energy_curve, bbm_reference_limit, extrapolate_limit


def criterion(capsys, num: int, passed: bool, detail: str) -> None:
    line = f"[criterion {num:2d}] {'PASS' if passed else 'FAIL'}  {detail}"
    with capsys.disabled():  # the verdict line belongs in plain pytest output
        print(f"\n{line}", flush=True)
    assert passed, line


INTERVAL = Ball(center=(0.0,), radius=1.0)


def test_criterion_01_phi_power_primitive(capsys):
    # capital_phi vs t^((1-s)p) / ((1-s)p), 1e-10 relative, t in [1e-3, 1e3]
    t0 = time.monotonic()
    t_grid = np.geomspace(1e-3, 1e3, 121)
    worst = 0.0
    for s in (0.3, 0.5, 0.75, 0.9):
        for p in (1.5, 2.0, 3.0):
            table = get_phi_table(KernelSpec(Power(s=s), p=p))
            got = np.array([capital_phi(table, t) for t in t_grid])
            exact = t_grid ** ((1.0 - s) * p) / ((1.0 - s) * p)
            worst = max(worst, float(np.max(np.abs(got / exact - 1.0))))
    elapsed = time.monotonic() - t0
    criterion(
        capsys,
        1,
        worst <= 1e-10 and elapsed < 1.0,
        f"power primitive matches to 1e-10 relative (worst {worst:.2e}) in {elapsed:.2f}s (< 1s)",
    )


def test_criterion_02_dini_classifier(capsys):
    t0 = time.monotonic()
    conv = check_dini(KernelSpec(PureLog(gamma=2.0), p=2.0))
    div = check_dini(KernelSpec(PureLog(gamma=1.0), p=2.0))
    elapsed = time.monotonic() - t0
    value_ok = conv.converges and abs(conv.value - 1.0) <= 1e-6
    criterion(
        capsys,
        2,
        value_ok and not div.converges and elapsed < 1.0,
        f"log probe gamma=2 converges to {conv.value:.9f} (1 within 1e-6), "
        f"gamma=1 divergent, in {elapsed:.2f}s (< 1s)",
    )


def test_criterion_03_exterior_kernel_mass(capsys):
    spec = KernelSpec(Power(s=0.5), p=2.0)
    mass = exterior_kernel_mass(spec, 1.0, n=1)
    mass_ok = abs(mass - 2.0) / 2.0 <= 0.005

    zoo = [
        KernelSpec(Power(s=0.5), p=2.0),
        KernelSpec(Power(s=0.25), p=3.0),
        KernelSpec(Power(s=0.9), p=1.5),
        KernelSpec(Sum(s=0.3, s_upper=0.8), p=2.0),
        KernelSpec(Min(s=0.3, s_upper=0.7), p=2.0),
        KernelSpec(LogPerturbedPower(s=0.5, gamma=1.5), p=2.0),
        KernelSpec(LogPerturbedPower(s=0.7, gamma=2.5), p=1.5),
        KernelSpec(LogBorderline(gamma=2.0, s=0.5), p=2.0),
        KernelSpec(LogBorderline(gamma=3.0, s=0.4), p=3.0),
    ]
    worst_L = 0.0
    for zk in zoo:
        for r in (0.5, 1.0, 2.0):
            m = exterior_kernel_mass(zk, r, n=1)
            unit = sphere_area(1) / (zk.s * zk.p) * float(phi_eval(zk, r)) / r**zk.p
            worst_L = max(worst_L, m / unit)
    # the log probe carries no exterior mass at all (defined below t = 1)
    with pytest.raises(ValueError):
        exterior_kernel_mass(KernelSpec(PureLog(gamma=2.0), p=2.0), 1.0, n=1)
    criterion(
        capsys,
        3,
        mass_ok and worst_L <= 1.01,
        f"Power(0.5) mass {mass:.6f} (2 within 0.5%); zoo bound constant "
        f"measured L <= 1.01 (worst {worst_L:.6f})",
    )


def test_criterion_04_gradient_vs_central_differences(capsys):
    t0 = time.monotonic()
    dom = build_domain(INTERVAL, h=0.1, R_trunc=4.0)
    assert dom.node_count <= 100
    rng = np.random.default_rng(404)
    tols = {2.0: 1e-6, 1.5: 1e-4, 3.0: 1e-4}
    worst = {p: 0.0 for p in tols}
    for trial in range(20):
        values = rng.normal(size=dom.node_count)
        for p, tol in tols.items():
            energy = NonlocalEnergy(dom, EnergyParams(KernelSpec(Power(s=0.5), p=p)))
            g = energy.gradient(values)
            delta = 1e-6 if p == 2.0 else 3e-6
            for i in dom.interior_idx:
                vp = values.copy()
                vp[i] += delta
                vm = values.copy()
                vm[i] -= delta
                fd = (energy.value(vp) - energy.value(vm)) / (2.0 * delta)
                worst[p] = max(worst[p], abs(g[i] - fd) / (1.0 + abs(g[i])))
    elapsed = time.monotonic() - t0
    ok = all(worst[p] <= tol for p, tol in tols.items()) and elapsed < 10.0
    criterion(
        capsys,
        4,
        ok,
        "gradient vs central differences on 20 random functions: "
        f"p=2 worst {worst[2.0]:.2e} (<= 1e-6), "
        f"p=1.5/3 worst {max(worst[1.5], worst[3.0]):.2e} (<= 1e-4), "
        f"in {elapsed:.1f}s (< 10s)",
    )


def test_criterion_05_solver_correctness(capsys):
    t0 = time.monotonic()
    params = EnergyParams(KernelSpec(Power(s=0.5), p=2.0))

    dom = build_domain(INTERVAL, h=0.05, R_trunc=4.0)
    res = solve_dirichlet(dom, 1.5, params)
    const_err = float(np.max(np.abs(res.u.values - 1.5)))

    g_aff = lambda x: 2.0 + 0.5 * np.asarray(x, float)
    C = 1e-4  # one constant for both meshes
    ratios = []
    for h in (0.05, 0.025):
        dom_h = build_domain(INTERVAL, h=h, R_trunc=4.0)
        res_h = solve_dirichlet(
            dom_h, g_aff, params, options=SolveOptions(tol_g=1e-7, max_iter=8000)
        )
        assert res_h.converged
        ratios.append(res_h.weak_residual / h)
    residual_ok = all(r <= C for r in ratios)

    opts = SolveOptions(tol_g=1e-7, max_iter=8000)
    a = solve_dirichlet(dom, g_aff, params, options=opts)
    b = solve_dirichlet(
        dom, g_aff, params, options=opts, w0=np.zeros(dom.interior_idx.size), seed=7
    )
    gap = float(np.max(np.abs(a.u.values - b.u.values)))
    elapsed = time.monotonic() - t0
    ok = const_err == 0.0 and residual_ok and gap <= 10.0 * 1e-7 and elapsed < 60.0
    criterion(
        capsys,
        5,
        ok,
        f"constant exact (err {const_err:.1e}); affine weak residual <= C*h with "
        f"C={C:g} at h=0.05/0.025 (measured C {max(ratios):.2e}); two-start gap "
        f"{gap:.2e} <= 10*tol_g, in {elapsed:.1f}s (< 60s)",
    )


def test_criterion_06_tail_oracle(capsys):
    dom = build_domain(INTERVAL, h=0.05, R_trunc=8.0)
    f = impose_exterior_data(dom, 1.0)
    far = FarFieldModel("constant", 1.0)

    worst = 0.0
    for s in (0.25, 0.5, 0.75):
        got = nonlocal_tail(f, 0.0, 1.0, KernelSpec(Power(s=s), p=2.0), far_field=far).value
        exact = 2.0 * (1.0 - s) / s
        worst = max(worst, abs(got - exact) / exact)

    sweep = [
        nonlocal_tail(f, 0.0, 1.0, KernelSpec(Power(s=s), p=2.0), far_field=far).value
        for s in (0.25, 0.5, 0.75, 0.9, 0.95, 0.99)
    ]
    monotone = all(b < a for a, b in zip(sweep, sweep[1:]))
    criterion(
        capsys,
        6,
        worst <= 0.01 and monotone and sweep[-1] < 0.05,
        f"Tail(1; 1) matches 2(1-s)/s within 1% (worst {worst:.2%}); "
        f"decreases monotonically to {sweep[-1]:.3f} as s -> 1",
    )


def test_criterion_07_sobolev_poincare_sweep(capsys):
    t0 = time.monotonic()
    dom = build_domain(INTERVAL, h=0.02, R_trunc=4.0)
    x = dom.coords[:, 0]
    rng = np.random.default_rng(20260815)
    s_sweep = [0.5 + 0.05 * k for k in range(10)]
    ceiling = 1.0  # one shared ceiling across all functions and all s

    all_pass = True
    worst_ratio = 0.0
    for trial in range(10):
        a = rng.normal(size=3)
        b = rng.uniform(0.0, 2.0 * np.pi, size=3)
        u = GridFunction(dom, sum(a[k] * np.sin((k + 1) * np.pi * x + b[k]) for k in range(3)))
        constants = []
        for s in s_sweep:
            rep = verify.sobolev_poincare_report(
                u, INTERVAL, KernelSpec(Power(s=s), p=2.0), ceiling=ceiling
            )
            all_pass = all_pass and rep.passed
            constants.append(rep.measured_constant)
        worst_ratio = max(worst_ratio, max(constants) / min(constants))
    elapsed = time.monotonic() - t0
    criterion(
        capsys,
        7,
        all_pass and worst_ratio < 20.0 and elapsed < 300.0,
        f"10 random smooth functions x s in [0.5, 0.95]: all pass at shared "
        f"ceiling {ceiling:g}; constants spread max/min {worst_ratio:.1f}x (< 20x), "
        f"in {elapsed:.1f}s (< 5min)",
    )


def test_criterion_08_harnack_sanity(capsys):
    spec = KernelSpec(Power(s=0.5), p=2.0)
    dom = build_domain(INTERVAL, h=0.1, R_trunc=4.0)
    rep = verify.harnack_report(GridFunction(dom, np.ones(dom.node_count)), 0.5, 1.0, spec)
    exact_one = rep.measured_constant == 1.0

    g = lambda x: 1.0 + 0.5 * np.exp(-((np.asarray(x, float) - 1.5) ** 2))
    cs = []
    for h in (0.05, 0.025):
        dom_h = build_domain(INTERVAL, h=h, R_trunc=4.0)
        res = solve_dirichlet(
            dom_h, g, EnergyParams(spec), options=SolveOptions(tol_g=1e-7, max_iter=8000)
        )
        assert res.converged
        cs.append(verify.harnack_report(res.u, 0.5, 1.0, spec).measured_constant)
    drift = abs(cs[1] - cs[0]) / cs[0]
    finite = all(np.isfinite(c) for c in cs)
    criterion(
        capsys,
        8,
        exact_one and finite and drift <= 0.10,
        f"u=1 gives c=1 exactly; solved profile c {cs[0]:.4f} -> {cs[1]:.4f}, "
        f"drift {drift:.1%} (<= 10%) under mesh halving",
    )


def test_criterion_09_holder_fit(capsys):
    spec = KernelSpec(Power(s=0.5), p=2.0)
    opts = SolveOptions(tol_g=1e-7, max_iter=8000)

    g_aff = lambda x: 2.0 + 0.5 * np.asarray(x, float)
    affine_alphas = []
    for h in (0.05, 0.025):
        dom = build_domain(INTERVAL, h=h, R_trunc=4.0)
        res = solve_dirichlet(dom, g_aff, EnergyParams(spec), options=opts)
        alpha, _ = verify.holder_exponent_fit(res.u, (0.0,), 1.0)
        affine_alphas.append(alpha)
    affine_ok = all(0.95 <= a <= 1.05 for a in affine_alphas)

    # rough exterior data (a jump across the domain): the oscillation decay
    # at the boundary is limited by the s-order barrier, so the fit centered
    # on the boundary point must land in (0, 1] and be mesh-stable
    g_rough = lambda x: (np.asarray(x, float) > 0.0).astype(float)
    rough_alphas = []
    for h in (0.05, 0.025):
        dom = build_domain(INTERVAL, h=h, R_trunc=4.0)
        res = solve_dirichlet(dom, g_rough, EnergyParams(spec), options=opts)
        alpha, _ = verify.holder_exponent_fit(res.u, (1.0,), 1.0)
        rough_alphas.append(alpha)
    drift = abs(rough_alphas[1] - rough_alphas[0]) / rough_alphas[0]
    rough_ok = all(0.0 < a <= 1.0 for a in rough_alphas) and drift <= 0.10
    criterion(
        capsys,
        9,
        affine_ok and rough_ok,
        f"affine alpha {affine_alphas[0]:.3f}/{affine_alphas[1]:.3f} in [0.95, 1.05]; "
        f"rough-data alpha {rough_alphas[0]:.3f} -> {rough_alphas[1]:.3f} in (0, 1], "
        f"drift {drift:.1%} (<= 10%)",
    )


def test_criterion_10_bbm_limit(capsys):
    bump = lambda x: np.clip(1.0 - np.asarray(x, float) ** 2, 0.0, None) ** 2
    s_list = [0.9, 0.925, 0.95, 0.975]
    a_r, _ = extrapolate_limit(bbm_energy_curve(bump, INTERVAL, r=1.0, s_list=s_list))
    a_2r, _ = extrapolate_limit(bbm_energy_curve(bump, INTERVAL, r=2.0, s_list=s_list))
    oracle = bbm_reference_limit(bump, INTERVAL, r=1.0, p=2.0)
    err_oracle = abs(a_r - oracle) / oracle
    err_radii = abs(a_2r - a_r) / a_r
    criterion(
        capsys,
        10,
        err_oracle <= 0.02 and err_radii <= 0.02,
        f"extrapolated limit {a_r:.4f} vs fine-s oracle {oracle:.4f} "
        f"({err_oracle:.2%} <= 2%); r vs 2r spread {err_radii:.2%} (<= 2%)",
    )


def test_criterion_11_determinism(capsys, tmp_path):
    config = {
        "version": 1,
        "kernel": {"variant": "power", "p": 2.0, "s": 0.5},
        "domain": {
            "shape": {"kind": "ball", "center": [0.0], "radius": 1.0},
            "h": 0.05,
            "R_trunc": 4.0,
        },
        "data": {"g": "1 + 0.5*max(x, 0)"},
        "tasks": [
            {"kind": "check-kernel"},
            {"kind": "solve", "tol_g": 1e-6},
            {"kind": "tail", "r": 1.0},
            {"kind": "verify", "reports": ["caccioppoli", "holder_fit"], "r": 0.5, "R": 1.0},
            {"kind": "stability", "study": "bbm", "s_list": [0.9, 0.95]},
        ],
        "output": {"basename": "acceptance", "formats": ["json", "csv", "svg"]},
    }
    cfg_path = tmp_path / "acceptance.json"
    cfg_path.write_text(json.dumps(config, indent=1))

    outs = []
    for run, hashseed in (("a", "0"), ("b", "31337")):
        out = tmp_path / run
        proc = subprocess.run(
            [
                sys.executable, "-m", "nlplab.cli", "run",
                "--config", str(cfg_path), "--out", str(out), "--seed", "0",
            ],
            capture_output=True,
            text=True,
            env={"PYTHONHASHSEED": hashseed, "PATH": "/usr/bin:/bin"},
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out)

    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    diffs = [n for n in names if (outs[0] / n).read_bytes() != (outs[1] / n).read_bytes()]
    csv_count = sum(1 for n in names if n.endswith(".csv"))
    criterion(
        capsys,
        11,
        not diffs and csv_count >= 2,
        f"two full runs (different hash seeds) emit {len(names)} files "
        f"({csv_count} CSV) byte-identical"
        + (f"; differing: {diffs}" if diffs else ""),
    )


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
