"""Command line driver.

Subcommands run the matching tasks from a single JSON config; ``run``
executes every task in order.  Exit codes: 0 all tasks succeeded and every
verification report passed; 1 a verification report exceeded its ceiling;
2 config/schema violation; 3 numeric failure (divergent integral, capacity
or resolution error, non-finite energy, solver non-convergence).

Determinism: with a fixed config and --seed the emitted JSON/CSV files are
byte-identical across runs — records carry no wall-clock fields and all
reductions happen in fixed order.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import LoadedConfig, load_config
from .energy import EnergyParams, local_p_dirichlet_energy
from .errors import (
    CapacityError,
    ConfigError,
    DivergenceError,
    ResolutionError,
)
from .grid import Ball, GridFunction, build_domain, impose_exterior_data, sample_point_function
from .kernels import (
    check_dini,
    check_scaling_bounds,
    exterior_kernel_mass,
    phi_eval,
    sphere_area,
)
from .reporting import emit_report, write_solution_csv
from .solver import SolveOptions, range_bounds_check, solve_dirichlet
from .stability import (
    bbm_energy_curve,
    bbm_limit_constant,
    extrapolate_limit,
    local_limit_solution_study,
)
from .tail import nonlocal_tail
from . import verify

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (DivergenceError, CapacityError, ResolutionError, FloatingPointError)


class NumericFailure(RuntimeError):
    pass


def _set_threads(n: int) -> None:
    # best effort: honored by BLAS pools spawned after this point
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ[var] = str(n)


def _bump(center, width: float):
    """Smooth bump supported on {|x-c| < width}, 1 at the center."""
    c = np.atleast_1d(np.asarray(center, float))

    def f(*axes):
        d2 = sum((ax - ci) ** 2 for ax, ci in zip(axes, c))
        u = 1.0 - d2 / width**2
        out = np.zeros_like(np.asarray(d2, float))
        pos = u > 0
        out[pos] = np.exp(1.0 - 1.0 / u[pos])
        return out

    return f


def _build_full_domain(cfg: LoadedConfig):
    kwargs = {} if cfg.node_limit is None else {"node_limit": cfg.node_limit}
    return build_domain(cfg.shape, cfg.h, cfg.R_trunc, **kwargs)


def _report_record(rep: verify.InequalityReport) -> dict:
    rec = {
        "name": rep.name,
        "lhs": rep.lhs,
        "measured_constant": rep.measured_constant,
        "passed": rep.passed,
        "ceiling": rep.ceiling,
    }
    for key, val in rep.rhs_parts.items():
        rec[f"rhs_{key}"] = val
    rec.update({k: v for k, v in rep.metadata.items() if k not in rec})
    return rec


# ---------------------------------------------------------------------------
# task runners


def run_check_kernel(cfg: LoadedConfig, task: dict, seed: int):
    spec = cfg.kernel
    n = cfg.shape.dim
    dini = check_dini(spec)
    lo = task.get("scaling_grid_lo", 1e-4)
    hi = task.get("scaling_grid_hi", 1e2)
    t_grid = np.geomspace(lo, hi, 97)
    rec = {
        "name": "check_kernel",
        "variant": type(spec.variant).__name__,
        "p": spec.p,
        "s": spec.s,
        "s_tilde": spec.s_tilde,
        "L": spec.L,
        "Lambda": spec.Lambda,
        "dini_converges": dini.converges,
        "dini_value": dini.value if math.isfinite(dini.value) else None,
    }
    try:
        bounds = check_scaling_bounds(spec, t_grid)
    except ValueError as exc:
        # kernels with a restricted domain (pure log, narrow tables) reject
        # the default grid; report rather than die — pass scaling_grid_hi/lo
        # to probe inside the domain
        rec.update({"L_dec": None, "L_inc": None, "scaling_note": str(exc)})
    else:
        rec.update(
            {
                "L_dec": bounds.L_dec,
                "L_inc": bounds.L_inc,
                "within_declared": bounds.L_dec <= spec.L * (1 + 1e-9)
                and bounds.L_inc <= spec.L * (1 + 1e-9),
            }
        )
    r_ext = task.get("r_exterior", 1.0)
    rec["r_exterior"] = r_ext
    try:
        mass = exterior_kernel_mass(spec, r_ext, n=n)
        bound = (
            spec.L
            * sphere_area(n)
            / (spec.s * spec.p)
            * float(phi_eval(spec, r_ext))
            / r_ext**spec.p
        )
        rec["exterior_mass"] = mass
        rec["exterior_bound"] = bound
        rec["exterior_ratio"] = mass / bound if bound > 0 else None
    except (ValueError, DivergenceError) as exc:
        rec["exterior_mass"] = None
        rec["exterior_note"] = str(exc)
    # a failed Dini or bound check is reported, never fatal here
    return [rec], True


def _solve_task_options(task: dict) -> SolveOptions:
    return SolveOptions(
        max_iter=int(task.get("max_iter", 20000)),
        tol_g=task.get("tol_g"),
        tol_e=task.get("tol_e"),
    )


def run_solve(cfg: LoadedConfig, task: dict, seed: int, out_dir: Path):
    domain = _build_full_domain(cfg)
    res = solve_dirichlet(
        domain, cfg.g, EnergyParams(cfg.kernel), _solve_task_options(task), seed=seed
    )
    if not res.converged:
        raise NumericFailure(
            f"solver stopped after {res.iterations} iterations with "
            f"grad_norm = {res.grad_norm:.3e} > tol_g = {res.tol_g:.3e}"
        )
    rng = range_bounds_check(res.u, cfg.g)
    write_solution_csv(out_dir / f"{cfg.basename}-solution.csv", domain, res.u.values)
    rec = {
        "name": "solve",
        "nodes": domain.node_count,
        "interior_nodes": int(domain.interior_idx.size),
        "h": domain.h,
        "converged": res.converged,
        "iterations": res.iterations,
        "final_energy": res.final_energy,
        "grad_norm": res.grad_norm,
        "weak_residual": res.weak_residual,
        "tol_g": res.tol_g,
        "range_ok": bool(rng),
        "range_low": rng.low,
        "range_high": rng.high,
    }
    return [rec], True


def run_tail(cfg: LoadedConfig, task: dict, seed: int):
    domain = _build_full_domain(cfg)
    f = impose_exterior_data(domain, cfg.g)
    x0 = task.get("x0")
    center = tuple(cfg.shape.anchor) if x0 is None else tuple(np.atleast_1d(x0))
    r = float(task["r"])
    result = nonlocal_tail(f, center, r, cfg.kernel, far_field=cfg.far_field)
    rec = {
        "name": "tail",
        "r": r,
        "x0": list(center),
        "value": result.value,
        "scale": result.scale,
        "grid_integral": result.grid_integral,
        "far_integral": result.far_integral,
        "remainder_bound": result.remainder_bound,
        "cutoff_radius": result.cutoff_radius,
    }
    return [rec], True


def run_verify(cfg: LoadedConfig, task: dict, seed: int):
    domain = _build_full_domain(cfg)
    res = solve_dirichlet(domain, cfg.g, EnergyParams(cfg.kernel), seed=seed)
    if not res.converged:
        raise NumericFailure("verification solve did not converge")
    u = res.u
    spec = cfg.kernel
    opts = task  # report options sit on the task itself (see config schema)
    ceiling = opts.get("ceiling", verify.DEFAULT_CEILING)
    center = tuple(cfg.shape.anchor)
    R = float(opts.get("R", cfg.shape.circumradius))
    r = float(opts.get("r", R / 2.0))

    shift = opts.get("shift")
    ballR = u.values[np.linalg.norm(u.domain.coords - np.asarray(center), axis=1) < R]
    if shift is None:
        # sign-indefinite solutions enter positivity-constrained reports
        # shifted up by their own infimum (a solution plus a constant is
        # again a solution of the same equation)
        umin = float(ballR.min()) if ballR.size else 0.0
        shift = -umin if umin < 0 else 0.0
    u_pos = u.with_values(u.values + shift) if shift else u

    records = []
    for kind in task["reports"]:
        if kind == "sobolev_poincare":
            rep = verify.sobolev_poincare_report(
                u,
                Ball(center=center, radius=r),
                spec,
                exponent_choice=opts.get("exponent_choice"),
                ceiling=ceiling,
            )
            records.append(_report_record(rep))
        elif kind == "caccioppoli":
            k = float(opts.get("k", np.median(ballR) if ballR.size else 0.0))
            rho = float(opts.get("rho", 0.5 * r))
            rep = verify.caccioppoli_report(
                u, k, rho, r, spec, center=center,
                far_field=cfg.far_field, ceiling=ceiling,
            )
            records.append(_report_record(rep))
        elif kind == "log_estimate":
            rep = verify.log_estimate_report(
                u_pos, float(opts.get("d", 1.0)), r, R, spec, center=center,
                far_field=cfg.far_field, ceiling=ceiling,
            )
            rec = _report_record(rep)
            rec["applied_shift"] = shift
            records.append(rec)
        elif kind == "log_oscillation_composite":
            a = float(opts.get("a", (ballR.max() + shift) if ballR.size else 1.0))
            rep = verify.log_oscillation_composite_report(
                u_pos, a, float(opts.get("b", 2.0)), float(opts.get("d", 1.0)),
                r, R, spec, center=center,
                far_field=cfg.far_field, ceiling=ceiling,
            )
            rec = _report_record(rep)
            rec["applied_shift"] = shift
            records.append(rec)
        elif kind == "local_boundedness":
            rep = verify.local_boundedness_report(
                u, r, float(opts.get("epsilon", 1.0)), spec, center=center,
                far_field=cfg.far_field, ceiling=ceiling,
            )
            records.append(_report_record(rep))
        elif kind == "holder_fit":
            # the oscillation fit needs dyadic room: start at the full ball
            # (the task-level r configures the inner-ball reports, not this)
            alpha, fit = verify.holder_exponent_fit(u, center, R)
            rec = {
                "name": "holder_fit",
                "alpha_hat": alpha if math.isfinite(alpha) else None,
                "c_hat": fit.get("c_hat"),
                "levels": fit["levels"],
                "degenerate": fit.get("degenerate", False),
                "passed": fit.get("degenerate", False)
                or (math.isfinite(alpha) and alpha > 0),
            }
            if not fit.get("degenerate", False):
                rec["plot"] = {
                    "kind": "loglog",
                    "x": list(fit["realized_radii"]),
                    "y": list(fit["oscillations"]),
                    "fit": {"slope": alpha, "intercept": fit["intercept"]},
                    "xlabel": "radius",
                    "ylabel": "oscillation",
                    "title": "oscillation decay",
                }
            records.append(rec)
        elif kind == "harnack":
            rep = verify.harnack_report(
                u_pos, r, R, spec, center=center,
                far_field=cfg.far_field, ceiling=ceiling,
            )
            rec = _report_record(rep)
            rec["applied_shift"] = shift
            records.append(rec)
        elif kind == "weak_harnack":
            rep = verify.weak_harnack_report(
                u_pos, r, R, spec, t=opts.get("t"), center=center,
                far_field=cfg.far_field, ceiling=ceiling,
            )
            rec = _report_record(rep)
            rec["applied_shift"] = shift
            records.append(rec)
        elif kind == "embedding":
            bump = _bump(center, cfg.shape.circumradius)
            f = GridFunction(domain, sample_point_function(domain, bump))
            reps = verify.embedding_report(
                f, spec, ball=Ball(center=center, radius=r), ceiling=ceiling
            )
            for label, rep in reps.items():
                rec = _report_record(rep)
                rec["name"] = f"embedding_{label}"
                records.append(rec)
        else:  # schema forbids this; belt and braces
            raise ConfigError(f"unknown verify report {kind!r}")

    ok = all(rec.get("passed", True) for rec in records)
    return records, ok


def run_stability(cfg: LoadedConfig, task: dict, seed: int):
    spec = cfg.kernel
    study = task.get("study", "bbm")
    records = []
    if study == "bbm":
        s_list = [float(s) for s in task.get("s_list", [0.5, 0.7, 0.9, 0.95])]
        width = float(task.get("bump_width", cfg.shape.circumradius))
        r = float(task.get("r", cfg.shape.circumradius))
        base_h = float(task.get("base_h", cfg.h))
        f = _bump(cfg.shape.anchor, width)
        points = bbm_energy_curve(
            f,
            cfg.shape,
            r,
            s_list,
            p=spec.p,
            base_h=base_h,
            R_trunc=cfg.R_trunc,
            node_limit=cfg.node_limit,
        )
        for q in points:
            records.append(
                {
                    "name": f"bbm-s{q.s:g}",
                    "s": q.s,
                    "normalized_energy": q.normalized_energy,
                    "near_part": q.near_part,
                    "far_part": q.far_part,
                    "far_bound": q.far_bound,
                    "h": q.h,
                    "nodes": q.nodes,
                }
            )
        summary = {"name": "bbm-summary", "limit_constant": bbm_limit_constant(cfg.shape.dim, spec.p)}
        if sum(1 for q in points if q.s >= 0.9) >= 2:
            a, b = extrapolate_limit(points)
            fine = min(q.h for q in points)
            dom = build_domain(cfg.shape, fine, cfg.R_trunc)
            vals = sample_point_function(dom, f)
            dirichlet = local_p_dirichlet_energy(
                GridFunction(dom, vals), p=spec.p
            )
            summary.update(
                {
                    "extrapolated_limit": a,
                    "slope": b,
                    "local_dirichlet_energy": dirichlet,
                    "predicted_limit": summary["limit_constant"] * dirichlet,
                }
            )
        summary["plot"] = {
            "kind": "line",
            "x": [q.s for q in points],
            "y": [q.normalized_energy for q in points],
            "xlabel": "s",
            "ylabel": "normalized energy",
            "title": "energy vs s",
        }
        records.append(summary)
    elif study == "local_limit":
        if cfg.shape.dim != 1:
            raise ConfigError("local_limit study needs a one-dimensional domain")
        g = cfg.g
        if isinstance(g, np.ndarray):
            raise ConfigError("local_limit study needs expression or scalar data")
        if not callable(g):
            const = float(g)
            g = lambda x: np.full_like(np.asarray(x, float), const)
        s_list = [float(s) for s in task.get("s_list", [0.6, 0.75, 0.9])]
        rows = local_limit_solution_study(
            g,
            s_list,
            cfg.shape,
            h=float(task.get("base_h", cfg.h)),
            R_trunc=cfg.R_trunc,
            p=spec.p,
            tail_r=task.get("r"),
            far_field=cfg.far_field,
        )
        for row in rows:
            records.append(
                {
                    "name": f"local-limit-s{row.s:g}",
                    "s": row.s,
                    "lp_distance": row.lp_distance,
                    "tail_g_plus": row.tail_g_plus,
                }
            )
        records.append(
            {
                "name": "local-limit-summary",
                "distances_decrease": all(
                    b.lp_distance <= a.lp_distance + 1e-12
                    for a, b in zip(rows, rows[1:])
                ),
                "plot": {
                    "kind": "line",
                    "x": [row.s for row in rows],
                    "y": [row.lp_distance for row in rows],
                    "xlabel": "s",
                    "ylabel": "Lp distance to local solution",
                    "title": "local limit",
                },
            }
        )
    else:  # schema forbids this
        raise ConfigError(f"unknown stability study {study!r}")
    return records, True


_DEFAULTABLE = {"check-kernel", "solve", "stability"}


def _select_tasks(cfg: LoadedConfig, command: str) -> list[dict]:
    if command == "run":
        return list(cfg.tasks)
    picked = [t for t in cfg.tasks if t.get("kind") == command]
    if picked:
        return picked
    if command in _DEFAULTABLE:
        return [{"kind": command}]
    raise ConfigError(f"config declares no {command!r} task")


def _run_task(cfg: LoadedConfig, task: dict, seed: int, out_dir: Path):
    kind = task["kind"]
    if kind == "check-kernel":
        return run_check_kernel(cfg, task, seed)
    if kind == "solve":
        return run_solve(cfg, task, seed, out_dir)
    if kind == "tail":
        return run_tail(cfg, task, seed)
    if kind == "verify":
        return run_verify(cfg, task, seed)
    if kind == "stability":
        return run_stability(cfg, task, seed)
    raise ConfigError(f"unknown task kind {kind!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlplab",
        description="nonlocal p-Laplace toolbox: solve, tails, inequality checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "check-kernel": "kernel diagnostics: Dini probe, scaling bounds, exterior mass",
        "solve": "minimize the nonlocal energy with the configured exterior data",
        "tail": "evaluate the nonlocal tail of the configured data",
        "verify": "solve, then measure the configured inequality reports",
        "stability": "s-sweep studies (energy limits, local-limit distances)",
        "run": "execute every task in the config, in order",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, type=Path, help="JSON config path")
        sp.add_argument("--out", type=Path, default=None, help="output directory override")
        sp.add_argument("--threads", type=int, default=None, help="BLAS thread cap")
        sp.add_argument("--seed", type=int, default=0, help="seed for solver starts")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        _set_threads(args.threads)
    try:
        cfg = load_config(args.config)
        tasks = _select_tasks(cfg, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out if args.out is not None else cfg.out_dir
    records: list[dict] = []
    code = EXIT_OK
    for task in tasks:
        try:
            recs, ok = _run_task(cfg, task, args.seed, Path(out_dir))
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (NumericFailure, *_NUMERIC_ERRORS) as exc:
            print(f"numeric failure in {task['kind']}: {exc}", file=sys.stderr)
            code = EXIT_NUMERIC
            break
        records.extend(recs)
        if not ok and code == EXIT_OK:
            code = EXIT_VERIFY

    paths = emit_report(records, out_dir, formats=cfg.formats, basename=cfg.basename)
    for rec in records:
        if rec.get("passed") is False:
            print(f"FAIL {rec['name']}: measured {rec.get('measured_constant')}")
    print(f"wrote {len(records)} records, {len(paths)} files to {out_dir}")
    return code


if __name__ == "__main__":
    sys.exit(main())
