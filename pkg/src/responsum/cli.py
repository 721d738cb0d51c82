"""Command line entry point: ``responsum <command> --config <path> [--out <dir>]``.

Commands: ``solve``, ``verify``, ``oracle``, ``sweep``, ``bounds``,
``integrate``. Exit status is 0 on success, 2 when a solver does not
converge, 3 for invalid input and 1 for any other failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import traceback
from pathlib import Path

import numpy as np

from . import bifurcation, propagator, series, trees, verify
from .config import RunConfig, dumps, parse_config
from .errors import InsufficientData, NonConvergence, ParseError, ResponsumError, ValidationError
from .model import locate_center, taylor_tensors

COMMANDS = ("solve", "verify", "oracle", "sweep", "bounds", "integrate")
EXIT_OK, EXIT_OTHER, EXIT_NONCONV, EXIT_INVALID = 0, 1, 2, 3


def _modes(fmap) -> list[dict]:
    return [{"nu": list(nu), "re": v.real.tolist(), "im": v.imag.tolist()} for nu, v in fmap.items()]


def _cvec(v) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"re": v.real.tolist(), "im": v.imag.tolist()}


class Pipeline:
    """Shared set-up (center, tensors, series parameters) for all commands."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.spec = cfg.system
        if cfg.center is not None:
            self.c = np.asarray(cfg.center, dtype=float)
        else:
            self.c = locate_center(self.spec, cfg.center_guess)
        self.tensors = taylor_tensors(self.spec, self.c)
        s = cfg.solve
        self.params = bifurcation.SeriesParams(K_max=s["K_max"], N_trunc=s["N_trunc"], method=s["method"],
                                               tol_picard=s["tol_picard"])

    def solve(self, eps=None):
        s = self.cfg.solve
        eps = s["epsilon"] if eps is None else eps
        return bifurcation.solve_zeta(eps, self.spec, self.tensors, guess=s["zeta_guess"], tol=s["tol_newton"],
                                      series_params=self.params)

    def solution_payload(self, rec) -> dict:
        diag = rec.diagnostics
        return {
            "c": self.c.tolist(), "zeta": rec.zeta.tolist(), "epsilon": rec.epsilon,
            "modes": _modes(rec.u), "per_order_norms": diag.norms if diag else [],
            "ratio": diag.ratio if diag else None, "flags": diag.flags if diag else [],
            "H_residual": rec.H_residual, "newton_iters": rec.newton_iters, "u_sup_norm": rec.u_sup_norm,
            "method": self.params.method,
        }


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def cmd_solve(pipe: Pipeline, out: Path):
    rec = pipe.solve()
    return [_write(out, "solution.json", dumps(pipe.solution_payload(rec)) + "\n")]


def cmd_verify(pipe: Pipeline, out: Path):
    cfg, spec = pipe.cfg, pipe.spec
    rec = pipe.solve()
    eps = rec.epsilon
    res = verify.ode_residual(rec.u, rec.zeta, pipe.c, eps, spec, pipe.tensors)
    t_end = cfg.verify["t_end"] or verify.transient_time(eps, spec, pipe.tensors.A)
    if cfg.verify["start"] == "solution":
        x0, v0 = verify.solution_state(rec.u, rec.zeta, pipe.c, spec.omega)
    else:
        x0, v0 = pipe.c + rec.zeta, np.zeros(spec.m)
    traj = verify.integrate_reference(eps, spec, x0, v0, t_end, cfg.verify["step_tol"])
    dev = verify.attractor_compare(traj, rec.u, rec.zeta, pipe.c, spec.omega, cfg.verify["transient_fraction"])
    try:
        orders = series.compute_orders(eps, spec, pipe.tensors, rec.zeta, cfg.solve["K_max"], cfg.solve["N_trunc"])
        dec = verify.decay_report(orders, spec, cfg.bounds["rho"], cfg.bounds["xi"], pipe.tensors)
        decay = {"xi_fit": dec.xi_fit, "ratio": dec.ratio, "per_order_norms": dec.per_order_norms,
                 "Phi": dec.Phi, "Delta": dec.Delta, "C0": dec.C0_diag}
    except InsufficientData as exc:
        decay = {"xi_fit": None, "ratio": None, "note": str(exc)}
    payload = {
        "epsilon": eps,
        "residual": {"sup": res.sup_norm, "l2": res.l2_norm, "dominant_mode": list(res.dominant_mode)},
        "bifurcation_residual": rec.H_residual,
        "attractor_deviation": dev,
        "t_end": t_end,
        "start": cfg.verify["start"],
        "decay": decay,
        "integrator": {"steps": traj.steps, "rejected": traj.rejected},
    }
    return [_write(out, "report.json", dumps(payload) + "\n")]


def cmd_oracle(pipe: Pipeline, out: Path):
    cfg, spec = pipe.cfg, pipe.spec
    k = cfg.oracle["k"]
    nu = tuple(cfg.oracle["nu"]) if cfg.oracle["nu"] is not None else tuple([1] + [0] * (spec.d - 1))
    zeta = np.zeros(spec.m) if cfg.oracle["zeta"] is None else np.asarray(cfg.oracle["zeta"], dtype=float)
    eps = cfg.solve["epsilon"]
    oval, count = trees.oracle_coefficient(k, nu, eps, zeta, pipe.tensors, spec, return_count=True)
    N = cfg.solve["N_trunc"] or series.default_truncation(spec, max(k, 1))
    orders = series.compute_orders(eps, spec, pipe.tensors, zeta, k, N)
    rval = orders[k][nu]
    family = trees.family_of(spec)
    reports = [trees.check_counting(t, family) for t in trees.enumerate_topologies(k, family)]
    payload = {
        "k": k, "nu": list(nu), "epsilon": eps, "zeta": zeta.tolist(),
        "oracle_value": _cvec(oval), "recursion_value": _cvec(rval),
        "abs_diff": float(np.linalg.norm(oval - rval)), "tree_count": count,
        "counting_checks": {"family": family, "topologies": len(reports), "all_pass": all(r.ok for r in reports)},
    }
    return [_write(out, "oracle.json", dumps(payload) + "\n")]


def cmd_sweep(pipe: Pipeline, out: Path):
    spec = pipe.spec
    recs = bifurcation.sweep_epsilon(pipe.cfg.sweep["epsilon_list"], spec, pipe.tensors,
                                     tol=pipe.cfg.solve["tol_newton"], series_params=pipe.params,
                                     guess=pipe.cfg.solve["zeta_guess"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon"] + [f"zeta_{i + 1}" for i in range(spec.m)]
               + ["H_residual", "u_sup_norm", "newton_iters", "converged"])
    for r in recs:
        w.writerow([format(r.epsilon, ".17g")] + [format(z, ".17g") for z in r.zeta]
                   + [format(r.H_residual, ".17g"), format(r.u_sup_norm, ".17g"), r.newton_iters,
                      int(r.converged)])
    paths = [_write(out, "sweep.csv", buf.getvalue())]
    if not all(r.converged for r in recs):
        failed = [r.epsilon for r in recs if not r.converged]
        raise NonConvergence(f"sweep entries did not converge at eps = {failed}")
    return paths


def cmd_bounds(pipe: Pipeline, out: Path):
    b, spec = pipe.cfg.bounds, pipe.spec
    sd = propagator.spectral_data(spec.damping, pipe.tensors.A, spec.mass)
    xi = b["xi"] if b["xi"] is not None else verify.default_xi(spec)
    scan = propagator.small_divisor_scan(spec.omega, b["N"], xi, sd.alpha)
    samples = propagator.bound_samples(sd)
    payload = {
        "N": scan.N, "sN": scan.sN, "argmin": list(scan.argmin), "rN": scan.rN, "deltaN": scan.deltaN,
        "alpha": sd.alpha, "kappa": sd.kappa.tolist(), "b": sd.b.tolist(), "eps1": sd.eps1, "xi": xi,
        "bound_samples": samples,
        "violations": sum(1 for s in samples if s["inverse_norm"] > s["bound"]),
    }
    return [_write(out, "bounds.json", dumps(payload) + "\n")]


def cmd_integrate(pipe: Pipeline, out: Path):
    cfg, spec = pipe.cfg, pipe.spec
    eps = cfg.solve["epsilon"]
    t_end = cfg.verify["t_end"] or verify.transient_time(eps, spec, pipe.tensors.A)
    traj = verify.integrate_reference(eps, spec, pipe.c, np.zeros(spec.m), t_end, cfg.verify["step_tol"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x_{i + 1}" for i in range(spec.m)] + [f"v_{i + 1}" for i in range(spec.m)])
    for t, x, v in zip(traj.t, traj.x, traj.v):
        w.writerow([format(t, ".17g")] + [format(a, ".17g") for a in x] + [format(a, ".17g") for a in v])
    summary = {"epsilon": eps, "t_end": t_end, "steps": traj.steps, "rejected": traj.rejected}
    return [_write(out, "trajectory.csv", buf.getvalue()),
            _write(out, "integrate.json", dumps(summary) + "\n")]


HANDLERS = {"solve": cmd_solve, "verify": cmd_verify, "oracle": cmd_oracle, "sweep": cmd_sweep,
            "bounds": cmd_bounds, "integrate": cmd_integrate}


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="responsum", description="Quasi-periodic response solutions of "
                                "strongly damped, quasi-periodically forced systems.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--kmax", type=int)
    p.add_argument("--ntrunc", type=int)
    p.add_argument("--k", type=int, help="oracle order")
    p.add_argument("--nu", type=_ints, help="oracle mode, e.g. 3 or 1,-1")
    p.add_argument("--N", type=int, help="small-divisor scan radius")
    return p


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    from .config import validate

    if args.epsilon is not None:
        cfg.solve["epsilon"] = args.epsilon
    if args.kmax is not None:
        cfg.solve["K_max"] = args.kmax
    if args.ntrunc is not None:
        cfg.solve["N_trunc"] = args.ntrunc
    if args.k is not None:
        cfg.oracle["k"] = args.k
    if args.nu is not None:
        cfg.oracle["nu"] = args.nu
    if args.N is not None:
        cfg.bounds["N"] = args.N
    if args.out is not None:
        cfg.output_dir = args.out
    return validate(cfg)


def _origin(exc: BaseException) -> str:
    tb = exc.__traceback__
    name = "responsum"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("responsum"):
            name = mod
        tb = tb.tb_next
    return name


def run(command: str, cfg: RunConfig) -> int:
    """Run one pipeline; returns the exit status."""
    try:
        pipe = Pipeline(cfg)
        paths = HANDLERS[command](pipe, Path(cfg.output_dir))
    except NonConvergence as exc:
        print(f"{_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (ValidationError, ParseError) as exc:
        print(f"{_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResponsumError as exc:
        print(f"{_origin(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER
    for p in paths:
        print(p)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(parse_config(args.config), args)
    except (ValidationError, ParseError) as exc:
        print(f"{_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return run(args.command, cfg)
    except Exception:  # unexpected failure: report and signal generic error
        traceback.print_exc()
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
