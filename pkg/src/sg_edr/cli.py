"""``sg-edr`` command-line front end.

Exit codes: 0 success, 1 failed check (region violation, oracle mismatch),
2 config parse, 3 domain precondition, 4 oracle resolution.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, SWEEP_AXES, load_config
from .errors import DomainError, NumericsError, OracleResolutionError, RegionViolation
from .gaussian_states import (
    classify,
    contraction_time,
    kennard_residual,
    moments,
    schrodinger_residual,
    v_functional,
)
from .numerics import Interval, maximize_1d
from .oracle import cross_check, density_snapshots, oracle_error
from .sg_measurement import (
    EDPoint,
    disturbance_gaussian,
    error_gaussian,
    g0,
    in_sg_region,
    region_bound,
    tau_star,
    w_function,
    w_value,
)
from .spin_qubit import (
    BlochState,
    bo_residual,
    cnot_model,
    d_coefficient,
    heisenberg_product,
    ohedr_rhs,
    tight_circle_residual,
)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DOMAIN, EXIT_ORACLE = 0, 1, 2, 3, 4
COMMANDS = ("point", "boundary", "sweep", "optimize", "oracle-check", "cnot", "classify")
BOUNDARY_COLUMNS = ("eps2", "eta2_sg_lo", "eta2_sg_hi", "eta2_bo_lo", "eta2_bo_hi",
                    "eta2_heis", "eta2_ohedr_lo", "eta2_ohedr_hi")
SWEEP_COLUMNS = SWEEP_AXES + ("eps2", "eta2", "in_sg_region", "heisenberg_violated")
CONTAINMENT_TOL = 1e-9
DENSITY_COLUMNS = ("z", "dens_up", "dens_down", "time")

Row = dict[str, Any]


def thread_count() -> int:
    """Worker cap from ``SG_EDR_THREADS`` (default: up to 4 CPUs)."""
    raw = os.environ.get("SG_EDR_THREADS")
    if raw is None or raw.strip() == "":
        return max(1, min(4, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"SG_EDR_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"SG_EDR_THREADS must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    """``map`` over a thread pool; results keep input order."""
    threads = thread_count() if threads is None else threads
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---- commands ---------------------------------------------------------------

def cmd_point(cfg: RunConfig) -> Row:
    p, s = cfg.params, cfg.state
    eps = error_gaussian(p, s)
    eta = disturbance_gaussian(p, s)
    eps2, eta2 = eps * eps, eta * eta
    excess = abs(eta2 - 2.0) / 2.0
    bound = cfg.bloch.ny ** 2
    product = heisenberg_product(eps, eta)
    return {
        "eps": eps, "eps2": eps2, "eta": eta, "eta2": eta2,
        "w": w_value(p, s), "g0": g0(p),
        "v_half": v_functional(s, 0.5 * p.dt, p.m),
        "v_screen": v_functional(s, p.total_time, p.m),
        "heisenberg_product": product,
        "heisenberg_bound": bound,
        "heisenberg_violated": product < bound,
        "tight_disk_residual": tight_circle_residual(eps2, eta2),
        "ohedr_residual": ohedr_rhs(min(eps2, 4.0)) - excess,
        "sg_region_residual": region_bound(min(eps2, 4.0)) - excess,
        "in_sg_region": in_sg_region(EDPoint(eps2, eta2)),
    }


def boundary_row(eps2: float) -> Row:
    sg = region_bound(eps2)
    disk = math.sqrt(max(0.0, 4.0 - (eps2 - 2.0) ** 2))
    oh = ohedr_rhs(eps2)
    return {
        "eps2": eps2,
        "eta2_sg_lo": 2.0 - 2.0 * sg, "eta2_sg_hi": 2.0 + 2.0 * sg,
        "eta2_bo_lo": 2.0 - disk, "eta2_bo_hi": 2.0 + disk,
        "eta2_heis": 1.0 / eps2,
        "eta2_ohedr_lo": 2.0 - 2.0 * oh, "eta2_ohedr_hi": 2.0 + 2.0 * oh,
    }


def boundary_grid(samples: int) -> np.ndarray:
    """Interior nodes of ``samples`` equal intervals on [0, 4]."""
    return np.linspace(0.0, 4.0, samples + 1)[1:-1]


def cmd_boundary(cfg: RunConfig, samples: int = 512) -> list[Row]:
    if samples < 16:
        raise DomainError(f"boundary needs at least 16 samples, got {samples}")
    rows = ordered_map(boundary_row, [float(x) for x in boundary_grid(samples)])
    for row in rows:
        slack = 4.0 - (row["eps2"] - 2.0) ** 2 - (row["eta2_sg_hi"] - 2.0) ** 2
        if slack < -CONTAINMENT_TOL:
            raise RegionViolation(f"SG band leaves the tight disk at eps2={row['eps2']!r} "
                                  f"(residual {slack:.3e})")
    return rows


def sweep_points(cfg: RunConfig) -> list[tuple[float, ...]]:
    base = {
        "k_re": cfg.state.k.real, "k_im": cfg.state.k.imag,
        "dt": cfg.params.dt, "tau": cfg.params.tau, "b0": cfg.params.b0, "b1": cfg.params.b1,
    }
    axes = [cfg.sweep.get(name, (base[name],)) for name in SWEEP_AXES]
    return list(itertools.product(*axes))


def sweep_row(cfg: RunConfig, point: tuple[float, ...]) -> Row:
    values = dict(zip(SWEEP_AXES, point))
    p = replace(cfg.params, dt=values["dt"], tau=values["tau"], b0=values["b0"], b1=values["b1"])
    s = replace(cfg.state, k=complex(values["k_re"], values["k_im"]))
    eps = error_gaussian(p, s)
    eta = disturbance_gaussian(p, s)
    pt = EDPoint(eps * eps, eta * eta)
    return {**values, "eps2": pt.eps2, "eta2": pt.eta2, "in_sg_region": in_sg_region(pt),
            "heisenberg_violated": heisenberg_product(eps, eta) < cfg.bloch.ny ** 2}


def cmd_sweep(cfg: RunConfig) -> list[Row]:
    rows = ordered_map(lambda pt: sweep_row(cfg, pt), sweep_points(cfg))
    bad = [r for r in rows if not r["in_sg_region"]]
    if bad:
        r = bad[0]
        raise RegionViolation(
            f"{len(bad)} sweep point(s) outside the Stern-Gerlach region; first: "
            + ", ".join(f"{k}={r[k]!r}" for k in SWEEP_COLUMNS[:-2]))
    return rows


def cmd_optimize(cfg: RunConfig) -> Row:
    p, s = cfg.params, cfg.state
    opt = tau_star(p, s)
    numeric = maximize_1d(lambda t: abs(w_function(p, s, t)), Interval(0.0, math.inf), tol=1e-10)
    if opt.attained and numeric.attained:
        rel = abs(numeric.argmax - opt.tau0) / max(abs(opt.tau0), 1e-300)
    else:
        rel = math.nan
    return {
        "attained": opt.attained,
        "tau0": opt.tau0,
        "w_value": opt.w_value,
        "condition_lhs": opt.condition_lhs,
        "numeric_attained": numeric.attained,
        "numeric_tau0": numeric.argmax if numeric.attained else None,
        "numeric_w": numeric.max,
        "tau0_rel_error": rel,
        "min_eps2": 2.0 * math.erfc(opt.w_value),
        "state_class": classify(s, cfg.reference_k).value,
    }


def cmd_oracle_check(cfg: RunConfig, dump_density: str | None = None) -> tuple[list[Row], bool]:
    p, s, oc = cfg.params, cfg.state, cfg.oracle_cfg
    chk = cross_check(p, s, cfg.bloch, oc)
    up = BlochState(0.0, 0.0, 1.0)
    # E integrates the lower half line, i.e. the flipped meter assignment
    eps2_flipped = oracle_error(p, up, s, oc, meter_sign=-1) ** 2
    home_rel = abs(4.0 * chk.home.e_integral - eps2_flipped) / max(eps2_flipped, 1e-300)
    rows = [
        {"quantity": "eps", "closed_form": chk.eps_closed, "oracle": chk.eps_oracle,
         "rel_error": chk.eps_rel, "passed": chk.eps_rel <= chk.tol},
        {"quantity": "eta", "closed_form": chk.eta_closed, "oracle": chk.eta_oracle,
         "rel_error": chk.eta_rel, "passed": chk.eta_rel <= chk.tol},
        {"quantity": "home_4E_vs_eps2", "closed_form": eps2_flipped,
         "oracle": 4.0 * chk.home.e_integral, "rel_error": home_rel, "passed": home_rel <= 1e-6},
        {"quantity": "home_I", "closed_form": None, "oracle": chk.home.i_overlap,
         "rel_error": None, "passed": None},
        {"quantity": "home_E", "closed_form": None, "oracle": chk.home.e_integral,
         "rel_error": None, "passed": None},
    ]
    if dump_density:
        with open(dump_density, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(DENSITY_COLUMNS)
            for rec in density_snapshots(p, cfg.bloch, s, oc):
                writer.writerow([_fmt(v) for v in rec])
    return rows, all(r["passed"] is not False for r in rows)


def cmd_cnot(cfg: RunConfig, theta: float | None = None) -> Row:
    theta = cfg.theta if theta is None else theta
    res = cnot_model(theta, cfg.bloch)
    eps2, eta2 = res.error ** 2, res.disturbance ** 2
    d = d_coefficient(cfg.bloch)
    masked = abs(res.x_mean_after - res.x_mean_before) < 1e-12 and eta2 > 1e-12
    return {
        "theta": theta, "eps": res.error, "eta": res.disturbance, "eps2": eps2, "eta2": eta2,
        "saturation_residual": tight_circle_residual(eps2, eta2),
        "d": d, "bo_residual": bo_residual(min(res.error, 2.0), min(res.disturbance, 2.0), d),
        "x_mean_before": res.x_mean_before, "x_mean_after": res.x_mean_after,
        "note": "sigma_x statistics unchanged although eta > 0" if masked else "",
    }


def cmd_classify(cfg: RunConfig) -> Row:
    s, m = cfg.state, cfg.params.m
    cm = moments(s)
    return {
        "k_re": s.k.real, "k_im": s.k.imag,
        "state_class": classify(s, cfg.reference_k).value,
        "var_z": cm.var_z, "var_p": cm.var_p, "cor_zp": cm.cor_zp,
        "schrodinger_residual": schrodinger_residual(cm, s.hbar),
        "kennard_residual": kennard_residual(cm, s.hbar),
        "contraction_time": contraction_time(s, m),
    }


# ---- output -----------------------------------------------------------------

def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render(rows: Iterable[Row], fmt: str, columns: Sequence[str] | None = None,
           single: bool = False) -> str:
    rows = list(rows)
    if fmt == "json":
        clean = [{k: _json_value(v) for k, v in r.items()} for r in rows]
        return json.dumps(clean[0] if single else clean, indent=2) + "\n"
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


# ---- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sg-edr",
        description="Error and disturbance of Stern-Gerlach spin measurements "
                    "(defaults: dimensionless units, hbar = m = mu = 1).",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration (default profile if omitted)")
    ap.add_argument("--samples", type=int, default=512, help="boundary samples (>= 16)")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--dump-density", nargs="?", const="density.csv", default=None,
                    metavar="PATH", help="oracle-check: write |psi|^2 snapshots as CSV")
    ap.add_argument("--theta", type=float, help="cnot: probe angle (overrides config)")
    return ap


def run(args: argparse.Namespace) -> tuple[str, int]:
    cfg = load_config(args.config)
    thread_count()  # reject a malformed SG_EDR_THREADS before doing any work
    code = EXIT_OK
    if args.command == "point":
        text = render([cmd_point(cfg)], args.format, single=True)
    elif args.command == "boundary":
        text = render(cmd_boundary(cfg, args.samples), args.format, BOUNDARY_COLUMNS)
    elif args.command == "sweep":
        text = render(cmd_sweep(cfg), args.format, SWEEP_COLUMNS)
    elif args.command == "optimize":
        text = render([cmd_optimize(cfg)], args.format, single=True)
    elif args.command == "oracle-check":
        rows, ok = cmd_oracle_check(cfg, args.dump_density)
        text = render(rows, args.format)
        code = EXIT_OK if ok else EXIT_FAILED
    elif args.command == "cnot":
        text = render([cmd_cnot(cfg, args.theta)], args.format, single=True)
    else:
        text = render([cmd_classify(cfg)], args.format, single=True)
    return text, code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = run(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, f"config error: {exc}")
    except OracleResolutionError as exc:
        return _fail(EXIT_ORACLE, f"oracle resolution: {exc}")
    except DomainError as exc:
        return _fail(EXIT_DOMAIN, f"domain error: {exc}")
    except (RegionViolation, NumericsError) as exc:
        return _fail(EXIT_FAILED, str(exc))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # downstream closed early (e.g. `| head`); silence the flush at exit
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    if code != EXIT_OK:
        print("sg-edr: one or more checks failed", file=sys.stderr)
    return code


def _fail(code: int, message: str) -> int:
    print(f"sg-edr: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
