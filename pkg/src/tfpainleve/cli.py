"""Command-line front end.

    tfpainleve hm       Hastings-McLeod profile
    tfpainleve tf       Thomas-Fermi limit (manifold or direct route)
    tfpainleve coupled  coupled (nu, chi) iteration
    tfpainleve scan     eta0 / iteration-count / bound-ratio scans

Exit codes: 0 success, 2 non-convergence, 3 breakdown or solver failure,
64 usage error. Every run writes a CSV and a JSON metadata file next to it.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import LEFT_BCS, RIGHT_BCS, SolverConfig, load_config
from .coupled import conjecture_bound_ratio, equation_residuals, iterate_coupled
from .errors import SolverError
from .io import RunMetadata, write_csv, write_metadata
from .numerics import Grid, sup
from .painleve import compute_w0, hm_tail_minus, hm_tail_plus, solve_hastings_mcleod
from .tf_limit import build_tf_solution, default_psi_table, detect_eta0, tf_direct_xi_ode

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_FAILURE = 3
EXIT_USAGE = 64

log = logging.getLogger("tfpainleve")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tfpainleve", description="PT-symmetric ground state solvers")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def grid_flags(sp):
        sp.add_argument("--y-min", type=float)
        sp.add_argument("--y-max", type=float)
        sp.add_argument("--h", type=float)

    hm = sub.add_parser("hm", help="Hastings-McLeod profile")
    grid_flags(hm)
    hm.add_argument("--method", choices=("relaxation", "shooting"), default="relaxation")
    hm.add_argument("--out", default="hm.csv")

    tf = sub.add_parser("tf", help="Thomas-Fermi limit")
    tf.add_argument("--eta", type=float, required=True)
    tf.add_argument("--n", type=int)
    tf.add_argument("--method", choices=("manifold", "direct"), default="manifold")
    tf.add_argument("--out", default="tf.csv")

    cp = sub.add_parser("coupled", help="coupled iteration")
    cp.add_argument("--eps", type=float, default=0.0067)
    g = cp.add_mutually_exclusive_group()
    g.add_argument("--eta", type=float)
    g.add_argument("--eta-exp", type=float, help="eta = eps**p")
    grid_flags(cp)
    cp.add_argument("--right-bc", choices=RIGHT_BCS)
    cp.add_argument("--left-bc", choices=LEFT_BCS)
    cp.add_argument("--outer-max", type=int)
    cp.add_argument("--out", default="coupled.csv")

    sc = sub.add_parser("scan", help="parameter scans")
    sc.add_argument("--what", choices=("eta0", "iterations", "bound"), required=True)
    sc.add_argument("--eps", type=float, default=0.0067, help="eps for the iteration scan")
    sc.add_argument("--exps", type=_floats, default=[1.0, 0.5, 0.25, 0.15],
                    help="exponents p (eta = eps**p) for the iteration scan")
    sc.add_argument("--eps-list", type=_floats, default=[0.02, 0.0067, 0.003],
                    help="eps values for the bound scan (eta = eps and eta = 0)")
    grid_flags(sc)
    sc.add_argument("--jobs", type=int, default=1)
    sc.add_argument("--out", default="scan.csv")
    return p


def _config(args) -> SolverConfig:
    keys = ("y_min", "y_max", "h", "right_bc", "left_bc", "outer_max", "tf_n")
    over = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "n", None) is not None:
        over["tf_n"] = args.n
    try:
        return load_config(args.config, **over)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(str(exc))


def _meta_path(out: str) -> Path:
    return Path(out).with_suffix(".json")


def cmd_hm(args, config: SolverConfig) -> int:
    t0 = time.perf_counter()
    hm = solve_hastings_mcleod(config.hm_grid(), config, method=args.method)
    w0 = compute_w0(hm)
    y = hm.profile.y
    minus = np.full_like(y, math.nan)
    plus = np.full_like(y, math.nan)
    minus[y < 0] = hm_tail_minus(y[y < 0])
    plus[y > 0] = hm_tail_plus(y[y > 0])
    write_csv(args.out, ["y", "nu0", "w0", "tail_minus", "tail_plus"],
              [y, hm.values, w0.profile.values, minus, plus])
    g = hm.grid
    write_metadata(_meta_path(args.out), RunMetadata(
        "hm", grid=(g.y_min, g.y_max, g.h), converged=True, iterations=hm.newton_iterations,
        residuals=(hm.residual_sup, None), wall_time_ms=_ms(t0), tool_version=__version__,
        extra={"method": hm.method, "nu0_at_0": hm.at(0.0) if g.y_min <= 0 <= g.y_max else None,
               "tail_match_minus": hm.tail_match_minus, "tail_match_plus": hm.tail_match_plus,
               "roundoff_limited": hm.roundoff_limited, "w_min": w0.w_min_observed},
    ))
    return EXIT_OK


def cmd_tf(args, config: SolverConfig) -> int:
    t0 = time.perf_counter()
    grid = Grid(-1.0, 1.0, config.tf_n)
    if args.method == "manifold":
        sol = build_tf_solution(args.eta, grid, default_psi_table(config.psi_h))
    else:
        sol = tf_direct_xi_ode(args.eta, grid, config.tf_delta)
    write_csv(args.out, ["x", "phi", "xi"], [sol.x, sol.phi.values, sol.xi.values])
    write_metadata(_meta_path(args.out), RunMetadata(
        "tf", eta=args.eta, eta_spec=repr(args.eta), grid=(-1.0, 1.0, grid.h), converged=True,
        wall_time_ms=_ms(t0), tool_version=__version__,
        extra={"method": args.method, "omega1": sol.omega1, "phi_at_0": sol.phi.at(0.0),
               "identity_defect": sol.identity_defect()},
    ))
    return EXIT_OK


def _eta(args) -> tuple[float, str]:
    if args.eta is not None:
        return args.eta, repr(args.eta)
    p = 1.0 if args.eta_exp is None else args.eta_exp
    return args.eps**p, f"eps^{p!r}"


def _trace(state):
    return [
        {"iteration": r.iteration, "delta": r.delta, "newton_iterations": r.newton_iterations,
         "r1": r.r1, "r2": r.r2}
        for r in state.trace
    ]


def cmd_coupled(args, config: SolverConfig) -> int:
    t0 = time.perf_counter()
    eta, spec = _eta(args)
    try:
        grid = config.coupled_grid(args.eps)
    except ValueError as exc:
        raise UsageError(str(exc))
    state = iterate_coupled(args.eps, eta, config, grid)
    r1, r2 = equation_residuals(state)
    write_csv(args.out, ["y", "nu", "chi", "R"],
              [state.nu.y, state.nu.values, state.chi.values, state.R.values])
    write_metadata(_meta_path(args.out), RunMetadata(
        "coupled", eps=args.eps, eta=eta, eta_spec=spec, grid=(grid.y_min, grid.y_max, grid.h),
        converged=state.converged, iterations=state.iterations, residuals=(r1, r2),
        sup_R=sup(state.R.values), wall_time_ms=_ms(t0), tool_version=__version__,
        extra={"trace": _trace(state), "failure": state.failure,
               "roundoff_limited": state.roundoff_limited,
               "right_bc": config.right_bc, "left_bc": config.left_bc},
    ))
    if not state.converged:
        print(f"coupled iteration did not converge: {state.failure}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _iteration_point(item):
    p, eps, config = item
    state = iterate_coupled(eps, eps**p, config)
    return p, eps**p, state.converged, state.iterations, sup(state.R.values)


def _bound_point(item):
    eps, config = item
    ratios = []
    for eta, q in ((eps, 1.0), (0.0, 2.0)):
        state = iterate_coupled(eps, eta, config)
        ratios.append(conjecture_bound_ratio(state, q) if state.converged else math.nan)
    return eps, eps, ratios[0], ratios[1]


def _map(fn, items, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def cmd_scan(args, config: SolverConfig) -> int:
    t0 = time.perf_counter()
    extra = {}
    eta0 = None
    if args.what == "eta0":
        eta0 = detect_eta0(config)
        header, rows = ["eta0", "width"], [(eta0, 1e-3)]
    elif args.what == "iterations":
        items = [(p, args.eps, config) for p in sorted(set(args.exps), reverse=True)]
        header = ["p", "eta", "converged", "iterations", "sup_R"]
        rows = _map(_iteration_point, items, args.jobs)
        rows.sort(key=lambda r: -r[0])
    else:
        items = [(e, config) for e in sorted(set(args.eps_list), reverse=True)]
        header = ["eps", "eta", "ratio_q1", "ratio_eta0"]
        rows = _map(_bound_point, items, args.jobs)
        rows.sort(key=lambda r: -r[0])
        finite = [r[2] for r in rows if math.isfinite(r[2])]
        extra["ratio_spread"] = max(finite) / min(finite) if finite else None
    cols = [np.array([float(r[k]) for r in rows]) for k in range(len(header))]
    write_csv(args.out, header, cols)
    write_metadata(_meta_path(args.out), RunMetadata(
        "scan", eta0=eta0, wall_time_ms=_ms(t0), tool_version=__version__,
        extra={"what": args.what, **extra},
    ))
    return EXIT_OK


def _ms(t0) -> int:
    return int(round(1000 * (time.perf_counter() - t0)))


COMMANDS = {"hm": cmd_hm, "tf": cmd_tf, "coupled": cmd_coupled, "scan": cmd_scan}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = _config(args)
        return COMMANDS[args.command](args, config)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tfpainleve: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"tfpainleve: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
