"""phasekit command line.

Exit codes: 0 success, 1 validation or parse error, 2 convergence failure
(including a failed acid test or equation-of-motion check), 3 I/O error.
"""

import argparse
import platform
import sys
import time
from pathlib import Path

import mpmath
import numpy as np
import scipy
from scipy import linalg

import phasekit
from phasekit.errors import ConvergenceError, IntegrationError, PhasekitError, ValidationError
from phasekit.fock import PhaseWindow
from phasekit.logseries import LogSeriesConfig, build_log_series_operator
from phasekit.pegg_barnett import PBConfig, pb_distribution, pb_moments, pb_phase_operator
from phasekit.quadrature import DEFAULT_N_RADIAL, build_polar_grid, default_n_angular, phase_marginal
from phasekit.report import json_text, operator_meta, render, sidecar_path, write_text
from phasekit.statespec import build_state, format_state_spec, parse_state_spec
from phasekit.turski import (
    EvolutionConfig,
    acid_test,
    build_phase_operator_analytic,
    build_phase_operator_quadrature,
    equation_of_motion_check,
    evolve_phase_operator,
    operator_expectation_moments,
    phase_moments_q,
    unitarity_defect,
)

EXIT_OK, EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3
EVOLVE_LAW_TOL = 1e-12
EVOLVE_FD_TOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(parser, dim_default=None, out_format="json"):
    parser.add_argument("--dim", type=int, default=dim_default, help="Fock-space dimension")
    parser.add_argument("--radial", type=int, default=DEFAULT_N_RADIAL, help="radial quadrature nodes")
    parser.add_argument("--angular", type=int, default=None, help="angular nodes (default max(512, 8*dim))")
    parser.add_argument("--theta0", type=float, default=0.0, help="branch window center")
    parser.add_argument("--chi", type=float, default=None, help="log-series displacement (default 4*sqrt(dim_work))")
    parser.add_argument("--series-order", type=int, default=64, help="log-series order K")
    parser.add_argument("--dim-work", type=int, default=None, help="log-series working dimension (default 8*dim)")
    parser.add_argument("--pb-s", type=int, default=None, help="Pegg-Barnett s (space dimension s+1)")
    parser.add_argument("--format", choices=("csv", "json"), default=out_format)
    parser.add_argument("--out", default=None, help="output path (default: standard output)")
    parser.add_argument("--manifest", default=None,
                        help="manifest path (default: <out stem>.manifest.json or ./phasekit_manifest.json)")
    parser.add_argument("--force", action="store_true", help="allow truncated coherent states")


def build_parser():
    parser = _Parser(prog="phasekit", description="Quantum phase operators on truncated Fock spaces.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("acid-test", help="phase variance of a number state")
    p.add_argument("--n", type=int, required=True)
    _common(p, dim_default=32)

    p = sub.add_parser("moments", help="phase moments of a state")
    p.add_argument("--state", required=True)
    p.add_argument("--method", choices=("q", "pb", "operator"), default="q")
    p.add_argument("--kmax", type=int, default=2)
    _common(p)

    p = sub.add_parser("operator", help="export an operator matrix")
    p.add_argument("--method", required=True,
                   choices=("turski-analytic", "turski-quadrature", "log-series", "pegg-barnett"))
    _common(p, dim_default=16, out_format="csv")

    p = sub.add_parser("unitarity", help="measure E^dag E for the exponential phase operator")
    p.add_argument("--construction", choices=("analytic", "quadrature"), default="analytic")
    _common(p, dim_default=16)

    p = sub.add_parser("evolve", help="Heisenberg evolution of the phase operator")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--check", action="store_true", help="verify the rotation law and equation of motion")
    _common(p, dim_default=16)

    p = sub.add_parser("compare", help="phase moments of one state under several methods")
    p.add_argument("--state", required=True)
    p.add_argument("--methods", default="q,pb")
    p.add_argument("--kmax", type=int, default=2)
    _common(p)
    return parser


def _grid(args, dim):
    n_angular = args.angular if args.angular is not None else default_n_angular(dim)
    return build_polar_grid(args.radial, n_angular, PhaseWindow(args.theta0))


def _state(args):
    spec = parse_state_spec(args.state)
    return spec, build_state(spec, args.dim, force=args.force)


def _pb_config(args, default_s):
    return PBConfig.aligned(args.pb_s if args.pb_s is not None else default_s, PhaseWindow(args.theta0))


def _moments(state, method, args):
    if method == "q":
        grid = _grid(args, state.dim)
        return phase_moments_q(state, grid, args.kmax), grid
    if method == "pb":
        return pb_moments(state, _pb_config(args, 255), args.kmax), None
    if method == "operator":
        return operator_expectation_moments(state, state.dim, args.kmax, PhaseWindow(args.theta0)), None
    raise ValidationError(f"unknown method {method!r}")


def cmd_acid_test(args, resolved):
    grid = _grid(args, args.dim)
    resolved.update(n=args.n, dim=args.dim, grid=grid.describe())
    result = acid_test(args.n, args.dim, grid)
    return result.to_dict(), (EXIT_OK if result.passed else EXIT_CONVERGENCE)


def cmd_moments(args, resolved):
    spec, state = _state(args)
    resolved.update(state=format_state_spec(spec), dim=state.dim, method=args.method, kmax=args.kmax)
    if args.format == "csv":
        if args.method == "q":
            grid = _grid(args, state.dim)
            resolved["grid"] = grid.describe()
            return phase_marginal(state, grid), EXIT_OK
        if args.method == "pb":
            cfg = _pb_config(args, 255)
            resolved["pb"] = cfg.describe()
            return pb_distribution(state, cfg), EXIT_OK
        raise ValidationError("the operator method has no phase distribution; use --format json")
    report, grid = _moments(state, args.method, args)
    if grid is not None:
        resolved["grid"] = grid.describe()
    if args.method == "pb":
        resolved["pb"] = _pb_config(args, 255).describe()
    data = report.to_dict()
    data["state"] = state.label
    return data, EXIT_OK


def _operator(args, resolved):
    method = args.method
    window = PhaseWindow(args.theta0)
    if method == "turski-analytic":
        return build_phase_operator_analytic(args.dim, window)
    if method == "turski-quadrature":
        grid = _grid(args, args.dim)
        resolved["grid"] = grid.describe()
        return build_phase_operator_quadrature(args.dim, grid)
    if method == "log-series":
        cfg = LogSeriesConfig.default(args.dim, args.chi, args.series_order, args.dim_work)
        resolved["log_series"] = cfg.describe()
        return build_log_series_operator(cfg)
    cfg = _pb_config(args, args.dim - 1)
    resolved["pb"] = cfg.describe()
    return pb_phase_operator(cfg)


def cmd_operator(args, resolved):
    resolved.update(method=args.method, dim=args.dim)
    op = _operator(args, resolved)
    if args.format == "json":
        data = operator_meta(op)
        data["entries"] = [[{"re": z.real, "im": z.imag} for z in row] for row in op.entries]
        return data, EXIT_OK
    return op, EXIT_OK


def cmd_unitarity(args, resolved):
    grid = _grid(args, args.dim) if args.construction == "quadrature" else None
    resolved.update(dim=args.dim, construction=args.construction)
    if grid is not None:
        resolved["grid"] = grid.describe()
    return unitarity_defect(args.dim, args.construction, grid).to_dict(), EXIT_OK


def cmd_evolve(args, resolved):
    cfg = EvolutionConfig(args.omega, args.t)
    resolved.update(dim=args.dim, omega=args.omega, t=args.t)
    op = build_phase_operator_analytic(args.dim, PhaseWindow(args.theta0))
    evolved = evolve_phase_operator(op, cfg)
    if args.format == "csv" and not args.check:
        return evolved, EXIT_OK
    # independent route: conjugate by the diagonal unitary built with expm
    number = np.diag(np.arange(args.dim, dtype=float))
    u = linalg.expm(1j * cfg.omega * cfg.t * number)
    law_dev = float(np.max(np.abs(u @ op.entries @ u.conj().T - evolved.entries)))
    data = {"dim": args.dim, "omega": cfg.omega, "t": cfg.t, "method": op.method, "rotation_law_dev": law_dev}
    code = EXIT_OK
    if args.check:
        check = equation_of_motion_check(op, cfg.omega)
        ok = law_dev <= EVOLVE_LAW_TOL and check["commutator_vs_law"] <= EVOLVE_LAW_TOL \
            and check["finite_difference_vs_law"] <= EVOLVE_FD_TOL
        data["check"] = dict(check, law_tol=EVOLVE_LAW_TOL, fd_tol=EVOLVE_FD_TOL, passed=ok)
        code = EXIT_OK if ok else EXIT_CONVERGENCE
    return data, code


def cmd_compare(args, resolved):
    spec, state = _state(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ValidationError("--methods is empty")
    resolved.update(state=format_state_spec(spec), dim=state.dim, methods=methods)
    reports = {}
    for method in methods:
        report, grid = _moments(state, method, args)
        if grid is not None:
            resolved["grid"] = grid.describe()
        if method == "pb":
            resolved["pb"] = _pb_config(args, 255).describe()
        reports[method] = report.to_dict()
    data = {"state": state.label, "dim": state.dim, "reports": reports}
    if "q" in reports and "pb" in reports:
        data["variance_gap_q_minus_pb"] = reports["q"]["variance"] - reports["pb"]["variance"]
    return data, EXIT_OK


COMMANDS = {
    "acid-test": cmd_acid_test,
    "moments": cmd_moments,
    "operator": cmd_operator,
    "unitarity": cmd_unitarity,
    "evolve": cmd_evolve,
    "compare": cmd_compare,
}


def _versions():
    return {
        "phasekit": phasekit.__version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }


def _manifest_path(args):
    if args.manifest:
        return Path(args.manifest)
    if args.out:
        return sidecar_path(args.out, ".manifest.json")
    return Path("phasekit_manifest.json")


def _emit(args, result):
    """Write the result; returns the list of files produced."""
    outputs = []
    if args.out is None:
        sys.stdout.write(render(result, args.format))
        return outputs
    write_text(render(result, args.format), args.out)
    outputs.append(str(args.out))
    if args.command == "operator" and args.format == "csv":
        meta = sidecar_path(args.out, ".meta.json")
        write_text(json_text(operator_meta(result)), meta)
        outputs.append(str(meta))
    return outputs


def _fallback_args(argv):
    """Just enough of the command line to place a manifest after a parse error."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--manifest")
    probe.add_argument("--out")
    known, _ = probe.parse_known_args(argv)
    known.command = next((a for a in argv if a in COMMANDS), None)
    return known


def _write_manifest(args, argv, resolved, outputs, code, start):
    manifest = {
        "command": ["phasekit"] + argv,
        "subcommand": args.command,
        "resolved": resolved,
        "versions": _versions(),
        "outputs": outputs,
        "exit_code": code,
        "timing": {"wall_time_s": time.perf_counter() - start},
    }
    try:
        write_text(json_text(manifest), _manifest_path(args))
    except OSError as exc:
        print(f"phasekit: I/O error writing manifest: {exc}", file=sys.stderr)
        return code or EXIT_IO
    return code


def run_command(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return _write_manifest(_fallback_args(argv), argv, {}, [], EXIT_VALIDATION, start)
    resolved = {"radial": args.radial, "angular": args.angular, "theta0": args.theta0, "chi": args.chi,
                "series_order": args.series_order, "dim_work": args.dim_work, "pb_s": args.pb_s,
                "format": args.format}
    outputs = []
    try:
        result, code = COMMANDS[args.command](args, resolved)
        outputs = _emit(args, result)
    except (ConvergenceError, IntegrationError) as exc:
        print(f"phasekit: convergence failure: {exc}", file=sys.stderr)
        code = EXIT_CONVERGENCE
    except (ValidationError, ValueError) as exc:
        print(f"phasekit: {exc}", file=sys.stderr)
        code = EXIT_VALIDATION
    except PhasekitError as exc:
        print(f"phasekit: {exc}", file=sys.stderr)
        code = EXIT_CONVERGENCE
    except OSError as exc:
        print(f"phasekit: I/O error: {exc}", file=sys.stderr)
        code = EXIT_IO
    return _write_manifest(args, argv, resolved, outputs, code, start)


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
