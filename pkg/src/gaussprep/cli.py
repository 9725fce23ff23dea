"""Command line entry point: ``gaussprep <subcommand> ...``.

Exit codes: 0 ok, 2 usage, 3 validation, 4 verification failure.  Failures
print a one-line JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, acceptance
from .prep1d import PrepConfig, gate_count_report, prepare_xi
from .prepnd import NotPositiveDefinite, QuadraticForm, describe_preparation
from .resample import ScaleMap, gaussian_psi, parse_window, resample
from .statevec import MemoryCapError, Register, StateVector, read_state_csv, set_memory_cap, write_state_csv
from .theta import GaussianParams, theta, theta_direct, theta_poisson

OUTPUT_DIR_ENV = "GAUSSPREP_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_VERIFY = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _meta(args, **extra):
    params = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return acceptance.metadata(command=args.command, params=json.dumps(params, sort_keys=True, default=str), **extra)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _out_path(args, name):
    if name is None or os.path.isabs(name) or os.path.dirname(name):
        return name
    base = args.output_dir or os.environ.get(OUTPUT_DIR_ENV)
    if base:
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, name)
    return name


def cmd_theta(args):
    params = GaussianParams(args.sigma, args.mu)
    fn = {"auto": theta, "direct": theta_direct, "poisson": theta_poisson}[args.branch]
    t = fn(params, args.eps)
    print(f"value {t.value!r}")
    print(f"log_value {t.log_value!r}")
    print(f"branch {t.branch}")
    print(f"terms {t.terms}")
    return EXIT_OK


def cmd_prep1d(args):
    config = PrepConfig(GaussianParams(args.sigma, args.mu), args.n_qubits, args.angle_bits, args.rounding)
    state, trace = prepare_xi(config)
    report = {
        "meta": _meta(args),
        "summary": trace.summary,
        "warnings": trace.warnings,
        "level_angle_errors": trace.level_errors(),
    }
    if args.delta_target is not None:
        report["gate_count"] = gate_count_report(trace, args.delta_target)
    if args.dump_state:
        write_state_csv(_out_path(args, args.dump_state), state, _meta(args))
    if args.dump_trace:
        trace.write(_out_path(args, args.dump_trace), _meta(args))
    if args.report:
        _write_json(_out_path(args, args.report), report)
    print(json.dumps(report["summary"], sort_keys=True))
    for w in trace.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _parse_ints(text):
    return [int(v) for v in text.split(",")]


def cmd_prepnd(args):
    form = QuadraticForm.from_file(args.matrix)
    mean = _parse_ints(args.mean) if args.mean else None
    if mean is not None and len(mean) != form.S:
        raise UsageError(f"--mean needs {form.S} components")
    state, report = describe_preparation(form, args.k_bits, mean, args.rounding)
    report = {"meta": _meta(args), **report}
    if args.dump_state:
        write_state_csv(_out_path(args, args.dump_state), state, _meta(args))
    if args.report:
        _write_json(_out_path(args, args.report), report)
    print(json.dumps({k: report[k] for k in ("D", "congruence_residual", "det_relative_error", "fidelity")}, sort_keys=True, default=float))
    return EXIT_OK


def _load_psi(spec, n):
    if spec.startswith("gaussian:"):
        sigma, mu = (float(v) for v in spec[len("gaussian:") :].split(","))
        return gaussian_psi(sigma, mu, n), GaussianParams(sigma, mu)
    state = read_state_csv(spec, (Register("A", n),))
    return state, None


def cmd_resample(args):
    n = args.n_qubits
    psi, psi_params = _load_psi(args.psi, n)
    scale = ScaleMap(args.a)
    window = parse_window(args.window)
    state_B, rep = resample(psi, scale, window, psi_params)
    payload = {"meta": _meta(args), **rep.as_dict()}
    if args.dump_b_state:
        write_state_csv(_out_path(args, args.dump_b_state), state_B, _meta(args), signed=False)
    if args.band_csv:
        from .resample import band_diagnostic, joint_state, shift_add_B

        band = band_diagnostic(shift_add_B(joint_state(psi, window), scale), scale)
        band.write_csv(_out_path(args, args.band_csv), _meta(args))
    if args.report:
        _write_json(_out_path(args, args.report), payload)
    print(json.dumps({k: payload[k] for k in ("prob_A_zero", "fidelity_B_vs_target", "strip_agreement")}, sort_keys=True))
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _parse_range(text):
    if ":" in text:
        lo, hi = (int(v) for v in text.split(":"))
        return list(range(lo, hi + 1))
    return [int(v) for v in text.split(",")]


def _floats(text):
    return [float(v) for v in text.split(",")]


def _validate_sweep(args):
    """Reject a sweep whose largest grid point would exceed the memory cap."""
    exp = args.experiment
    if exp == "angle-bits":
        qubits = args.n_qubits
    elif exp == "prepnd-ladder":
        S = QuadraticForm.from_file(args.matrix).S if args.matrix else 2
        qubits = S * args.k_bits
    else:
        qubits = 2 * args.n_qubits
    if 2**qubits > args.max_amplitudes:
        raise MemoryCapError(f"sweep {exp} needs 2**{qubits} amplitudes, above the cap of {args.max_amplitudes}")


def cmd_sweep(args):
    _validate_sweep(args)
    exp = args.experiment
    if exp == "angle-bits":
        columns = ("k", "distance", "bound")
        rows = acceptance.angle_bit_sweep(args.n_qubits, args.sigma, args.mu, _parse_range(args.k), args.rounding)
    elif exp == "band-sigma":
        columns = ("sigma_psi", "n", "gap")
        rows = [(s, args.window_n, acceptance.band_gap(s, args.window_n, args.a, args.n_qubits, args.mu)) for s in _floats(args.sigma_list)]
    elif exp == "band-n":
        columns = ("sigma_psi", "n", "gap")
        rows = [(args.sigma, w, acceptance.band_gap(args.sigma, w, args.a, args.n_qubits, args.mu)) for w in _parse_range(args.n_list)]
    elif exp == "window-size":
        columns = ("window", "prob_A_zero", "fidelity", "strip_gap")
        psi = gaussian_psi(args.sigma, args.mu, args.n_qubits)
        rows = []
        for w in _parse_range(args.n_list):
            for spec in (f"uniform:{w}", f"gaussian:{w}"):
                _, rep = resample(psi, ScaleMap(args.a), parse_window(spec), GaussianParams(args.sigma, args.mu))
                rows.append((spec, rep.prob_A_zero, rep.fidelity_B_vs_target, rep.strip_agreement))
    elif exp == "prepnd-ladder":
        columns = ("scale", "k", "min_sigma", "fidelity")
        base = QuadraticForm.from_file(args.matrix).A if args.matrix else np.array([[0.02, 0.01], [0.01, 0.02]])
        rows = []
        for s in _floats(args.sigma_list):
            _, rep = describe_preparation(QuadraticForm(base / s**2), args.k_bits)
            rows.append((s, args.k_bits, float(min(1 / np.sqrt(rep["D"]))), rep["fidelity"]))
    else:
        raise UsageError(f"unknown experiment {exp!r}")
    path = _out_path(args, args.out or f"sweep_{exp}.csv")
    with open(path, "w") as fh:
        for key, val in _meta(args).items():
            fh.write(f"# {key}={val}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    print(path)
    return EXIT_OK


def cmd_verify(args):
    out_dir = args.out or args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "verify_artifacts"
    results = acceptance.run_all()
    names = acceptance.write_artifacts(results, out_dir)
    if not args.skip_determinism:
        results.append(acceptance.determinism_check(out_dir, names))
    for r in results:
        print(acceptance.format_row(r))
    failed = [r.cid for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed; artifacts in {out_dir}")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="gaussprep", description="Gaussian state preparation and resampling simulator")
    p.add_argument("--version", action="version", version=f"gaussprep {__version__}")
    p.add_argument("--max-amplitudes", type=int, default=2**26, help="memory cap on state size")
    p.add_argument("--threads", type=int, default=1, help="worker count (kernels are single threaded; recorded in metadata)")
    p.add_argument("--output-dir", default=None, help=f"directory for relative output names (default ${OUTPUT_DIR_ENV})")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("theta", help="evaluate f(sigma, mu)")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--eps", type=float, default=1e-17)
    s.add_argument("--branch", choices=("auto", "direct", "poisson"), default="auto")
    s.set_defaults(func=cmd_theta)

    s = sub.add_parser("prep1d", help="prepare a 1D periodized Gaussian")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--n-qubits", type=int, required=True)
    s.add_argument("--angle-bits", type=int, default=None)
    s.add_argument("--rounding", choices=("nearest", "truncate"), default="nearest")
    s.add_argument("--delta-target", type=float, default=None)
    s.add_argument("--dump-state")
    s.add_argument("--dump-trace")
    s.add_argument("--report")
    s.set_defaults(func=cmd_prep1d)

    s = sub.add_parser("prepnd", help="prepare a multidimensional Gaussian")
    s.add_argument("--matrix", required=True)
    s.add_argument("--k-bits", type=int, required=True)
    s.add_argument("--mean")
    s.add_argument("--rounding", choices=("floor", "nearest"), default="floor")
    s.add_argument("--dump-state")
    s.add_argument("--report")
    s.set_defaults(func=cmd_prepnd)

    s = sub.add_parser("resample", help="two-register resampling under y = x / a")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--psi", required=True, help="gaussian:sigma,mu or a state CSV")
    s.add_argument("--n-qubits", type=int, required=True)
    s.add_argument("--window", required=True, help="uniform:n or gaussian:sigma[,mu]")
    s.add_argument("--dump-b-state")
    s.add_argument("--band-csv")
    s.add_argument("--report")
    s.set_defaults(func=cmd_resample)

    s = sub.add_parser("sweep", help="parameter sweeps written as CSV")
    s.add_argument("--experiment", required=True, choices=("angle-bits", "band-sigma", "band-n", "window-size", "prepnd-ladder"))
    s.add_argument("--n-qubits", type=int, default=8)
    s.add_argument("--k", default="8:16")
    s.add_argument("--sigma", type=float, default=16.0)
    s.add_argument("--mu", type=float, default=128.0)
    s.add_argument("--rounding", choices=("nearest", "truncate"), default="nearest")
    s.add_argument("--a", type=float, default=1.5)
    s.add_argument("--window-n", type=int, default=16)
    s.add_argument("--n-list", default="4,16,64")
    s.add_argument("--sigma-list", default="30,60,120")
    s.add_argument("--matrix")
    s.add_argument("--k-bits", type=int, default=8)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify", help="run the acceptance criteria")
    s.add_argument("--out")
    s.add_argument("--skip-determinism", action="store_true")
    s.set_defaults(func=cmd_verify)
    return p


def _fail(code, exc):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    old_cap = set_memory_cap(args.max_amplitudes)
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except (ValueError, MemoryCapError, NotPositiveDefinite, OSError) as exc:
        return _fail(EXIT_VALIDATION, exc)
    finally:
        set_memory_cap(old_cap)


if __name__ == "__main__":
    sys.exit(main())
