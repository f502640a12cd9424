"""Command-line front end.

Every subcommand reads a system document and prints a JSON result on
standard output.  Exit codes: 0 success, 2 parse error, 3 validation
failure, 4 math-domain error, 5 internal error.
"""

import argparse
import json
import sys as _sys

import numpy as np

from . import io
from .bvp import expand, solve_bvp, solve_bvp_dense_oracle
from .core import semi_inner_product, semi_norm, validate_system
from .eigenbasis import orthonormal_eigen_set
from .errors import (
    AtkinsonError,
    BoundaryMatrixError,
    DegenerateSpectrumError,
    DomainError,
    DssError,
    EigenvalueProximityError,
    PreconditionError,
    StructuralError,
)
from .propagation import fundamental_solutions
from .families import block_ab, sl_scalar
from .measure import imaginary_excess, m_integral_representation, spectral_function
from .spectrum import check_atkinson, eigenvalues
from .weyl import green_kernel, m_function

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_DOMAIN, EXIT_INTERNAL = 0, 2, 3, 4, 5
REPORT_LAMBDAS = (1j, 1 + 1j, -2 + 0.5j)


class UsageError(Exception):
    pass


def _complex(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}")
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}")
    return complex(parts[0], parts[1])


def _matrix_arg(text):
    try:
        return io.decode_array(json.loads(text), 2)
    except (json.JSONDecodeError, io.ParseError) as exc:
        raise io.ParseError(f"bad matrix argument {text!r}: {exc}")


def _load(args):
    system, alpha, beta, meta = io.load_system(args.system)
    if getattr(args, "alpha", None):
        alpha = io.as_boundary(_matrix_arg(args.alpha), system.n)
    if getattr(args, "beta", None):
        beta = io.as_boundary(_matrix_arg(args.beta), system.n)
    return system, alpha, beta


def _need(alpha, beta=True):
    if alpha is None or beta is None:
        raise UsageError("boundary matrices are required (in the document or via --alpha/--beta)")


def _eig_rows(system, alpha, found):
    rows = []
    for ev in found.eigenvalues:
        Zt = fundamental_solutions(system, alpha, ev.lam).Ztilde
        norms = [semi_norm(system, Zt @ xi) for xi in ev.kernel_basis.T]
        rows.append({
            "lambda": ev.lam,
            "alg_mult": ev.alg_mult,
            "geom_mult": ev.geom_mult,
            "kernel_residual": ev.residual,
            "eigenfunction_norms": norms,
        })
    return rows


def cmd_validate(args):
    system, _, _, _ = io.load_system(args.system, args.tol)
    report = validate_system(system, args.tol)
    return {"n": system.n, "N": system.N, "validation": report.to_dict()}


def cmd_spectrum(args):
    system, alpha, beta = _load(args)
    _need(alpha, beta)
    found = eigenvalues(system, alpha, beta, eig_tol=args.tol)
    return {
        "degenerate": found.degenerate,
        "atkinson_holds": found.atkinson_holds,
        "degree": found.char_poly.degree,
        "char_poly": [complex(c) for c in found.char_poly.coeffs],
        "eigenvalues": _eig_rows(system, alpha, found),
    }


def cmd_atkinson(args):
    system, alpha, beta = _load(args)
    _need(alpha)
    probes = tuple(args.probes) if args.probes else (0, 1j, 1 + 1j)
    res = check_atkinson(system, alpha, probes)
    return {
        "holds": res.holds,
        "consistent": res.consistent,
        "probes": [complex(p) for p in res.probes],
        "min_eigenvalues": list(res.min_eigs),
    }


def cmd_mfunction(args):
    system, alpha, beta = _load(args)
    _need(alpha, beta)
    val = m_function(system, alpha, beta, args.lam)
    out = {"lambda": val.lam, "M": val.M, "condition": val.cond}
    if args.check_representation:
        rep = m_integral_representation(system, alpha, beta, args.lam)
        out["representation"] = {
            "M_rebuilt": rep.M_rebuilt,
            "gap": rep.gap,
            "imaginary_gap": rep.im_gap,
            "M0": rep.M0,
            "M1": rep.M1,
        }
    return out


def cmd_green(args):
    system, alpha, beta = _load(args)
    _need(alpha, beta)
    if not 0 <= args.row <= system.N + 1:
        raise UsageError(f"row must lie in [0, {system.N + 1}]")
    G = green_kernel(system, alpha, beta, args.lam)
    return {"lambda": G.lam, "row": args.row, "G": G.row(args.row)}


def cmd_solve(args):
    system, alpha, beta = _load(args)
    _need(alpha, beta)
    f = io.load_sequence(args.rhs, "f")
    xi = io.decode_array(json.loads(args.xi), 1) if args.xi else None
    if args.oracle:
        sol = solve_bvp_dense_oracle(system, alpha, beta, args.lam, f, xi)
    else:
        sol = solve_bvp(system, alpha, beta, args.lam, f, xi)
    return {
        "lambda": sol.lam,
        "method": sol.method,
        "z": sol.z,
        "boundary_residual": sol.boundary_residual,
        "step_residual": sol.step_residual,
        "consistency_residual": sol.consistency_residual,
    }


def cmd_expand(args):
    system, alpha, beta = _load(args)
    _need(alpha, beta)
    zhat = io.load_sequence(args.zhat, "zhat")
    f = io.load_sequence(args.rhs, "f")
    res = expand(system, alpha, beta, zhat, f)
    return {
        "coefficients": res.coefficients,
        "norm_sq": res.norm_sq,
        "coefficient_sum_sq": float(np.sum(np.abs(res.coefficients) ** 2)),
        "parseval_gap": res.parseval_gap,
        "residual_seminorm": res.residual_seminorm,
    }


def _tau_samples(tau, count):
    pts = np.array(tau.points) if tau.points else np.array([0.0])
    lo, hi = pts.min(), pts.max()
    pad = max(1.0, 0.1 * (hi - lo))
    grid = np.linspace(lo - pad, hi + pad, count)
    return np.unique(np.concatenate([grid, pts, [0.0]]))


def cmd_spectral_fn(args):
    system, alpha, beta = _load(args)
    _need(alpha, beta)
    tau = spectral_function(system, alpha, beta)
    if args.emit_plot:
        n = system.n
        with open(args.emit_plot, "w") as fh:
            cols = [f"re_tau_{i}{j}\tim_tau_{i}{j}" for i in range(n) for j in range(n)]
            fh.write("t\t" + "\t".join(cols) + "\n")
            for t in _tau_samples(tau, args.samples):
                T = tau.tau_at(t)
                vals = []
                for i in range(n):
                    for j in range(n):
                        vals += [io._fmt_float(T[i, j].real), io._fmt_float(T[i, j].imag)]
                fh.write(io._fmt_float(float(t)) + "\t" + "\t".join(vals) + "\n")
    return {"jumps": [{"t": t, "D": D} for t, D in zip(tau.points, tau.jumps)]}


def cmd_report(args):
    system, alpha, beta = _load(args)
    _need(alpha, beta)
    report = {"n": system.n, "N": system.N, "validation": validate_system(system).to_dict()}
    atk = check_atkinson(system, alpha)
    report["atkinson"] = {"holds": atk.holds, "min_eigenvalues": list(atk.min_eigs)}
    found = eigenvalues(system, alpha, beta)
    report["spectrum"] = {
        "degenerate": found.degenerate,
        "count": sum(e.alg_mult for e in found.eigenvalues),
        "eigenvalues": _eig_rows(system, alpha, found),
    }
    checks = {}
    if not found.degenerate and atk.holds:
        eigset = orthonormal_eigen_set(system, alpha, beta, found)
        if len(eigset):
            F = eigset.functions.transpose(1, 2, 0)
            gram = semi_inner_product(system, F, F)
            checks["orthonormality_gap"] = float(np.abs(gram - np.eye(len(eigset))).max())
        tau = spectral_function(system, alpha, beta, eigset)
        report["tau_jumps"] = [{"t": t, "D": D} for t, D in zip(tau.points, tau.jumps)]
        samples = []
        for lam in REPORT_LAMBDAS:
            try:
                M = m_function(system, alpha, beta, lam).M
            except EigenvalueProximityError:
                continue
            Mc = m_function(system, alpha, beta, lam.conjugate()).M
            rep = m_integral_representation(system, alpha, beta, lam, tau=tau)
            samples.append({"lambda": lam, "M": M})
            checks.setdefault("reflection_gap", 0.0)
            checks["reflection_gap"] = max(checks["reflection_gap"], float(np.abs(Mc - M.conj().T).max()))
            im_min = float(np.linalg.eigvalsh((M - M.conj().T) / 2j * np.sign(lam.imag))[0])
            checks["nevanlinna_min_eig"] = min(checks.get("nevanlinna_min_eig", np.inf), im_min)
            checks["representation_gap"] = max(checks.get("representation_gap", 0.0), rep.gap)
        excess = imaginary_excess(system, alpha, beta, 2j, tau)
        checks["imaginary_excess_min_eig"] = float(np.linalg.eigvalsh(excess)[0])
        report["m_samples"] = samples
    report["checks"] = checks
    return report


def cmd_build_example(args):
    if args.family == "sl-scalar":
        if not args.v:
            raise UsageError("sl-scalar needs --v")
        system = sl_scalar(args.v)
        default = np.array([[1.0, 0.0]])
        meta = {"family": "sl-scalar", "v": ",".join(repr(x) for x in args.v)}
    else:
        if args.a is None or args.b is None or args.N is None:
            raise UsageError("block-ab needs --a, --b and --N")
        system = block_ab(args.a, args.b, args.N)
        default = np.hstack([np.eye(2), np.zeros((2, 2))])
        meta = {"family": "block-ab", "a": repr(args.a), "b": repr(args.b), "N": str(args.N)}
    alpha = io.as_boundary(_matrix_arg(args.alpha), system.n) if args.alpha else default
    beta = io.as_boundary(_matrix_arg(args.beta), system.n) if args.beta else default
    doc = io.system_document(system, alpha, beta, meta)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(io.dumps(doc) + "\n")
        return {"written": args.output}
    return doc


def build_parser():
    p = argparse.ArgumentParser(prog="dsspec", description="Spectral analysis of discrete symplectic systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_system(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("system", help="system document (JSON)")
        sp.add_argument("--alpha", help="override alpha, JSON matrix")
        sp.add_argument("--beta", help="override beta, JSON matrix")
        sp.set_defaults(func=func)
        return sp

    sp = sub.add_parser("validate", help="check the structural hypotheses")
    sp.add_argument("system")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_validate)

    with_system("spectrum", cmd_spectrum, "eigenvalues and multiplicities").add_argument(
        "--tol", type=float, default=1e-8
    )
    with_system("atkinson", cmd_atkinson, "definiteness condition").add_argument(
        "--probes", type=_complex, nargs="+"
    )
    sp = with_system("mfunction", cmd_mfunction, "evaluate M(lambda)")
    sp.add_argument("--lambda", dest="lam", type=_complex, required=True)
    sp.add_argument("--check-representation", action="store_true")
    sp = with_system("green", cmd_green, "one row of the Green kernel")
    sp.add_argument("--lambda", dest="lam", type=_complex, required=True)
    sp.add_argument("--row", type=int, required=True)
    sp = with_system("solve", cmd_solve, "nonhomogeneous boundary value problem")
    sp.add_argument("--lambda", dest="lam", type=_complex, required=True)
    sp.add_argument("--rhs", required=True, help="JSON file with the sequence f")
    sp.add_argument("--xi", help="boundary datum, JSON vector")
    sp.add_argument("--oracle", action="store_true", help="use the dense stacked solver")
    sp = with_system("expand", cmd_expand, "eigenfunction expansion with Parseval check")
    sp.add_argument("--zhat", required=True)
    sp.add_argument("--rhs", required=True)
    sp = with_system("spectral-fn", cmd_spectral_fn, "spectral step function")
    sp.add_argument("--emit-plot", help="write tab-separated samples of tau to this file")
    sp.add_argument("--samples", type=int, default=201)
    with_system("report", cmd_report, "full pipeline summary")

    sp = sub.add_parser("build-example", help="write a standard example system")
    sp.add_argument("family", choices=["sl-scalar", "block-ab"])
    sp.add_argument("--v", type=float, nargs="+")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--N", type=int)
    sp.add_argument("--alpha")
    sp.add_argument("--beta")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_build_example)
    return p


def _error(kind, message, stream, **extra):
    payload = {"error": kind, "message": message}
    payload.update(extra)
    stream.write(io.dumps(payload) + "\n")


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or _sys.stdout
    stderr = stderr or _sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        result = args.func(args)
        stdout.write(io.dumps(result) + "\n")
        return EXIT_OK
    except io.ValidationFailed as exc:
        _error("validation", str(exc), stderr, report=exc.report.to_dict())
        return EXIT_VALIDATION
    except (io.ParseError, StructuralError, BoundaryMatrixError, UsageError, OSError) as exc:
        _error("parse", str(exc), stderr)
        return EXIT_PARSE
    except (EigenvalueProximityError, AtkinsonError, DegenerateSpectrumError, DomainError, PreconditionError) as exc:
        _error("domain", str(exc), stderr)
        return EXIT_DOMAIN
    except (DssError, Exception) as exc:  # noqa: BLE001
        _error("internal", f"{type(exc).__name__}: {exc}", stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
