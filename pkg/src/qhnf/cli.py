"""Command-line front end: ``qhnf cokernel | normalize | verify``.

Exit codes: 0 success (reduction with zero residue included), 2 precondition
violation, 3 verification failure, 4 parse error, 10 reduced with a nonzero
residue, 11 formally integrable up to the truncation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from typing import List, Optional

from . import __version__
from .errors import ParseError, PreconditionError, QHError
from .finalred import INTEGRABLE, compose_with_gauge, field_final_reduce, final_reduce
from .grading import Poly, format_poly
from .logfields import LogField, from_log_basis
from .milnor import is_isolated, milnor_basis
from .prenorm import Verification, prenormalize_field, prenormalize_foliation, verify_conjugacy
from .problem import (
    Certificate,
    ProblemFile,
    certificate_to_json,
    format_series,
    load_certificate,
    load_problem,
    series_to_json,
)

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_VERIFY = 3
EXIT_PARSE = 4
EXIT_RESIDUE = 10
EXIT_INTEGRABLE = 11


def monomial_text(m) -> str:
    return format_poly(Poly.monomial(*m))


def cokernel_report(problem: ProblemFile) -> List[str]:
    ctx = problem.context()
    if not ctx.isolated_hamiltonian:
        raise PreconditionError("the cokernel report needs h0 = h (isolated Hamiltonian X0)")
    if not is_isolated(ctx):
        raise PreconditionError(
            f"h = {format_poly(ctx.h, ctx.weights)} is not an isolated singularity: "
            "the Milnor algebra is infinite-dimensional, so Coker(X0) is not free of finite rank"
        )
    basis = milnor_basis(ctx)
    return [
        f"mu={basis.mu}; basis={','.join(monomial_text(m) for m in basis.monomials)}",
        f"r={','.join(str(r) for r in basis.exponents)}",
        "isolated=true",
    ]


@dataclass
class NormalizeResult:
    certificate: Certificate
    report: List[str]
    status: int
    verification: Verification


def run_normalize(problem: ProblemFile, K: Optional[int] = None, pick=None, pipeline: Optional[str] = None):
    """Prenormalize, reduce and self-check one problem."""
    pipeline = pipeline or problem.pipeline
    ctx = problem.context(K)
    X = problem.field
    if pipeline == "foliation":
        nf, script, _ = prenormalize_foliation(X, ctx)
        if pick is None and problem.pick is not None:
            pick = problem.pick - 1
        red = final_reduce(nf, ctx, pick)
    elif pipeline == "field":
        nf, script = prenormalize_field(X, ctx)
        red = field_final_reduce(nf, ctx)
    else:
        raise PreconditionError(f"normalize needs pipeline foliation or field, got {pipeline!r}")
    full = compose_with_gauge(script, nf, red, ctx)
    final = red.normal_form
    L = final.log_field(ctx)
    check = verify_conjugacy(X, full, final, ctx)
    rec = red.record
    report = [f"pipeline={pipeline}; K={ctx.K}; delta={ctx.delta}; delta0={ctx.delta0}"]
    basis = final.basis
    report.append(f"mu={basis.mu}; basis={','.join(monomial_text(m) for m in basis.monomials)}")
    report.append(f"generators={len(full.generators)}; fibered={str(full.fibered).lower()}")
    if final.field_part is not None:
        report.append(f"x0_coeff = {format_series({0: 1, **final.field_part.series(0)})}")
    for i, d in enumerate(final.d):
        report.append(f"d_{i + 1} = {format_series(d)}")
    record = {"status": rec.status}
    if rec.status == INTEGRABLE:
        report.append("status=integrable-up-to-K")
        status = EXIT_INTEGRABLE
    else:
        record.update(
            index=rec.index + 1, monomial=monomial_text(basis.monomials[rec.index]), m=rec.m, n=rec.n,
            q=rec.q, leading=str(rec.leading), residue=str(rec.lam), cover=rec.cover,
            rotation_order=rec.rotation_order,
        )
        if rec.x0_degree is not None:
            record["x0_degree"] = rec.x0_degree
        report.append(
            f"finalized: index={rec.index + 1}; m={rec.m}; n={rec.n}; q={rec.q}; "
            f"leading={rec.leading}; lambda={rec.lam}"
        )
        status = EXIT_RESIDUE if rec.lam else EXIT_OK
        report.append("status=" + ("reduced-with-residue" if rec.lam else "reduced-residue-zero"))
    extra = {
        "status": record["status"],
        "basis": [monomial_text(m) for m in basis.monomials],
        "d": [series_to_json(d) for d in final.d],
        "finalized": record,
    }
    if final.field_part is not None:
        extra["x0_series"] = series_to_json({0: 1, **final.field_part.series(0)})
    cert = Certificate(ctx.K, full.generators, full.unit, L.a, L.b, full.fibered, extra)
    report.append("certificate=" + ("verified" if check else "FAILED: " + check.describe()))
    return NormalizeResult(cert, report, status if check else EXIT_VERIFY, check)


def verify_certificate(problem: ProblemFile, cert: Certificate, K: Optional[int] = None):
    """Exact check of a certificate at ``min(problem K, certificate K)``.

    Returns ``(verification, K used, warning or None)``.
    """
    K = problem.truncation if K is None else K
    warning = None
    if cert.truncation < K:
        warning = f"certificate truncation {cert.truncation} is below the problem's {K}; verified up to {cert.truncation}"
        K = cert.truncation
    ctx = problem.context(K)
    N = from_log_basis(LogField(cert.x0_coeff, cert.r_coeff), ctx)
    return verify_conjugacy(problem.field, cert.script(), N, ctx, K), K, warning


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qhnf", description="Formal normal forms of quasi-homogeneous plane vector fields.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="problem file (JSON)")
        p.add_argument("--truncation", type=int, help="override the truncation degree K")

    p = sub.add_parser("cokernel", help="Milnor number and monomial cokernel basis")
    common(p)
    p = sub.add_parser("normalize", help="prenormalize, reduce, and emit a certificate")
    common(p)
    p.add_argument("--pick", type=int, help="1-based basis index of the coefficient to normalize")
    p.add_argument("--pipeline", choices=("foliation", "field"))
    p.add_argument("--emit-certificate", metavar="FILE", help="write the certificate here ('-' for stdout)")
    p = sub.add_parser("verify", help="check a certificate against a problem")
    common(p)
    p.add_argument("--verify", required=True, metavar="CERTIFICATE", help="certificate file to check")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    out = sys.stdout
    try:
        problem = load_problem(args.input)
        if args.truncation is not None and args.truncation < 1:
            raise PreconditionError("--truncation must be positive")
        if args.command == "cokernel":
            if args.truncation:
                problem = _with_truncation(problem, args.truncation)
            print("\n".join(cokernel_report(problem)), file=out)
            return EXIT_OK
        if args.command == "normalize":
            if problem.field is None:
                raise PreconditionError("problem has no 'field' entry")
            pick = None if args.pick is None else args.pick - 1
            res = run_normalize(problem, args.truncation, pick, args.pipeline)
            print("\n".join(res.report), file=out)
            if args.emit_certificate:
                text = certificate_to_json(res.certificate, problem, problem.context(args.truncation))
                if args.emit_certificate == "-":
                    out.write(text)
                else:
                    with open(args.emit_certificate, "w", encoding="utf-8", newline="\n") as fh:
                        fh.write(text)
            return res.status
        cert = load_certificate(args.verify)
        if problem.field is None:
            raise PreconditionError("problem has no 'field' entry")
        check, K, warning = verify_certificate(problem, cert, args.truncation)
        if warning:
            print(f"warning: {warning}", file=sys.stderr)
        if check:
            print(f"verified up to degree {K}", file=out)
            return EXIT_OK
        print(f"verification failed: {check.describe()}", file=out)
        return EXIT_VERIFY
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, QHError, ValueError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


def _with_truncation(problem: ProblemFile, K: int) -> ProblemFile:
    return replace(problem, truncation=K)


if __name__ == "__main__":
    sys.exit(main())
