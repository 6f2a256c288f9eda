"""Command-line front end: ``schrosym {count,killing,determine,solve,spectral}``.

Convention: L = i*dt - 1/2*((p-e*A)^2 + V).  Note the factor 1/2 on V; a
physics potential U(x) corresponds to ``--potential "2*U"``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .determining import (
    CONVENTION,
    SchrodingerSpec,
    build_H,
    build_L,
    generate_determining_system,
    restrict_time_independent,
    solve_polynomial_ansatz,
)
from .diffop import ExpPolyOp, commutator, symmetry_defect
from .enumeration import PROVEN_MAX_N, count_S, count_table, killing_basis
from .exactnum import Poly
from .expr_io import (
    ParseError,
    format_json,
    format_operator,
    format_poly,
    operator_to_json,
    poly_to_json,
    scalar_to_json,
)
from .spectral import spectral_analysis, spectral_symmetry_basis, theorem3_decide

COMMANDS = ("count", "killing", "determine", "solve", "spectral")


class VerificationError(RuntimeError):
    """An emitted operator failed exact re-verification (an internal bug)."""


@dataclass
class RunConfig:
    command: str
    n: int
    q: int = 1
    potential: str = "0"
    vector_potential: List[str] = field(default_factory=list)
    e: str = "1"
    D: Optional[int] = None
    M: Optional[int] = None
    output: str = "text"
    verify: bool = True
    rank: int = 0
    order: int = 1
    time_independent: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.n < 1:
            raise ValueError("--n must be >= 1")
        if self.q < 0:
            raise ValueError("--q must be >= 0")
        for name in ("D", "M"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"--{name} must be >= 0")
        if self.output not in ("text", "json"):
            raise ValueError("--format must be text or json")

    def spec(self) -> SchrodingerSpec:
        vp = []
        for item in self.vector_potential:
            vp.extend(s for s in item.split(",") if s.strip())
        if vp and len(vp) != self.n:
            raise ValueError(f"--vector-potential needs {self.n} components, got {len(vp)}")
        return SchrodingerSpec.from_strings(self.n, self.potential, vp or None, self.e)


def _header(cfg: RunConfig) -> dict:
    out = {"command": cfg.command, "n": cfg.n, "q": cfg.q, "convention": CONVENTION}
    if cfg.n > PROVEN_MAX_N:
        out["outside_proven_range"] = True
    return out


def _verify_ops(spec: SchrodingerSpec, ops: Sequence[ExpPolyOp]):
    if spec.is_time_independent():
        H = build_H(spec)
        for R in ops:
            if not symmetry_defect(H, R).is_zero():
                raise VerificationError(f"operator failed verification: {format_operator(R)}")
    else:
        L = build_L(spec)
        for R in ops:
            for lam, op in R.branches.items():
                if lam or not commutator(L, op).is_zero():
                    raise VerificationError(f"operator failed verification: {format_operator(R)}")


def _cmd_count(cfg: RunConfig) -> Tuple[dict, str]:
    table = count_table(cfg.n, cfg.q)
    report = _header(cfg)
    report["counts"] = table.to_json()
    lines = [
        f"n={cfg.n} q={cfg.q}",
        f"N_hat   = {table.N_hat}   (bound on all symmetries of order <= q)",
        f"N_tilde = {table.N_tilde}   (bound on time-independent symmetries)",
        "S_j     = " + " ".join(map(str, table.S)),
        "K_j     = " + " ".join(map(str, table.K)),
    ]
    return report, "\n".join(lines)


def _cmd_killing(cfg: RunConfig) -> Tuple[dict, str]:
    kb = killing_basis(cfg.n, cfg.rank, cfg.order, cfg.D)
    expected = count_S(cfg.n, cfg.rank + cfg.order - 1, cfg.rank)
    report = _header(cfg)
    report.update(
        {
            "rank": cfg.rank,
            "order": cfg.order,
            "dimension": kb.dimension,
            "closed_form": expected,
            "bounds": {"D": kb.max_degree, "M": None, "saturated": kb.saturated},
            "basis": [
                [{"index": list(idx), "coeff": poly_to_json(p)} for idx, p in sorted(t.items())]
                for t in kb.tensors
            ],
        }
    )
    lines = [
        f"rank {cfg.rank}, order {cfg.order}, n={cfg.n}, D={kb.max_degree}: dimension {kb.dimension}"
        f" (closed form {expected}, saturated={kb.saturated})"
    ]
    for k, t in enumerate(kb.tensors):
        comps = ", ".join(f"F{list(idx)} = {format_poly(p)}" for idx, p in sorted(t.items()))
        lines.append(f"  [{k}] {comps}")
    return report, "\n".join(lines)


def _cmd_determine(cfg: RunConfig) -> Tuple[dict, str]:
    spec = cfg.spec()
    system = generate_determining_system(spec, cfg.q)
    report = _header(cfg)
    report["equations"] = system.to_json()
    return report, system.to_text()


def _basis_lines(ops: Sequence[ExpPolyOp]) -> List[str]:
    return [f"  [{k}] {format_operator(R)}" for k, R in enumerate(ops)]


def _cmd_solve(cfg: RunConfig) -> Tuple[dict, str]:
    spec = cfg.spec()
    if cfg.time_independent:
        basis = restrict_time_independent(spec, cfg.q, cfg.D)
    else:
        basis = solve_polynomial_ansatz(spec, cfg.q, cfg.D, cfg.M)
    if cfg.verify:
        _verify_ops(spec, basis.operators)
    report = _header(cfg)
    report.update(
        {
            "dimension": basis.dimension,
            "bounds": {"D": basis.D, "M": basis.M, "saturated": basis.saturated},
            "basis": [operator_to_json(R) for R in basis.operators],
        }
    )
    lines = [
        f"{CONVENTION}",
        f"dimension {basis.dimension} (D={basis.D}, M={basis.M}, saturated={basis.saturated})",
    ] + _basis_lines(basis.operators)
    return report, "\n".join(lines)


def _cmd_spectral(cfg: RunConfig) -> Tuple[dict, str]:
    spec = cfg.spec()
    analysis = spectral_analysis(spec, cfg.q, cfg.D)
    verdict = theorem3_decide(analysis)
    basis = spectral_symmetry_basis(analysis, cfg.q)
    if cfg.verify:
        _verify_ops(spec, basis.operators)
    chains = [ch for lam in sorted(analysis.chains, key=lambda z: (z.re, z.im)) for ch in analysis.chains[lam]]
    report = _header(cfg)
    report.update(
        {
            "dimension": basis.dimension,
            "bounds": {"D": analysis.space.D, "M": None, "saturated": analysis.saturated},
            "basis": [operator_to_json(R) for R in basis.operators],
            "analysis": {
                "invariant_dimension": analysis.dimension,
                "charpoly": [scalar_to_json(c) for c in analysis.charpoly.coeffs],
                "charpoly_text": str(analysis.charpoly),
                "eigenvalues": [
                    {"lambda": scalar_to_json(l), "multiplicity": m} for l, m in analysis.eigenvalues
                ],
                "residual": [scalar_to_json(c) for c in analysis.residual.coeffs],
                "residual_text": str(analysis.residual),
            },
            "chains": [
                {
                    "lambda": scalar_to_json(ch.lam),
                    "chain": [operator_to_json(c) for c in ch.chain],
                    "R": operator_to_json(ch.R),
                }
                for ch in chains
            ],
            "verdict": {
                "has_time_dependent": verdict.has_time_dependent,
                "case1": [
                    {"lambda": scalar_to_json(l), "K0": operator_to_json(k)} for l, k in verdict.case1
                ],
                "case2": [
                    {"K0": operator_to_json(k0), "K1": operator_to_json(k1)} for k0, k1 in verdict.case2
                ],
                "case1_unavailable": verdict.case1_unavailable,
            },
            "mastersymmetries": [operator_to_json(k) for k in verdict.mastersymmetries],
        }
    )
    lines = [
        CONVENTION,
        f"invariant subspace dimension {analysis.dimension} (D={analysis.space.D}, saturated={analysis.saturated})",
        f"characteristic polynomial: {analysis.charpoly}",
        "eigenvalues: " + (", ".join(f"{l} [multiplicity {m}]" for l, m in analysis.eigenvalues) or "none in Q(i)"),
        f"residual factor: {analysis.residual}",
        f"time-dependent symmetries: {'yes' if verdict.has_time_dependent else 'no'}",
    ]
    for lam, k0 in verdict.case1:
        lines.append(f"  case 1: exp({format_poly(Poly.time(cfg.n).scale(lam))})*({format_operator(k0)})")
    for k0, k1 in verdict.case2:
        lines.append(f"  case 2: K0 = {format_operator(k0)}, K1 = {format_operator(k1)}")
    if verdict.case1_unavailable:
        lines.append("  case 1 witnesses unavailable: nonzero eigenvalues outside Q(i)")
    lines.append(f"mastersymmetries: {len(verdict.mastersymmetries)}")
    lines += [f"  {format_operator(k)}" for k in verdict.mastersymmetries]
    lines.append(f"symmetries from chains: {basis.dimension}")
    lines += _basis_lines(basis.operators)
    return report, "\n".join(lines)


_DISPATCH = {
    "count": _cmd_count,
    "killing": _cmd_killing,
    "determine": _cmd_determine,
    "solve": _cmd_solve,
    "spectral": _cmd_spectral,
}


def run(cfg: RunConfig) -> Tuple[int, str]:
    """Execute ``cfg``; returns (exit status, report text).  Diagnostics go to stderr."""
    try:
        cfg.validate()
        if cfg.n > PROVEN_MAX_N:
            print(f"warning: n={cfg.n} is outside the proven range n <= {PROVEN_MAX_N}", file=sys.stderr)
        report, text = _DISPATCH[cfg.command](cfg)
    except ParseError as exc:
        print(f"error: {exc}\n{exc.pointer()}", file=sys.stderr)
        return 1, ""
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1, ""
    except (AssertionError, VerificationError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2, ""
    if cfg.output == "json":
        return 0, format_json(report)
    return 0, text + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schrosym",
        description="Exact symmetry operators of the Schrodinger equation "
        "L = i*dt - 1/2*((p-e*A)^2 + V). V enters with a factor 1/2.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, potentials=True):
        p.add_argument("--n", type=int, required=True, help="space dimension")
        p.add_argument("--q", type=int, default=1, help="maximal operator order")
        p.add_argument("--format", dest="output", choices=("text", "json"), default="text")
        if potentials:
            p.add_argument("--potential", default="0", help="scalar potential V (enters L as V/2)")
            p.add_argument(
                "--vector-potential", action="append", default=[],
                help="component(s) of A; repeat the flag or separate components with commas",
            )
            p.add_argument("--charge", dest="e", default="1", help="charge e (rational)")
            p.add_argument("--D", type=int, default=None, help="coefficient degree bound in x")
            p.add_argument("--no-verify", dest="verify", action="store_false")

    common(sub.add_parser("count", help="closed-form counts N_hat, N_tilde, S_j, K_j"), potentials=False)
    pk = sub.add_parser("killing", help="generalized Killing tensor basis")
    common(pk, potentials=False)
    pk.add_argument("--rank", type=int, default=1)
    pk.add_argument("--order", type=int, default=1)
    pk.add_argument("--D", type=int, default=None)
    common(sub.add_parser("determine", help="print the determining system"))
    ps = sub.add_parser("solve", help="brute-force polynomial ansatz")
    common(ps)
    ps.add_argument("--M", type=int, default=None, help="degree bound in t")
    ps.add_argument("--time-independent", action="store_true")
    common(sub.add_parser("spectral", help="adjoint-action analysis and time-dependence verdict"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__})
    status, text = run(cfg)
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
