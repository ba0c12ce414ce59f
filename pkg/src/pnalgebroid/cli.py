"""Command-line surface: load spec files or built-in fixtures, run verdict
suites, emit text or JSON reports.

Exit codes: 0 all verdicts pass, 1 a hypothesis fails (witness in the
report), 2 parse/usage error, 3 a numeric check was ill-conditioned.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from . import linalg, reduction
from .expr import Expr
from .poisson import (
    is_poisson, are_compatible, invert_poisson, symplectic_check,
    DegenerateBivector, Bivector,
)
from .nijenhuis import pn_check, recursion_operator, hierarchy_check, Endo
from .reduction import (
    EpimorphismSpec, LeafSpec, default_tolerance, restrict_to_leaf,
    riesz_report, fiberwise_reduce, sample_points,
    projectable_bivector_check, projectable_endo_check,
    project_bivector, project_endo, NotBasic,
)
from .specio import SpecDocument, SpecFileError, load_document, serialize_document
from .fixtures import build_toda, build_aff1

try:
    from importlib.metadata import version as _pkg_version
    VERSION = _pkg_version("artifact")
except Exception:  # pragma: no cover
    VERSION = "0.1.0"

# sampling boxes keeping fixture points away from singular loci
DEFAULT_BOXES = {"a": (0.5, 2.0), "mu": (-2.0, 2.0)}


def _box_for(variables: list[str]) -> dict[str, tuple[float, float]]:
    box = {}
    for v in variables:
        for prefix, rng in DEFAULT_BOXES.items():
            if v.startswith(prefix):
                box[v] = rng
                break
    return box


@dataclass
class Check:
    name: str
    ok: bool
    witness: Optional[str] = None
    ill_conditioned: bool = False
    seconds: float = 0.0


@dataclass
class Report:
    command: str
    inputs_digest: str
    tolerance: float
    seed: Optional[int] = None
    checks: list[Check] = field(default_factory=list)
    payload: dict = field(default_factory=dict)
    version: str = VERSION

    def add(self, name: str, ok: bool, witness: Optional[str] = None,
            ill: bool = False, seconds: float = 0.0) -> None:
        self.checks.append(Check(name, bool(ok), witness, bool(ill), seconds))

    @property
    def exit_code(self) -> int:
        if any(not c.ok for c in self.checks):
            return 1
        if any(c.ill_conditioned for c in self.checks):
            return 3
        return 0

    def emit(self, fmt: str, out=None) -> None:
        out = out if out is not None else sys.stdout
        if fmt == "json":
            obj = {
                "command": self.command,
                "inputs": self.inputs_digest,
                "version": self.version,
                "tolerance": self.tolerance,
                "seed": self.seed,
                "checks": [
                    {
                        "name": c.name,
                        "verdict": "pass" if c.ok else "fail",
                        "witness": c.witness,
                        "ill_conditioned": c.ill_conditioned,
                        "seconds": round(c.seconds, 6),
                    }
                    for c in self.checks
                ],
                **({"result": self.payload} if self.payload else {}),
            }
            json.dump(obj, out, indent=2)
            out.write("\n")
            return
        for c in self.checks:
            line = f"{'PASS' if c.ok else 'FAIL'}  {c.name}"
            if c.witness:
                line += f"  -- {c.witness}"
            if c.ill_conditioned:
                line += "  [ill-conditioned]"
            out.write(line + "\n")
        for key, val in self.payload.items():
            out.write(f"{key}: {val}\n")


class UsageError(Exception):
    pass


def _toda_document(n: int, block: str, epi: str) -> SpecDocument:
    t = build_toda(n)
    if block == "canonical":
        doc = SpecDocument(
            t.tangent,
            bivectors={"lam0": t.lam0, "lam1": t.lam1},
            endomorphisms={"N": t.N},
        )
        doc.epimorphism = t.epi_flaschka if epi == "flaschka" else t.epi_atiyah
    elif block == "flaschka":
        doc = SpecDocument(
            t.flaschka, bivectors={"lam0": t.lam0_bar, "lam1": t.lam1_bar}
        )
    elif block == "atiyah":
        doc = SpecDocument(t.atiyah, bivectors={"pi0": t.pi0, "pi1": t.pi1})
        try:
            doc.endomorphisms["N"] = t.recursion_atiyah().exact()
        except Exception:
            pass  # the recursion operator is genuinely rational for n >= 3
    else:
        raise UsageError(f"unknown toda block {block!r}")
    return doc


def resolve_input(spec: str) -> tuple[SpecDocument, str]:
    """A positional input is a builtin fixture name (aff1, toda:<n>[:block])
    or a spec-file path.  Returns the document and a digest of the input."""
    if spec == "aff1":
        a = build_aff1()
        doc = SpecDocument(
            a.algebroid, bivectors={"P": a.P}, endomorphisms={"N": a.N}
        )
        return doc, "fixture:aff1"
    if spec.startswith("toda:"):
        parts = spec.split(":")
        try:
            n = int(parts[1])
        except (IndexError, ValueError):
            raise UsageError(f"bad fixture name {spec!r} (expected toda:<n>[:block])")
        block = parts[2] if len(parts) > 2 else "canonical"
        return _toda_document(n, block, "flaschka"), f"fixture:{spec}"
    doc = load_document(spec)
    with open(spec, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()[:16]
    return doc, f"sha256:{digest}"


def _pick_bivector(doc: SpecDocument, name: Optional[str]) -> tuple[str, Bivector]:
    if name is not None:
        if name not in doc.bivectors:
            raise UsageError(f"no bivector named {name!r} in the input")
        return name, doc.bivectors[name]
    if len(doc.bivectors) == 1:
        return next(iter(doc.bivectors.items()))
    raise UsageError(
        "input has several bivectors; pick one with --bivector "
        f"(available: {', '.join(sorted(doc.bivectors)) or 'none'})"
    )


def _pick_pair(doc: SpecDocument, names: Optional[list[str]]):
    if names:
        if len(names) != 2:
            raise UsageError("--bivectors takes exactly two names")
        for n in names:
            if n not in doc.bivectors:
                raise UsageError(f"no bivector named {n!r} in the input")
        return names[0], doc.bivectors[names[0]], names[1], doc.bivectors[names[1]]
    if len(doc.bivectors) == 2:
        (n0, p0), (n1, p1) = sorted(doc.bivectors.items())
        return n0, p0, n1, p1
    raise UsageError("pick two bivectors with --bivectors P0 P1")


def _pick_endo(doc: SpecDocument, name: Optional[str]) -> tuple[str, Endo]:
    if name is not None:
        if name not in doc.endomorphisms:
            raise UsageError(f"no endomorphism named {name!r} in the input")
        return name, doc.endomorphisms[name]
    if len(doc.endomorphisms) == 1:
        return next(iter(doc.endomorphisms.items()))
    if not doc.endomorphisms and len(doc.bivectors) == 2:
        n0, p0, n1, p1 = _pick_pair(doc, None)
        frac = recursion_operator(p0, p1)
        return f"recursion({n0},{n1})", frac.exact()
    raise UsageError(
        "input has no unique endomorphism; pick one with --endo "
        f"(available: {', '.join(sorted(doc.endomorphisms)) or 'none'})"
    )


def _timed(report: Report, name: str, fn) -> bool:
    t0 = time.perf_counter()
    ok, witness, ill = fn()
    report.add(name, ok, witness, ill, time.perf_counter() - t0)
    return ok


# ---------------------------------------------------------------------------
# commands

def cmd_check_algebroid(args, report: Report, doc: SpecDocument) -> None:
    rep = doc.algebroid.check_algebroid()
    report.add("algebroid axioms", rep.ok, rep.witness())


def cmd_check_poisson(args, report: Report, doc: SpecDocument) -> None:
    names = args.bivector or sorted(doc.bivectors)
    if not names:
        raise UsageError("input has no bivectors")
    for name in names:
        if name not in doc.bivectors:
            raise UsageError(f"no bivector named {name!r} in the input")
        rep = is_poisson(doc.bivectors[name])
        report.add(f"poisson({name})", rep.ok, rep.witness())
    if len(names) == 2:
        rep = are_compatible(doc.bivectors[names[0]], doc.bivectors[names[1]])
        report.add(f"compatible({names[0]},{names[1]})", rep.ok, rep.witness())


def _run_pn(args, report: Report, doc: SpecDocument, want_sn: bool) -> None:
    if args.bivector is None and len(doc.bivectors) == 2:
        # a document holding a compatible pair: check against the first one
        pname, P = sorted(doc.bivectors.items())[0]
    else:
        pname, P = _pick_bivector(doc, args.bivector)
    ename, N = _pick_endo(doc, args.endo)
    rep = pn_check(P, N)
    report.add(f"poisson({pname})", rep.poisson.ok, rep.poisson.witness())
    report.add(f"torsion({ename})", rep.torsion.ok, rep.torsion.witness())
    report.add(
        f"sharp-compatibility({pname},{ename})", rep.compatible.ok, rep.compatible.witness()
    )
    report.add(f"concomitant({pname},{ename})", rep.concomitant.ok, rep.concomitant.witness())
    if want_sn:
        report.add(
            f"nondegenerate({pname})", rep.nondegenerate,
            None if rep.nondegenerate else f"determinant {rep.determinant}",
        )
    report.payload["determinant"] = str(rep.determinant)


def cmd_check_pn(args, report: Report, doc: SpecDocument) -> None:
    _run_pn(args, report, doc, want_sn=False)


def cmd_check_sn(args, report: Report, doc: SpecDocument) -> None:
    _run_pn(args, report, doc, want_sn=True)


def cmd_hierarchy(args, report: Report, doc: SpecDocument) -> None:
    if args.bivector is None and len(doc.bivectors) == 2:
        pname, P = sorted(doc.bivectors.items())[0]
    else:
        pname, P = _pick_bivector(doc, args.bivector)
    ename, N = _pick_endo(doc, args.endo)
    rep = hierarchy_check(P, N, args.depth)
    for l, r in rep.levels:
        report.add(f"poisson({ename}^{l} {pname})", r.ok, r.witness())
    for l, m, r in rep.pairwise:
        report.add(f"compatible(levels {l},{m})", r.ok, r.witness())


def cmd_recursion(args, report: Report, doc: SpecDocument) -> None:
    n0, p0, n1, p1 = _pick_pair(doc, args.bivectors)
    try:
        frac = recursion_operator(p0, p1)
    except DegenerateBivector as e:
        report.add(f"recursion({n0},{n1})", False, str(e))
        return
    report.add(f"recursion({n0},{n1})", True)
    report.payload["numerator"] = [[str(e) for e in row] for row in frac.num.mat]
    report.payload["denominator"] = str(frac.den)


def cmd_project(args, report: Report, doc: SpecDocument) -> None:
    epi = doc.epimorphism
    if epi is None:
        raise UsageError("input has no epimorphism block")
    if args.epi is not None and args.epi != epi.name:
        raise UsageError(
            f"input's epimorphism is named {epi.name!r}, not {args.epi!r}"
        )
    val = epi.validate()
    report.add(f"epimorphism({epi.name}) well-formed", val.ok, val.witness())
    projected = SpecDocument(epi.target)
    for name, P in sorted(doc.bivectors.items()):
        rep = projectable_bivector_check(epi, P)
        report.add(f"projectable bivector({name})", rep.ok, rep.witness())
        if rep.ok:
            try:
                projected.bivectors[name] = project_bivector(epi, P, check=False)
            except NotBasic as e:
                report.add(f"project bivector({name})", False, str(e))
    for name, N in sorted(doc.endomorphisms.items()):
        rep = projectable_endo_check(epi, N)
        report.add(f"projectable endomorphism({name})", rep.ok, rep.witness())
        if rep.ok:
            try:
                projected.endomorphisms[name] = project_endo(epi, N, check=False)
            except NotBasic as e:
                report.add(f"project endomorphism({name})", False, str(e))
    if projected.bivectors or projected.endomorphisms:
        report.payload["projected"] = json.loads(serialize_document(projected))


def cmd_restrict_leaf(args, report: Report, doc: SpecDocument) -> None:
    pname, P = _pick_bivector(doc, args.bivector)
    N = None
    ename = None
    if args.endo is not None or len(doc.endomorphisms) == 1:
        ename, N = _pick_endo(doc, args.endo)
    try:
        res = restrict_to_leaf(P, N, LeafSpec(full_rank=True))
    except DegenerateBivector as e:
        report.add(f"restrict-leaf({pname})", False, str(e))
        return
    report.add(f"restrict-leaf({pname})", res.report.ok, res.report.witness())
    rep = symplectic_check(res.omega)
    report.add("leaf form symplectic", rep.ok, rep.witness())
    report.payload["flat_sign"] = res.flat_sign
    report.payload["determinant"] = str(rep.determinant)


def cmd_riesz(args, report: Report, doc: SpecDocument) -> None:
    ename, N = _pick_endo(doc, args.endo)
    variables = list(doc.algebroid.base_vars)
    points = sample_points(variables, args.points, args.seed, _box_for(variables))
    reports = riesz_report(N, points)
    indices = sorted({r.index for r in reports})
    dims = sorted({r.dim_kernel for r in reports})
    ok = all(r.direct_sum_ok for r in reports)
    ill = any(r.ill_conditioned for r in reports)
    report.add(
        f"riesz({ename}) stable-kernel splitting at {args.points} points",
        ok, None if ok else "image + kernel of the stable power do not span", ill,
    )
    report.payload["indices"] = indices
    report.payload["kernel_dimensions"] = dims


def cmd_reduce_fiberwise(args, report: Report, doc: SpecDocument) -> None:
    pname, P = _pick_bivector(doc, args.bivector)
    ename, N = _pick_endo(doc, args.endo)
    variables = list(doc.algebroid.base_vars)
    points = sample_points(variables, args.points, args.seed, _box_for(variables))
    reports = fiberwise_reduce(P, N, points)
    ill = any(r.ill_conditioned for r in reports)
    report.add(
        f"reduced bivector({pname}) nondegenerate at {args.points} points",
        all(r.p_nondegenerate for r in reports), None, ill,
    )
    report.add(
        f"reduced endomorphism({ename}) invertible at {args.points} points",
        all(r.n_invertible for r in reports), None, ill,
    )
    report.payload["quotient_dimensions"] = sorted({r.dim_quotient for r in reports})


def cmd_fixture(args, report: Report, doc: SpecDocument) -> None:
    # resolution already built the document; just print it
    sys.stdout.write(serialize_document(doc))


def cmd_selftest(args, report: Report, doc: SpecDocument) -> None:
    """Condensed verification suite over the built-in fixtures."""
    t = build_toda(2)
    for name, P in (("lam0", t.lam0), ("lam1", t.lam1), ("pi0", t.pi0), ("pi1", t.pi1)):
        _timed(report, f"toda2 poisson({name})",
               lambda P=P: (lambda r: (r.ok, r.witness(), False))(is_poisson(P)))
    _timed(report, "toda2 compatible(lam0,lam1)",
           lambda: (lambda r: (r.ok, r.witness(), False))(are_compatible(t.lam0, t.lam1)))
    _timed(report, "toda2 recursion(lam0,lam1) = N",
           lambda: ((recursion_operator(t.lam0, t.lam1).exact() - t.N).is_zero(), None, False))
    _timed(report, "toda2 pn(lam0,N)",
           lambda: (lambda r: (r.ok, r.witness(), False))(pn_check(t.lam0, t.N)))
    _timed(report, "toda2 project(lam0) = lam0_bar",
           lambda: ((project_bivector(t.epi_flaschka, t.lam0) - t.lam0_bar).is_zero(),
                    None, False))
    _timed(report, "toda2 sn(pi0,N_A)",
           lambda: (lambda r: (r.sn, r.witness(), False))(
               pn_check(t.pi0, t.recursion_atiyah().exact())))
    a = build_aff1()
    _timed(report, "aff1 two-form symplectic",
           lambda: (lambda r: (r.ok, r.witness(), False))(symplectic_check(a.omega)))
    _timed(report, "aff1 projector idempotent",
           lambda: ((a.N.compose(a.N) - a.N).is_zero(), None, False))
    pts = sample_points(list(a.algebroid.base_vars), 25, 7,
                        _box_for(list(a.algebroid.base_vars)))
    _timed(report, "aff1 stable-kernel index 1 at 25 points",
           lambda: (
               all(r.index == 1 and r.dim_kernel == 2 and r.direct_sum_ok
                   for r in riesz_report(a.N, pts)),
               None,
               any(r.ill_conditioned for r in riesz_report(a.N, pts)),
           ))
    _timed(report, "aff1 fiberwise reduction nondegenerate",
           lambda: (
               all(r.p_nondegenerate and r.n_invertible
                   for r in fiberwise_reduce(a.P, a.N, pts)),
               None, False,
           ))


COMMANDS = {
    "check-algebroid": cmd_check_algebroid,
    "check-poisson": cmd_check_poisson,
    "check-pn": cmd_check_pn,
    "check-sn": cmd_check_sn,
    "hierarchy": cmd_hierarchy,
    "recursion": cmd_recursion,
    "project": cmd_project,
    "restrict-leaf": cmd_restrict_leaf,
    "riesz": cmd_riesz,
    "reduce-fiberwise": cmd_reduce_fiberwise,
    "fixture": cmd_fixture,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pnalgebroid",
        description=(
            "Verdict suites for Lie algebroids with Poisson and Nijenhuis "
            "structures.  Inputs are JSON spec files or builtin fixture "
            "names (aff1, toda:<n>[:canonical|flaschka|atiyah]).  The "
            f"default numeric tolerance is {linalg.DEFAULT_TOL} and can "
            f"be overridden with the {reduction.TOL_ENV_VAR} environment "
            "variable."
        ),
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, needs_input=True, **kw):
        sp = sub.add_parser(name, **kw)
        if needs_input:
            sp.add_argument("spec", help="spec file path or builtin fixture name")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        return sp

    add("check-algebroid", help="bracket/anchor axioms of the algebroid")
    sp = add("check-poisson", help="Poisson condition for bivectors")
    sp.add_argument("--bivector", action="append")
    for name in ("check-pn", "check-sn"):
        sp = add(name, help="Poisson-Nijenhuis (and nondegeneracy) verdicts")
        sp.add_argument("--bivector")
        sp.add_argument("--endo")
    sp = add("hierarchy", help="compatibility of the deformed bivector ladder")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--bivector")
    sp.add_argument("--endo")
    sp = add("recursion", help="endomorphism intertwining two bivectors")
    sp.add_argument("--bivectors", nargs=2)
    sp = add("project", help="push structures through the epimorphism block")
    sp.add_argument("--epi", help="name of the epimorphism block")
    sp = add("restrict-leaf", help="invert the bivector on a full-rank leaf")
    sp.add_argument("--bivector")
    sp.add_argument("--endo")
    sp = add("riesz", help="stable-kernel index of the endomorphism at random points")
    sp.add_argument("--points", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--endo")
    sp = add("reduce-fiberwise", help="pointwise quotient by the stable kernel")
    sp.add_argument("--points", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--bivector")
    sp.add_argument("--endo")

    sp = sub.add_parser("fixture", help="print a builtin fixture as a spec file")
    fsub = sp.add_subparsers(dest="fixture", required=True)
    ft = fsub.add_parser("toda")
    ft.add_argument("--n", type=int, required=True)
    ft.add_argument("--block", choices=("canonical", "flaschka", "atiyah"),
                    default="canonical")
    ft.add_argument("--epi", choices=("flaschka", "atiyah"), default="flaschka")
    ft.add_argument("--format", choices=("text", "json"), default="text")
    fa = fsub.add_parser("aff1")
    fa.add_argument("--format", choices=("text", "json"), default="text")

    add("selftest", needs_input=False,
        help="condensed verification suite over the builtin fixtures")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0

    try:
        if args.command == "fixture":
            if args.fixture == "toda":
                doc = _toda_document(args.n, args.block, args.epi)
                digest = f"fixture:toda:{args.n}:{args.block}"
            else:
                doc, digest = resolve_input("aff1")
        elif getattr(args, "spec", None) is not None:
            doc, digest = resolve_input(args.spec)
        else:
            doc, digest = None, "builtin"
    except (SpecFileError, UsageError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    report = Report(
        command=args.command,
        inputs_digest=digest,
        tolerance=default_tolerance(),
        seed=getattr(args, "seed", None),
    )
    try:
        COMMANDS[args.command](args, report, doc)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DegenerateBivector as e:
        report.add(args.command, False, str(e))
    if args.command != "fixture":
        report.emit(args.format)
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
