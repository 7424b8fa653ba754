"""Command line front end.

Every command builds a :class:`Report`, an ordered list of named fields. The text mode
prints one field per line; ``--json`` prints the same fields as a JSON object.

Exit codes: 0 when the command succeeds and every verdict holds, 1 when a verdict is
false, 2 on unreadable input, unknown ids or invalid data.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

from .core import BurnsideError
from .equivariant import chi, psi, rho_mu
from .modelfile import Document, ModelFileError, check, dump, load
from .scheme import is_B_rational, singular_specialization
from .snc import blowup, fmt_set, rho, rho_d, rho_hat, specialize_rational_check
from .toric import ConeSpec, build_fan, build_fan_alt, certify, euler_interior, product_model, verify_multiplicativity

OK, FALSE, INPUT_ERROR = 0, 1, 2


@dataclass
class Report:
    fields: list[tuple[str, str, Any]] = field(default_factory=list)
    code: int = OK

    def value(self, key: str, text: str, data: Any = None) -> None:
        """A field printed bare in text mode."""
        self.fields.append((key, text, text if data is None else data))

    def line(self, key: str, text: str, data: Any = None) -> None:
        """A field printed as ``key: text``."""
        self.fields.append((key, f"{key}: {text}", text if data is None else data))

    def verdict(self, key: str, ok: bool, detail: str = "") -> None:
        self.line(key, "yes" + detail if ok else "no" + detail, ok)
        if not ok:
            self.code = max(self.code, FALSE)

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps({k: d for k, _, d in self.fields}, indent=2, sort_keys=False)
        return "\n".join(t for _, t, _ in self.fields)


def _yes(b: bool) -> str:
    return "yes" if b else "no"


def _signed(n: int) -> str:
    return f"{n:+d}"


# ---------------------------------------------------------------------------
# commands


def cmd_validate(doc: Document, args) -> Report:
    r = Report()
    problems = check(doc)
    counts = {t: len(getattr(doc, t)) for t in ("models", "blowups", "pairs", "degenerations")}
    r.line("objects", ", ".join(f"{n} {t}" for t, n in counts.items()), counts)
    r.value("diagnostics", "\n".join(problems) if problems else "ok", problems)
    if problems:
        r.code = FALSE
    return r


def cmd_rho(doc: Document, args) -> Report:
    m = doc.get("models", args.model)
    r = Report()
    if args.hat:
        r.value("rho_hat", str(rho_hat(m)))
        return r
    x = rho_d(m, args.d) if args.d is not None else rho(m)
    if args.normalize:
        x = doc.facts.normalize(x)
    r.value("rho", str(x))
    return r


def cmd_rho_mu(doc: Document, args) -> Report:
    m = doc.get("models", args.model)
    tau = args.tau or doc.tau
    x = rho_mu(m, tau)
    r = Report()
    r.value("rho_mu", str(x))
    if args.check:
        r.verdict("psi(rho_mu) = rho_hat", psi(x) == rho_hat(m))
        r.line("chi", str(chi(x, doc.torsor_facts)))
    return r


def cmd_blowup_check(doc: Document, args) -> Report:
    m = doc.get("models", args.model)
    mid, spec = doc.get("blowups", args.spec)
    if mid != args.model:
        raise ModelFileError(f"blowup {args.spec!r} is declared on model {mid!r}")
    b = blowup(m, spec)
    top = max(m.max_mult, b.max_mult)
    plain = rho(m) == rho(b)
    bad = [d for d in range(1, top + 1) if rho_d(m, d) != rho_d(b, d)]
    r = Report()
    r.line("blown up", f"{b.name}, new component {spec.new_id} with multiplicity {b.components[spec.new_id]}")
    refined = f"yes (d=1..{top})" if not bad else f"no (differs at d={','.join(map(str, bad))})"
    r.value("invariance", f"rho invariant: {_yes(plain)}; rho^(d) invariant: {refined}",
            {"rho": plain, "rho_d": not bad, "d_max": top, "differs_at": bad})
    if not plain or bad:
        r.code = FALSE
    return r


_INT = re.compile(r"-?\d+")


def parse_fan_spec(tokens: Sequence[str]) -> ConeSpec:
    """``2 / 1 1``, ``2/1,1`` and similar spellings of ``(a, a')``."""
    text = " ".join(tokens)
    if text.count("/") != 1:
        raise ModelFileError("fan spec needs exactly one '/' between a and a'")
    left, right = text.split("/")
    if re.search(r"[^\d\s,]", left + right):
        raise ModelFileError(f"bad fan spec {text!r}")
    a = tuple(int(t) for t in _INT.findall(left))
    ap = tuple(int(t) for t in _INT.findall(right))
    try:
        return ConeSpec(a, ap)
    except ValueError as e:
        raise ModelFileError(str(e)) from None


def cmd_fan(doc: Document | None, args) -> Report:
    spec = parse_fan_spec(args.spec)
    builder = build_fan_alt if args.alt else build_fan
    fan = builder(spec)
    r = Report()
    r.value(
        "fan",
        fan.dump(),
        {
            "spec": [list(spec.a), list(spec.a_prime)],
            "rays": [list(v) for v in fan.rays],
            "maximal": [list(c) for c in fan.maximal],
        },
    )
    if args.certify:
        c = certify(fan, spec, builder)
        r.verdict("smooth", c.smooth)
        r.verdict("supported", c.supported)
        r.verdict("equivariant", c.equivariant)
        r.verdict("boundary-compatible", c.boundary_compatible)
        if c.failures:
            r.value("failures", "\n".join(c.failures), c.failures)
    if args.euler:
        e = euler_interior(fan)
        want = (-1) ** spec.dim
        r.line("euler", _signed(e), e)
        if e != want:
            r.line("euler expected", _signed(want), want)
            r.code = max(r.code, FALSE)
    return r


def cmd_product(doc: Document, args) -> Report:
    m = doc.get("models", args.model)
    mp = doc.get("models", args.other)
    tau = args.tau or doc.tau
    builder = build_fan_alt if args.alt else build_fan
    prod = product_model(m, mp, tau, builder=builder)
    r = Report()
    r.line("product", prod.name)
    r.line("components", str(len(prod.components)))
    for cid, d in sorted(prod.components.items()):
        r.value(f"component {cid}", f"  {cid} d={d}", d)
    r.line("strata", str(len(prod.strata)))
    r.line("rho_mu", str(rho_mu(prod, tau)))
    if args.verify:
        rep = verify_multiplicativity(m, mp, tau, builder=builder)
        r.line("delta", str(rep.delta) if rep.delta else "0")
        if rep.delta:
            r.code = max(r.code, FALSE)
        bad = [p for p in rep.pairs if not p.ok]
        r.verdict("sign collapse", not bad, f" ({len(rep.pairs) - len(bad)}/{len(rep.pairs)} pairs)")
        for p in bad:
            r.value(
                f"collapse {fmt_set(p.J)}/{p.alpha}x{fmt_set(p.J_prime)}/{p.alpha_prime}",
                f"  {fmt_set(p.J)}/{p.alpha} x {fmt_set(p.J_prime)}/{p.alpha_prime}: {p.sigma_sum} != {p.expected}",
                [p.sigma_sum, p.expected],
            )
    return r


def cmd_boundary(doc: Document, args) -> Report:
    p = doc.get("pairs", args.pair)
    v = is_B_rational(p, doc.facts)
    r = Report()
    r.line("boundary", str(v.boundary))
    if args.b_rational:
        r.verdict("B-rational", v.verdict)
        if not v.verdict:
            r.line("witness", str(v.witness))
            r.line("witness on singular locus", _yes(v.witness_on_singular_locus), v.witness_on_singular_locus)
    return r


def cmd_specialize(doc: Document, args) -> Report:
    r = Report()
    if args.id in doc.degenerations:
        d = doc.degenerations[args.id]
        res = singular_specialization(
            doc.get("pairs", d.pair), doc.get("models", d.model), d.generic_class, doc.get("morphisms", d.collapse),
            doc.facts,
        )
        r.line("rho", str(res.rho))
        r.verdict("B-rational", res.b_rational.verdict)
        r.verdict("generic fiber rational", res.generic_rational)
        r.line("special fiber", str(res.fiber_class) if res.fiber_class is not None else "not shown rational",
               None if res.fiber_class is None else str(res.fiber_class))
        return r
    if args.id in doc.pairs:
        v = is_B_rational(doc.pairs[args.id], doc.facts)
        r.line("boundary", str(v.boundary))
        r.verdict("B-rational", v.verdict)
        return r
    m = doc.get("models", args.id)
    r.line("rho", str(doc.facts.normalize(rho(m))))
    r.verdict("rational", specialize_rational_check(m, doc.facts))
    return r


def cmd_corpus(doc: Document | None, args) -> Report:
    from .fixtures import corpus_document

    r = Report()
    text = dump(corpus_document())
    r.value("document", text.rstrip("\n"), json.loads(text))
    return r


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="burnside", description="Burnside-ring specialization toolkit.")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def with_file(name, fn, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("path", help="model file (JSON)")
        s.set_defaults(fn=fn, needs_file=True)
        return s

    with_file("validate", cmd_validate, "parse a model file and report diagnostics")

    s = with_file("rho", cmd_rho, "specialization of a model")
    s.add_argument("model")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--d", type=int, help="refined specialization at multiplicity d")
    g.add_argument("--hat", action="store_true", help="polynomial in T collecting every multiplicity")
    s.add_argument("--normalize", action="store_true", help="rewrite with the declared facts")

    s = with_file("rho-mu", cmd_rho_mu, "equivariant specialization of a model")
    s.add_argument("model")
    s.add_argument("--tau", help="label of the uniformizer (default from the file)")
    s.add_argument("--check", action="store_true", help="also compare psi(rho_mu) with rho_hat and print chi")

    s = with_file("blowup-check", cmd_blowup_check, "compare specializations before and after a blowup")
    s.add_argument("model")
    s.add_argument("spec", help="blowup spec id")

    s = sub.add_parser("fan", help="build the equivariant smooth fan of Lambda(a, a')")
    s.add_argument("spec", nargs="+", metavar="a... / a'...")
    s.add_argument("--certify", action="store_true")
    s.add_argument("--euler", action="store_true")
    s.add_argument("--alt", action="store_true", help="use the alternative tie-break family")
    s.set_defaults(fn=cmd_fan, needs_file=False)

    s = with_file("product", cmd_product, "product of two models")
    s.add_argument("model")
    s.add_argument("other")
    s.add_argument("--verify", action="store_true", help="check multiplicativity of rho_mu")
    s.add_argument("--tau")
    s.add_argument("--alt", action="store_true", help="use the alternative tie-break family")

    s = with_file("boundary", cmd_boundary, "boundary class of an snc pair")
    s.add_argument("pair")
    s.add_argument("--b-rational", action="store_true", help="decide B-rationality")

    s = with_file("specialize", cmd_specialize, "rationality verdict for a degeneration or a model")
    s.add_argument("id", help="degeneration, pair or model id (looked up in that order)")

    s = sub.add_parser("corpus", help="print the built-in fixture corpus as a model file")
    s.set_defaults(fn=cmd_corpus, needs_file=False)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load(args.path) if args.needs_file else None
        report = args.fn(doc, args)
    except ModelFileError as e:
        where = getattr(args, "path", None)
        print(f"error: {where + ': ' if where else ''}{e}", file=sys.stderr)
        return INPUT_ERROR
    except BurnsideError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    print(report.render(args.json))
    return report.code


if __name__ == "__main__":
    sys.exit(main())
