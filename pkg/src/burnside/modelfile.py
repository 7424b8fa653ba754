"""The ``burnside-model/1`` JSON input format: parsing, validation and canonical printing.

Classes are written as ``*``-separated factors: atom ids, ``A``, ``A^n`` or ``pt``
(brackets are ignored, so the printed form ``[D1*D2]*A^1`` parses too). The field of
a class is implied by where it appears: a model's field, a point's residue field, the
target point of a morphism, or an explicit ``field`` key.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

from .core import Atom, BirClass, BurnsideError, Fact, FactsRegistry, FieldLabel, canonicalize
from .equivariant import TorsorFacts, TorsorFactor
from .scheme import Morphism, PairStratum, SncPair, SupportPoint, SupportScheme, validate_pair
from .snc import BlowupSpec, CenterPiece, DualComplex, Stratum, blowup, validate

SCHEMA = "burnside-model/1"
ATOM_ID = re.compile(r"^[^\s*\[\]]+$")
RESERVED = re.compile(r"^(pt|A|A\^\d+)$")


class ModelFileError(BurnsideError):
    def __init__(self, message: str, *, line: int | None = None, column: int | None = None, path: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is not None:
            return f"line {self.line}, column {self.column}: {self.message}"
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message


@dataclass(frozen=True)
class Degeneration:
    """Links a pair presenting (total space, special fiber) to the snc model of a resolution."""

    pair: str
    model: str
    collapse: str
    generic_class: BirClass


@dataclass
class Document:
    fields: dict[str, FieldLabel] = field(default_factory=dict)
    atoms: list[Atom] = field(default_factory=list)
    facts: FactsRegistry = field(default_factory=FactsRegistry)
    torsor_facts: TorsorFacts = field(default_factory=lambda: TorsorFacts({}))
    tau: str = "tau"
    models: dict[str, DualComplex] = field(default_factory=dict)
    blowups: dict[str, tuple[str, BlowupSpec]] = field(default_factory=dict)
    schemes: dict[str, SupportScheme] = field(default_factory=dict)
    morphisms: dict[str, Morphism] = field(default_factory=dict)
    pairs: dict[str, SncPair] = field(default_factory=dict)
    degenerations: dict[str, Degeneration] = field(default_factory=dict)

    def get(self, table: str, key: str):
        items = getattr(self, table)
        if key not in items:
            raise ModelFileError(f"unknown id {key!r}", path=table)
        return items[key]

    @classmethod
    def collect(cls, *, tau: str = "tau", facts: FactsRegistry | None = None, models=(), blowups=None,
                morphisms=(), pairs=(), degenerations=None) -> Document:
        """Build a document from in-memory objects, gathering fields, atoms and schemes."""
        doc = cls(tau=tau, facts=facts or FactsRegistry())
        classes: list[BirClass] = [c for f in doc.facts.facts for c in (f.lhs, f.rhs)]
        labels: list[FieldLabel] = []
        for m in models:
            doc.models[m.name] = m
            labels.append(m.field)
            classes += [s.cls for s in m.strata]
        for bid, (mid, spec) in (blowups or {}).items():
            doc.blowups[bid] = (mid, spec)
            classes += [p.cls for p in spec.pieces]
        schemes: dict[str, SupportScheme] = {}

        def put(table, key, obj, what):
            if table.setdefault(key, obj) != obj:
                raise ModelFileError(f"two different {what} are named {key!r}")

        for g in morphisms:
            put(doc.morphisms, g.name, g, "morphisms")
            put(schemes, g.source.name, g.source, "schemes")
            put(schemes, g.target.name, g.target, "schemes")
            classes += list(g.ext.values())
        for p in pairs:
            put(doc.pairs, p.name, p, "pairs")
            put(schemes, p.scheme.name, p.scheme, "schemes")
            if p.push is not None:
                put(doc.morphisms, p.push.name, p.push, "morphisms")
                put(schemes, p.push.target.name, p.push.target, "schemes")
                classes += list(p.push.ext.values())
            classes += [s.cls for s in p.strata]
        for did, d in (degenerations or {}).items():
            doc.degenerations[did] = d
            classes.append(d.generic_class)
        for s in schemes.values():
            doc.schemes[s.name] = s
            labels += [pt.field for pt in s.points]
        labels += [c.field for c in classes]
        atoms = {a.key: a for c in classes for a in c.atoms}
        doc.atoms = sorted(atoms.values())
        labels += [a.field for a in doc.atoms]
        for f in labels:
            while f is not None:
                old = doc.fields.setdefault(f.name, f)
                if old != f:
                    raise ModelFileError(f"two different fields are named {f.name!r}")
                f = f.parent
        return doc


# ---------------------------------------------------------------------------
# classes


def format_class(c: BirClass) -> str:
    c = canonicalize(c)
    parts = [a.id for a in c.atoms]
    if c.affine == 1:
        parts.append("A")
    elif c.affine > 1:
        parts.append(f"A^{c.affine}")
    return "*".join(parts) if parts else "pt"


class _Parser:
    def __init__(self, raw: dict):
        self.raw = raw
        self.doc = Document()
        self.atom_table: dict[tuple[str, str], Atom] = {}

    # helpers --------------------------------------------------------------

    def need(self, obj: Any, key: str, path: str, kind=None):
        if not isinstance(obj, dict):
            raise ModelFileError("expected an object", path=path)
        if key not in obj:
            raise ModelFileError(f"missing key {key!r}", path=path)
        v = obj[key]
        if kind is not None and not isinstance(v, kind):
            raise ModelFileError(f"{key!r} has the wrong type", path=f"{path}.{key}")
        return v

    def field_ref(self, name: Any, path: str) -> FieldLabel:
        if name not in self.doc.fields:
            raise ModelFileError(f"unknown field {name!r}", path=path)
        return self.doc.fields[name]

    def cls(self, text: Any, f: FieldLabel, path: str) -> BirClass:
        if not isinstance(text, str) or not text.strip():
            raise ModelFileError("a class must be a nonempty string", path=path)
        atoms, aff = [], 0
        for tok in text.replace("[", "").replace("]", "").split("*"):
            tok = tok.strip()
            if tok == "pt":
                continue
            if tok == "A":
                aff += 1
            elif re.fullmatch(r"A\^\d+", tok):
                aff += int(tok[2:])
            elif (f.name, tok) in self.atom_table:
                atoms.append(self.atom_table[(f.name, tok)])
            else:
                raise ModelFileError(f"unknown atom {tok!r} over field {f.name!r}", path=path)
        return canonicalize(BirClass(f, tuple(atoms), aff))

    def id_set(self, v: Any, path: str) -> frozenset[str]:
        if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
            raise ModelFileError("expected a list of ids", path=path)
        return frozenset(v)

    def str_map(self, v: Any, path: str) -> dict[str, str]:
        if v is None:
            return {}
        if not isinstance(v, dict) or not all(isinstance(x, str) for x in v.values()):
            raise ModelFileError("expected an object of strings", path=path)
        return dict(v)

    # sections -------------------------------------------------------------

    def run(self) -> Document:
        raw = self.raw
        if not isinstance(raw, dict):
            raise ModelFileError("top level must be an object", path="$")
        if raw.get("schema") != SCHEMA:
            raise ModelFileError(f"schema tag must be {SCHEMA!r}", path="$.schema")
        known = {"schema", "fields", "atoms", "facts", "torsor_facts", "tau", "models", "blowups", "schemes",
                 "morphisms", "pairs", "degenerations"}
        extra = set(raw) - known
        if extra:
            raise ModelFileError(f"unknown sections {sorted(extra)}", path="$")
        self.doc.tau = raw.get("tau", "tau")
        if not isinstance(self.doc.tau, str) or not self.doc.tau:
            raise ModelFileError("tau must be a nonempty string", path="$.tau")
        self.fields(raw.get("fields", []))
        self.atoms(raw.get("atoms", []))
        self.facts(raw.get("facts", []))
        self.torsor_facts(raw.get("torsor_facts", []))
        self.models(raw.get("models", []))
        self.blowups(raw.get("blowups", []))
        self.schemes(raw.get("schemes", []))
        self.morphisms(raw.get("morphisms", []))
        self.pairs(raw.get("pairs", []))
        self.degenerations(raw.get("degenerations", []))
        return self.doc

    def fields(self, items):
        pending = list(enumerate(items))
        while pending:
            progress = False
            for i, f in list(pending):
                path = f"$.fields[{i}]"
                name = self.need(f, "name", path, str)
                parent = f.get("parent")
                if parent is not None and parent not in self.doc.fields:
                    continue
                if name in self.doc.fields:
                    raise ModelFileError(f"duplicate field {name!r}", path=path)
                try:
                    label = FieldLabel(
                        name,
                        f.get("kind", "base"),
                        self.doc.fields.get(parent) if parent else None,
                        f.get("point"),
                        f.get("degree"),
                    )
                except ValueError as e:
                    raise ModelFileError(str(e), path=path) from None
                self.doc.fields[name] = label
                pending.remove((i, f))
                progress = True
            if not progress:
                i, f = pending[0]
                raise ModelFileError(f"unknown parent field {f.get('parent')!r}", path=f"$.fields[{i}]")

    def atoms(self, items):
        for i, a in enumerate(items):
            path = f"$.atoms[{i}]"
            aid = self.need(a, "id", path, str)
            if not ATOM_ID.match(aid) or RESERVED.match(aid):
                raise ModelFileError(f"invalid atom id {aid!r}", path=path)
            f = self.field_ref(self.need(a, "field", path, str), f"{path}.field")
            dim = self.need(a, "dim", path, int)
            if dim < 0:
                raise ModelFileError("atom dimension must be >= 0", path=path)
            atom = Atom(aid, f, dim, bool(a.get("torus", False)))
            if (f.name, aid) in self.atom_table:
                raise ModelFileError(f"duplicate atom {aid!r} over {f.name!r}", path=path)
            self.atom_table[(f.name, aid)] = atom
            self.doc.atoms.append(atom)

    def facts(self, items):
        out = []
        for i, x in enumerate(items):
            path = f"$.facts[{i}]"
            f = self.field_ref(self.need(x, "field", path, str), f"{path}.field")
            lhs = self.cls(self.need(x, "lhs", path), f, f"{path}.lhs")
            rhs = self.cls(self.need(x, "rhs", path), f, f"{path}.rhs")
            try:
                out.append(Fact(lhs, rhs))
            except ValueError as e:
                raise ModelFileError(str(e), path=path) from None
        self.doc.facts = FactsRegistry(tuple(out))

    def torsor_facts(self, items):
        total = {}
        for i, x in enumerate(items):
            path = f"$.torsor_facts[{i}]"
            f = self.field_ref(self.need(x, "field", path, str), f"{path}.field")
            base = self.cls(self.need(x, "base", path), f, f"{path}.base")
            try:
                factor = TorsorFactor(base, self.need(x, "order", path, int), self.need(x, "label", path, str))
                total[factor] = self.cls(self.need(x, "total", path), f, f"{path}.total")
            except ValueError as e:
                raise ModelFileError(str(e), path=path) from None
        try:
            self.doc.torsor_facts = TorsorFacts(total)
        except ValueError as e:
            raise ModelFileError(str(e), path="$.torsor_facts") from None

    def models(self, items):
        for i, x in enumerate(items):
            path = f"$.models[{i}]"
            mid = self.need(x, "id", path, str)
            if mid in self.doc.models:
                raise ModelFileError(f"duplicate model {mid!r}", path=path)
            f = self.field_ref(self.need(x, "field", path, str), f"{path}.field")
            comps = self.need(x, "components", path, dict)
            if not all(isinstance(v, int) for v in comps.values()):
                raise ModelFileError("multiplicities must be integers", path=f"{path}.components")
            strata = []
            for j, s in enumerate(self.need(x, "strata", path, list)):
                sp = f"{path}.strata[{j}]"
                strata.append(
                    Stratum(
                        self.id_set(self.need(s, "J", sp), f"{sp}.J"),
                        self.need(s, "alpha", sp, str),
                        self.cls(self.need(s, "class", sp), f, f"{sp}.class"),
                        self.str_map(s.get("parents"), f"{sp}.parents"),
                        s.get("label"),
                    )
                )
            self.doc.models[mid] = DualComplex.build(mid, f, self.need(x, "rel_dim", path, int), comps, strata)

    def blowups(self, items):
        for i, x in enumerate(items):
            path = f"$.blowups[{i}]"
            bid = self.need(x, "id", path, str)
            mid = self.need(x, "model", path, str)
            if mid not in self.doc.models:
                raise ModelFileError(f"unknown model {mid!r}", path=f"{path}.model")
            f = self.doc.models[mid].field
            pieces = []
            for j, p in enumerate(x.get("pieces", [])):
                pp = f"{path}.pieces[{j}]"
                pieces.append(
                    CenterPiece(
                        self.id_set(self.need(p, "J1", pp), f"{pp}.J1"),
                        self.need(p, "alpha", pp, str),
                        self.cls(self.need(p, "class", pp), f, f"{pp}.class"),
                        self.need(p, "container", pp, str),
                        self.str_map(p.get("parents"), f"{pp}.parents"),
                    )
                )
            spec = BlowupSpec(
                self.need(x, "case", path, str),
                self.id_set(self.need(x, "J0", path), f"{path}.J0"),
                self.need(x, "alpha", path, str),
                tuple(pieces),
                x.get("new_id", "E"),
                x.get("name", "Z"),
            )
            self.doc.blowups[bid] = (mid, spec)

    def schemes(self, items):
        for i, x in enumerate(items):
            path = f"$.schemes[{i}]"
            sid = self.need(x, "id", path, str)
            pts = []
            for j, p in enumerate(self.need(x, "points", path, list)):
                pp = f"{path}.points[{j}]"
                pts.append(
                    SupportPoint(
                        self.need(p, "id", pp, str),
                        self.field_ref(self.need(p, "field", pp, str), f"{pp}.field"),
                        self.need(p, "dim", pp, int),
                    )
                )
            try:
                self.doc.schemes[sid] = SupportScheme.of(sid, pts)
            except BurnsideError as e:
                raise ModelFileError(str(e), path=path) from None

    def scheme_ref(self, sid, path) -> SupportScheme:
        if sid not in self.doc.schemes:
            raise ModelFileError(f"unknown scheme {sid!r}", path=path)
        return self.doc.schemes[sid]

    def morphisms(self, items):
        for i, x in enumerate(items):
            path = f"$.morphisms[{i}]"
            gid = self.need(x, "id", path, str)
            src = self.scheme_ref(self.need(x, "source", path, str), f"{path}.source")
            tgt = self.scheme_ref(self.need(x, "target", path, str), f"{path}.target")
            mapping = self.str_map(self.need(x, "mapping", path), f"{path}.mapping")
            ext = {}
            for s, text in self.str_map(x.get("ext"), f"{path}.ext").items():
                if s not in mapping or mapping[s] not in tgt.index:
                    raise ModelFileError(f"fiber class for unmapped point {s!r}", path=f"{path}.ext")
                ext[s] = self.cls(text, tgt[mapping[s]].field, f"{path}.ext.{s}")
            try:
                self.doc.morphisms[gid] = Morphism(gid, src, tgt, mapping, ext)
            except BurnsideError as e:
                raise ModelFileError(str(e), path=path) from None

    def pairs(self, items):
        for i, x in enumerate(items):
            path = f"$.pairs[{i}]"
            pid = self.need(x, "id", path, str)
            scheme = self.scheme_ref(self.need(x, "scheme", path, str), f"{path}.scheme")
            push = None
            if x.get("push") is not None:
                if x["push"] not in self.doc.morphisms:
                    raise ModelFileError(f"unknown morphism {x['push']!r}", path=f"{path}.push")
                push = self.doc.morphisms[x["push"]]
            strata = []
            for j, s in enumerate(self.need(x, "strata", path, list)):
                sp = f"{path}.strata[{j}]"
                point = self.need(s, "point", sp, str)
                if point not in scheme.index:
                    raise ModelFileError(f"unknown point {point!r}", path=f"{sp}.point")
                strata.append(
                    PairStratum(
                        self.id_set(self.need(s, "J", sp), f"{sp}.J"),
                        self.need(s, "alpha", sp, str),
                        self.cls(self.need(s, "class", sp), scheme[point].field, f"{sp}.class"),
                        point,
                        self.str_map(s.get("parents"), f"{sp}.parents"),
                    )
                )
            self.doc.pairs[pid] = SncPair.build(
                pid,
                self.need(x, "ambient_dim", path, int),
                scheme,
                strata,
                self.need(x, "generic", path, str),
                self.id_set(x.get("singular", []), f"{path}.singular"),
                push,
            )

    def degenerations(self, items):
        for i, x in enumerate(items):
            path = f"$.degenerations[{i}]"
            did = self.need(x, "id", path, str)
            refs = {}
            for key, table in (("pair", "pairs"), ("model", "models"), ("collapse", "morphisms")):
                v = self.need(x, key, path, str)
                if v not in getattr(self.doc, table):
                    raise ModelFileError(f"unknown {key} {v!r}", path=f"{path}.{key}")
                refs[key] = v
            f = self.field_ref(self.need(x, "generic_field", path, str), f"{path}.generic_field")
            g = self.cls(self.need(x, "generic_class", path), f, f"{path}.generic_class")
            self.doc.degenerations[did] = Degeneration(refs["pair"], refs["model"], refs["collapse"], g)


def parse(text: str) -> Document:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFileError(e.msg, line=e.lineno, column=e.colno) from None
    return _Parser(raw).run()


def load(path: str) -> Document:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ModelFileError(f"cannot read {path}: {e.strerror}") from None
    return parse(text)


def check(doc: Document) -> list[str]:
    """Semantic diagnostics: invalid models, pairs and blowup specs."""
    out = []
    for mid, m in sorted(doc.models.items()):
        out += [f"models.{mid}: {msg}" for msg in validate(m)]
    for bid, (mid, spec) in sorted(doc.blowups.items()):
        m = doc.models[mid]
        if validate(m):
            continue
        try:
            blowup(m, spec)
        except BurnsideError as e:
            out.append(f"blowups.{bid}: {e}")
    for pid, p in sorted(doc.pairs.items()):
        out += [f"pairs.{pid}: {msg}" for msg in validate_pair(p)]
    for did, d in sorted(doc.degenerations.items()):
        g = doc.morphisms[d.collapse]
        if g.source != doc.pairs[d.pair].target:
            out.append(f"degenerations.{did}: collapse does not start at the pair's target scheme")
    return out


# ---------------------------------------------------------------------------
# printing


def _field_obj(f: FieldLabel) -> dict:
    out: dict[str, Any] = {"name": f.name}
    if f.kind != "base":
        out["kind"] = f.kind
    if f.parent is not None:
        out["parent"] = f.parent.name
    if f.point is not None:
        out["point"] = f.point
    if f.degree is not None:
        out["degree"] = f.degree
    return out


def _sorted_set(J: Iterable[str]) -> list[str]:
    return sorted(J)


def to_json(doc: Document) -> dict:
    # parents before children, otherwise by name
    def depth(f: FieldLabel) -> int:
        return 0 if f.parent is None else 1 + depth(f.parent)

    fields = sorted(doc.fields.values(), key=lambda f: (depth(f), f.name))
    out: dict[str, Any] = {"schema": SCHEMA, "tau": doc.tau}
    out["fields"] = [_field_obj(f) for f in fields]
    out["atoms"] = [
        {"id": a.id, "field": a.field.name, "dim": a.dim, **({"torus": True} if a.torus else {})}
        for a in sorted(doc.atoms, key=lambda a: (a.field.name, a.id))
    ]
    out["facts"] = [
        {"field": f.lhs.field.name, "lhs": format_class(f.lhs), "rhs": format_class(f.rhs)} for f in doc.facts.facts
    ]
    out["torsor_facts"] = [
        {
            "field": t.base.field.name,
            "base": format_class(t.base),
            "order": t.order,
            "label": t.label,
            "total": format_class(c),
        }
        for t, c in sorted(doc.torsor_facts.total.items(), key=lambda kv: kv[0].key)
    ]
    out["models"] = []
    for mid, m in sorted(doc.models.items()):
        strata = []
        for s in m.strata:
            o: dict[str, Any] = {"J": _sorted_set(s.J), "alpha": s.alpha, "class": format_class(s.cls)}
            if s.parents:
                o["parents"] = dict(sorted(s.parents.items()))
            if s.label is not None:
                o["label"] = s.label
            strata.append(o)
        out["models"].append(
            {"id": mid, "field": m.field.name, "rel_dim": m.rel_dim, "components": dict(m.components), "strata": strata}
        )
    out["blowups"] = []
    for bid, (mid, spec) in sorted(doc.blowups.items()):
        o = {"id": bid, "model": mid, "case": spec.case, "J0": _sorted_set(spec.J0), "alpha": spec.alpha,
             "new_id": spec.new_id, "name": spec.name}
        if spec.pieces:
            o["pieces"] = [
                {"J1": _sorted_set(p.J1), "alpha": p.alpha, "class": format_class(p.cls), "container": p.container,
                 **({"parents": dict(sorted(p.parents.items()))} if p.parents else {})}
                for p in spec.pieces
            ]
        out["blowups"].append(o)
    out["schemes"] = [
        {"id": sid, "points": [{"id": p.id, "field": p.field.name, "dim": p.dim} for p in s.points]}
        for sid, s in sorted(doc.schemes.items())
    ]
    out["morphisms"] = []
    for gid, g in sorted(doc.morphisms.items()):
        o = {"id": gid, "source": g.source.name, "target": g.target.name, "mapping": dict(sorted(g.mapping.items()))}
        if g.ext:
            o["ext"] = {s: format_class(c) for s, c in sorted(g.ext.items())}
        out["morphisms"].append(o)
    out["pairs"] = []
    for pid, p in sorted(doc.pairs.items()):
        strata = []
        for s in p.strata:
            o = {"J": _sorted_set(s.J), "alpha": s.alpha, "class": format_class(s.cls), "point": s.point}
            if s.parents:
                o["parents"] = dict(sorted(s.parents.items()))
            strata.append(o)
        o = {"id": pid, "ambient_dim": p.ambient_dim, "scheme": p.scheme.name, "generic": p.generic,
             "singular": sorted(p.singular), "strata": strata}
        if p.push is not None:
            o["push"] = p.push.name
        out["pairs"].append(o)
    out["degenerations"] = [
        {"id": did, "pair": d.pair, "model": d.model, "collapse": d.collapse,
         "generic_field": d.generic_class.field.name, "generic_class": format_class(d.generic_class)}
        for did, d in sorted(doc.degenerations.items())
    ]
    return out


def dump(doc: Document) -> str:
    return json.dumps(to_json(doc), indent=2, ensure_ascii=False) + "\n"
