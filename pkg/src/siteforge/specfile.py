"""Loading finite sites, presheaves and chains from JSON bundle files.

A bundle lists objects, named non-identity morphisms with endpoints, the
non-identity composition triples, a warp, and optionally presheaves, maps
between them, and subterminal section selections.  Identities are created
automatically (named ``id_<object>``) and identity composites are filled
in, so files only spell out the non-trivial data.

Malformed input (unknown names, wrong shapes, duplicate labels) raises
SpecError.  Well-formed input that fails a mathematical law (category
axioms, functoriality, naturality, restriction closure) raises
BundleInvalid with a structured report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .fincat import FinCategory, MorId, category_violations
from .presheaf import (
    Presheaf,
    PresheafMap,
    Subpresheaf,
    check_natural,
    check_presheaf,
    terminal_presheaf,
)
from .point import ChainPoint
from .sites import Site, Warp


class SpecError(Exception):
    """The input file does not parse into the expected shape."""


class BundleInvalid(Exception):
    """The input parsed but fails mathematical validation.

    ``report`` maps a section name ("category", "presheaf:foo", ...) to a
    list of violation records, each a dict with kind/witness/detail.
    """

    def __init__(self, report: dict[str, list[dict]]):
        self.report = report
        heads = ", ".join(sorted(report))
        super().__init__(f"bundle fails validation in: {heads}")


@dataclass(eq=False)
class SiteBundle:
    name: str
    cat: FinCategory
    warp: Warp
    presheaves: dict[str, Presheaf]
    maps: dict[str, PresheafMap]
    subterminals: dict[str, Subpresheaf]
    _site: Site | None = field(default=None, repr=False)

    def site(self) -> Site:
        if self._site is None:
            self._site = Site.saturated(self.cat, self.warp)
        return self._site

    def presheaf(self, name: str) -> Presheaf:
        if name not in self.presheaves:
            raise SpecError(f"no presheaf named {name!r} in bundle {self.name!r}")
        return self.presheaves[name]

    def subterminal(self, name: str) -> Subpresheaf:
        if name not in self.subterminals:
            raise SpecError(f"no subterminal named {name!r} in bundle {self.name!r}")
        return self.subterminals[name]


def _expect(doc: Mapping, key: str, typ: type, where: str) -> Any:
    if key not in doc:
        raise SpecError(f"{where}: missing key {key!r}")
    val = doc[key]
    if not isinstance(val, typ):
        raise SpecError(f"{where}: {key!r} must be {typ.__name__}")
    return val


def _build_category(doc: Mapping) -> FinCategory:
    objects = _expect(doc, "objects", list, "bundle")
    if len(set(objects)) != len(objects) or not all(isinstance(s, str) for s in objects):
        raise SpecError("objects must be distinct strings")
    obj_idx = {s: i for i, s in enumerate(objects)}

    mor_names = [f"id_{s}" for s in objects]
    dom = list(range(len(objects)))
    cod = list(range(len(objects)))
    for row in _expect(doc, "morphisms", list, "bundle"):
        if not isinstance(row, dict):
            raise SpecError("morphisms entries must be objects")
        name = _expect(row, "name", str, "morphism")
        for key in ("dom", "cod"):
            if _expect(row, key, str, f"morphism {name!r}") not in obj_idx:
                raise SpecError(f"morphism {name!r}: unknown object {row[key]!r}")
        if name in mor_names:
            raise SpecError(f"duplicate morphism name {name!r}")
        mor_names.append(name)
        dom.append(obj_idx[row["dom"]])
        cod.append(obj_idx[row["cod"]])
    mor_idx = {s: i for i, s in enumerate(mor_names)}

    entries: list[tuple[MorId, MorId, MorId]] = []
    for f in range(len(mor_names)):
        entries.append((dom[f], f, f))
        entries.append((f, cod[f], f))
    for row in doc.get("composition", []):
        if not (isinstance(row, list) and len(row) == 3):
            raise SpecError("composition entries must be [f, g, f_then_g] triples")
        try:
            entries.append(tuple(mor_idx[s] for s in row))
        except (KeyError, TypeError):
            raise SpecError(f"composition triple {row!r} names an unknown morphism") from None

    identity_of = list(range(len(objects)))
    table, violations = category_violations(objects, mor_names, dom, cod, identity_of, entries)
    if violations:
        raise BundleInvalid(
            {
                "category": [
                    {
                        "kind": v.kind,
                        "witness": [mor_names[m] for m in v.mors],
                        "detail": v.detail,
                    }
                    for v in violations
                ]
            }
        )
    return FinCategory(
        tuple(objects), tuple(mor_names), tuple(dom), tuple(cod), tuple(identity_of), table
    )


def _build_warp(cat: FinCategory, doc: Mapping) -> Warp:
    raw = doc.get("warp", {})
    if not isinstance(raw, dict):
        raise SpecError("warp must map object names to lists of presieves")
    per_object: dict[int, list[list[MorId]]] = {}
    for obj_name, rows in raw.items():
        try:
            o = cat.obj_index(obj_name)
        except Exception:
            raise SpecError(f"warp names unknown object {obj_name!r}") from None
        presieves = []
        for row in rows:
            members = []
            for mor_name in row:
                try:
                    m = cat.mor_index(mor_name)
                except Exception:
                    raise SpecError(f"warp at {obj_name!r} names unknown morphism {mor_name!r}") from None
                if cat.cod(m) != o:
                    raise SpecError(f"warp at {obj_name!r}: {mor_name!r} does not land there")
                members.append(m)
            presieves.append(members)
        per_object[o] = presieves
    return Warp.from_members(cat, per_object)


def _build_presheaf(cat: FinCategory, name: str, doc: Mapping) -> tuple[Presheaf, list[dict]]:
    sections = _expect(doc, "sections", dict, f"presheaf {name!r}")
    elements = []
    for s in cat.obj_names:
        labels = sections.get(s, [])
        if not (isinstance(labels, list) and all(isinstance(l, str) for l in labels)):
            raise SpecError(f"presheaf {name!r}: sections at {s!r} must be a list of strings")
        if len(set(labels)) != len(labels):
            raise SpecError(f"presheaf {name!r}: duplicate section label at {s!r}")
        elements.append(tuple(labels))

    restrictions = doc.get("restrictions", {})
    if not isinstance(restrictions, dict):
        raise SpecError(f"presheaf {name!r}: restrictions must be an object")
    for mor_name in restrictions:
        try:
            cat.mor_index(mor_name)
        except Exception:
            raise SpecError(f"presheaf {name!r}: unknown morphism {mor_name!r}") from None

    action = []
    for m in cat.morphisms():
        a, b = cat.dom(m), cat.cod(m)
        src, dst = elements[b], elements[a]
        mapping = restrictions.get(cat.mor_names[m])
        if mapping is None:
            if cat.is_identity(m):
                action.append(tuple(range(len(src))))
                continue
            if not src:
                action.append(())
                continue
            raise SpecError(f"presheaf {name!r}: no restriction along {cat.mor_names[m]!r}")
        row = []
        for lab in src:
            if lab not in mapping:
                raise SpecError(
                    f"presheaf {name!r}: restriction {cat.mor_names[m]!r} misses label {lab!r}"
                )
            out = mapping[lab]
            if out not in dst:
                raise SpecError(
                    f"presheaf {name!r}: restriction {cat.mor_names[m]!r} sends {lab!r} to unknown {out!r}"
                )
            row.append(dst.index(out))
        action.append(tuple(row))

    x = Presheaf(cat, tuple(elements), tuple(action), name=name)
    bad = [
        {"kind": v.kind, "witness": [str(w) for w in v.witness], "detail": v.detail}
        for v in check_presheaf(x)
    ]
    return x, bad


def _build_map(
    presheaves: Mapping[str, Presheaf], name: str, doc: Mapping
) -> tuple[PresheafMap, list[dict]]:
    dom_name = _expect(doc, "dom", str, f"map {name!r}")
    cod_name = _expect(doc, "cod", str, f"map {name!r}")
    for s in (dom_name, cod_name):
        if s not in presheaves:
            raise SpecError(f"map {name!r} references unknown presheaf {s!r}")
    x, y = presheaves[dom_name], presheaves[cod_name]
    cat = x.cat
    raw = _expect(doc, "components", dict, f"map {name!r}")
    components = []
    for o in cat.objects():
        mapping = raw.get(cat.obj_names[o], {})
        row = []
        for lab in x.elements[o]:
            if lab not in mapping:
                raise SpecError(f"map {name!r}: no image for {lab!r} at {cat.obj_names[o]!r}")
            out = mapping[lab]
            if out not in y.elements[o]:
                raise SpecError(f"map {name!r}: image {out!r} not a section at {cat.obj_names[o]!r}")
            row.append(y.elements[o].index(out))
        components.append(tuple(row))
    phi = PresheafMap(x, y, tuple(components))
    bad = [
        {"kind": v.kind, "witness": [str(w) for w in v.witness], "detail": v.detail}
        for v in check_natural(phi)
    ]
    return phi, bad


def bundle_from_doc(doc: Mapping, name: str = "bundle") -> SiteBundle:
    if not isinstance(doc, Mapping):
        raise SpecError("top level must be an object")
    cat = _build_category(doc)
    warp = _build_warp(cat, doc)
    try:
        warp.validate(cat)
    except Exception as e:
        raise SpecError(f"warp invalid: {e}") from None

    report: dict[str, list[dict]] = {}
    presheaves: dict[str, Presheaf] = {}
    for pname, pdoc in doc.get("presheaves", {}).items():
        x, bad = _build_presheaf(cat, pname, pdoc)
        presheaves[pname] = x
        if bad:
            report[f"presheaf:{pname}"] = bad

    maps: dict[str, PresheafMap] = {}
    for mname, mdoc in doc.get("maps", {}).items():
        phi, bad = _build_map(presheaves, mname, mdoc)
        maps[mname] = phi
        if bad:
            report[f"map:{mname}"] = bad

    one = terminal_presheaf(cat)
    subterminals: dict[str, Subpresheaf] = {}
    for sname, objs in doc.get("subterminals", {}).items():
        if not isinstance(objs, list):
            raise SpecError(f"subterminal {sname!r} must list object names")
        members = []
        for o in cat.objects():
            members.append(frozenset([0]) if cat.obj_names[o] in objs else frozenset())
        for s in objs:
            if s not in cat.obj_names:
                raise SpecError(f"subterminal {sname!r} names unknown object {s!r}")
        sub = Subpresheaf(one, tuple(members))
        try:
            sub.validate()
        except ValueError as e:
            report.setdefault(f"subterminal:{sname}", []).append(
                {"kind": "NotSubterminal", "witness": [sname], "detail": str(e)}
            )
        subterminals[sname] = sub

    if report:
        raise BundleInvalid(report)
    return SiteBundle(
        doc.get("name", name), cat, warp, presheaves, maps, subterminals
    )


def load_bundle(path: str | Path) -> SiteBundle:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise SpecError(f"cannot read {p}: {e}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"{p} is not valid JSON: {e}") from None
    return bundle_from_doc(doc, name=p.stem)


def parse_chain(cat: FinCategory, doc: Mapping) -> ChainPoint:
    """Read a chain from {"start": obj, "steps": [...], "cycle": [...]}."""
    if not isinstance(doc, Mapping):
        raise SpecError("chain must be an object with start/steps/cycle")
    start_name = _expect(doc, "start", str, "chain")
    try:
        start = cat.obj_index(start_name)
    except Exception:
        raise SpecError(f"chain starts at unknown object {start_name!r}") from None

    def mors(key: str) -> tuple[MorId, ...]:
        rows = doc.get(key, [])
        if not isinstance(rows, list):
            raise SpecError(f"chain {key!r} must be a list of morphism names")
        out = []
        for s in rows:
            try:
                out.append(cat.mor_index(s))
            except Exception:
                raise SpecError(f"chain {key!r} names unknown morphism {s!r}") from None
        return tuple(out)

    chain = ChainPoint(start, mors("steps"), mors("cycle"))
    try:
        chain.validate(cat)
    except Exception as e:
        raise SpecError(f"chain does not compose: {e}") from None
    return chain


def chain_doc(cat: FinCategory, chain: ChainPoint) -> dict:
    return {
        "start": cat.obj_names[chain.start],
        "steps": [cat.mor_names[m] for m in chain.steps],
        "cycle": [cat.mor_names[m] for m in chain.cycle],
    }
