"""Name-based JSON documents for reports and results.

Every renderer returns plain dicts/lists of strings and numbers, with
collections sorted, so ``dumps`` produces byte-identical output for equal
inputs on any platform.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping

from .enough import EnoughReport, LocaleResult, TinyReport
from .fincat import FinCategory, MorId, ObjId
from .improve import Improvement, SynthesisResult
from .point import ChainPoint, Evaluation, ProjectivityReport
from .presheaf import Presheaf, PresheafMap, SheafifyResult, SheafReport, Subpresheaf
from .sites import Cotree, GrothendieckTopology, WarpReport, WovenReport
from .specfile import chain_doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _mors(cat: FinCategory, members: Iterable[MorId]) -> list[str]:
    return sorted(cat.mor_names[m] for m in members)


def sieve_doc(cat: FinCategory, members: Iterable[MorId]) -> list[str]:
    return _mors(cat, members)


def topology_doc(cat: FinCategory, topology: GrothendieckTopology) -> dict:
    covering = {
        cat.obj_names[o]: sorted(_mors(cat, s) for s in topology.covering[o])
        for o in cat.objects()
    }
    counts = {cat.obj_names[o]: len(topology.covering[o]) for o in cat.objects()}
    return {"covering": covering, "counts": counts}


def cotree_doc(cat: FinCategory, tree: Cotree) -> dict:
    doc: dict = {"root": cat.obj_names[tree.root]}
    if tree.branches is None:
        doc["branches"] = None
    else:
        doc["branches"] = [
            {"arrow": cat.mor_names[m], "tree": cotree_doc(cat, sub)}
            for m, sub in tree.branches
        ]
    return doc


def warp_report_doc(cat: FinCategory, report: WarpReport) -> dict:
    return {
        "verdict": report.verdict,
        "stability_failures": [
            {"object": cat.obj_names[o], "presieve": i, "arrow": cat.mor_names[h]}
            for o, i, h in report.stability_failures
        ],
        "witnesses": [
            {
                "object": cat.obj_names[o],
                "sieve": sieve_doc(cat, s),
                "cotree": cotree_doc(cat, t),
            }
            for o, s, t in report.witnesses
        ],
        "undecided": [
            {"object": cat.obj_names[o], "sieve": sieve_doc(cat, s)}
            for o, s in report.undecided
        ],
    }


def woven_doc(cat: FinCategory, report: WovenReport) -> dict:
    doc = warp_report_doc(cat, report.warp_report)
    doc["verdict"] = report.verdict
    doc["presieve_counts"] = {
        cat.obj_names[o]: report.presieve_counts[o] for o in cat.objects()
    }
    return doc


def presheaf_doc(x: Presheaf) -> dict:
    cat = x.cat
    restrictions = {}
    for m in cat.morphisms():
        if cat.is_identity(m) or not x.elements[cat.cod(m)]:
            continue
        restrictions[cat.mor_names[m]] = {
            x.elements[cat.cod(m)][i]: x.elements[cat.dom(m)][v]
            for i, v in enumerate(x.action[m])
        }
    return {
        "name": x.name,
        "sections": {cat.obj_names[o]: list(x.elements[o]) for o in cat.objects()},
        "restrictions": restrictions,
    }


def map_doc(phi: PresheafMap) -> dict:
    cat = phi.dom.cat
    return {
        cat.obj_names[o]: {
            phi.dom.elements[o][i]: phi.cod.elements[o][v]
            for i, v in enumerate(phi.components[o])
        }
        for o in cat.objects()
    }


def subpresheaf_doc(sub: Subpresheaf) -> dict:
    cat = sub.of.cat
    return {
        cat.obj_names[o]: sorted(sub.of.elements[o][i] for i in sub.members[o])
        for o in cat.objects()
    }


def sheaf_report_doc(cat: FinCategory, report: SheafReport) -> dict:
    def witness(w):
        if w is None:
            return None
        o, s, family, count = w
        return {
            "object": cat.obj_names[o],
            "sieve": sieve_doc(cat, s),
            "family": [[cat.mor_names[m], v] for m, v in family],
            "gluings": count,
        }

    return {
        "separated": report.separated,
        "sheaf": report.sheaf,
        "separated_witness": witness(report.separated_witness),
        "sheaf_witness": witness(report.sheaf_witness),
    }


def sheafify_doc(res: SheafifyResult) -> dict:
    cat = res.sheaf.cat
    return {
        "sheaf": presheaf_doc(res.sheaf),
        "unit": map_doc(res.unit),
        "unit_injective": all(
            len(set(res.unit.components[o])) == res.unit.dom.size(o)
            for o in cat.objects()
        ),
        "once_was_enough": all(
            res.once.size(o) == res.sheaf.size(o) for o in cat.objects()
        ),
    }


def evaluation_doc(ev: Evaluation) -> dict:
    return {
        "tail": ev.cat.obj_names[ev.tail],
        "classes": [ev.presheaf.label(ev.tail, c) for c in ev.classes],
    }


def projectivity_doc(cat: FinCategory, report: ProjectivityReport) -> dict:
    doc: dict = {
        "ok": report.ok,
        "certificate": [
            {
                "object": cat.obj_names[e.obj],
                "sieve": sieve_doc(cat, e.sieve),
                "class": e.cls,
                "stage": e.stage,
                "member": cat.mor_names[e.member],
            }
            for e in report.certificate
        ],
    }
    if report.failure is None:
        doc["failure"] = None
    else:
        o, s, c = report.failure
        doc["failure"] = {
            "object": cat.obj_names[o],
            "sieve": sieve_doc(cat, s),
            "class": c,
        }
    return doc


def synthesis_doc(cat: FinCategory, result: SynthesisResult) -> dict:
    return {
        "ok": result.ok,
        "reason": result.reason,
        "point": None if result.point is None else chain_doc(cat, result.point),
        "witness_classes": (
            None if result.witness_classes is None else list(result.witness_classes)
        ),
        "certificate": (
            None
            if result.certificate is None
            else projectivity_doc(cat, result.certificate)
        ),
        "trace": [
            {
                "k": r.k,
                "stage": r.stage,
                "presieve": r.presieve_index,
                "member": cat.mor_names[r.member],
                "step": cat.mor_names[r.step],
            }
            for r in result.trace
        ],
        "leg_failures": [
            {"member": cat.mor_names[m], "why": why}
            for m, why in result.leg_failures or ()
        ],
    }


def improvement_doc(cat: FinCategory, imp: Improvement) -> dict:
    from .improve import DenseTarget, PresieveTarget

    target = imp.data.target
    if isinstance(target, PresieveTarget):
        target_doc: dict = {
            "kind": "presieve",
            "at": cat.obj_names[target.presieve.target],
            "members": _mors(cat, target.presieve.members),
        }
    else:
        target_doc = {"kind": "dense", "members": subpresheaf_doc(target.sub)}
    return {
        "point": chain_doc(cat, imp.data.point),
        "presheaf": imp.data.presheaf.name,
        "x": {"stage": imp.data.x.stage, "elem": imp.data.x.elem},
        "y": {"stage": imp.data.y.stage, "elem": imp.data.y.elem},
        "target": target_doc,
        "extension": [cat.mor_names[m] for m in imp.extension],
        "member": None if imp.member is None else cat.mor_names[imp.member],
        "witness": {"stage": imp.witness.stage, "elem": imp.witness.elem},
    }


def enough_doc(cat: FinCategory, report: EnoughReport) -> dict:
    pairs = []
    for out in report.outcomes:
        x = out.result
        pairs.append(
            {
                "presheaf": out.presheaf,
                "object": cat.obj_names[out.obj],
                "x": out.x_elem,
                "y": out.y_elem,
                "ok": x.ok,
                "steps": len(x.trace),
                "point": None if x.point is None else chain_doc(cat, x.point),
                "reason": x.reason,
            }
        )
    return {
        "ok": report.ok,
        "pairs": pairs,
        "skipped": [{"presheaf": n, "why": why} for n, why in report.skipped],
    }


def locale_doc(cat: FinCategory, result: LocaleResult) -> dict:
    def names(u: frozenset[ObjId]) -> list[str]:
        return sorted(cat.obj_names[o] for o in u)

    return {
        "frame": sorted(names(u) for u in result.frame),
        "points": [
            {
                "generator": names(p.generator),
                "filter": sorted(names(u) for u in p.filter),
                "chain": chain_doc(cat, p.chain),
            }
            for p in result.points
        ],
    }


def points_doc(cat: FinCategory, points: Iterable[ChainPoint]) -> list[dict]:
    return [chain_doc(cat, p) for p in points]


def tiny_doc(cat: FinCategory, report: TinyReport) -> dict:
    return {
        "tiny": [cat.obj_names[o] for o in report.tiny],
        "generation_ok": report.generation_ok,
        "failures": [
            {"representable": cat.obj_names[d], "object": cat.obj_names[e], "section": z}
            for d, e, z in report.failures
        ],
    }


def transfer_doc(
    cat: FinCategory, kept: Iterable[ChainPoint], dropped: Iterable[ChainPoint]
) -> dict:
    return {
        "kept": points_doc(cat, kept),
        "dropped": points_doc(cat, dropped),
    }
