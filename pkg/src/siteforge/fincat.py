"""Finite categories with explicit composition tables.

Objects and morphisms are integer indices into name tables.  Composition is
written in diagram order throughout: ``compose(f, g)`` is "first f, then g"
and is defined exactly when ``cod(f) == dom(g)``.

Limit-style searches (pullbacks, pushouts, chain limits) are exhaustive:
candidates are enumerated in ascending index order and each is verified
against every competing cone before being returned, so results are
deterministic for a fixed presentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

ObjId = int
MorId = int


class FinCatError(Exception):
    """Base class for errors raised by this module."""


class UnknownObject(FinCatError):
    pass


class UnknownMorphism(FinCatError):
    pass


class CompositionUndefined(FinCatError):
    pass


class NotFound(FinCatError):
    """An exhaustive search verified that no candidate has the universal property."""


@dataclass(frozen=True)
class LawViolation:
    """One failed category axiom, with the morphisms that witness it.

    ``kind`` is one of ``CompositionUndefined``, ``AssociativityViolation``
    or ``IdentityViolation``.
    """

    kind: str
    mors: tuple[MorId, ...]
    detail: str


class InvalidCategory(FinCatError):
    def __init__(self, violations: Sequence[LawViolation]):
        self.violations = tuple(violations)
        lines = "; ".join(f"{v.kind}{v.mors}: {v.detail}" for v in violations[:8])
        more = "" if len(violations) <= 8 else f" (+{len(violations) - 8} more)"
        super().__init__(f"category laws violated: {lines}{more}")


@dataclass(frozen=True, eq=False)
class FinCategory:
    """An immutable finite category.

    ``mor_dom[m]`` / ``mor_cod[m]`` give endpoints, ``identity_of[o]`` the
    identity at each object, and ``table[(f, g)]`` the composite ``f;g`` for
    every composable pair.  Instances are expected to come from
    :func:`validate_category` or a constructor that guarantees the laws.
    """

    obj_names: tuple[str, ...]
    mor_names: tuple[str, ...]
    mor_dom: tuple[ObjId, ...]
    mor_cod: tuple[ObjId, ...]
    identity_of: tuple[MorId, ...]
    table: Mapping[tuple[MorId, MorId], MorId]
    _hom: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_objects(self) -> int:
        return len(self.obj_names)

    @property
    def n_morphisms(self) -> int:
        return len(self.mor_names)

    def objects(self) -> range:
        return range(self.n_objects)

    def morphisms(self) -> range:
        return range(self.n_morphisms)

    def check_obj(self, o: ObjId) -> ObjId:
        if not (0 <= o < self.n_objects):
            raise UnknownObject(f"no object with index {o}")
        return o

    def check_mor(self, m: MorId) -> MorId:
        if not (0 <= m < self.n_morphisms):
            raise UnknownMorphism(f"no morphism with index {m}")
        return m

    def dom(self, m: MorId) -> ObjId:
        return self.mor_dom[self.check_mor(m)]

    def cod(self, m: MorId) -> ObjId:
        return self.mor_cod[self.check_mor(m)]

    def identity(self, o: ObjId) -> MorId:
        return self.identity_of[self.check_obj(o)]

    def is_identity(self, m: MorId) -> bool:
        return self.identity_of[self.dom(m)] == m

    def compose(self, f: MorId, g: MorId) -> MorId:
        """Diagram-order composite ``f;g``; requires ``cod(f) == dom(g)``."""
        if self.cod(f) != self.dom(g):
            raise CompositionUndefined(
                f"cod({self.mor_names[f]}) != dom({self.mor_names[g]})"
            )
        return self.table[(f, g)]

    def compose_path(self, path: Sequence[MorId]) -> MorId:
        """Composite of a nonempty path, first morphism applied first."""
        if not path:
            raise CompositionUndefined("empty path has no composite")
        acc = path[0]
        for m in path[1:]:
            acc = self.compose(acc, m)
        return acc

    def hom(self, a: ObjId, b: ObjId) -> tuple[MorId, ...]:
        self.check_obj(a), self.check_obj(b)
        key = (a, b)
        if key not in self._hom:
            self._hom[key] = tuple(
                m
                for m in self.morphisms()
                if self.mor_dom[m] == a and self.mor_cod[m] == b
            )
        return self._hom[key]

    def into(self, b: ObjId) -> tuple[MorId, ...]:
        """All morphisms with codomain ``b``, ascending."""
        self.check_obj(b)
        return tuple(m for m in self.morphisms() if self.mor_cod[m] == b)

    def out_of(self, a: ObjId) -> tuple[MorId, ...]:
        self.check_obj(a)
        return tuple(m for m in self.morphisms() if self.mor_dom[m] == a)

    def obj_index(self, name: str) -> ObjId:
        try:
            return self.obj_names.index(name)
        except ValueError:
            raise UnknownObject(f"no object named {name!r}") from None

    def mor_index(self, name: str) -> MorId:
        try:
            return self.mor_names.index(name)
        except ValueError:
            raise UnknownMorphism(f"no morphism named {name!r}") from None

    def opposite(self) -> FinCategory:
        """Same indices, arrows reversed, table transposed."""
        return FinCategory(
            obj_names=self.obj_names,
            mor_names=self.mor_names,
            mor_dom=self.mor_cod,
            mor_cod=self.mor_dom,
            identity_of=self.identity_of,
            table={(g, f): h for (f, g), h in self.table.items()},
        )


def category_violations(
    obj_names: Sequence[str],
    mor_names: Sequence[str],
    mor_dom: Sequence[ObjId],
    mor_cod: Sequence[ObjId],
    identity_of: Sequence[MorId],
    entries: Iterable[tuple[MorId, MorId, MorId]],
) -> tuple[dict[tuple[MorId, MorId], MorId], tuple[LawViolation, ...]]:
    """Check a raw presentation against the category axioms.

    Returns the composition table that was assembled plus every violation
    found: conflicting or ill-typed entries, missing composites, failed
    identity laws, failed associativity.  The table is still returned when
    violations exist so callers can inspect it.
    """
    out: list[LawViolation] = []
    n_mor = len(mor_names)
    table: dict[tuple[MorId, MorId], MorId] = {}

    def bad(kind: str, mors: tuple[MorId, ...], detail: str) -> None:
        out.append(LawViolation(kind, mors, detail))

    for f, g, h in entries:
        if not all(0 <= m < n_mor for m in (f, g, h)):
            bad("CompositionUndefined", (f, g, h), "entry references unknown morphism")
            continue
        if mor_cod[f] != mor_dom[g]:
            bad("CompositionUndefined", (f, g), "entry for a non-composable pair")
            continue
        if mor_dom[h] != mor_dom[f] or mor_cod[h] != mor_cod[g]:
            bad("CompositionUndefined", (f, g, h), "composite has wrong endpoints")
            continue
        prev = table.get((f, g))
        if prev is not None and prev != h:
            bad("CompositionUndefined", (f, g), "conflicting entries for the same pair")
            continue
        table[(f, g)] = h

    for o, i in enumerate(identity_of):
        if not (0 <= i < n_mor) or mor_dom[i] != o or mor_cod[i] != o:
            bad("IdentityViolation", (i,), f"identity of object {o} is not an endomorphism")

    for f in range(n_mor):
        for g in range(n_mor):
            if mor_cod[f] == mor_dom[g] and (f, g) not in table:
                bad("CompositionUndefined", (f, g), "composable pair has no entry")

    if out:
        return table, tuple(out)

    for o, i in enumerate(identity_of):
        for f in range(n_mor):
            if mor_dom[f] == o and table[(i, f)] != f:
                bad("IdentityViolation", (f,), "left identity law fails")
            if mor_cod[f] == o and table[(f, i)] != f:
                bad("IdentityViolation", (f,), "right identity law fails")

    for f in range(n_mor):
        for g in range(n_mor):
            if mor_cod[f] != mor_dom[g]:
                continue
            fg = table[(f, g)]
            for h in range(n_mor):
                if mor_cod[g] != mor_dom[h]:
                    continue
                if table[(fg, h)] != table[(f, table[(g, h)])]:
                    bad("AssociativityViolation", (f, g, h), "(f;g);h != f;(g;h)")

    return table, tuple(out)


def validate_category(
    obj_names: Sequence[str],
    mor_names: Sequence[str],
    mor_dom: Sequence[ObjId],
    mor_cod: Sequence[ObjId],
    identity_of: Sequence[MorId],
    entries: Iterable[tuple[MorId, MorId, MorId]],
) -> FinCategory:
    """Assemble and fully validate a finite category, or raise InvalidCategory."""
    table, violations = category_violations(
        obj_names, mor_names, mor_dom, mor_cod, identity_of, entries
    )
    if violations:
        raise InvalidCategory(violations)
    return FinCategory(
        obj_names=tuple(obj_names),
        mor_names=tuple(mor_names),
        mor_dom=tuple(mor_dom),
        mor_cod=tuple(mor_cod),
        identity_of=tuple(identity_of),
        table=table,
    )


@dataclass(frozen=True)
class Cospan:
    """Two morphisms with a common codomain."""

    left: MorId
    right: MorId


@dataclass(frozen=True)
class Span:
    """Two morphisms with a common domain."""

    left: MorId
    right: MorId


@dataclass(frozen=True)
class SquareCorner:
    """Result of a pullback or pushout search: apex plus the two legs."""

    apex: ObjId
    left: MorId
    right: MorId


def pullback(cat: FinCategory, cospan: Cospan) -> SquareCorner:
    """Least pullback of ``cospan`` found by exhaustive verification.

    The returned legs satisfy ``left;cospan.left == right;cospan.right`` with
    ``left`` landing in ``dom(cospan.left)``.  Raises NotFound when no
    candidate square is universal.
    """
    f, g = cospan.left, cospan.right
    if cat.cod(f) != cat.cod(g):
        raise CompositionUndefined("cospan legs have different codomains")
    a, b = cat.dom(f), cat.dom(g)
    for apex in cat.objects():
        for p in cat.hom(apex, a):
            pf = cat.compose(p, f)
            for q in cat.hom(apex, b):
                if pf != cat.compose(q, g):
                    continue
                if _pullback_universal(cat, apex, p, q, f, g):
                    return SquareCorner(apex, p, q)
    raise NotFound(f"no pullback of cospan ({cat.mor_names[f]}, {cat.mor_names[g]})")


def _pullback_universal(
    cat: FinCategory, apex: ObjId, p: MorId, q: MorId, f: MorId, g: MorId
) -> bool:
    a, b = cat.dom(f), cat.dom(g)
    for other in cat.objects():
        for u in cat.hom(other, a):
            uf = cat.compose(u, f)
            for v in cat.hom(other, b):
                if uf != cat.compose(v, g):
                    continue
                mediators = [
                    t
                    for t in cat.hom(other, apex)
                    if cat.compose(t, p) == u and cat.compose(t, q) == v
                ]
                if len(mediators) != 1:
                    return False
    return True


def pushout(cat: FinCategory, span: Span) -> SquareCorner:
    """Least pushout of ``span``, dual search to :func:`pullback`."""
    f, g = span.left, span.right
    if cat.dom(f) != cat.dom(g):
        raise CompositionUndefined("span legs have different domains")
    corner = pullback(cat.opposite(), Cospan(f, g))
    return corner


def unique_mediator_to_cocone(
    cat: FinCategory, corner: SquareCorner, span: Span, cocone: SquareCorner
) -> MorId:
    """The unique comparison map from a pushout corner to another cocone."""
    for u in cat.hom(corner.apex, cocone.apex):
        if (
            cat.compose(corner.left, u) == cocone.left
            and cat.compose(corner.right, u) == cocone.right
        ):
            return u
    raise NotFound("cocone does not factor through the pushout corner")


def is_mono(cat: FinCategory, m: MorId) -> bool:
    """Left cancellability checked against every parallel pair."""
    a = cat.dom(m)
    for other in cat.objects():
        homs = cat.hom(other, a)
        for i, u in enumerate(homs):
            for v in homs[i + 1 :]:
                if cat.compose(u, m) == cat.compose(v, m):
                    return False
    return True


@dataclass(frozen=True)
class Cochain:
    """A chain of connecting morphisms, newest stage last.

    ``steps[i]`` points from stage ``i+1`` to stage ``i``; an optional
    ``cycle`` appends an eventually-periodic tail whose morphisms loop back
    to the final prefix stage.  An empty cycle presents a finite chain.
    """

    start: ObjId
    steps: tuple[MorId, ...] = ()
    cycle: tuple[MorId, ...] = ()

    def validate(self, cat: FinCategory) -> None:
        at = self.start
        cat.check_obj(at)
        for s in self.steps:
            if cat.cod(s) != at:
                raise CompositionUndefined("chain step does not land in the previous stage")
            at = cat.dom(s)
        loop_at = at
        for s in self.cycle:
            if cat.cod(s) != loop_at:
                raise CompositionUndefined("cycle step does not land in the previous stage")
            loop_at = cat.dom(s)
        if self.cycle and loop_at != at:
            raise CompositionUndefined("cycle does not return to the chain tail")

    def tail(self, cat: FinCategory) -> ObjId:
        return cat.dom(self.steps[-1]) if self.steps else self.start

    def loop(self, cat: FinCategory) -> MorId:
        """Composite of one full period at the tail; identity when acyclic."""
        t = self.tail(cat)
        if not self.cycle:
            return cat.identity(t)
        return cat.compose_path(tuple(reversed(self.cycle)))


@dataclass(frozen=True)
class ChainLimit:
    apex: ObjId
    tail_leg: MorId
    prefix_legs: tuple[MorId, ...]


def cochain_limit(cat: FinCategory, chain: Cochain) -> ChainLimit:
    """Limit of the (possibly infinite, eventually periodic) chain diagram.

    Cones with apex A correspond to backward-infinite sequences of legs into
    the tail under post-composition with the loop composite; those sequences
    are exactly the elements of the eventual image of that post-composition
    map, on which it acts bijectively.  A candidate ``(L, leg)`` is therefore
    a limit iff ``t -> t;leg`` is a bijection from hom(A, L) onto the
    eventual image at every A.  Candidates are tried in ascending order.
    """
    chain.validate(cat)
    t = chain.tail(cat)
    lam = chain.loop(cat)

    def eventual(a: ObjId) -> tuple[MorId, ...]:
        cur = set(cat.hom(a, t))
        for _ in range(len(cur) + 1):
            cur = {cat.compose(u, lam) for u in cur}
        return tuple(sorted(cur))

    ev = {a: eventual(a) for a in cat.objects()}
    for apex in cat.objects():
        for leg in ev[apex]:
            if all(
                sorted(cat.compose(u, leg) for u in cat.hom(a, apex)) == list(ev[a])
                and len(cat.hom(a, apex)) == len(ev[a])
                for a in cat.objects()
            ):
                prefix = []
                acc = leg
                for s in reversed(chain.steps):
                    acc = cat.compose(acc, s)
                    prefix.append(acc)
                return ChainLimit(apex, leg, tuple(reversed(prefix)))
    raise NotFound("chain diagram has no limit in this category")
