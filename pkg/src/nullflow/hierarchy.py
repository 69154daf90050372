"""The commuting hierarchy of curvature flows and its reference forms.

Entries pair a frame field with its induced curvature flow.  The two seeds
are the tangent field (index 0, curvature translation) and the third-order
field (index 1); the recursion step feeds half the flow back in as new
tangential data, raising the index by two.  Each step owns two integration
constants; the policy decides whether they are minted fresh (c1, c2, then
c3, c4, ...), pinned to zero, or supplied explicitly.

The ambient curvature G is pinned to zero throughout this module: the
hierarchy is a flat-space construction, and the G-terms of the general
variational formulas vanish with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .diffalg import (
    DiffAlgError,
    DiffPoly,
    FlowPair,
    const,
    lie_bracket_flows,
    param,
)
from .expr import parse_expr
from .nullcurve import FrameMetric, LocalVectorField, make_X, variational_flow

_FLAT = FrameMetric(G=const(0))

ConstantPolicy = Union[str, tuple]


@dataclass(frozen=True)
class HierarchyEntry:
    index: int
    field: LocalVectorField
    flow: FlowPair
    constants_used: tuple[str, ...]


def seed(index: int, constant: str | None = None) -> HierarchyEntry:
    """Seed entries: index 0 (translation, scale b) or 1 (third order, scale c)."""
    if index == 0:
        name = constant or "b"
        field = make_X(const(0), const(0), 0, param(name), _FLAT)
    elif index == 1:
        name = constant or "c"
        c1 = -2 * param("eps1") * param("a", 2) * param(name)
        field = make_X(const(0), const(0), c1, 0, _FLAT)
    else:
        raise ValueError("seed index must be 0 or 1")
    return HierarchyEntry(
        index, field, variational_flow(field, _FLAT), (name,)
    )


def _mint(used: set[str], count: int) -> list[str]:
    top = 0
    for name in used:
        if len(name) > 1 and name[0] == "c" and name[1:].isdigit():
            top = max(top, int(name[1:]))
    return ["c%d" % (top + i + 1,) for i in range(count)]


def recursion_step(
    entry: HierarchyEntry,
    policy: ConstantPolicy = "fresh",
    used_constants: set[str] | None = None,
) -> HierarchyEntry:
    """Apply the recursion once: index n -> n + 2.

    policy is "fresh" (mint the next two c-symbols; `used_constants`, when
    given, is consulted and updated so several lineages share one counter),
    "zero", or an explicit pair of constants.
    """
    half = Fraction(1, 2)
    eps12 = param("eps1") * param("eps2")
    h = half * entry.flow.p1
    l = -eps12 * entry.flow.p2
    minted: tuple[str, ...] = ()
    if policy == "fresh":
        used = set(used_constants) if used_constants is not None else set()
        used.update(entry.constants_used)
        for comp in entry.field.components():
            used.update(comp.parameters())
        names = _mint(used, 2)
        c1, c2 = param(names[0]), param(names[1])
        minted = tuple(names)
        if used_constants is not None:
            used_constants.update(names)
    elif policy == "zero":
        c1 = c2 = const(0)
    elif isinstance(policy, tuple) and len(policy) == 2:
        c1, c2 = (p if isinstance(p, DiffPoly) else const(p) for p in policy)
    else:
        raise ValueError("constant policy must be 'fresh', 'zero', or a pair")
    field = make_X(h, l, c1, c2, _FLAT)
    return HierarchyEntry(
        entry.index + 2,
        field,
        variational_flow(field, _FLAT),
        entry.constants_used + minted,
    )


def generate(upto: int, policy: ConstantPolicy = "fresh") -> list[HierarchyEntry]:
    """Entries 0..upto, stepping the even and odd lineages in index order."""
    if upto < 0:
        raise ValueError("upto must be nonnegative")
    shared: set[str] = set()
    entries: dict[int, HierarchyEntry] = {}
    for index in range(upto + 1):
        if index in (0, 1):
            entries[index] = seed(index)
        else:
            entries[index] = recursion_step(
                entries[index - 2], policy, shared if policy == "fresh" else None
            )
    return [entries[i] for i in range(upto + 1)]


def flow_of(entry: HierarchyEntry) -> FlowPair:
    return entry.flow


def commute_check(e1: HierarchyEntry, e2: HierarchyEntry) -> bool:
    """True when the two entries' curvature flows commute exactly."""
    return lie_bracket_flows(e1.flow, e2.flow).is_zero()


# Closed forms of the first four entries, with the constants named as they
# come out of generate(3): the index-2 step mints c1, c2 and the index-3
# step mints c3, c4.  Texts are in canonical parser syntax.
_REFERENCE_FORMS: dict[int, dict[str, str]] = {
    0: {
        "field.f": "b",
        "field.h": "0",
        "field.g": "0",
        "field.l": "0",
        "flow.k1": "b*k1'",
        "flow.k2": "b*k2'",
    },
    1: {
        "field.f": "-a*c*k1",
        "field.h": "0",
        "field.g": "-2*eps1*a^2*c",
        "field.l": "0",
        "flow.k1": "c*(k1''' + 3*a*k1*k1' + 6*eps1*eps2*a*k2*k2')",
        "flow.k2": "-c*(2*k2''' + 3*a*k1*k2')",
    },
    2: {
        "field.f": "-b*k1''/(4*a) - b*k1^2/8 + eps1*eps2*b*k2^2/4"
        " + eps1*c1*k1/(2*a) + c2",
        "field.h": "b*k1'/2",
        "field.g": "c1 - eps1*a*b*k1/2",
        "field.l": "-eps1*eps2*b*k2'",
        "flow.k1": "(2*b*k1^(5) + (10*a*b*k1 - 4*eps1*c1)*k1'''"
        " + 20*eps1*eps2*a*b*k2*k2''' + 20*a*b*k1'*k1''"
        " + 20*eps1*eps2*a*b*k2'*k2''"
        " + (15*a^2*b*k1^2 + 10*eps1*eps2*a^2*b*k2^2 - 12*eps1*a*c1*k1"
        " + 8*a^2*c2)*k1'"
        " + (20*eps1*eps2*a^2*b*k1 - 24*eps2*a*c1)*k2*k2')/(8*a^2)",
        "flow.k2": "(-8*b*k2^(5) + (8*eps1*c1 - 20*a*b*k1)*k2'''"
        " - 10*a*b*k1''*k2' - 20*a*b*k1'*k2''"
        " + (10*eps1*eps2*a^2*b*k2^2 - 5*a^2*b*k1^2 + 12*eps1*a*c1*k1"
        " + 8*a^2*c2)*k2')/(8*a^2)",
    },
    3: {
        "field.f": "-c*k1^(4)/(4*a) - 3*c*k1*k1''/4 - 7*c*k1'^2/8"
        " - 5*eps1*eps2*c*k2*k2''/2 - eps1*eps2*c*k2'^2 - a*c*k1^3/8"
        " + eps1*c3*k1/(2*a) - 3*eps1*eps2*a*c*k1*k2^2/4 + c4",
        "field.h": "c*k1'''/2 + 3*a*c*k1*k1'/2 + 3*eps1*eps2*a*c*k2*k2'",
        "field.g": "-eps1*a*c*k1''/2 - 3*eps1*a^2*c*k1^2/4"
        " - 3*eps2*a^2*c*k2^2/2 + c3",
        "field.l": "2*eps1*eps2*c*k2''' + 3*eps1*eps2*a*c*k1*k2'",
    },
}


def _component(entry: HierarchyEntry, name: str) -> DiffPoly:
    kind, part = name.split(".")
    if kind == "field":
        return getattr(entry.field, part)
    if kind == "flow":
        return entry.flow.p1 if part == "k1" else entry.flow.p2
    raise ValueError("unknown component %r" % (name,))


def verify_reference_forms(entries: Sequence[HierarchyEntry] | None = None) -> dict:
    """Compare generated entries against the stored closed forms.

    Returns {"ok": bool, "checks": [...]} with one record per component:
    index, component name, pass flag, and the symbolic difference (canonical
    text, "0" on a pass).
    """
    if entries is None:
        entries = generate(3)
    by_index = {entry.index: entry for entry in entries}
    checks = []
    for index in sorted(_REFERENCE_FORMS):
        if index not in by_index:
            continue
        entry = by_index[index]
        for name, text in sorted(_REFERENCE_FORMS[index].items()):
            expected = parse_expr(text)
            got = _component(entry, name)
            difference = got - expected
            checks.append(
                {
                    "index": index,
                    "component": name,
                    "ok": difference.is_zero(),
                    "difference": str(difference),
                }
            )
    return {"ok": all(c["ok"] for c in checks), "checks": checks}
