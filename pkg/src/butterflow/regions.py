"""Exact two-dimensional rate regions for the butterfly family.

A region is a conjunction of *min-affine* constraints

    a1*R1 + a2*R2 <= min_j (c0_j + b1_j*R1 + b2_j*R2)

together with R1 >= 0 and R2 >= 0.  Each constraint expands into one
half-plane per right-hand term, so every region (including the
achievability forms that put rates inside the min) is a convex polygon
with rational vertices that can be enumerated and compared exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import UnboundedRegionError, UnsupportedVariantError
from .netgraph import Variant, parse_rational, resolve_capacities

_ZERO = Fraction(0)


@dataclass(frozen=True, order=True)
class RatePair:
    r1: Fraction
    r2: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "r1", parse_rational(self.r1))
        object.__setattr__(self, "r2", parse_rational(self.r2))
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError(f"rates must be non-negative, got ({self.r1}, {self.r2})")

    @classmethod
    def of(cls, value: "RatePair | Sequence[object]") -> "RatePair":
        if isinstance(value, RatePair):
            return value
        r1, r2 = value
        return cls(r1, r2)

    def scaled(self, factor: Fraction) -> "RatePair":
        return RatePair(self.r1 * factor, self.r2 * factor)

    def __iter__(self):
        yield self.r1
        yield self.r2

    def __str__(self) -> str:
        return f"({self.r1}, {self.r2})"


@dataclass(frozen=True)
class AffineTerm:
    const: Fraction
    r1: Fraction = _ZERO
    r2: Fraction = _ZERO
    text: str = ""

    def value(self, p: RatePair) -> Fraction:
        return self.const + self.r1 * p.r1 + self.r2 * p.r2

    def __add__(self, other: "AffineTerm") -> "AffineTerm":
        return AffineTerm(
            self.const + other.const,
            self.r1 + other.r1,
            self.r2 + other.r2,
            f"{self.text} + {other.text}",
        )


@dataclass(frozen=True)
class HalfPlane:
    """``a*R1 + b*R2 <= c``; ``origin`` indexes the generating constraint (-1 = axis)."""

    a: Fraction
    b: Fraction
    c: Fraction
    origin: int = -1

    def holds(self, x: Fraction, y: Fraction) -> bool:
        return self.a * x + self.b * y <= self.c

    def tight(self, x: Fraction, y: Fraction) -> bool:
        return self.a * x + self.b * y == self.c


@dataclass(frozen=True)
class MinAffineConstraint:
    lhs: tuple[Fraction, Fraction]
    terms: tuple[AffineTerm, ...]
    formula: str = ""

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("a min-affine constraint needs at least one term")

    @property
    def lhs_text(self) -> str:
        a1, a2 = self.lhs
        parts = []
        for coef, name in ((a1, "R1"), (a2, "R2")):
            if coef == 0:
                continue
            parts.append(name if coef == 1 else f"{coef}*{name}")
        return " + ".join(parts) or "0"

    def holds(self, p: RatePair) -> bool:
        a1, a2 = self.lhs
        return a1 * p.r1 + a2 * p.r2 <= min(t.value(p) for t in self.terms)

    def halfplanes(self, origin: int = -1) -> list[HalfPlane]:
        a1, a2 = self.lhs
        return [HalfPlane(a1 - t.r1, a2 - t.r2, t.const, origin) for t in self.terms]

    def bound(self) -> Fraction | None:
        """Numeric right side when no term depends on the rates."""
        if any(t.r1 or t.r2 for t in self.terms):
            return None
        return min(t.const for t in self.terms)

    def describe(self) -> str:
        bound = self.bound()
        rhs = str(bound) if bound is not None else self.formula
        return f"{self.lhs_text} <= {rhs}  [{self.formula}]"


@dataclass(frozen=True)
class Vertex:
    point: RatePair
    active: tuple[int, ...]


@dataclass(frozen=True)
class RateRegion:
    constraints: tuple[MinAffineConstraint, ...]
    variant: Variant | None = None
    secure: bool = False
    form: str = "capacity"
    note: str = ""

    def halfplanes(self) -> list[HalfPlane]:
        """Expanded half-planes; the last two are the axes R1 >= 0, R2 >= 0."""
        planes: list[HalfPlane] = []
        for i, con in enumerate(self.constraints):
            planes.extend(con.halfplanes(i))
        planes.append(HalfPlane(Fraction(-1), _ZERO, _ZERO))
        planes.append(HalfPlane(_ZERO, Fraction(-1), _ZERO))
        return planes

    def direct_contains(self, p: RatePair) -> bool:
        """Evaluate every min-affine inequality as written (no expansion)."""
        return p.r1 >= 0 and p.r2 >= 0 and all(c.holds(p) for c in self.constraints)

    def first_violation(self, p: RatePair) -> MinAffineConstraint | None:
        for con in self.constraints:
            if not con.holds(p):
                return con
        return None

    def describe(self) -> list[str]:
        return [c.describe() for c in self.constraints]


# --------------------------------------------------------------------------
# constructors


def _term(text: str, const: Fraction = _ZERO, r1: int = 0, r2: int = 0) -> AffineTerm:
    return AffineTerm(Fraction(const), Fraction(r1), Fraction(r2), text)


def _sum_of_mins(*groups: Sequence[AffineTerm]) -> tuple[AffineTerm, ...]:
    """``sum_i min(group_i)`` == ``min`` over the Cartesian product of sums."""
    out = []
    for combo in itertools.product(*groups):
        acc = combo[0]
        for t in combo[1:]:
            acc = acc + t
        out.append(acc)
    return tuple(out)


def _con(lhs: tuple[int, int], terms: Iterable[AffineTerm], formula: str) -> MinAffineConstraint:
    return MinAffineConstraint((Fraction(lhs[0]), Fraction(lhs[1])), tuple(terms), formula)


_R1, _R2, _SUM = (1, 0), (0, 1), (1, 1)


def _caps(variant: Variant, capacities: Mapping[object, object]) -> dict[str, AffineTerm]:
    caps = resolve_capacities(variant, capacities)
    return {
        label: _term("C" + label.replace("+", "+C"), value) for label, value in caps.items()
    }


def capacity_region(
    variant: Variant | str, capacities: Mapping[object, object], secure: bool = False
) -> RateRegion:
    """Closed-form capacity region, secure or not."""
    variant = Variant.parse(variant)
    if variant is Variant.CUSTOM:
        raise UnsupportedVariantError("closed-form regions exist only for the four templates")
    C = _caps(variant, capacities)
    B1, CS, CD, B2 = (
        Variant.BUTTERFLY1,
        Variant.CO_LOCATED_SOURCES,
        Variant.CO_LOCATED_SINKS,
        Variant.BUTTERFLY2,
    )

    if not secure:
        if variant is B1:
            cons = [
                _con(_R1, [C["1"], C["3"], C["7"]], "min{C1, C3, C7}"),
                _con(_R2, [C["2"], C["3"], C["6"]], "min{C2, C3, C6}"),
                _con(_SUM, [C["3"] + C["4"]], "C3 + C4"),
                _con(_SUM, [C["3"] + C["5"]], "C3 + C5"),
            ]
        elif variant is CS:
            cons = [
                _con(_R1, _sum_of_mins([C["5"]], [C["1+2"], C["3"], C["7"]]),
                     "C5 + min{C1+C2, C3, C7}"),
                _con(_R2, _sum_of_mins([C["4"]], [C["1+2"], C["3"], C["6"]]),
                     "C4 + min{C1+C2, C3, C6}"),
                _con(_SUM, _sum_of_mins([C["4"] + C["5"]], [C["1+2"], C["3"], C["6"] + C["7"]]),
                     "C4 + C5 + min{C1+C2, C3, C6+C7}"),
            ]
        elif variant is CD:
            cons = [
                _con(_R1, _sum_of_mins([C["4"]], [C["1"], C["3"], C["6+7"]]),
                     "C4 + min{C1, C3, C6+C7}"),
                _con(_R2, _sum_of_mins([C["5"]], [C["2"], C["3"], C["6+7"]]),
                     "C5 + min{C2, C3, C6+C7}"),
                _con(_SUM, _sum_of_mins([C["4"] + C["5"]], [C["1"] + C["2"], C["3"], C["6+7"]]),
                     "C4 + C5 + min{C1+C2, C3, C6+C7}"),
            ]
        else:
            cons = [
                _con(_R1, _sum_of_mins([C["4"]], [C["1"], C["3"], C["7"]]),
                     "C4 + min{C1, C3, C7}"),
                _con(_R2, _sum_of_mins([C["5"]], [C["2"], C["3"], C["6"]]),
                     "C5 + min{C2, C3, C6}"),
                _con(_SUM, [C["4"] + C["5"] + C["3"]], "C4 + C5 + C3"),
            ]
        return RateRegion(tuple(cons), variant, False, "capacity")

    if variant is B1:
        zero = _term("0")
        cons = [_con(_R1, [zero], "no secure rate"), _con(_R2, [zero], "no secure rate")]
        note = "secure communication is not possible over butterfly1"
        return RateRegion(tuple(cons), variant, True, "capacity", note)
    if variant is CS:
        cons = [
            _con(_R1, [C["5"], C["1+2"], C["3"], C["7"]], "min{C5, C1+C2, C3, C7}"),
            _con(_R2, [C["4"], C["1+2"], C["3"], C["6"]], "min{C4, C1+C2, C3, C6}"),
        ]
    elif variant is CD:
        cons = [
            _con(_R1, [C["1"], C["4"]], "min{C1, C4}"),
            _con(_R2, [C["2"], C["5"]], "min{C2, C5}"),
            _con(_SUM, [C["3"], C["6+7"]], "min{C3, C6+C7}"),
        ]
    else:
        cons = [
            _con(_R1, [C["4"], C["1"], C["3"], C["7"]], "min{C4, C1, C3, C7}"),
            _con(_R2, [C["5"], C["2"], C["3"], C["6"]], "min{C5, C2, C3, C6}"),
            _con(_SUM, [C["3"]], "C3"),
        ]
    return RateRegion(tuple(cons), variant, True, "capacity")


def achievable_region(
    variant: Variant | str, capacities: Mapping[object, object], secure: bool = False
) -> RateRegion:
    """Region in the form realized by the constructive schemes.

    Rates appear inside the min terms exactly as the schemes consume them.
    Secure regions coincide with :func:`capacity_region`.
    """
    variant = Variant.parse(variant)
    if secure:
        region = capacity_region(variant, capacities, True)
        return RateRegion(region.constraints, variant, True, "achievable", region.note)
    if variant is Variant.CUSTOM:
        raise UnsupportedVariantError("achievable regions exist only for the four templates")
    C = _caps(variant, capacities)
    r1, r2 = _term("R1", r1=1), _term("R2", r2=1)

    if variant is Variant.BUTTERFLY1:
        cons = [
            _con(_R1, [C["1"], C["7"]], "min{C1, C7}"),
            _con(_R2, [C["2"], C["6"]], "min{C2, C6}"),
            _con(_SUM, _sum_of_mins([C["3"]], [r2, C["4"], C["5"]]), "C3 + min{R2, C4, C5}"),
            _con(_SUM, _sum_of_mins([C["3"]], [r1, C["4"], C["5"]]), "C3 + min{R1, C4, C5}"),
        ]
    elif variant is Variant.CO_LOCATED_SOURCES:
        cons = [
            _con(_R1, _sum_of_mins([C["7"]], [r1, C["5"]]), "C7 + min{R1, C5}"),
            _con(_R2, _sum_of_mins([C["6"]], [r2, C["4"]]), "C6 + min{R2, C4}"),
            _con(_SUM, _sum_of_mins([C["1+2"], C["3"]], [r2, C["4"]], [r1, C["5"]]),
                 "min{C1+C2, C3} + min{R2, C4} + min{R1, C5}"),
        ]
    elif variant is Variant.CO_LOCATED_SINKS:
        cons = [
            _con(_R1, _sum_of_mins([C["1"]], [r1, C["4"]]), "C1 + min{R1, C4}"),
            _con(_R2, _sum_of_mins([C["2"]], [r2, C["5"]]), "C2 + min{R2, C5}"),
            _con(_SUM, _sum_of_mins([C["3"], C["6+7"]], [r2, C["5"]], [r1, C["4"]]),
                 "min{C3, C6+C7} + min{R2, C5} + min{R1, C4}"),
        ]
    else:
        cons = [
            _con(_R1, _sum_of_mins([C["1"], C["7"]], [r1, C["4"]]), "min{C1, C7} + min{R1, C4}"),
            _con(_R2, _sum_of_mins([C["2"], C["6"]], [r2, C["5"]]), "min{C2, C6} + min{R2, C5}"),
            _con(_SUM, _sum_of_mins([C["3"]], [r2, C["5"]], [r1, C["4"]]),
                 "C3 + min{R2, C5} + min{R1, C4}"),
        ]
    return RateRegion(tuple(cons), variant, False, "achievable")


# --------------------------------------------------------------------------
# geometry


def contains(region: RateRegion, rate_pair: RatePair | Sequence[object]) -> bool:
    p = RatePair.of(rate_pair)
    return all(h.holds(p.r1, p.r2) for h in region.halfplanes())


def _nontrivial(planes: list[HalfPlane]) -> tuple[list[int], bool]:
    """Indices of planes with a proper boundary line; flag False if infeasible."""
    keep = []
    for i, h in enumerate(planes):
        if h.a == 0 and h.b == 0:
            if h.c < 0:
                return [], False
            continue
        keep.append(i)
    return keep, True


def vertices(region: RateRegion) -> list[Vertex]:
    """Extreme points, exact and sorted lexicographically.

    Raises UnboundedRegionError if the region is nonempty and unbounded.
    """
    planes = region.halfplanes()
    idx, feasible = _nontrivial(planes)
    if not feasible:
        return []
    # among parallel half-planes with the same normal only the tightest matters
    tightest: dict[tuple[Fraction, Fraction], tuple[Fraction, int]] = {}
    for i in idx:
        a, b, c = _normalized(planes[i])
        if (a, b) not in tightest or c < tightest[(a, b)][0]:
            tightest[(a, b)] = (c, i)
    lines = [i for _, i in tightest.values()]

    points: dict[tuple[Fraction, Fraction], None] = {}
    for i, j in itertools.combinations(lines, 2):
        h, k = planes[i], planes[j]
        det = h.a * k.b - h.b * k.a
        if det == 0:
            continue
        x = (h.c * k.b - h.b * k.c) / det
        y = (h.a * k.c - h.c * k.a) / det
        if (x, y) in points:
            continue
        if all(planes[m].holds(x, y) for m in lines):
            points[(x, y)] = None
    if not points:
        return []
    if _recession_ray(planes, lines) is not None:
        raise UnboundedRegionError("region is unbounded")
    out = []
    for x, y in sorted(points):
        active = tuple(m for m, h in enumerate(planes) if h.tight(x, y))
        out.append(Vertex(RatePair(x, y), active))
    return out


def _normalized(h: HalfPlane) -> tuple[Fraction, Fraction, Fraction]:
    scale = max(abs(h.a), abs(h.b))
    return (h.a / scale, h.b / scale, h.c / scale)


def _recession_ray(planes: list[HalfPlane], lines: list[int]) -> tuple[Fraction, Fraction] | None:
    candidates = [(Fraction(1), _ZERO), (_ZERO, Fraction(1))]
    for i in lines:
        h = planes[i]
        for d in ((-h.b, h.a), (h.b, -h.a)):
            if d[0] >= 0 and d[1] >= 0:
                candidates.append(d)
    for dx, dy in candidates:
        if all(planes[m].a * dx + planes[m].b * dy <= 0 for m in lines):
            return (dx, dy)
    return None


def boundary_order(points: Iterable[RatePair]) -> list[RatePair]:
    """Counter-clockwise order starting from the lexicographically least point."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    cx = sum(p.r1 for p in pts) / len(pts)
    cy = sum(p.r2 for p in pts) / len(pts)
    start = pts[0]
    base = math.atan2(float(start.r2 - cy), float(start.r1 - cx))

    def angle(p: RatePair) -> float:
        return (math.atan2(float(p.r2 - cy), float(p.r1 - cx)) - base) % (2 * math.pi)

    return [start] + sorted(pts[1:], key=angle)


def equivalent(a: RateRegion, b: RateRegion) -> bool:
    """Exact set equality via mutual vertex containment."""
    va, vb = vertices(a), vertices(b)
    if not va or not vb:
        return not va and not vb
    return all(contains(b, v.point) for v in va) and all(contains(a, v.point) for v in vb)


def subset(a: RateRegion, b: RateRegion) -> bool:
    """True iff region ``a`` lies inside region ``b``."""
    return all(contains(b, v.point) for v in vertices(a))


def sum_rate_max(region: RateRegion) -> Fraction:
    vs = vertices(region)
    if not vs:
        raise ValueError("empty region has no sum rate")
    return max(v.point.r1 + v.point.r2 for v in vs)
