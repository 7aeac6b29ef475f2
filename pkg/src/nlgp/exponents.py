"""Exact Lebesgue-exponent bookkeeping for the admissibility hypothesis.

A tuple ``(p1..p4, q1..q4, s1, s2)`` is admissible in dimension N when

* 1/p3 + 1/q2 = 1/q1,  1/p1 - 1/p3 = 1/s1,  1/q1 - 1/q3 = 1/s2;
* N >= 3:  N/(N-2) > p4,  2N/(N-2) > p2, p3, s1, s2 >= 2,
  2 >= q1 > 2N/(N+2),  q3, q4 > N/2;
* N <= 2:  p2, p3, s1, s2 >= 2 and 2 >= q1 > 1;
* plus the consequences of nontriviality: q2, q3 >= 2 and (N >= 3) N/(N-2) > p1.

Interpolation between convolution classes is read off in the (1/p, 1/q)
unit square, so membership questions reduce to exact point-in-triangle
tests. Everything here is ``fractions.Fraction``; no floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "ExponentTuple",
    "HullPoint",
    "WnReport",
    "as_fraction",
    "verify_wn",
    "construct_for_dimension",
    "sN",
    "in_convex_hull",
    "in_hull_of_points",
    "riesz_thorin_interpolate",
    "lemma_last_points",
    "lemma_last_memberships",
]


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"num/den"`` strings. Floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"exponents must be exact (int, Fraction or 'a/b' string), got {value!r}")


@dataclass(frozen=True)
class ExponentTuple:
    p: tuple[Fraction, Fraction, Fraction, Fraction]
    q: tuple[Fraction, Fraction, Fraction, Fraction]
    s: tuple[Fraction, Fraction]

    @classmethod
    def from_values(cls, p: Sequence, q: Sequence, s: Sequence) -> "ExponentTuple":
        if len(p) != 4 or len(q) != 4 or len(s) != 2:
            raise ValueError("need 4 p's, 4 q's and 2 s's")
        return cls(
            tuple(as_fraction(v) for v in p),
            tuple(as_fraction(v) for v in q),
            tuple(as_fraction(v) for v in s),
        )

    @classmethod
    def completed(cls, p: Sequence, q: Sequence) -> "ExponentTuple":
        """Fill s1, s2 from the two defining identities."""
        p = [as_fraction(v) for v in p]
        q = [as_fraction(v) for v in q]
        inv_s1 = 1 / p[0] - 1 / p[2]
        inv_s2 = 1 / q[0] - 1 / q[2]
        if inv_s1 <= 0 or inv_s2 <= 0:
            raise ValueError("s1 or s2 would not be a finite positive exponent")
        return cls(tuple(p), tuple(q), (1 / inv_s1, 1 / inv_s2))

    def as_strings(self) -> dict:
        return {
            "p": [str(v) for v in self.p],
            "q": [str(v) for v in self.q],
            "s": [str(v) for v in self.s],
        }


@dataclass
class WnReport:
    N: int
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed


def verify_wn(t: ExponentTuple, N: int) -> WnReport:
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    p1, p2, p3, p4 = t.p
    q1, q2, q3, q4 = t.q
    s1, s2 = t.s
    rep = WnReport(N)
    bad = rep.violations.append

    named = dict(p1=p1, p2=p2, p3=p3, p4=p4, q1=q1, q2=q2, q3=q3, q4=q4, s1=s1, s2=s2)
    for name, v in named.items():
        if v < 1:
            bad(f"{name} >= 1 (got {v})")

    if 1 / p3 + 1 / q2 != 1 / q1:
        bad(f"1/p3 + 1/q2 = 1/q1 (got {1 / p3 + 1 / q2} vs {1 / q1})")
    if 1 / p1 - 1 / p3 != 1 / s1:
        bad(f"1/p1 - 1/p3 = 1/s1 (got {1 / p1 - 1 / p3} vs {1 / s1})")
    if 1 / q1 - 1 / q3 != 1 / s2:
        bad(f"1/q1 - 1/q3 = 1/s2 (got {1 / q1 - 1 / q3} vs {1 / s2})")

    if N >= 3:
        crit = Fraction(N, N - 2)
        sob = Fraction(2 * N, N - 2)
        low_q1 = Fraction(2 * N, N + 2)
        half_n = Fraction(N, 2)
        if not crit > p4:
            bad(f"p4 < N/(N-2) = {crit} (got {p4})")
        for name in ("p2", "p3", "s1", "s2"):
            v = named[name]
            if not v >= 2:
                bad(f"{name} >= 2 (got {v})")
            if not sob > v:
                bad(f"{name} < 2N/(N-2) = {sob} (got {v})")
        if not q1 <= 2:
            bad(f"q1 <= 2 (got {q1})")
        if not q1 > low_q1:
            bad(f"q1 > 2N/(N+2) = {low_q1} (got {q1})")
        for name in ("q3", "q4"):
            if not named[name] > half_n:
                bad(f"{name} > N/2 = {half_n} (got {named[name]})")
        if not crit > p1:
            bad(f"p1 < N/(N-2) = {crit} (got {p1})")
    else:
        for name in ("p2", "p3", "s1", "s2"):
            if not named[name] >= 2:
                bad(f"{name} >= 2 (got {named[name]})")
        if not q1 <= 2:
            bad(f"q1 <= 2 (got {q1})")
        if not q1 > 1:
            bad(f"q1 > 1 (got {q1})")

    for name in ("q2", "q3"):
        if not named[name] >= 2:
            bad(f"{name} >= 2 (got {named[name]})")
    return rep


def sN(N: int) -> Fraction:
    """Auxiliary exponent for N >= 6; the free epsilon is taken at the midpoint."""
    if N < 6:
        raise ValueError("s_N is only used for N >= 6")
    if N <= 7:
        eps = (2 - Fraction(N, 4)) / 2
        return Fraction(N, 4) + eps
    return Fraction(2 * (N + 1), N + 2)


def construct_for_dimension(N: int, rbar) -> ExponentTuple:
    """Admissible tuple for N >= 4 from a kernel bounded L^p -> L^q along 1/q = 1/p + 1/rbar - 1."""
    rbar = as_fraction(rbar)
    if N < 4:
        raise ValueError(f"construction is for N >= 4, got N={N}")
    if not rbar > Fraction(N, 4):
        raise ValueError(f"need rbar > N/4 = {Fraction(N, 4)}, got {rbar}")
    if N <= 5:
        p23, q23 = Fraction(3), Fraction(3)
        p1, q1 = Fraction(3, 2), Fraction(3, 2)
    else:
        s = sN(N)
        p23 = s / (s - 1)
        q23 = Fraction(N)
        p1 = Fraction(N, N - 1)
        q1 = p23 * q23 / (p23 + q23)
    p4 = 2 * rbar / (2 * rbar - 1)
    q4 = 2 * rbar
    return ExponentTuple.completed((p1, p23, p23, p4), (q1, q23, q23, q4))


# -- interpolation geometry ----------------------------------------------


@dataclass(frozen=True)
class HullPoint:
    """(1/p, 1/q) in the unit square."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        a, b = as_fraction(self.a), as_fraction(self.b)
        if not (0 <= a <= 1 and 0 <= b <= 1):
            raise ValueError(f"hull point ({a}, {b}) is outside [0,1]^2")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_exponents(cls, p, q) -> "HullPoint":
        return cls(1 / as_fraction(p), 1 / as_fraction(q))

    def dual(self) -> "HullPoint":
        """(1/q', 1/p'): the point of the adjoint bound, since M_{p,q} = M_{q',p'}."""
        return HullPoint(1 - self.b, 1 - self.a)


def _orient(o: HullPoint, p: HullPoint, q: HullPoint) -> Fraction:
    return (p.a - o.a) * (q.b - o.b) - (p.b - o.b) * (q.a - o.a)


def _on_segment(x: HullPoint, p: HullPoint, q: HullPoint) -> bool:
    if _orient(p, q, x) != 0:
        return False
    lo_a, hi_a = sorted((p.a, q.a))
    lo_b, hi_b = sorted((p.b, q.b))
    return lo_a <= x.a <= hi_a and lo_b <= x.b <= hi_b


def in_convex_hull(point: HullPoint, vertices: Iterable[HullPoint], strict: bool = False) -> bool:
    """Exact membership of ``point`` in the hull of three vertices.

    ``strict`` asks for the interior in the plane. A collinear triple is
    treated as the segment joining its extreme points; a segment has empty
    planar interior, so strict membership is then always false.
    """
    v = list(vertices)
    if len(v) != 3:
        raise ValueError("expected three vertices")
    A, B, C = v
    area = _orient(A, B, C)
    if area == 0:
        if strict:
            return False
        pts = sorted(set(v), key=lambda h: (h.a, h.b))
        if len(pts) == 1:
            return point == pts[0]
        return _on_segment(point, pts[0], pts[-1])
    d1, d2, d3 = _orient(A, B, point), _orient(B, C, point), _orient(C, A, point)
    if area < 0:
        d1, d2, d3 = -d1, -d2, -d3
    if strict:
        return d1 > 0 and d2 > 0 and d3 > 0
    return d1 >= 0 and d2 >= 0 and d3 >= 0


def in_hull_of_points(point: HullPoint, points: Iterable[HullPoint]) -> bool:
    """Non-strict membership in the hull of any finite set.

    In the plane a point of the hull already lies in the hull of three of
    the points, so checking every triple is exact.
    """
    pts = list(dict.fromkeys(points))
    if not pts:
        raise ValueError("expected at least one point")
    if len(pts) < 3:
        pts = pts + [pts[-1]] * (3 - len(pts))
    return any(in_convex_hull(point, list(tri)) for tri in combinations(pts, 3))


def riesz_thorin_interpolate(e1: HullPoint, e2: HullPoint, theta) -> HullPoint:
    theta = as_fraction(theta)
    if not 0 <= theta <= 1:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    return HullPoint((1 - theta) * e1.a + theta * e2.a, (1 - theta) * e1.b + theta * e2.b)


def lemma_last_points(N: int) -> dict[str, HullPoint]:
    """Target points whose membership yields the L^{N/(N-2)} -> L^{N/2} and L^2 -> L^{N/2} bounds."""
    return {
        "N/(N-2)->N/2": HullPoint(Fraction(N - 2, N), Fraction(2, N)),
        "2->N/2": HullPoint(Fraction(1, 2), Fraction(2, N)),
    }


def lemma_last_memberships(t: ExponentTuple, N: int, with_duals: bool = False) -> dict[str, bool]:
    """Non-strict hull membership of each target in hull{(1/2,1/2), (1/p1,1/q1), (1/p4,1/q4)}.

    With ``with_duals`` the hull also contains the reflected vertices
    (1 - 1/q, 1 - 1/p), which carry the same multiplier bounds by duality.
    """
    verts = [
        HullPoint(Fraction(1, 2), Fraction(1, 2)),
        HullPoint.from_exponents(t.p[0], t.q[0]),
        HullPoint.from_exponents(t.p[3], t.q[3]),
    ]
    if with_duals:
        pts = verts + [v.dual() for v in verts]
        return {name: in_hull_of_points(pt, pts) for name, pt in lemma_last_points(N).items()}
    return {name: in_convex_hull(pt, verts) for name, pt in lemma_last_points(N).items()}
