"""Exact exponent geometry for inhomogeneous Strichartz estimates.

Every exponent is stored through its reciprocal, so ``inv_r = 0`` encodes
``r = inf`` and the admissible region lives in the unit square.  All
arithmetic here uses :class:`fractions.Fraction`; nothing is ever rounded to
floating point, which is what makes the open/closed endpoint structure at
the corner points meaningful.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

RationalLike = Union[Fraction, int, str]

HALF = Fraction(1, 2)

#: Human-readable statement of each necessary condition, indexed 1..4.
NECESSARY_CONDITIONS = {
    1: "(n-2)/r - 2/q <= n/rt",
    2: "(n-2)/rt - 2/qt <= n/r",
    3: "(n-2)/rt - 2/q <= n/r",
    4: "(n-2)/r - 2/qt <= n/rt",
}
_ORDINALS = {1: "first", 2: "second", 3: "third", 4: "fourth"}


def as_fraction(value: RationalLike) -> Fraction:
    """Coerce ``value`` to a Fraction, refusing floats."""
    if isinstance(value, float):
        raise TypeError("floating point exponents are not accepted; use Fraction or 'p/q'")
    return Fraction(value)


@dataclass(frozen=True)
class ExponentTuple:
    """Reciprocal exponents ``(1/r, 1/rt, 1/q, 1/qt)`` in dimension ``n``.

    ``rt`` and ``qt`` stand for the tilde exponents on the forcing side.
    """

    inv_r: Fraction
    inv_rt: Fraction
    inv_q: Fraction
    inv_qt: Fraction
    n: int

    def __post_init__(self):
        for name in ("inv_r", "inv_rt", "inv_q", "inv_qt"):
            value = as_fraction(getattr(self, name))
            if not 0 <= value <= 1:
                raise ValueError(f"{name}={value} outside [0, 1]")
            object.__setattr__(self, name, value)
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_exponents(cls, r, rt, q, qt, n: int) -> "ExponentTuple":
        """Build from the exponents themselves; ``"inf"`` maps to 0."""
        return cls(*(_reciprocal(v) for v in (r, rt, q, qt)), n=n)

    # conjugates: 1/p' = 1 - 1/p
    @property
    def inv_r_prime(self) -> Fraction:
        return 1 - self.inv_r

    @property
    def inv_rt_prime(self) -> Fraction:
        return 1 - self.inv_rt

    @property
    def inv_q_prime(self) -> Fraction:
        return 1 - self.inv_q

    @property
    def inv_qt_prime(self) -> Fraction:
        return 1 - self.inv_qt

    @property
    def spatial_point(self) -> tuple[Fraction, Fraction]:
        return (self.inv_r, self.inv_rt)

    def swapped(self) -> "ExponentTuple":
        """Duality swap ``(r, q) <-> (rt, qt)``."""
        return ExponentTuple(self.inv_rt, self.inv_r, self.inv_qt, self.inv_q, self.n)

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.inv_r, self.inv_rt, self.inv_q, self.inv_qt)


def _reciprocal(value) -> Fraction:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "oo", "∞"):
        return Fraction(0)
    v = as_fraction(value)
    if v < 1:
        raise ValueError(f"exponent {v} < 1")
    return 1 / v


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------

class TupleParseError(ValueError):
    """Malformed tuple text; ``position`` is the offending token's offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_KEYS = ("r", "rt", "q", "qt")
_TOKEN = re.compile(r"\S+")
_RATIONAL = re.compile(r"^[+]?\d+(/\d+)?$")


def parse_tuple(text: str, n: int | None = None) -> ExponentTuple:
    """Parse ``"n=3 r=4 rt=12 q=4 qt=4/3"`` or ``"n=3 1/r=1/4 ..."``.

    The two forms may be mixed key by key.  ``n`` may be supplied separately
    when the text omits it.
    """
    recips: dict[str, Fraction] = {}
    dim = n
    for match in _TOKEN.finditer(text):
        token, pos = match.group(), match.start()
        if "=" not in token:
            raise TupleParseError(f"expected key=value, got {token!r}", pos)
        key, _, raw = token.partition("=")
        vpos = pos + len(key) + 1
        if key == "n":
            if not raw.isdigit() or int(raw) < 1:
                raise TupleParseError(f"bad dimension {raw!r}", vpos)
            dim = int(raw)
            continue
        reciprocal_form = key.startswith("1/")
        name = key[2:] if reciprocal_form else key
        if name not in _KEYS:
            raise TupleParseError(f"unknown key {key!r}", pos)
        if name in recips:
            raise TupleParseError(f"duplicate key {key!r}", pos)
        is_inf = raw.lower() in ("inf", "infinity", "oo", "∞")
        if not is_inf and not _RATIONAL.match(raw):
            raise TupleParseError(f"not a rational number: {raw!r}", vpos)
        if reciprocal_form:
            if is_inf:
                raise TupleParseError("reciprocal cannot be infinite", vpos)
            value = Fraction(raw)
        else:
            if is_inf:
                value = Fraction(0)
            else:
                e = Fraction(raw)
                if e < 1:
                    raise TupleParseError(f"exponent {raw} < 1", vpos)
                value = 1 / e
        if not 0 <= value <= 1:
            raise TupleParseError(f"reciprocal {value} outside [0, 1]", vpos)
        recips[name] = value
    missing = [k for k in _KEYS if k not in recips]
    if missing:
        raise TupleParseError(f"missing keys: {', '.join(missing)}", len(text))
    if dim is None:
        raise TupleParseError("missing dimension n", len(text))
    return ExponentTuple(recips["r"], recips["rt"], recips["q"], recips["qt"], dim)


def format_tuple(t: ExponentTuple, reciprocal: bool = True) -> str:
    """Inverse of :func:`parse_tuple`."""
    parts = [f"n={t.n}"]
    for key, value in zip(_KEYS, t.as_tuple()):
        if reciprocal:
            parts.append(f"1/{key}={value}")
        else:
            parts.append(f"{key}={'inf' if value == 0 else 1 / value}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Scaling and admissibility
# ---------------------------------------------------------------------------

def scaling_gap(t: ExponentTuple) -> Fraction:
    """``1/q + 1/qt + (n/2)(1/r + 1/rt) - n/2``; zero iff the tuple scales correctly.

    Frequency-localising at scale ``2^j`` multiplies the inhomogeneous bound by
    ``2^(-2 j gap)``, i.e. the dilation exponent is ``-2 * scaling_gap``.
    """
    n = t.n
    return t.inv_q + t.inv_qt + Fraction(n, 2) * (t.inv_r + t.inv_rt) - Fraction(n, 2)


def homogeneous_admissible(inv_r: RationalLike, inv_q: RationalLike, n: int) -> bool:
    inv_r, inv_q = as_fraction(inv_r), as_fraction(inv_q)
    if inv_r > HALF or inv_q > HALF or inv_r < 0 or inv_q < 0:
        return False
    if n * inv_r + 2 * inv_q != Fraction(n, 2):
        return False
    return not (n == 2 and inv_r == 0 and inv_q == HALF)


# ---------------------------------------------------------------------------
# Region geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionVertex:
    label: str
    point: tuple[Fraction, Fraction]


def corner_P(n: int) -> tuple[Fraction, Fraction]:
    return (Fraction(n - 2, 2 * (n - 1)), Fraction((n - 2) ** 2, 2 * n * (n - 1)))


def corner_P_prime(n: int) -> tuple[Fraction, Fraction]:
    a, b = corner_P(n)
    return (b, a)


def region_vertices(n: int) -> list[RegionVertex]:
    """Vertices O, A, B, B', C, C', P, P' of the ``(1/r, 1/rt)`` diagram."""
    if n < 3:
        raise ValueError(f"region geometry needs n >= 3, got {n}")
    b = Fraction(n - 2, 2 * n)
    pts = {
        "O": (Fraction(0), Fraction(0)),
        "A": (HALF, HALF),
        "B": (HALF, b),
        "B'": (b, HALF),
        "C": (HALF, Fraction(0)),
        "C'": (Fraction(0), HALF),
        "P": corner_P(n),
        "P'": corner_P_prime(n),
    }
    return [RegionVertex(label, pt) for label, pt in pts.items()]


def vertex_map(n: int) -> dict[str, tuple[Fraction, Fraction]]:
    return {v.label: v.point for v in region_vertices(n)}


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def in_pentagon(point: tuple[Fraction, Fraction], n: int) -> bool:
    """Closed convex pentagon A B P P' B' (exact orientation tests)."""
    v = vertex_map(n)
    ring = [v["A"], v["B"], v["P"], v["P'"], v["B'"]]
    signs = [_cross(ring[i], ring[(i + 1) % 5], point) for i in range(5)]
    return all(s <= 0 for s in signs) or all(s >= 0 for s in signs)


# ---------------------------------------------------------------------------
# Dyadic bilinear-form exponents
# ---------------------------------------------------------------------------

def lemma_regime(inv_r: RationalLike, inv_rt: RationalLike, n: int) -> str:
    """Regime tag ``"i"``..``"iv"`` for the point ``(1/r, 1/rt)``.

    The four closed conditions overlap on their boundaries; the lowest
    numbered applicable regime is returned.
    """
    inv_r, inv_rt = as_fraction(inv_r), as_fraction(inv_rt)
    if n < 3:
        raise ValueError("regimes are defined for n >= 3")
    if inv_r > HALF or inv_rt > HALF or inv_r < 0 or inv_rt < 0:
        raise ValueError("regimes need 2 <= r, rt <= inf")
    low = Fraction(n - 2, n) * inv_rt
    high = Fraction(n, n - 2) * inv_rt
    if inv_r <= low:
        return "i"
    if inv_r <= inv_rt:
        return "ii"
    if inv_r <= high:
        return "iii"
    return "iv"


@dataclass(frozen=True)
class BetaResult:
    value: Fraction
    regime: str
    flag: bool
    # the q-window of the regime, as "lower <= ... <= upper" text, when violated
    violated: str | None = None


def beta_formula(t: ExponentTuple, regime: str) -> Fraction:
    n = t.n
    base = t.inv_q + t.inv_qt - Fraction(n, 2)
    if regime == "i":
        return base + (n - 1) * t.inv_rt
    if regime in ("ii", "iii"):
        return t.inv_q + t.inv_qt - Fraction(n, 2) * (1 - t.inv_r - t.inv_rt)
    if regime == "iv":
        return base + (n - 1) * t.inv_r
    raise ValueError(f"unknown regime {regime!r}")


def q_window(t: ExponentTuple, regime: str) -> tuple[Fraction, Fraction]:
    """Bounds ``(lo, hi)`` of the chain ``lo <= 1/q <= 1/qt' <= hi``."""
    n = t.n
    if regime == "i":
        return t.inv_rt, Fraction(1)
    if regime == "ii":
        return -Fraction(n, 2) * (t.inv_r - t.inv_rt), Fraction(1)
    if regime == "iii":
        return Fraction(0), 1 - Fraction(n, 2) * (t.inv_r - t.inv_rt)
    if regime == "iv":
        return Fraction(0), 1 - t.inv_r
    raise ValueError(f"unknown regime {regime!r}")


def beta(t: ExponentTuple) -> BetaResult:
    """Decay exponent of the dyadic bilinear form plus the side-condition flag."""
    regime = lemma_regime(t.inv_r, t.inv_rt, t.n)
    value = beta_formula(t, regime)
    lo, hi = q_window(t, regime)
    chain = [lo, t.inv_q, t.inv_qt_prime, hi]
    names = [str(lo), "1/q", "1/qt'", str(hi)]
    for a, b, na, nb in zip(chain, chain[1:], names, names[1:]):
        if a > b:
            return BetaResult(value, regime, False, f"{na} <= {nb} fails in regime {regime}")
    return BetaResult(value, regime, True)


# ---------------------------------------------------------------------------
# Necessary conditions and the main theorem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionCheck:
    index: int
    statement: str
    slack: Fraction

    @property
    def satisfied(self) -> bool:
        return self.slack >= 0

    @property
    def name(self) -> str:
        kind = "known" if self.index <= 2 else "new"
        return f"{_ORDINALS[self.index]} necessary condition ({kind}): {self.statement}"


def necessary_conditions(t: ExponentTuple) -> list[ConditionCheck]:
    """The two known and two new necessary inequalities; slack = rhs - lhs."""
    n = t.n
    r, rt, q, qt = t.as_tuple()
    slacks = (
        n * rt - ((n - 2) * r - 2 * q),
        n * r - ((n - 2) * rt - 2 * qt),
        n * r - ((n - 2) * rt - 2 * q),
        n * rt - ((n - 2) * r - 2 * qt),
    )
    return [ConditionCheck(i + 1, NECESSARY_CONDITIONS[i + 1], s) for i, s in enumerate(slacks)]


def theorem1_valid(t: ExponentTuple) -> bool:
    """Sufficient corner result at P and P' with its exact window endpoints."""
    n = t.n
    if n < 3 or t.inv_q != t.inv_qt_prime:
        return False
    lo, hi = Fraction(n - 2, 2 * (n - 1)), Fraction(n, 2 * (n - 1))
    a = t.inv_q
    if t.spatial_point == corner_P(n):
        return lo <= a < hi
    if t.spatial_point == corner_P_prime(n):
        return lo < a <= hi
    return False


@dataclass(frozen=True)
class Classification:
    verdict: str  # "Valid" | "Invalid" | "Unknown"
    source: str
    slack: Fraction

    @property
    def violation(self) -> Fraction:
        """Positive amount by which an Invalid tuple misses its inequality."""
        return abs(self.slack) if self.verdict == "Invalid" else Fraction(0)

    def csv_row(self) -> list[str]:
        return [self.verdict, self.source, f"{self.slack.numerator}/{self.slack.denominator}"]


def classify(t: ExponentTuple) -> Classification:
    """Valid / Invalid / Unknown verdict with source tag and signed slack.

    Violated necessary conditions take precedence over the scaling test so
    that the reported inequality is the geometric obstruction.
    """
    checks = necessary_conditions(t)
    violated = [c for c in checks if not c.satisfied]
    if violated:
        worst = min(violated, key=lambda c: (c.slack, c.index))
        return Classification("Invalid", f"violates {worst.name}", worst.slack)
    gap = scaling_gap(t)
    if gap != 0:
        return Classification("Invalid", "violates scaling condition", gap)
    if t.n >= 3 and theorem1_valid(t):
        corner = "P" if t.spatial_point == corner_P(t.n) else "P'"
        return Classification("Valid", f"Theorem 1 corner {corner}", min(c.slack for c in checks))
    if t.n >= 3 and in_pentagon(t.spatial_point, t.n) and all(c.slack > 0 for c in checks):
        return Classification(
            "Valid",
            "pentagon interior (Foschi-Vilela range; q-conditions not fully encoded)",
            min(c.slack for c in checks),
        )
    return Classification("Unknown", "necessary conditions hold; no sufficient result encoded",
                          min(c.slack for c in checks))


def counterexample_exponents(t: ExponentTuple, dual: bool = False) -> dict[str, Fraction]:
    """Predicted power-law exponents (in eps) of the shrinking-box counterexample.

    ``lhs`` is the exponent of the restricted output norm, ``rhs`` that of the
    forcing norm, ``ratio = lhs - rhs``.  The ratio equals the slack of the
    fourth necessary condition (third for the dual orientation), so a negative
    value means the ratio blows up as eps -> 0.
    """
    s = t.swapped() if dual else t
    n = s.n
    lhs = n + 2 + (2 - n) * s.inv_r
    rhs = 2 * s.inv_qt_prime + n * s.inv_rt_prime
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs - rhs}
