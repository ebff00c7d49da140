"""Elliptic curves in long Weierstrass form over Q and over prime fields.

The group law is the chord-tangent construction written for the general
long form y^2 + a1*x*y + a3*y = x^3 + a2*x^2 + a4*x + a6, so curves such
as y^2 + y = x^3 - 7x + 6 are handled exactly as given, with no short-form
transformation.  Rational arithmetic uses fractions.Fraction; arithmetic
over F_p uses canonical integer residues.  Point counting is naive (one
quadratic-character evaluation per x), which is all the desk-scale caps
here require.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from mwlab.arith import divisors, is_prime, valuation
from mwlab.errors import FixtureError, InputError, ResourceLimitError

DEFAULT_COUNT_CAP = 10**5

FieldValue = "int | Fraction"


@dataclass(frozen=True)
class CurvePoint:
    """A point: affine coordinates, or (None, None) for the identity."""

    x: int | Fraction | None
    y: int | Fraction | None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self) -> str:
        if self.is_infinity:
            return "CurvePoint(infinity)"
        return f"CurvePoint({self.x}, {self.y})"


INFINITY = CurvePoint(None, None)


@dataclass(frozen=True)
class Place:
    """A rational prime classified relative to a curve over Q."""

    p: int
    status: str  # "good" | "bad" | "excluded"

    @property
    def is_good(self) -> bool:
        return self.status == "good"


@dataclass(frozen=True)
class WeierstrassCurve:
    """y^2 + a1*x*y + a3*y = x^3 + a2*x^2 + a4*x + a6 over Q or F_p.

    ``p`` is None for the rational base; otherwise coefficients are stored
    as canonical residues mod p.
    """

    a1: int | Fraction
    a2: int | Fraction
    a3: int | Fraction
    a4: int | Fraction
    a6: int | Fraction
    p: int | None = None

    def __post_init__(self) -> None:
        if self.p is not None:
            if not is_prime(self.p):
                raise InputError(f"field characteristic {self.p} is not prime")
            for name in ("a1", "a2", "a3", "a4", "a6"):
                value = getattr(self, name)
                if isinstance(value, Fraction):
                    if value.denominator % self.p == 0:
                        raise InputError(f"coefficient {name} not integral at {self.p}")
                    value = value.numerator * pow(value.denominator, -1, self.p)
                object.__setattr__(self, name, value % self.p)
        else:
            for name in ("a1", "a2", "a3", "a4", "a6"):
                object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.discriminant() == 0:
            raise InputError("singular curve: discriminant is zero")

    # -- field helpers -------------------------------------------------

    def _norm(self, v):
        return v % self.p if self.p is not None else v

    def _div(self, a, b):
        if self.p is not None:
            return a * pow(b, -1, self.p) % self.p
        return Fraction(a) / b

    # -- invariants ----------------------------------------------------

    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = self._norm(a1 * a1 + 4 * a2)
        b4 = self._norm(2 * a4 + a1 * a3)
        b6 = self._norm(a3 * a3 + 4 * a6)
        b8 = self._norm(a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4)
        return b2, b4, b6, b8

    def discriminant(self):
        b2, b4, b6, b8 = self.b_invariants()
        return self._norm(-b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6)

    # -- membership ----------------------------------------------------

    def is_on_curve(self, pt: CurvePoint) -> bool:
        if pt.is_infinity:
            return True
        x, y = pt.x, pt.y
        lhs = y * y + self.a1 * x * y + self.a3 * y
        rhs = x**3 + self.a2 * x * x + self.a4 * x + self.a6
        return self._norm(lhs - rhs) == 0

    def require_on_curve(self, pt: CurvePoint) -> None:
        if not self.is_on_curve(pt):
            raise InputError(f"{pt} is not on {self}")

    def point(self, x, y) -> CurvePoint:
        """Build and validate an affine point from raw coordinates."""
        if self.p is not None:
            pt = CurvePoint(x % self.p, y % self.p)
        else:
            pt = CurvePoint(Fraction(x), Fraction(y))
        self.require_on_curve(pt)
        return pt

    # -- group law -------------------------------------------------------

    def negate(self, pt: CurvePoint) -> CurvePoint:
        self.require_on_curve(pt)
        if pt.is_infinity:
            return INFINITY
        return CurvePoint(pt.x, self._norm(-pt.y - self.a1 * pt.x - self.a3))

    def add(self, p1: CurvePoint, p2: CurvePoint) -> CurvePoint:
        self.require_on_curve(p1)
        self.require_on_curve(p2)
        return self._add_unchecked(p1, p2)

    def _add_unchecked(self, p1: CurvePoint, p2: CurvePoint) -> CurvePoint:
        if p1.is_infinity:
            return p2
        if p2.is_infinity:
            return p1
        x1, y1, x2, y2 = p1.x, p1.y, p2.x, p2.y
        if x1 == x2:
            if self._norm(y1 + y2 + self.a1 * x2 + self.a3) == 0:
                return INFINITY
            # Same x and not opposite forces p1 == p2 (tangent case).
            num = 3 * x1 * x1 + 2 * self.a2 * x1 + self.a4 - self.a1 * y1
            den = 2 * y1 + self.a1 * x1 + self.a3
        else:
            num = y2 - y1
            den = x2 - x1
        lam = self._div(self._norm(num), self._norm(den))
        nu = y1 - lam * x1
        x3 = self._norm(lam * lam + self.a1 * lam - self.a2 - x1 - x2)
        y3 = self._norm(-(lam + self.a1) * x3 - nu - self.a3)
        return CurvePoint(x3, y3)

    def sub(self, p1: CurvePoint, p2: CurvePoint) -> CurvePoint:
        return self.add(p1, self.negate(p2))

    def scalar_mul(self, n: int, pt: CurvePoint) -> CurvePoint:
        self.require_on_curve(pt)
        if n < 0:
            n, pt = -n, self.negate(pt)
        acc, base = INFINITY, pt
        while n:
            if n & 1:
                acc = self._add_unchecked(acc, base)
            base = self._add_unchecked(base, base)
            n >>= 1
        return acc

    # -- enumeration over F_p -------------------------------------------

    def points(self) -> Iterator[CurvePoint]:
        """All points of E(F_p), identity first (odd p only)."""
        p = self.p
        if p is None or p == 2:
            raise InputError("point enumeration needs an odd prime field")
        yield INFINITY
        inv2 = pow(2, -1, p)
        for x in range(p):
            t = (self.a1 * x + self.a3) % p
            rhs = (x * x * x + self.a2 * x * x + self.a4 * x + self.a6) % p
            disc = (t * t + 4 * rhs) % p
            s = sqrt_mod(disc, p)
            if s is None:
                continue
            y1 = (s - t) * inv2 % p
            yield CurvePoint(x, y1)
            if s != 0:
                yield CurvePoint(x, (-s - t) * inv2 % p)

    def __repr__(self) -> str:
        base = "Q" if self.p is None else f"F_{self.p}"
        return (
            f"WeierstrassCurve(a1={self.a1}, a2={self.a2}, a3={self.a3}, "
            f"a4={self.a4}, a6={self.a6}; {base})"
        )


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) for odd prime p; 0 when p divides a."""
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return 1 if r == 1 else -1


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a mod prime p (Tonelli-Shanks), or None."""
    a %= p
    if p == 2 or a == 0:
        return a
    if legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks for p = 1 (mod 4).
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c = s, pow(z, q, p)
    t, r = pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t * t % p, 1
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def group_order(curve: WeierstrassCurve, cap: int = DEFAULT_COUNT_CAP) -> int:
    """#E(F_p) by naive enumeration over x, including the identity."""
    p = curve.p
    if p is None:
        raise InputError("group_order needs a curve over a prime field")
    if p > cap:
        raise ResourceLimitError(
            f"point counting at p={p} exceeds the configured cap of {cap}"
        )
    if p == 2:
        return 1 + sum(
            1
            for x in range(2)
            for y in range(2)
            if curve.is_on_curve(CurvePoint(x, y))
        )
    count = 1
    a1, a2, a3, a4, a6 = curve.a1, curve.a2, curve.a3, curve.a4, curve.a6
    for x in range(p):
        t = (a1 * x + a3) % p
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p
        count += 1 + legendre(t * t + 4 * rhs, p)
    return count


def point_order(
    curve: WeierstrassCurve, pt: CurvePoint, order: int | None = None
) -> int:
    """Order of a point of E(F_p), testing divisors of #E(F_p) ascending."""
    curve.require_on_curve(pt)
    if pt.is_infinity:
        return 1
    n = order if order is not None else group_order(curve)
    for d in divisors(n):
        if curve.scalar_mul(d, pt).is_infinity:
            return d
    raise InputError("point order does not divide the group order")


def place_of(curve: WeierstrassCurve, p: int) -> Place:
    """Classify a rational prime for a curve over Q.

    Good means p > 3, every coefficient is p-integral, and p does not
    divide the numerator of the discriminant.
    """
    if curve.p is not None:
        raise InputError("places are classified for curves over Q")
    if not is_prime(p):
        raise InputError(f"{p} is not prime")
    if p <= 3:
        return Place(p, "excluded")
    for name in ("a1", "a2", "a3", "a4", "a6"):
        if getattr(curve, name).denominator % p == 0:
            return Place(p, "bad")
    disc = curve.discriminant()
    if disc.numerator % p == 0:
        return Place(p, "bad")
    return Place(p, "good")


def reduce_curve(curve: WeierstrassCurve, p: int) -> WeierstrassCurve:
    """The reduction of a curve over Q at a good place."""
    place = place_of(curve, p)
    if not place.is_good:
        raise InputError(f"cannot reduce at {place.status} place {p}")
    return WeierstrassCurve(curve.a1, curve.a2, curve.a3, curve.a4, curve.a6, p=p)


def reduce_point(curve: WeierstrassCurve, pt: CurvePoint, p: int) -> CurvePoint:
    """Reduce a rational point mod a good prime.

    The point is rescaled to primitive projective integer coordinates
    first, so denominators divisible by p are handled: those points land
    on the identity of the reduced curve.
    """
    target = reduce_curve(curve, p)
    curve.require_on_curve(pt)
    if pt.is_infinity:
        return INFINITY
    x, y = Fraction(pt.x), Fraction(pt.y)
    scale = math.lcm(x.denominator, y.denominator)
    xi = x.numerator * (scale // x.denominator)
    yi = y.numerator * (scale // y.denominator)
    g = math.gcd(math.gcd(abs(xi), abs(yi)), scale)
    xi, yi, zi = xi // g, yi // g, scale // g
    if zi % p == 0:
        return INFINITY
    zinv = pow(zi % p, -1, p)
    reduced = CurvePoint(xi * zinv % p, yi * zinv % p)
    target.require_on_curve(reduced)
    return reduced


def torsion_fixture_check(
    curve: WeierstrassCurve, claims: Sequence[tuple[CurvePoint, int]]
) -> bool:
    """Verify claimed torsion points under exact rational arithmetic.

    Each claim is (point, order); returns True only when every point lies
    on the curve and has exactly the claimed order.
    """
    for pt, order in claims:
        if order < 1:
            return False
        if not curve.is_on_curve(pt):
            return False
        if not curve.scalar_mul(order, pt).is_infinity:
            return False
        if any(
            curve.scalar_mul(d, pt).is_infinity for d in divisors(order)[:-1]
        ):
            return False
    return True


def validate_torsion_claims(
    curve: WeierstrassCurve, claims: Sequence[tuple[CurvePoint, int]]
) -> None:
    """Like torsion_fixture_check but raises FixtureError naming the point."""
    for pt, order in claims:
        if not torsion_fixture_check(curve, [(pt, order)]):
            raise FixtureError(
                f"torsion claim failed: {pt} does not have exact order {order} on {curve}"
            )
