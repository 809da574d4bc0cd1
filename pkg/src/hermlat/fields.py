"""Quadratic etale algebras E over Q_p and exact arithmetic in them.

E is one of: the unramified quadratic extension (inert), Q_p + Q_p (split),
or a ramified quadratic extension E = Q_p(sqrt(u*p)) with p odd.  Elements
are coordinate pairs over a fixed O-basis; all arithmetic is exact over Q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .qext import legendre, least_nonresidue

INERT, SPLIT, RAMIFIED = "inert", "split", "ramified"
_SPLITTINGS = (INERT, SPLIT, RAMIFIED)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class LocalFieldSpec:
    """Fixes all local arithmetic: prime, splitting type, residue sizes.

    Basis of O_E: inert p odd {1, w}, w^2 = least nonresidue; inert p = 2
    {1, w}, w^2 + w + 1 = 0; split: idempotent pair; ramified {1, w},
    w^2 = defining_unit * p (p odd only).
    """

    p: int
    splitting: str
    defining_unit: int = 1

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError("p = %s is not prime" % (self.p,))
        if self.splitting not in _SPLITTINGS:
            raise ValueError("unknown splitting %r" % (self.splitting,))
        if self.splitting == RAMIFIED:
            if self.p == 2:
                raise ValueError("ramified p = 2 is unsupported")
            if self.defining_unit % self.p == 0:
                raise ValueError("defining_unit must be a unit mod p")

    # residue sizes and the standard invariants
    @property
    def q(self) -> int:
        return self.p

    @property
    def q_E(self) -> int:
        return self.p * self.p if self.splitting == INERT else self.p

    @property
    def xi(self) -> int:
        return {SPLIT: 1, INERT: -1, RAMIFIED: 0}[self.splitting]

    @property
    def f_exp(self) -> int:
        # ord of the relative discriminant; tame ramified quadratic has f = 1
        return 1 if self.splitting == RAMIFIED else 0

    @property
    def ram_e(self) -> int:
        return 2 if self.splitting == RAMIFIED else 1

    @property
    def w_sq(self):
        """Coordinates (s, t) with w^2 = s + t*w."""
        if self.splitting == INERT:
            if self.p == 2:
                return (Fraction(-1), Fraction(-1))
            return (Fraction(least_nonresidue(self.p)), Fraction(0))
        if self.splitting == RAMIFIED:
            return (Fraction(self.defining_unit * self.p), Fraction(0))
        return None

    @property
    def pi_F(self) -> Fraction:
        """Prime of F, chosen as N(pi_E) in the ramified case."""
        if self.splitting == RAMIFIED:
            return Fraction(-self.defining_unit * self.p)
        return Fraction(self.p)

    def norm_class(self, x: Fraction) -> int:
        """+1 iff x in N(E^x), for nonzero rational x (p-power denominators ok)."""
        x = Fraction(x)
        if x == 0:
            raise ValueError("norm_class of 0")
        if self.splitting == SPLIT:
            return 1
        k = 0
        while x.numerator % self.p == 0:
            x /= self.p
            k += 1
        while x.denominator % self.p == 0:
            x *= self.p
            k -= 1
        if self.splitting == INERT:
            return 1 if k % 2 == 0 else -1
        # ramified: x = pi^k v with pi = N(pi_E) = -u p; after stripping p^k the
        # remaining unit is v = x_stripped * (-u)^(-k), and v is a norm iff (v|p) = 1
        v = x * (Fraction(-self.defining_unit) ** (-k))
        return legendre(v.numerator % self.p, self.p) * legendre(v.denominator % self.p, self.p)

    def to_json(self):
        return {"p": self.p, "splitting": self.splitting, "defining_unit": self.defining_unit}

    @staticmethod
    def from_json(d):
        return make_field(int(d["p"]), d["splitting"], int(d.get("defining_unit", 1)))


def make_field(p: int, splitting: str, defining_unit: int | None = None) -> LocalFieldSpec:
    if defining_unit is None:
        defining_unit = 1
    return LocalFieldSpec(int(p), splitting, int(defining_unit))


class EElem:
    """Element of E in the fixed basis: x = a + b*w (split: x = (a, b))."""

    __slots__ = ("F", "a", "b")

    def __init__(self, F: LocalFieldSpec, a, b=0):
        self.F = F
        self.a = Fraction(a)
        self.b = Fraction(b)

    @staticmethod
    def from_rational(F, r):
        """Embed F -> E (split: diagonal)."""
        if F.splitting == SPLIT:
            return EElem(F, r, r)
        return EElem(F, r, 0)

    @staticmethod
    def pi_E(F):
        if F.splitting == INERT:
            return EElem(F, F.p, 0)
        if F.splitting == SPLIT:
            return EElem(F, F.p, F.p)
        return EElem(F, 0, 1)  # w = sqrt(u p)

    def __repr__(self):
        if self.F.splitting == SPLIT:
            return "(%s,%s)" % (self.a, self.b)
        return "%s+%s*w" % (self.a, self.b)

    def __eq__(self, other):
        if not isinstance(other, EElem):
            other = EElem.from_rational(self.F, other)
        return self.F == other.F and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def _co(self, other):
        return other if isinstance(other, EElem) else EElem.from_rational(self.F, other)

    def __add__(self, other):
        o = self._co(other)
        return EElem(self.F, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return EElem(self.F, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._co(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._co(other)
        if self.F.splitting == SPLIT:
            return EElem(self.F, self.a * o.a, self.b * o.b)
        s, t = self.F.w_sq
        # (a + b w)(c + d w) = ac + bd w^2 + (ad + bc) w
        return EElem(self.F, self.a * o.a + self.b * o.b * s, self.a * o.b + self.b * o.a + self.b * o.b * t)

    __rmul__ = __mul__

    def conj(self):
        if self.F.splitting == SPLIT:
            return EElem(self.F, self.b, self.a)
        if self.F.splitting == INERT and self.F.p == 2:
            # w-bar = -1 - w
            return EElem(self.F, self.a - self.b, -self.b)
        return EElem(self.F, self.a, -self.b)

    def norm(self) -> Fraction:
        n = self * self.conj()
        assert n.is_rational()
        return n.a

    def trace(self) -> Fraction:
        t = self + self.conj()
        assert t.is_rational()
        return t.a

    def is_rational(self) -> bool:
        if self.F.splitting == SPLIT:
            return self.a == self.b
        return self.b == 0

    def rational(self) -> Fraction:
        assert self.is_rational()
        return self.a

    def inverse(self):
        if self.F.splitting == SPLIT:
            if self.a == 0 or self.b == 0:
                raise ZeroDivisionError("non-unit in split algebra")
            return EElem(self.F, 1 / self.a, 1 / self.b)
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero element")
        c = self.conj()
        return EElem(self.F, c.a / n, c.b / n)

    def __truediv__(self, other):
        return self * self._co(other).inverse()

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        out = EElem.from_rational(self.F, 1)
        b = self
        while k:
            if k & 1:
                out = out * b
            b = b * b
            k >>= 1
        return out

    def ord_E(self):
        """pi_E-adic valuation; None for 0 (split: min of component valuations)."""
        if not self:
            return None
        p = self.F.p

        def vp(r: Fraction):
            if r == 0:
                return None
            k = 0
            num, den = r.numerator, r.denominator
            while num % p == 0:
                num //= p
                k += 1
            while den % p == 0:
                den //= p
                k -= 1
            return k

        if self.F.splitting == SPLIT:
            vals = [v for v in (vp(self.a), vp(self.b)) if v is not None]
            return min(vals)
        if self.F.splitting == INERT:
            vals = [v for v in (vp(self.a), vp(self.b)) if v is not None]
            return min(vals)
        # ramified: ord_E(a + b w) = min(2 vp(a), 2 vp(b) + 1)
        vals = []
        if self.a:
            vals.append(2 * vp(self.a))
        if self.b:
            vals.append(2 * vp(self.b) + 1)
        return min(vals)

    def is_integral(self) -> bool:
        v = self.ord_E()
        return v is None or v >= 0


def ord_p(r: Fraction, p: int):
    r = Fraction(r)
    if r == 0:
        return None
    k = 0
    num, den = r.numerator, r.denominator
    while num % p == 0:
        num //= p
        k += 1
    while den % p == 0:
        den //= p
        k -= 1
    return k


class ResidueRing:
    """O_E / p^e O_E presented as coordinate pairs mod p^e (spec RingElem)."""

    def __init__(self, F: LocalFieldSpec, e: int):
        self.F = F
        self.e = int(e)
        self.m = F.p ** self.e

    def elements(self):
        for a in range(self.m):
            for b in range(self.m):
                yield (a, b)

    def lift(self, x) -> EElem:
        return EElem(self.F, x[0], x[1])

    def reduce(self, x: EElem):
        m = self.m
        a, b = x.a, x.b
        if a.denominator != 1 or b.denominator != 1:
            raise ValueError("non-integral element in residue ring")
        return (int(a) % m, int(b) % m)

    def mul(self, x, y):
        return self.reduce(self.lift(x) * self.lift(y))

    def add(self, x, y):
        return ((x[0] + y[0]) % self.m, (x[1] + y[1]) % self.m)

    def conj(self, x):
        return self.reduce(self.lift(x).conj())

    def norm(self, x):
        n = self.lift(x).norm()
        return int(n) % self.m

    def trace(self, x):
        t = self.lift(x).trace()
        return int(t) % self.m

    def ord_E(self, x):
        """Valuation of a residue, or None when x = 0 at this precision."""
        v = self.lift(x).ord_E()
        cap = self.e * self.F.ram_e
        if v is None or v >= cap:
            return None
        return v
