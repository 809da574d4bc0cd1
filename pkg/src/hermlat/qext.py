"""Exact scalars a + b*sqrt(D) over Q, and exact reduction of p-power character sums.

QExt carries every scalar the local machinery produces: plain rationals
(b = 0, normalized to D = 1), Gaussian rationals (D = -1, the xi-hat twists),
and quadratic Gauss-sum values (D = +-p).
"""

from __future__ import annotations

from fractions import Fraction


class QExt:
    """a + b*sqrt(D) with exact rational a, b; D a squarefree integer."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b=0, D=1):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.D = int(D)
        if self.b == 0:
            self.D = 1

    @staticmethod
    def _common_D(x: "QExt", y: "QExt") -> int:
        if x.D == 1:
            return y.D
        if y.D == 1 or y.D == x.D:
            return x.D
        raise ValueError("incompatible radicands %d, %d" % (x.D, y.D))

    def __repr__(self):
        if self.b == 0:
            return str(self.a)
        return "(%s+%s*r%d)" % (self.a, self.b, self.D)

    def __eq__(self, other):
        o = other if isinstance(other, QExt) else QExt(other)
        return self.a == o.a and self.b == o.b and (self.b == 0 or self.D == o.D)

    def __hash__(self):
        return hash(self.a) if self.b == 0 else hash((self.a, self.b, self.D))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __add__(self, other):
        o = other if isinstance(other, QExt) else QExt(other)
        D = self._common_D(self, o)
        return QExt(self.a + o.a, self.b + o.b, D)

    __radd__ = __add__

    def __neg__(self):
        return QExt(-self.a, -self.b, self.D)

    def __sub__(self, other):
        o = other if isinstance(other, QExt) else QExt(other)
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = other if isinstance(other, QExt) else QExt(other)
        D = self._common_D(self, o)
        return QExt(self.a * o.a + self.b * o.b * D, self.a * o.b + self.b * o.a, D)

    __rmul__ = __mul__

    def inverse(self):
        n = self.a * self.a - self.b * self.b * self.D
        if n == 0:
            raise ZeroDivisionError("zero divisor in QExt")
        return QExt(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        o = other if isinstance(other, QExt) else QExt(other)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QExt(other) / self

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        out, base = QExt(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    @property
    def is_rational(self):
        return self.b == 0

    def rational(self) -> Fraction:
        if self.b != 0:
            raise ValueError("not rational: %r" % (self,))
        return self.a

    def conj(self):
        return QExt(self.a, -self.b, self.D)

    def to_complex(self) -> complex:
        if self.D >= 0:
            return complex(float(self.a) + float(self.b) * self.D ** 0.5)
        return complex(float(self.a), float(self.b) * (-self.D) ** 0.5)


ZERO = QExt(0)
ONE = QExt(1)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p), p an odd prime."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def least_nonresidue(p: int) -> int:
    for u in range(2, p):
        if legendre(u, p) == -1:
            return u
    raise ValueError("no nonresidue mod %d" % p)


def _phi_pk(p, k):
    return p ** k - p ** (k - 1) if k >= 1 else 1


def _trace_zeta(r, p, k):
    """Tr over Q(zeta_{p^k})/Q of zeta^r = mu(p^j) phi(p^k)/phi(p^j), j the
    primitive level of r."""
    m = p ** k
    r %= m
    if r == 0:
        return Fraction(_phi_pk(p, k))
    t = 0
    while r % p == 0:
        r //= p
        t += 1
    j = k - t
    if j == 1:
        return Fraction(-(p ** (k - 1)))
    return Fraction(0)


def _twisted_trace_zeta(r, p, k):
    """sum over units s mod p^k of (s|p) zeta^{rs}: nonzero only at primitive
    level 1, where it equals p^{k-1} (u|p) sqrt(D*), D* = (-1|p) p."""
    m = p ** k
    r %= m
    if r == 0:
        return Fraction(0), 0
    t = 0
    while r % p == 0:
        r //= p
        t += 1
    if k - t != 1:
        return Fraction(0), 0
    u = r % p
    return Fraction(p ** (k - 1) * legendre(u, p)), 1


def galois_root_sum(counts_a, counts_b, p: int, k: int) -> QExt:
    """Exact value of sum_r (A_r + B_r sqrt(D*)) zeta_{p^k}^r for a value
    known to lie in Q (p = 2, B must vanish) or Q(sqrt(D*)) (p odd), by
    averaging over the Galois group fixing the target subfield."""
    if k <= 0:
        tot = QExt(sum(counts_a.values()))
        if counts_b:
            Dstar = p if p % 4 == 1 else -p
            tot = tot + QExt(0, sum(counts_b.values()), Dstar)
        return tot
    phi = _phi_pk(p, k)
    if p == 2:
        if counts_b:
            raise ValueError("irrational parts in a 2-adic character sum")
        tot = Fraction(0)
        for r, c in counts_a.items():
            tot += c * _trace_zeta(r, p, k)
        return QExt(tot / phi)
    Dstar = p if p % 4 == 1 else -p
    sq = QExt(0, 1, Dstar)

    def half_trace(cdict):
        ta = Fraction(0)
        tb = Fraction(0)
        for r, c in cdict.items():
            ta += c * _trace_zeta(r, p, k)
            g, has = _twisted_trace_zeta(r, p, k)
            if has:
                tb += c * g
        # Tr'(zeta^r) = (Tr + twisted)/2 summed against the weights
        return (QExt(ta) + sq * QExt(tb)) * Fraction(1, 2)

    va = half_trace(counts_a) if counts_a else QExt(0)
    vb = half_trace(counts_b) if counts_b else QExt(0)
    return (va + sq * vb) * Fraction(2, phi)


def reduce_root_sum(counts, p: int, k: int) -> QExt:
    """Exact sum_r counts[r] zeta_{p^k}^r for values lying in Q(sqrt(D*))."""
    return galois_root_sum(counts, {}, p, k)
