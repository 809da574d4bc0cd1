"""Exact Laurent polynomials in one variable and truncated Laurent series in t.

LaurentPoly holds the X-side objects (F, F-tilde, G, G-tilde coefficients);
TSeries holds t-expansions whose coefficients are rationals, QExt scalars, or
LaurentPoly values.  Everything is dict-backed and exact.
"""

from __future__ import annotations

from fractions import Fraction

from .qext import QExt


def _is_zero(c):
    return not c


class LaurentPoly:
    """sum_e coeffs[e] X^e with exact coefficients (Fraction or QExt)."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        self.c = {}
        if coeffs:
            for e, v in coeffs.items():
                if not _is_zero(v):
                    self.c[int(e)] = v

    @staticmethod
    def const(v):
        return LaurentPoly({0: v} if v else {})

    @staticmethod
    def X(e=1, v=1):
        return LaurentPoly({e: Fraction(v) if not isinstance(v, QExt) else v})

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join("(%s)X^%d" % (v, e) for e, v in sorted(self.c.items()))

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.c == other.c
        if not self.c:
            return _is_zero(other)
        return set(self.c) == {0} and self.c[0] == other

    def __hash__(self):
        return hash(tuple(sorted((e, str(v)) for e, v in self.c.items())))

    def __add__(self, other):
        o = other if isinstance(other, LaurentPoly) else LaurentPoly.const(other)
        c = dict(self.c)
        for e, v in o.c.items():
            w = c.get(e, 0) + v
            if _is_zero(w):
                c.pop(e, None)
            else:
                c[e] = w
        return LaurentPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -v for e, v in self.c.items()})

    def __sub__(self, other):
        o = other if isinstance(other, LaurentPoly) else LaurentPoly.const(other)
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = other if isinstance(other, LaurentPoly) else LaurentPoly.const(other)
        c = {}
        for e1, v1 in self.c.items():
            for e2, v2 in o.c.items():
                e = e1 + e2
                w = c.get(e, 0) + v1 * v2
                if _is_zero(w):
                    c.pop(e, None)
                else:
                    c[e] = w
        return LaurentPoly(c)

    __rmul__ = __mul__

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            raise ValueError("negative power of a Laurent polynomial")
        out = LaurentPoly.const(Fraction(1))
        b = self
        while k:
            if k & 1:
                out = out * b
            b = b * b
            k >>= 1
        return out

    def scale_var(self, s):
        """X -> s*X (Fraction and QExt both support negative powers)."""
        return LaurentPoly({e: v * (s ** e) for e, v in self.c.items()})

    def invert_var(self):
        """X -> X^(-1)."""
        return LaurentPoly({-e: v for e, v in self.c.items()})

    def subst_pow(self, k):
        """X -> X^k."""
        return LaurentPoly({e * k: v for e, v in self.c.items()})

    def shift(self, k):
        """multiply by X^k."""
        return LaurentPoly({e + k: v for e, v in self.c.items()})

    def __call__(self, x):
        tot = 0
        for e, v in self.c.items():
            if isinstance(x, QExt) or isinstance(v, QExt):
                xe = x ** e if isinstance(x, QExt) else QExt(x) ** e
            else:
                xe = Fraction(x) ** e
            tot = tot + v * xe
        return tot

    def degree(self):
        return max(self.c) if self.c else None

    def val(self):
        return min(self.c) if self.c else None

    def is_symmetric(self):
        return self.c == self.invert_var().c


class TSeries:
    """Truncated Laurent series in t: coefficients up to and including t^order.

    Coefficients may be Fractions, QExt scalars, or LaurentPoly values; terms
    beyond `order` are dropped on every operation.
    """

    __slots__ = ("c", "order")

    def __init__(self, coeffs=None, order=10):
        self.order = int(order)
        self.c = {}
        if coeffs:
            for e, v in coeffs.items():
                if int(e) <= self.order and not _is_zero(v):
                    self.c[int(e)] = v

    @staticmethod
    def const(v, order):
        return TSeries({0: v}, order)

    @staticmethod
    def t_power(e, v, order):
        return TSeries({e: v}, order)

    def __repr__(self):
        return " + ".join("(%s)t^%d" % (v, e) for e, v in sorted(self.c.items())) or "0"

    def __eq__(self, other):
        if not isinstance(other, TSeries):
            return NotImplemented
        o = min(self.order, other.order)
        for e in set(self.c) | set(other.c):
            if e > o:
                continue
            if self.c.get(e, 0) != other.c.get(e, 0):
                x, y = self.c.get(e, 0), other.c.get(e, 0)
                if isinstance(x, LaurentPoly) or isinstance(y, LaurentPoly):
                    x = x if isinstance(x, LaurentPoly) else LaurentPoly.const(x)
                    y = y if isinstance(y, LaurentPoly) else LaurentPoly.const(y)
                    if x == y:
                        continue
                return False
        return True

    def __add__(self, other):
        o = other if isinstance(other, TSeries) else TSeries.const(other, self.order)
        order = min(self.order, o.order)
        c = {e: v for e, v in self.c.items() if e <= order}
        for e, v in o.c.items():
            if e > order:
                continue
            w = c.get(e, 0) + v
            if _is_zero(w):
                c.pop(e, None)
            else:
                c[e] = w
        return TSeries(c, order)

    __radd__ = __add__

    def __neg__(self):
        return TSeries({e: -v for e, v in self.c.items()}, self.order)

    def __sub__(self, other):
        o = other if isinstance(other, TSeries) else TSeries.const(other, self.order)
        return self + (-o)

    def __mul__(self, other):
        o = other if isinstance(other, TSeries) else TSeries.const(other, self.order)
        order = min(self.order, o.order)
        c = {}
        for e1, v1 in self.c.items():
            for e2, v2 in o.c.items():
                e = e1 + e2
                if e > order:
                    continue
                w = c.get(e, 0) + v1 * v2
                if _is_zero(w):
                    c.pop(e, None)
                else:
                    c[e] = w
        return TSeries(c, order)

    __rmul__ = __mul__

    def truncate(self, order):
        return TSeries({e: v for e, v in self.c.items() if e <= order}, order)

    def scale_t(self, s):
        """t -> s*t (s exact scalar)."""
        return TSeries({e: v * (s ** e) for e, v in self.c.items()}, self.order)

    def shift_t(self, k):
        return TSeries({e + k: v for e, v in self.c.items()}, self.order + k)

    def coeff(self, e):
        return self.c.get(e, 0)

    def min_exp(self):
        return min(self.c) if self.c else None


def geometric_inverse(factors, order, one=Fraction(1)):
    """prod 1/(1 - a_j t^{k_j}) truncated: factors = [(a_j, k_j)]."""
    out = TSeries({0: one}, order)
    for a, k in factors:
        g = TSeries({0: one}, order)
        e, term = k, a
        while e <= order:
            g = g + TSeries({e: term}, order)
            term = term * a
            e += k
        out = out * g
    return out


def poly_factors(factors, order, one=Fraction(1)):
    """prod (1 - a_j t^{k_j}) truncated."""
    out = TSeries({0: one}, order)
    for a, k in factors:
        out = out * TSeries({0: one, k: -a}, order)
    return out


def series_inverse(s: TSeries, order=None):
    """Multiplicative inverse of a series with invertible lowest term."""
    order = s.order if order is None else order
    v = s.min_exp()
    if v is None:
        raise ZeroDivisionError("inverting zero series")
    lead = s.c[v]
    if isinstance(lead, LaurentPoly):
        raise TypeError("cannot invert matrix-coefficient series")
    lead_inv = lead.inverse() if isinstance(lead, QExt) else Fraction(1) / lead
    # write s = lead t^v (1 + r), invert the (1+r) part by geometric series
    r = TSeries({e - v: val * lead_inv for e, val in s.c.items() if e != v}, order)
    inv = TSeries({0: Fraction(1)}, order)
    term = TSeries({0: Fraction(1)}, order)
    for _ in range(order + 1):
        term = term * (-r)
        if not term.c:
            break
        inv = inv + term
    return TSeries({e - v: val * lead_inv for e, val in inv.c.items()}, order - v if order is not None else None)
