"""Siegel series: the polynomial F(B;X), its symmetric form F-tilde, the
Fourier-sum oracle for b(B;s), the Hecke-sum polynomials G and G-tilde, the
rational function frak-B, the closed kernel frak-L, and the key coset-sum
identity (Prop locden4) checker.

F is obtained by exact Lagrange interpolation of
    F(B; q^{-2k}) = alpha(Theta_2k, B) / C(2k),
    C(s) = prod_{i<=[(n-1)/2]} (1-q^{2i-s}) prod_{i<=[n/2]} (1-xi q^{2i-1-s}),
at k = n .. n + e(B), with e(B) = f [n/2] + ord det B.  The Fourier oracle
recomputes b(B;s) as a truncated character sum over Her_n(F)/Her_n(O_E) and
reconstructs the same polynomial, giving the independent cross-check.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .fields import EElem, LocalFieldSpec, ord_p, RAMIFIED, SPLIT, INERT
from .hermitian import ClassDescriptor, HermitianMatrix, classify
from .laurent import LaurentPoly, TSeries, geometric_inverse, poly_factors, series_inverse
from .charsums import PsiAccumulator, psi_exponent, blocks_rank
from .density import engine_for, desc_of
from . import hecke


def e_value(Bdesc: ClassDescriptor) -> int:
    F = Bdesc.field
    return F.f_exp * (Bdesc.n // 2) + Bdesc.det_ord


def gamma0_class(Bdesc: ClassDescriptor) -> int:
    """epsilon_{E/F}((-1)^{[n/2]} det B), the sign in the even functional
    equation."""
    F = Bdesc.field
    if F.splitting == SPLIT:
        return 1
    rep = Bdesc.representative()
    d = rep.det().rational() * Fraction(-1) ** (Bdesc.n // 2)
    return F.norm_class(d)


def C_factor(F: LocalFieldSpec, n: int, s_exp: int) -> Fraction:
    """C(s) at s = s_exp (an even integer 2k)."""
    q = Fraction(F.q)
    out = Fraction(1)
    for i in range((n - 1) // 2 + 1):
        out *= 1 - q ** (2 * i - s_exp)
    for i in range(1, n // 2 + 1):
        out *= 1 - F.xi * q ** (2 * i - 1 - s_exp)
    return out


def theta_blocks(F, k):
    if F.splitting == RAMIFIED:
        return (("theta", 0),) * k
    return (("line", Fraction(1)),) * (2 * k)


class SiegelData:
    __slots__ = ("desc", "e_B", "F_poly", "F_tilde", "gamma0")

    def __init__(self, desc, e_B, F_poly, F_tilde, gamma0):
        self.desc = desc
        self.e_B = e_B
        self.F_poly = F_poly
        self.F_tilde = F_tilde
        self.gamma0 = gamma0

    def functional_equation_ok(self) -> bool:
        n = self.desc.n
        flip = self.F_tilde.invert_var()
        if n % 2 == 1:
            return flip == self.F_tilde
        return flip == LaurentPoly({e: self.gamma0 * c for e, c in self.F_tilde.c.items()})

    def to_json(self):
        return {"e_B": self.e_B,
                "F": {str(e): "%d/%d" % (c.numerator, c.denominator) for e, c in sorted(self.F_poly.c.items())},
                "Ftilde": {str(e): "%d/%d" % (c.numerator, c.denominator) for e, c in sorted(self.F_tilde.c.items())},
                "feq_ok": self.functional_equation_ok()}


_F_cache = {}


def F_polynomial(B, field=None) -> SiegelData:
    """Siegel polynomial via density interpolation."""
    if isinstance(B, HermitianMatrix):
        desc = classify(B)
    else:
        desc = B
    F = desc.field
    key = desc.key()
    if key in _F_cache:
        return _F_cache[key]
    rep = desc.representative()
    if not rep.is_semi_integral():
        out = SiegelData(desc, 0, LaurentPoly({}), LaurentPoly({}), 1)
        _F_cache[key] = out
        return out
    n = desc.n
    eB = e_value(desc)
    if eB < 0:
        raise ValueError("semi-integral matrix with negative e(B)")
    eng = engine_for(F)
    q = Fraction(F.q)
    nodes = []
    for k in range(n, n + eB + 1):
        a = eng.alpha(theta_blocks(F, k), desc)
        nodes.append((q ** (-2 * k), a / C_factor(F, n, 2 * k)))
    coeffs = _lagrange(nodes, eB)
    Fp = LaurentPoly({j: c for j, c in enumerate(coeffs)})
    # F-tilde(X) = X^{-eB} F(q^{-n} X^2)
    Ft = LaurentPoly({2 * j - eB: c * q ** (-n * j) for j, c in enumerate(coeffs)})
    out = SiegelData(desc, eB, Fp, Ft, gamma0_class(desc))
    assert Fp.c.get(0, 0) == 1, "F(B;0) must be 1"
    _F_cache[key] = out
    return out


def _lagrange(nodes, deg):
    """Exact coefficients of the degree-deg polynomial through the nodes."""
    assert len(nodes) == deg + 1
    coeffs = [Fraction(0)] * (deg + 1)
    for i, (xi, yi) in enumerate(nodes):
        # basis polynomial prod_{j != i} (X - xj)/(xi - xj)
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, (xj, _) in enumerate(nodes):
            if j == i:
                continue
            basis = _polymul_linear(basis, -xj)
            denom *= xi - xj
        w = yi / denom
        for k, c in enumerate(basis):
            coeffs[k] += w * c
    return coeffs


def _polymul_linear(coeffs, c0):
    """coeffs(X) * (X + c0)."""
    out = [Fraction(0)] * (len(coeffs) + 1)
    for k, c in enumerate(coeffs):
        out[k] += c * c0
        out[k + 1] += c
    return out


def F_tilde(Bdesc) -> LaurentPoly:
    return F_polynomial(Bdesc).F_tilde


# -- Fourier oracle -------------------------------------------------------------

def b_fourier_oracle(B: HermitianMatrix, J: int, budget=1 << 27):
    """Exact coefficients A_j of the Siegel series b(B;s) = sum A_j q^{-js}
    restricted to z with denominator depth <= J (A_j indexed by half-integers
    2j to stay integral)."""
    F = B.F
    n = B.n
    p = F.p
    box = (p ** J) ** (n * n)
    if box > budget:
        raise ValueError("fourier box %d exceeds budget" % box)
    if not B.is_semi_integral():
        return {}
    from .qext import QExt

    accs = {}
    mod_k = J + F.f_exp + 1
    for z, ms in _her_box(F, n, J):
        tr = _pair_trace(B, z)
        r = psi_exponent(tr, p, mod_k)
        if ms not in accs:
            accs[ms] = PsiAccumulator(p, mod_k)
        accs[ms].add(r, QExt(1))
    out = {}
    for ms, acc in accs.items():
        v = acc.total()
        if not v.is_rational:
            raise ArithmeticError("irrational Fourier coefficient")
        if v.rational():
            out[ms] = v.rational()
    return out


def _her_box(F, n, J):
    """Representatives of p^{-J} Her_n(O_E)/Her_n(O_E) with the doubled
    mu-exponent ms = 2 log_q mu(z)."""
    p = F.p
    pj = p ** J
    if n == 1:
        for k in range(pj):
            z = Fraction(k, pj)
            zo = ord_p(z, p)
            dep = 0 if (zo is None or zo >= 0) else -zo
            yield HermitianMatrix(F, [[z]]), 2 * dep
        return
    if n == 2:
        scale = EElem.pi_E(F).inverse() if F.f_exp else EElem.from_rational(F, 1)
        for a in range(pj):
            for d in range(pj):
                for w1 in range(pj):
                    for w2 in range(pj):
                        w = EElem(F, Fraction(w1, pj), Fraction(w2, pj))
                        Z = HermitianMatrix(F, [[EElem.from_rational(F, Fraction(a, pj)), w],
                                                [w.conj(), EElem.from_rational(F, Fraction(d, pj))]])
                        yield Z, _mu_ms(F, Z)
        return
    raise ValueError("fourier box only for n <= 2")


def _mu_ms(F, Z: HermitianMatrix):
    """2 log_q mu(z) = log_q [zO^n + O^n : O^n] (split: both components)."""
    rows = Z.a
    n = Z.n
    if F.splitting == SPLIT:
        M1 = [[rows[i][j].a for j in range(n)] for i in range(n)]
        M2 = [[rows[i][j].b for j in range(n)] for i in range(n)]
        from .hermitian import _smith_scales

        tot = 0
        for M in (M1, M2):
            if any(any(x for x in r) for r in M):
                for s in _smith_scales_nonzero(M, F.p):
                    tot += max(0, -s)
            # zero matrix contributes nothing
        return tot
    # field case: ord_E elementary divisors; each pi_E step has group size
    # q^2 (inert) or q (ramified), so ms = log_q of the index
    tot = 0
    for s in _smith_e_nonzero(F, rows):
        tot += max(0, -s)
    return 2 * tot if F.splitting == INERT else tot


def _smith_scales_nonzero(M, p):
    from .hermitian import _smith_scales

    # degenerate rows/cols can appear: strip exact zeros by augmenting rank
    import itertools

    k = len(M)
    # use fraction-field smith on the nonsingular part: perturbation-free
    # approach: compute divisors of the module O^k / M O^k via row reduction
    return _smith_fractional(M, p)


def _smith_fractional(M, p):
    """Elementary divisor valuations of a (possibly singular) matrix over Q_p,
    ignoring zero divisors (they do not enlarge z O^n + O^n)."""
    M = [row[:] for row in M]
    out = []
    while M:
        best = None
        for i in range(len(M)):
            for j in range(len(M)):
                v = ord_p(M[i][j], p)
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i0, j0 = best
        out.append(v)
        piv = M[i0][j0]
        rows = [i for i in range(len(M)) if i != i0]
        cols = [j for j in range(len(M)) if j != j0]
        M = [[M[i][j] - M[i][j0] * M[i0][j] / piv for j in cols] for i in rows]
    return out


def _smith_e_nonzero(F, rows):
    M = [row[:] for row in rows]
    out = []
    while M:
        best = None
        for i in range(len(M)):
            for j in range(len(M)):
                v = M[i][j].ord_E()
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i0, j0 = best
        out.append(v)
        piv = M[i0][j0]
        ridx = [i for i in range(len(M)) if i != i0]
        cidx = [j for j in range(len(M)) if j != j0]
        M = [[M[i][j] - M[i][j0] * M[i0][j] / piv for j in cidx] for i in ridx]
    return out


def _pair_trace(B, Z):
    """tr(B Z) as a rational; for Hermitian B, Z this lies in F."""
    n = B.n
    tr = EElem.from_rational(B.F, 0)
    for i in range(n):
        for j in range(n):
            tr = tr + B.a[i][j] * Z.a[j][i]
    assert tr.is_rational(), "tr(BZ) must be rational"
    return tr.rational()


def F_from_fourier(B: HermitianMatrix, J: int, budget=1 << 27) -> LaurentPoly:
    """Reconstruct F(B;X) from the truncated Fourier sum (independent of the
    density route)."""
    F = B.F
    n = B.n
    desc = classify(B)
    eB = e_value(desc)
    coeffs = b_fourier_oracle(B, J, budget=budget)
    q = Fraction(F.q)
    # b(B;s) = sum over ms of A_ms u^{ms/2} with u = q^{-s}: require even ms
    series = {}
    for ms, a in coeffs.items():
        if ms % 2:
            raise ArithmeticError("odd mu-grading survived")
        series[ms // 2] = a
    order = eB
    b_ser = TSeries(series, order)
    factors = [(q ** (2 * i), 1) for i in range((n - 1) // 2 + 1)]
    factors += [(Fraction(F.xi) * q ** (2 * i - 1), 1) for i in range(1, n // 2 + 1) if F.xi]
    prod = b_ser * geometric_inverse(factors, order)
    return LaurentPoly({e: c for e, c in prod.c.items()})


# -- G polynomials ----------------------------------------------------------------

_G_cache = {}


def G_polynomial(Adesc) -> LaurentPoly:
    """G(A;X) = sum over Mobius cosets of (X q^n)^nu m(W) F(A[W^-1]; X)."""
    if isinstance(Adesc, HermitianMatrix):
        Adesc = classify(Adesc)
    F = Adesc.field
    key = ("G", Adesc.key())
    if key in _G_cache:
        return _G_cache[key]
    n = Adesc.n
    q = Fraction(F.q)
    A = Adesc.representative()
    out = LaurentPoly({})
    for W in hecke.mobius_cosets(F, n):
        w = W.m_weight()
        Ap = hecke.gram_by_coset(A, W, inverse=True)
        if not Ap.det() or not Ap.is_semi_integral():
            continue
        Fp = F_polynomial(classify(Ap)).F_poly
        term = LaurentPoly({e + W.nu: c * (q ** (n * W.nu)) for e, c in Fp.c.items()})
        out = out + LaurentPoly({e: w * c for e, c in term.c.items()})
    _G_cache[key] = out
    return out


def G_tilde(Adesc, t_order=8) -> TSeries:
    """G-tilde(A;X,t): finite t-polynomial with Laurent coefficients in X."""
    F = Adesc.field
    key = ("Gt", Adesc.key(), t_order)
    if key in _G_cache:
        return _G_cache[key]
    A = Adesc.representative()
    n = Adesc.n
    out = TSeries({}, t_order)
    for W in hecke.mobius_cosets(F, n):
        w = W.m_weight()
        Ap = hecke.gram_by_coset(A, W, inverse=True)
        if not Ap.det() or not Ap.is_semi_integral():
            continue
        Ft = F_polynomial(classify(Ap)).F_tilde
        out = out + TSeries({W.nu: LaurentPoly({e: w * c for e, c in Ft.c.items()})}, t_order)
    _G_cache[key] = out
    return out


def xi_j(F, j):
    return F.xi if j % 2 else 1


def frakB_num_factors(F, n):
    """(coefficient, t-power) pairs of prod_{j=0}^{n-1} (1 - xi(n+j) q^{n+j} t^2)."""
    q = Fraction(F.q)
    return [(Fraction(xi_j(F, n + j)) * q ** (n + j), 2) for j in range(n) if xi_j(F, n + j) != 0]


def frakB(Adesc, t_order=8) -> TSeries:
    """frak-B(A;t) = prod (1 - xi(n+j) q^{n+j} t^2) / G(A; t^2), as a t-series."""
    F = Adesc.field
    n = Adesc.n
    G = G_polynomial(Adesc)
    # G(A; t^2): t-polynomial
    Gt = TSeries({2 * e: c for e, c in G.c.items()}, t_order)
    num = poly_factors(frakB_num_factors(F, n), t_order)
    return num * series_inverse(Gt, t_order)


def frakB_scaled(Adesc, c_sq: Fraction, t_order=8) -> TSeries:
    """frak-B(A; c t) where c^2 = c_sq (only even powers of t appear)."""
    B = frakB(Adesc, t_order)
    return TSeries({e: v * c_sq ** (e // 2) for e, v in B.c.items()}, t_order)


def frakL(F, n, t_order, t_sq_scale: Fraction) -> TSeries:
    """frak-L(X, c t) as a t-series with Laurent-X coefficients, where
    t_sq_scale = c^2 (all occurrences of t carry even total q-powers).

    inert:    prod_{i=1}^n (1 - q^{-n+2i-1} X^2 c^2 t^2)^-1 (1 - q^{-n+2i-1} X^-2 c^2 t^2)^-1
    split:    prod_{i=1}^n (1 - q^{-n/2+i-1/2} X c t)^-2 (1 - .. X^-1 c t)^-2
    ramified: same as split to the first power.
    """
    q = Fraction(F.q)
    out = TSeries({0: LaurentPoly.const(Fraction(1))}, t_order)
    if F.splitting == INERT:
        for i in range(1, n + 1):
            base = q ** (-n + 2 * i - 1) * t_sq_scale
            for sgn in (2, -2):
                out = out * _geo(LaurentPoly.X(sgn, base), 2, t_order)
        return out
    # split and ramified carry odd t-powers with sqrt(q)-scales: c = q^{k/2}
    # enters only via c^2 in pairs for the comparisons we make; here we need
    # c t directly, so t_sq_scale must be a perfect square times q-powers.
    c = _sqrt_frac(t_sq_scale)
    mult = 2 if F.splitting == SPLIT else 1
    for i in range(1, n + 1):
        base = _q_half_power(F, -n + 2 * i - 1) * c
        for sgn in (1, -1):
            for _ in range(mult):
                out = out * _geo(LaurentPoly.X(sgn, base), 1, t_order)
    return out


def _geo(coeff_poly: LaurentPoly, t_pow: int, order: int) -> TSeries:
    """1/(1 - coeff * t^{t_pow}) with LaurentPoly coefficient."""
    out = TSeries({0: LaurentPoly.const(Fraction(1))}, order)
    term = LaurentPoly.const(Fraction(1))
    e = t_pow
    while e <= order:
        term = term * coeff_poly
        out = out + TSeries({e: term}, order)
        e += t_pow
    return out


def _sqrt_frac(x: Fraction) -> Fraction:
    from math import isqrt

    num, den = x.numerator, x.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise ValueError("not a perfect square: %s" % x)
    return Fraction(rn, rd)


def _q_half_power(F, exp: int) -> Fraction:
    """q^{exp/2} for even exp."""
    if exp % 2:
        raise ValueError("odd half power")
    return Fraction(F.q) ** (exp // 2)


def lhs_coset_sum(Adesc, t_order) -> TSeries:
    """sum over right cosets of F-tilde(A[W];X) t^{nu(W)}, truncated."""
    F = Adesc.field
    A = Adesc.representative()
    out = TSeries({}, t_order)
    for W in hecke.enumerate_cosets(F, Adesc.n, t_order, side="right"):
        Ap = A.gram(W.mat)
        if not Ap.det() or not Ap.is_semi_integral():
            continue
        Ft = F_polynomial(classify(Ap)).F_tilde
        out = out + TSeries({W.nu: Ft}, t_order)
    return out


def verify_prop_locden4(Adesc, t_order=4):
    """Coefficientwise comparison of the coset sum with
    frakB(A, q^{-n/2} t) G-tilde(A;X,t) frakL(X, q^{(n-1)/2} t)."""
    F = Adesc.field
    n = Adesc.n
    q = Fraction(F.q)
    lhs = lhs_coset_sum(Adesc, t_order)
    rhs = frakB_scaled(Adesc, q ** (-n), t_order)
    rhs = rhs * G_tilde(Adesc, t_order)
    rhs = rhs * frakL(F, n, t_order, q ** (n - 1))
    # normalize coefficients to LaurentPoly for comparison
    def norm(s):
        return {e: (v if isinstance(v, LaurentPoly) else LaurentPoly.const(v))
                for e, v in s.c.items() if v}

    L, R = norm(lhs), norm(rhs)
    keys = set(L) | set(R)
    diffs = [e for e in keys if L.get(e, LaurentPoly({})) != R.get(e, LaurentPoly({}))]
    return {"ok": not diffs, "first_diff": min(diffs) if diffs else None,
            "lhs": lhs, "rhs": rhs}
