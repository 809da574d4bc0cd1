"""Character-sum primitives for local densities.

All sums of the unramified additive character psi over residue boxes are
evaluated exactly: partial sums are accumulated per psi-exponent and reduced
at the end, so every value lives in Q or Q(sqrt(+-p)).  Entry points:
alpha_raw (brute force counting), alpha_gauss_n1 (scalar character variable,
rank-1 targets, block-diagonal A of any rank), alpha_gauss_n2 (full character
box, 2x2 targets).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np

from .fields import EElem, LocalFieldSpec, ord_p, RAMIFIED, SPLIT
from .hermitian import HermitianMatrix
from .qext import QExt, reduce_root_sum

DEFAULT_BUDGET = 1 << 28


class BudgetExceeded(RuntimeError):
    pass


# -- A-side blocks ------------------------------------------------------------
# Block-diagonal A is a list of ("line", c: Fraction) or ("theta", b: int),
# the latter meaning pi_F^b Theta_2 (ramified only).

def blocks_of_descriptor(desc):
    from .hermitian import non_norm_unit

    F = desc.field
    u_non = non_norm_unit(F)
    out = []
    for a, d in desc.lines:
        base = (F.pi_F ** a) if F.splitting == RAMIFIED else Fraction(F.p) ** a
        out.append(("line", base * (u_non if d == -1 else 1)))
    for b in desc.thetas:
        out.append(("theta", b))
    return tuple(out)


def blocks_rank(blocks):
    return sum(1 if k == "line" else 2 for k, _ in blocks)


def blocks_matrix(F, blocks) -> HermitianMatrix:
    from .hermitian import theta_block

    mats = []
    for kind, v in blocks:
        if kind == "line":
            mats.append(HermitianMatrix.diagonal(F, [v]))
        else:
            mats.append(theta_block(F, v))
    return HermitianMatrix.block_diag(mats, F)


def negate_blocks(blocks):
    return tuple(("line", -v) if k == "line" else (k, v) for k, v in blocks)


def theta_blocks_sum(F, blocks):
    return tuple(blocks)


# -- exact accumulation of sums  sum_r V_r zeta^r  ------------------------------

class PsiAccumulator:
    """Collects QExt-valued weights per psi-exponent r mod p^k and reduces
    the total exactly at the end."""

    def __init__(self, p: int, k: int):
        self.p, self.k = p, int(k)
        self.m = p ** self.k
        self.ca = {}
        self.cb = {}
        self.D = 1

    def add(self, r: int, v: QExt):
        r %= self.m
        if v.a:
            self.ca[r] = self.ca.get(r, 0) + v.a
        if v.b:
            self.cb[r] = self.cb.get(r, 0) + v.b
            self.D = v.D

    def total(self) -> QExt:
        from .qext import galois_root_sum

        val = galois_root_sum(self.ca, self.cb, self.p, self.k)
        # float sanity check of the subfield-projection hypothesis; tolerance
        # scales with the total mass, since the sums cancel heavily
        import cmath

        approx = 0j
        mass = 1.0
        sq = (self.D if self.D >= 0 else abs(self.D)) ** 0.5 * (1 if self.D >= 0 else 1j)
        for r, c in self.ca.items():
            approx += float(c) * cmath.exp(2j * cmath.pi * r / self.m)
            mass += abs(float(c))
        for r, c in self.cb.items():
            approx += float(c) * sq * cmath.exp(2j * cmath.pi * r / self.m)
            mass += abs(float(c)) * abs(sq)
        ref = val.to_complex()
        if abs(approx - ref) > 1e-9 * mass:
            raise ArithmeticError("character sum escaped the quadratic subfield")
        return val


def psi_exponent(t: Fraction, p: int, k: int) -> int:
    """r with psi(t) = zeta_{p^k}^r: prime-to-p denominator parts are p-adic
    units and are inverted modulo p^k."""
    t = Fraction(t)
    pk = p ** k
    num, den = t.numerator, t.denominator
    dp = 1
    while den % p == 0:
        den //= p
        dp *= p
    if pk % dp:
        raise ValueError("psi exponent outside modulus")
    return (num * (pk // dp) * pow(den, -1, pk)) % pk


# -- one-dimensional norm Gauss sums -------------------------------------------

class NormGaussTable:
    """S(c, e) = sum over x in O_E/p^e of psi(c N(x)), exact."""

    def __init__(self, F: LocalFieldSpec):
        self.F = F
        self._memo = {}

    def norm_int(self, a, b, mod):
        F = self.F
        if F.splitting == SPLIT:
            return (a * b) % mod
        if F.splitting == "inert" and F.p == 2:
            return (a * a - a * b + b * b) % mod
        if F.splitting == "inert":
            s = int(F.w_sq[0])
            return (a * a - s * b * b) % mod
        d = F.defining_unit * F.p
        return (a * a - d * b * b) % mod

    def value(self, c: Fraction, e: int) -> QExt:
        F = self.F
        c = Fraction(c)
        v = ord_p(c, F.p)
        j = 0 if (v is None or v >= 0) else -v
        if j == 0:
            return QExt(Fraction(F.p) ** (2 * e))
        if j > e:
            # x only matters mod p^e; never arises with stabilized exponents
            raise ValueError("character deeper than the box")
        pj = F.p ** j
        # c = A/(p^j B') with B' prime to p: exponent r0 = A inv(B') mod p^j
        num, den = c.numerator, c.denominator
        while den % F.p == 0:
            den //= F.p
        r0 = (num * pow(den, -1, pj)) % pj
        key = (r0, j)
        if key not in self._memo:
            counts = {}
            for a in range(pj):
                for b in range(pj):
                    r = (r0 * self.norm_int(a, b, pj)) % pj
                    counts[r] = counts.get(r, 0) + 1
            self._memo[key] = reduce_root_sum(counts, F.p, j)
        return self._memo[key] * QExt(Fraction(F.p) ** (2 * (e - j)))


_tables = {}


def norm_table(F) -> NormGaussTable:
    key = (F.p, F.splitting, F.defining_unit)
    if key not in _tables:
        _tables[key] = NormGaussTable(F)
    return _tables[key]


def block_T(F, table, block, y: Fraction, e: int) -> QExt:
    """T_y of one A-block: the X-sum over that block's rows."""
    kind, v = block
    if kind == "line":
        return table.value(y * v, e)
    # theta block pi^v Theta_2: psi(y pi^v tr(pi_E^{-1} x1-bar x2));
    # the x2 sum enforces ord, giving p^{2e} * #{x1: ord_E x1 >= 2j}
    c = y * (F.pi_F ** v)
    vo = ord_p(c, F.p)
    j = 0 if (vo is None or vo >= 0) else -vo
    return QExt(Fraction(F.p) ** (2 * e + 2 * max(0, e - j)))


# -- rank-1 gauss route ---------------------------------------------------------

def alpha_gauss_n1_at(F, blocks, b: Fraction, e: int) -> Fraction:
    """alpha-level value q^{e(-2m+1)} #A_e(A, (b)) via the scalar character sum."""
    b = Fraction(b)
    if b.denominator != 1:
        v = ord_p(b, F.p)
        if v is not None and v < 0:
            return Fraction(0)  # target not semi-integral
    table = norm_table(F)
    p = F.p
    m = blocks_rank(blocks)
    pe = p ** e
    acc = PsiAccumulator(p, e)
    for k in range(pe):
        y = Fraction(k, pe)
        prodv = QExt(1)
        for blk in blocks:
            prodv = prodv * block_T(F, table, blk, y, e)
            if not prodv:
                break
        if not prodv:
            continue
        r = psi_exponent(-y * b, p, acc.k)
        acc.add(r, prodv)
    total = acc.total()
    if not total.is_rational:
        raise ArithmeticError("irrational rank-1 density")
    return total.rational() * Fraction(p) ** (-2 * m * e)


# -- 2x2 gauss route -------------------------------------------------------------

def alpha_gauss_n2_at(F, blocks, B: HermitianMatrix, e: int, budget=DEFAULT_BUDGET) -> Fraction:
    """alpha-level value q^{e(-4m+4)} #A_e(A, B) by summing over the full
    character box Y in p^{-e} Her_2 / Her_2, classifying each Y exactly."""
    p = F.p
    pe = p ** e
    box = pe ** 2 * (pe ** 2)
    if box > budget:
        raise BudgetExceeded("n=2 character box %d exceeds budget" % box)
    table = norm_table(F)
    m = blocks_rank(blocks)
    f = F.f_exp
    acc = PsiAccumulator(p, e + f + 2)
    B11 = B.a[0][0].rational()
    B22 = B.a[1][1].rational()
    B12 = B.a[0][1]
    for a0 in range(pe):
        y1 = Fraction(a0, pe)
        for d0 in range(pe):
            y2 = Fraction(d0, pe)
            base_tr = -(y1 * B11 + y2 * B22)
            for w1 in range(pe):
                for w2 in range(pe):
                    w = EElem(F, Fraction(w1, pe), Fraction(w2, pe))
                    val = _S_of_Y(F, table, blocks, m, y1, y2, w, e)
                    if not val:
                        continue
                    tr = base_tr - (w.conj() * B12).trace()
                    r = psi_exponent(tr, p, acc.k)
                    acc.add(r, val)
    total = acc.total()
    if not total.is_rational:
        raise ArithmeticError("irrational n=2 density")
    return total.rational() * Fraction(p) ** (-4 * m * e)


def _S_of_Y(F, table, blocks, m, y1, y2, w, e) -> QExt:
    """X-sum for Y = [[y1, w],[w-bar, y2]]: classify Y into lines or a plane
    and take the product of the per-block sums."""
    p = F.p
    vw = w.ord_E()  # None for w = 0
    v1 = ord_p(y1, p)
    v2 = ord_p(y2, p)
    ram = F.splitting == RAMIFIED
    re = F.ram_e
    dv = [x for x in (None if v1 is None else re * v1, None if v2 is None else re * v2) if x is not None]
    diag_min = min(dv) if dv else None
    off_min = vw
    if diag_min is None and off_min is None:
        return QExt(Fraction(p) ** (4 * m * e))  # Y = 0: full box
    if off_min is not None and (diag_min is None or off_min < diag_min):
        if ram and (off_min % 2 == 1):
            return _U_plane(F, blocks, w, e)
        # lift to the diagonal: try basis translations
        for u in (EElem(F, 1, 0), EElem(F, 0, 1)):
            # new y1' = y1 + tr(u-bar * w) + N(u) y2
            cand = y1 + (u.conj() * w).trace() + u.norm() * y2
            if ord_p(cand, p) is not None and re * ord_p(cand, p) <= off_min:
                det = y1 * y2 - w.norm()
                return _lines_product(F, table, blocks, cand, det / cand, e)
        raise ArithmeticError("Y not liftable")
    # diagonal pivot
    piv = y1 if (v1 is not None and (v2 is None or v1 <= v2)) else y2
    det = y1 * y2 - w.norm()
    return _lines_product(F, table, blocks, piv, det / piv, e)


def _lines_product(F, table, blocks, c1, c2, e) -> QExt:
    out = QExt(1)
    for blk in blocks:
        out = out * block_T(F, table, blk, c1, e)
        if not out:
            return out
    for blk in blocks:
        out = out * block_T(F, table, blk, c2, e)
        if not out:
            return out
    return out


def _U_plane(F, blocks, delta: EElem, e) -> QExt:
    """X-sum when Y is an odd-scale plane [[0, delta],[delta-bar, 0]]:
    p^{2me} * #{x : delta * (A x)_i in the inverse different, all i}."""
    p = F.p
    vd = delta.ord_E()
    thr = -1 - vd  # need ord_E((Ax)_i) >= thr
    cnt = Fraction(1)
    for kind, v in blocks:
        if kind == "line":
            vc = 2 * ord_p(Fraction(v), p)
            need = thr - vc  # ord_E(x) >= need
            kreq = max(0, need)
            cnt *= Fraction(p) ** (2 * e - _count_exp(kreq, e))
        else:
            # theta block pi^b Theta_2: (Ax) = pi^b pi_E^{-1} (x2-bar-ish, x1)
            vc = 2 * v - 1
            need = thr - vc
            kreq = max(0, need)
            cnt *= Fraction(p) ** (2 * (2 * e) - 2 * _count_exp(kreq, e))
    m = blocks_rank(blocks)
    return QExt(Fraction(p) ** (2 * m * e) * cnt)


def _count_exp(kreq, e):
    """#{x in O_E mod p^e with ord_E x >= k} = p^{max(0, 2e - k)}: return the
    exponent deficit 2e - max(0, 2e - k)."""
    return min(2 * e, max(0, kreq))


# -- raw enumeration --------------------------------------------------------------

def _coord_columns(F, m, e, start=0, stop=None):
    """Columns of O_E^m mod p^e with index in [start, stop), as (k, m, 2)."""
    pe = F.p ** e
    n = pe ** (2 * m)
    stop = n if stop is None else min(stop, n)
    idx = np.arange(start, stop, dtype=np.int64)
    coords = np.empty((stop - start, m, 2), dtype=np.int64)
    t = idx.copy()
    for i in range(m):
        for c in range(2):
            coords[:, i, c] = t % pe
            t //= pe
    return coords


def _norm_arrays(F, x, y, mod):
    """Componentwise product structure: given coordinate arrays for two
    elements, return coords of x-bar * y mod mod."""
    a1, b1 = x[..., 0], x[..., 1]
    a2, b2 = y[..., 0], y[..., 1]
    if F.splitting == SPLIT:
        # x-bar = (b1, a1): product = (b1 a2, a1 b2)
        return (b1 * a2) % mod, (a1 * b2) % mod
    if F.splitting == "inert" and F.p == 2:
        # w-bar = -1 - w: x-bar = (a1 - b1, -b1)
        ra = (a1 - b1) % mod
        rb = (-b1) % mod
        # (ra + rb w)(a2 + b2 w), w^2 = -1 - w
        pa = (ra * a2 - rb * b2) % mod
        pb = (ra * b2 + rb * a2 - rb * b2) % mod
        return pa, pb
    s = int(F.w_sq[0])  # w^2 = s (p odd, inert or ramified)
    pa = (a1 * a2 - s * b1 * b2) % mod
    pb = (a1 * b2 - b1 * a2) % mod
    return pa, pb


def herm_value_arrays(F, A: HermitianMatrix, cols, mod, scale):
    """A[x] for every column, as integer numerators over 'scale' mod mod."""
    m = A.n
    acc_a = np.zeros(cols.shape[0], dtype=np.int64)
    for i in range(m):
        for j in range(m):
            aij = A.a[i][j] * scale
            ca, cb = int(aij.a), int(aij.b)
            assert aij.a.denominator == 1 and aij.b.denominator == 1
            # x_i-bar * x_j coordinates
            pa, pb = _norm_arrays(F, cols[:, i, :], cols[:, j, :], mod)
            if F.splitting == SPLIT:
                # first component of (pa, pb) * (ca, cb)
                acc_a = (acc_a + ca * pa) % mod
            else:
                # aij = ca + cb w; (pa + pb w)(ca + cb w): rational part
                if F.splitting == "inert" and F.p == 2:
                    acc_a = (acc_a + ca * pa - cb * pb) % mod
                else:
                    s = int(F.w_sq[0])
                    acc_a = (acc_a + ca * pa + s * cb * pb) % mod
    return acc_a


def alpha_raw_n1_at(F, A: HermitianMatrix, b: Fraction, e: int, primitive=False,
                    budget=DEFAULT_BUDGET) -> Fraction:
    p = F.p
    m = A.n
    ncols = (p ** e) ** (2 * m)
    if ncols > budget:
        raise BudgetExceeded("raw n=1 box %d exceeds budget" % ncols)
    # common denominator scale for A entries and b
    scale = 1
    for row in A.a:
        for x in row:
            scale = _lcm(scale, x.a.denominator, x.b.denominator)
    scale = _lcm(scale, Fraction(b).denominator)
    mod = (p ** e) * scale * (p ** F.f_exp)
    bnum = int(Fraction(b) * scale)
    cnt = 0
    chunk = 1 << 20
    total = (p ** e) ** (2 * m)
    for start in range(0, total, chunk):
        cols = _coord_columns(F, m, e, start, start + chunk)
        vals = herm_value_arrays(F, A, cols, mod, scale)
        ok = (vals - bnum) % (p ** e * scale) == 0
        if primitive:
            ok &= _primitive_mask(F, cols, p)
        cnt += int(np.count_nonzero(ok))
    return Fraction(cnt) * Fraction(p) ** (e * (-2 * m + 1))


def _primitive_mask(F, cols, p):
    if F.splitting == SPLIT:
        u1 = (cols[..., 0] % p != 0).any(axis=1)
        u2 = (cols[..., 1] % p != 0).any(axis=1)
        return u1 & u2
    if F.splitting == RAMIFIED:
        # unit coordinate: a-part a unit (ord_E x = 0 iff p does not divide a)
        return (cols[..., 0] % p != 0).any(axis=1)
    return ((cols[..., 0] % p != 0) | (cols[..., 1] % p != 0)).any(axis=1)


def _cross_arrays(F, A, x1coords, cols, mod, scale):
    """(x1* A x)_value coordinates for all columns x, x1 fixed (exact ints)."""
    m = A.n
    # r = x1* A: row vector over E; compute exactly with Fractions
    x1 = [EElem(F, Fraction(int(x1coords[i, 0])), Fraction(int(x1coords[i, 1]))) for i in range(m)]
    r = []
    for j in range(m):
        s = EElem.from_rational(F, 0)
        for i in range(m):
            s = s + x1[i].conj() * A.a[i][j]
        r.append(s * scale)
    acc_a = np.zeros(cols.shape[0], dtype=np.int64)
    acc_b = np.zeros(cols.shape[0], dtype=np.int64)
    for j in range(m):
        ra, rb = int(r[j].a), int(r[j].b)
        a2 = cols[:, j, 0]
        b2 = cols[:, j, 1]
        if F.splitting == SPLIT:
            acc_a = (acc_a + ra * a2) % mod
            acc_b = (acc_b + rb * b2) % mod
        elif F.splitting == "inert" and F.p == 2:
            acc_a = (acc_a + ra * a2 - rb * b2) % mod
            acc_b = (acc_b + ra * b2 + rb * a2 - rb * b2) % mod
        else:
            s = int(F.w_sq[0])
            acc_a = (acc_a + ra * a2 + s * rb * b2) % mod
            acc_b = (acc_b + ra * b2 + rb * a2) % mod
    return acc_a, acc_b


def alpha_raw_n2_at(F, A: HermitianMatrix, B: HermitianMatrix, e: int,
                    primitive=False, budget=DEFAULT_BUDGET) -> Fraction:
    p = F.p
    m = A.n
    ncols = (p ** e) ** (2 * m)
    if ncols * ncols > budget:
        raise BudgetExceeded("raw n=2 box %d exceeds budget" % (ncols * ncols))
    scale = 1
    for M in (A, B):
        for row in M.a:
            for x in row:
                scale = _lcm(scale, x.a.denominator, x.b.denominator)
    pe = p ** e
    mod = pe * scale
    cols = _coord_columns(F, m, e)
    vals = herm_value_arrays(F, A, cols, mod, scale)
    b11 = int(B.a[0][0].rational() * scale)
    b22 = int(B.a[1][1].rational() * scale)
    b12a = B.a[0][1] * scale
    mask1 = (vals - b11) % mod == 0
    mask2 = (vals - b22) % mod == 0
    idx1 = np.nonzero(mask1)[0]
    cnt = 0
    prim_pairs = []
    cols2 = cols[mask2]
    # off-diagonal congruence modulo p^e * inverse-different
    for i1 in idx1:
        ca, cb = _cross_arrays(F, A, cols[i1], cols2, mod * p ** F.f_exp, scale)
        da = int(b12a.a)
        db = int(b12a.b)
        off_ok = _offdiag_ok(F, ca, cb, da, db, pe * scale, p, e, scale)
        if primitive:
            sel = np.nonzero(off_ok)[0]
            for i2 in sel:
                if _pair_primitive(F, cols[i1], cols2[i2], p):
                    cnt += 1
        else:
            cnt += int(np.count_nonzero(off_ok))
    return Fraction(cnt) * Fraction(p) ** (e * (-4 * m + 4))


def _offdiag_ok(F, ca, cb, da, db, modF, p, e, scale):
    """(cross - B12) in p^e * inverse-different, in coordinates."""
    if F.f_exp == 0:
        return ((ca - da) % modF == 0) & ((cb - db) % modF == 0)
    # ramified: difference must lie in p^e pi_E^{-1} O_E: coordinates
    # x = a + b w with w = pi_E: condition ord(a) >= e, ord(b) >= e - 1... in
    # scaled integers: a/scale in p^e Z, b/scale in p^{e-1} Z
    moda = p ** e * scale
    modb = p ** (e - 1) * scale if e >= 1 else scale
    return ((ca - da) % moda == 0) & ((cb - db) % modb == 0)


def _pair_primitive(F, c1, c2, p):
    """Columns (c1, c2) extendable to GL_m: full rank mod the maximal ideal."""
    m = c1.shape[0]
    X1 = [EElem(F, int(c1[i, 0]), int(c1[i, 1])) for i in range(m)]
    X2 = [EElem(F, int(c2[i, 0]), int(c2[i, 1])) for i in range(m)]
    if F.splitting == SPLIT:
        r1 = _rank_mod_p([[int(c1[i, 0]), int(c2[i, 0])] for i in range(m)], p)
        r2 = _rank_mod_p([[int(c1[i, 1]), int(c2[i, 1])] for i in range(m)], p)
        return r1 == 2 and r2 == 2
    # residue field F_p (ramified) or F_{p^2} (inert): use 2x2 minors over O_E
    for i in range(m):
        for j in range(i + 1, m):
            d = X1[i] * X2[j] - X1[j] * X2[i]
            v = d.ord_E()
            if v == 0:
                return True
    # also allow one unit coordinate pattern failing all minors? no: rank 2
    return False


def _rank_mod_p(M, p):
    M = [[x % p for x in row] for row in M]
    rank = 0
    cols = len(M[0])
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, len(M)):
            if M[i][c] % p:
                piv = i
                break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, p)
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = (M[i][c] * inv) % p
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[r])]
        r += 1
        if r == 2:
            return 2
    return r


def _lcm(*xs):
    from math import lcm

    out = 1
    for x in xs:
        out = lcm(out, int(x))
    return out
