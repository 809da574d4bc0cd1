"""Hermitian matrices over a quadratic etale algebra E/Q_p, exactly.

Provides semi-integrality, Gram transforms, the regular matrices Theta,
constructive classification into GL_n(O_E)-equivalence descriptors (diagonal
scales plus scaled Theta_2 planes in the ramified case), class enumeration
with bounded determinant valuation, and a brute-force orbit partitioner used
to validate the classification on residue rings.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product

from .fields import EElem, LocalFieldSpec, ord_p, INERT, SPLIT, RAMIFIED


class HermitianMatrix:
    """n x n matrix over E with A* = A, exact entries."""

    __slots__ = ("F", "n", "a")

    def __init__(self, F: LocalFieldSpec, entries):
        self.F = F
        self.n = len(entries)
        self.a = [[e if isinstance(e, EElem) else EElem.from_rational(F, e) for e in row] for row in entries]
        for i in range(self.n):
            for j in range(self.n):
                if self.a[i][j] != self.a[j][i].conj():
                    raise ValueError("matrix is not Hermitian")

    @staticmethod
    def diagonal(F, values):
        n = len(values)
        z = EElem.from_rational(F, 0)
        rows = [[z] * n for _ in range(n)]
        for i, v in enumerate(values):
            rows[i][i] = v if isinstance(v, EElem) else EElem.from_rational(F, v)
        return HermitianMatrix(F, rows)

    @staticmethod
    def identity(F, n):
        return HermitianMatrix.diagonal(F, [Fraction(1)] * n)

    @staticmethod
    def block_diag(blocks, F=None):
        if not blocks:
            return HermitianMatrix(F, [])
        F = blocks[0].F
        n = sum(b.n for b in blocks)
        z = EElem.from_rational(F, 0)
        rows = [[z] * n for _ in range(n)]
        off = 0
        for b in blocks:
            for i in range(b.n):
                for j in range(b.n):
                    rows[off + i][off + j] = b.a[i][j]
            off += b.n
        return HermitianMatrix(F, rows)

    def __repr__(self):
        return "Herm(%s)" % (self.a,)

    def __eq__(self, other):
        return isinstance(other, HermitianMatrix) and self.F == other.F and self.a == other.a

    def entry(self, i, j) -> EElem:
        return self.a[i][j]

    def scale(self, c):
        return HermitianMatrix(self.F, [[e * c for e in row] for row in self.a])

    def neg(self):
        return self.scale(Fraction(-1))

    def det(self) -> EElem:
        n = self.n
        if n == 0:
            return EElem.from_rational(self.F, 1)

        def minor_det(rows, cols):
            if len(rows) == 1:
                return self.a[rows[0]][cols[0]]
            total = EElem.from_rational(self.F, 0)
            r = rows[0]
            for k, c in enumerate(cols):
                sub = minor_det(rows[1:], cols[:k] + cols[k + 1:])
                term = self.a[r][c] * sub
                total = total + (term if k % 2 == 0 else -term)
            return total

        return minor_det(list(range(n)), list(range(n)))

    def det_ord(self):
        """ord_v of det (split: common component valuation); None if degenerate."""
        d = self.det()
        if not d:
            return None
        if self.F.splitting == SPLIT:
            return ord_p(d.a, self.F.p)
        return ord_p(d.rational(), self.F.p)

    def is_semi_integral(self) -> bool:
        """Integral diagonal, off-diagonal entries in the inverse different."""
        f = self.F.f_exp
        for i in range(self.n):
            di = self.a[i][i]
            if not di.is_rational():
                return False
            v = ord_p(di.rational(), self.F.p)
            if v is not None and v < 0:
                return False
            for j in range(i + 1, self.n):
                w = self.a[i][j].ord_E()
                if w is not None and w < -f:
                    return False
        return True

    def gram(self, X):
        """A[X] = X* A X, X given as a list of rows over E."""
        m = len(X)
        n = len(X[0]) if X else 0
        assert m == self.n
        zero = EElem.from_rational(self.F, 0)
        AX = [[sum((self.a[i][j] * X[j][k] for j in range(m)), zero) for k in range(n)] for i in range(m)]
        out = [[sum((X[j][i].conj() * AX[j][k] for j in range(m)), zero) for k in range(n)] for i in range(n)]
        return HermitianMatrix(self.F, out)

    def epsilon(self) -> int:
        d = self.det()
        if not d:
            raise ValueError("degenerate matrix")
        if self.F.splitting == SPLIT:
            return 1
        return self.F.norm_class(d.rational())

    def to_json(self):
        return [[[str(e.a), str(e.b)] for e in row] for row in self.a]

    @staticmethod
    def from_json(F, data):
        return HermitianMatrix(F, [[EElem(F, Fraction(c[0]), Fraction(c[1])) for c in row] for row in data])


def theta(F: LocalFieldSpec, m: int) -> HermitianMatrix:
    """Regular element: 1_m when E/F unramified; perp-sum of antidiagonal
    pi_E^{-f} planes when ramified (even sizes only)."""
    if F.splitting != RAMIFIED:
        return HermitianMatrix.identity(F, m)
    if m % 2:
        raise ValueError("odd-size Theta is undefined over a ramified extension")
    piE_inv = EElem.pi_E(F).inverse()
    z = EElem.from_rational(F, 0)
    blocks = [HermitianMatrix(F, [[z, piE_inv], [piE_inv.conj(), z]]) for _ in range(m // 2)]
    return HermitianMatrix.block_diag(blocks, F)


def theta_block(F, scale_ord=0):
    """pi_F^scale * Theta_2 over a ramified field."""
    return theta(F, 2).scale(F.pi_F ** scale_ord)


@dataclass(frozen=True)
class ClassDescriptor:
    """GL_n(O_E)-class of a nondegenerate semi-integral matrix.

    lines: tuple of (scale_ord a, unit_class d), d in {+1,-1}; d is always +1
    unless E/F is ramified.  thetas: tuple of scale_ords b for planes
    pi_F^b Theta_2 (ramified only).  Scales are ord_v valuations.
    """

    field: LocalFieldSpec
    lines: tuple
    thetas: tuple = ()

    @property
    def n(self):
        return len(self.lines) + 2 * len(self.thetas)

    @property
    def det_ord(self):
        return sum(a for a, _ in self.lines) + sum(2 * b - self.field.f_exp for b in self.thetas)

    @property
    def norm_class(self):
        F = self.field
        if F.splitting == SPLIT:
            return 1
        if F.splitting == INERT:
            return 1 if self.det_ord % 2 == 0 else -1
        c = 1
        for a, d in self.lines:
            c *= d
        for _ in self.thetas:
            c *= F.norm_class(Fraction(-1))
        return c

    def representative(self) -> HermitianMatrix:
        F = self.field
        blocks = []
        u_non = non_norm_unit(F)
        for a, d in self.lines:
            v = (F.pi_F ** a) if F.splitting == RAMIFIED else Fraction(F.p) ** a
            if d == -1:
                v = v * u_non
            blocks.append(HermitianMatrix.diagonal(F, [v]))
        for b in self.thetas:
            blocks.append(theta_block(F, b))
        return HermitianMatrix.block_diag(blocks, F)

    def key(self):
        return (self.field.p, self.field.splitting, self.field.defining_unit,
                tuple(sorted(self.lines)), tuple(sorted(self.thetas)))

    def to_json(self):
        return {"lines": [list(x) for x in self.lines], "thetas": list(self.thetas),
                "det_ord": self.det_ord, "norm_class": self.norm_class}


def non_norm_unit(F: LocalFieldSpec) -> Fraction:
    """A unit that is not a norm (ramified case); 1 otherwise."""
    if F.splitting != RAMIFIED:
        return Fraction(1)
    for u in range(2, 2 * F.p + 2):
        if u % F.p and F.norm_class(Fraction(u)) == -1:
            return Fraction(u)
    raise RuntimeError("unreachable")


def canonical_lines(F, lines):
    """Aggregate unit classes per scale: unramified units absorb; ramified
    scales keep a single class carrier (the product) per level."""
    if F.splitting != RAMIFIED:
        return tuple(sorted((a, 1) for a, _ in lines))
    by_scale = {}
    for a, d in lines:
        cnt, cls = by_scale.get(a, (0, 1))
        by_scale[a] = (cnt + 1, cls * d)
    out = []
    for a in sorted(by_scale):
        cnt, cls = by_scale[a]
        out.extend([(a, 1)] * (cnt - 1))
        out.append((a, cls))
    return tuple(sorted(out))


def _trace_basis(F):
    return [EElem(F, 1, 0), EElem(F, 0, 1)]


def classify(A: HermitianMatrix) -> ClassDescriptor:
    """Constructive Jordan splitting by exact Gram reduction."""
    F = A.F
    if A.n == 0:
        return ClassDescriptor(F, (), ())
    if not A.det():
        raise ValueError("degenerate matrix cannot be classified")
    if F.splitting == SPLIT:
        M = [[A.a[i][j].a for j in range(A.n)] for i in range(A.n)]
        scales = _smith_scales(M, F.p)
        return ClassDescriptor(F, tuple((a, 1) for a in sorted(scales)), ())

    lines = []
    thetas = []
    work = A
    while work.n > 0:
        n = work.n
        diag_best = None
        for k in range(n):
            v = work.a[k][k].ord_E()
            if v is not None and (diag_best is None or v < diag_best[0]):
                diag_best = (v, k)
        off_best = None
        for i in range(n):
            for j in range(i + 1, n):
                v = work.a[i][j].ord_E()
                if v is not None and (off_best is None or v < off_best[0]):
                    off_best = (v, i, j)
        if diag_best is not None and (off_best is None or diag_best[0] <= off_best[0]):
            k0 = diag_best[1]
        else:
            v, i, j = off_best
            if F.splitting == RAMIFIED and v % 2 == 1:
                # genuine plane: split off the 2-dim block, class pi^b Theta_2
                b = (v + F.f_exp + 1) // 2
                thetas.append(b)
                work = _split_off_plane(work, i, j)
                continue
            work = _lift_min_to_diagonal(work, i, j)
            vals = [(work.a[k][k].ord_E(), k) for k in range(n) if work.a[k][k]]
            k0 = min(vals)[1]
        d = work.a[k0][k0].rational()
        a = ord_p(d, F.p)
        if F.splitting == RAMIFIED:
            u = d * (F.pi_F ** (-a))
            lines.append((a, F.norm_class(u)))
        else:
            lines.append((a, 1))
        work = _split_off_diag(work, k0)
    return ClassDescriptor(F, canonical_lines(F, lines), tuple(sorted(thetas)))


def _lift_min_to_diagonal(A: HermitianMatrix, i, j):
    """e_i <- e_i + u e_j for a basis element u so that the new a_ii has the
    minimal valuation of a_ij; valid whenever tr(O_E a_ij) has that valuation."""
    F = A.F
    target = A.a[i][j].ord_E()
    for u in _trace_basis(F):
        X = _elementary(F, A.n, j, i, u)
        B = A.gram(X)
        vo = B.a[i][i].ord_E()
        if vo is not None and vo <= target:
            return B
    raise RuntimeError("minimal entry not liftable to diagonal")


def _elementary(F, n, r, c, u):
    """Identity + u E_{rc}, given as a list of rows."""
    X = [[EElem.from_rational(F, 1 if jj == kk else 0) for kk in range(n)] for jj in range(n)]
    X[r][c] = X[r][c] + u
    return X


def _split_off_diag(A: HermitianMatrix, k0):
    F = A.F
    piv = A.a[k0][k0]
    idx = [k for k in range(A.n) if k != k0]
    rows = [[A.a[i][j] - A.a[i][k0] * A.a[k0][j] / piv for j in idx] for i in idx]
    return HermitianMatrix(F, rows)


def _split_off_plane(A: HermitianMatrix, i0, j0):
    F = A.F
    a, b = A.a[i0][i0], A.a[i0][j0]
    c, d = A.a[j0][i0], A.a[j0][j0]
    det = a * d - b * c
    inv = [[d / det, (-b) / det], [(-c) / det, a / det]]
    idx = [k for k in range(A.n) if k not in (i0, j0)]
    rows = []
    for i in idx:
        row = []
        for j in idx:
            s = (A.a[i][i0] * inv[0][0] + A.a[i][j0] * inv[1][0]) * A.a[i0][j]
            s = s + (A.a[i][i0] * inv[0][1] + A.a[i][j0] * inv[1][1]) * A.a[j0][j]
            row.append(A.a[i][j] - s)
        rows.append(row)
    return HermitianMatrix(F, rows)


def _smith_scales(M, p):
    """Smith exponents of a nondegenerate matrix over Z_p (exact rationals)."""
    M = [row[:] for row in M]
    scales = []
    while M:
        best = None
        for i in range(len(M)):
            for j in range(len(M)):
                v = ord_p(M[i][j], p)
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        v, i0, j0 = best
        scales.append(v)
        piv = M[i0][j0]
        rows = [i for i in range(len(M)) if i != i0]
        cols = [j for j in range(len(M)) if j != j0]
        M = [[M[i][j] - M[i][j0] * M[i0][j] / piv for j in cols] for i in rows]
    return sorted(scales)


def enumerate_classes(F: LocalFieldSpec, n: int, max_det_ord: int, star=False, min_det_ord=None):
    """Classes of nondegenerate semi-integral matrices with ord det <= max_det_ord.

    star=True restricts to Her_{n,*}: unramified scales >= 1; ramified lines
    stay >= 0 but Theta scales >= 1 (integral entries).  Returns a list of
    (ClassDescriptor, representative) sorted by det_ord then key.
    """
    if n > 3:
        raise ValueError("class enumeration supports n <= 3")
    out = []
    seen = set()
    if F.splitting != RAMIFIED:
        lo = 1 if star else 0
        for scales in combinations_with_replacement(range(lo, max(max_det_ord, lo) + 1), n):
            if sum(scales) <= max_det_ord:
                d = ClassDescriptor(F, tuple((a, 1) for a in scales), ())
                if d.key() not in seen:
                    seen.add(d.key())
                    out.append((d, d.representative()))
    else:
        theta_lo = 1 if star else 0
        cap = max_det_ord + 2
        for n_th in range(0, n // 2 + 1):
            n_li = n - 2 * n_th
            line_opts = [(a, d) for a in range(0, cap + 1) for d in (1, -1)]
            for lines in combinations_with_replacement(line_opts, n_li):
                for ths in combinations_with_replacement(range(theta_lo, cap + 1), n_th):
                    det_o = sum(a for a, _ in lines) + sum(2 * b - 1 for b in ths)
                    if det_o > max_det_ord:
                        continue
                    d = ClassDescriptor(F, canonical_lines(F, lines), tuple(sorted(ths)))
                    if d.key() in seen:
                        continue
                    seen.add(d.key())
                    out.append((d, d.representative()))
    if min_det_ord is not None:
        out = [x for x in out if x[0].det_ord >= min_det_ord]
    out.sort(key=lambda x: (x[0].det_ord, x[0].key()))
    return out


# -- brute force orbit partition on residue rings (validation only) ----------

class HermBox:
    """Semi-integral Hermitian matrices modulo the p^e congruence lattice,
    with the GL_n(O_E/p^e) gram action."""

    def __init__(self, F: LocalFieldSpec, n: int, e: int):
        self.F, self.n, self.e = F, n, e
        self.m = F.p ** e

    def elements(self):
        m, n = self.m, self.n
        for dv in product(range(m), repeat=n):
            for ov in product(product(range(m), repeat=2), repeat=n * (n - 1) // 2):
                yield (dv, ov)

    def to_matrix(self, el) -> HermitianMatrix:
        F, n = self.F, self.n
        dv, ov = el
        scale = EElem.pi_E(F).inverse() if F.f_exp else EElem.from_rational(F, 1)
        z = EElem.from_rational(F, 0)
        rows = [[z] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = EElem.from_rational(F, dv[i])
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                w = EElem(F, ov[k][0], ov[k][1]) * scale
                rows[i][j] = w
                rows[j][i] = w.conj()
                k += 1
        return HermitianMatrix(F, rows)

    def reduce(self, A: HermitianMatrix):
        F, n, m = self.F, self.n, self.m
        scale = EElem.pi_E(F) if F.f_exp else EElem.from_rational(F, 1)
        dv = []
        for i in range(n):
            x = A.a[i][i].rational()
            assert x.denominator == 1
            dv.append(int(x) % m)
        ov = []
        for i in range(n):
            for j in range(i + 1, n):
                w = A.a[i][j] * scale
                assert w.a.denominator == 1 and w.b.denominator == 1
                ov.append((int(w.a) % m, int(w.b) % m))
        return (tuple(dv), tuple(ov))

    def unit_generators(self):
        """Units of O_E/p^e verified (by closure) to generate the unit group."""
        F, m = self.F, self.m

        def is_unit(a, b):
            if F.splitting == SPLIT:
                return a % F.p != 0 and b % F.p != 0
            return EElem(F, a, b).norm().numerator % F.p != 0

        def mulmod(x, y):
            z = EElem(F, x[0], x[1]) * EElem(F, y[0], y[1])
            return (int(z.a) % m, int(z.b) % m)

        all_units = [(a, b) for a in range(m) for b in range(m) if is_unit(a, b)]
        target = len(all_units)
        one = (1 % m, 1 % m) if F.splitting == SPLIT else (1 % m, 0)
        gens = []
        closure = {one}
        for cand in all_units:
            if cand in closure:
                continue
            gens.append(cand)
            closure = {one}
            frontier = [one]
            while frontier:
                x = frontier.pop()
                for g in gens:
                    y = mulmod(x, g)
                    if y not in closure:
                        closure.add(y)
                        frontier.append(y)
            if len(closure) == target:
                break
        assert len(closure) == target, "unit closure incomplete"
        return gens

    def gram_generators(self):
        F, n = self.F, self.n
        gens = []
        for r in range(n):
            for c in range(n):
                if r == c:
                    continue
                for u in _trace_basis(F):
                    gens.append(_elementary(F, n, r, c, u))
        for (a, b) in self.unit_generators():
            X = _elementary(F, n, 0, 0, EElem.from_rational(F, 0))
            X[0][0] = EElem(F, a, b)
            gens.append(X)
        return gens

    def orbit_partition(self, nondegenerate=True):
        gens = self.gram_generators()
        index = {}
        mats = []
        for el in self.elements():
            A = self.to_matrix(el)
            if nondegenerate and not A.det():
                continue
            index[el] = len(mats)
            mats.append((el, A))
        parent = list(range(len(mats)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for el, A in mats:
            i0 = find(index[el])
            for X in gens:
                key = self.reduce(A.gram(X))
                j0 = index.get(key)
                if j0 is not None:
                    j0 = find(j0)
                    if j0 != i0:
                        parent[j0] = i0
        orbits = {}
        for el, _ in mats:
            orbits.setdefault(find(index[el]), []).append(el)
        return list(orbits.values()), index, mats
