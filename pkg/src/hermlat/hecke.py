"""Coset spaces K_n^0 \\ Mat_n(O_E)^nd, double cosets D_{r,i}, Mobius weights.

Left cosets are represented by upper triangular matrices with pi_E-power
diagonal and the row i entries reduced modulo the row pivot; right cosets by
the conjugate-transpose convention.  Split fields carry pairs of GL_n(O)
cosets with summed valuations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .fields import EElem, LocalFieldSpec, SPLIT
from .hermitian import HermitianMatrix, _smith_scales


@dataclass
class CosetRep:
    """One left (or right) coset of K_n^0 in Mat_n(O_E)^nd.

    mat: list of rows over E.  det_ord_e: ord_E(det W).  nu: ord_v(N(det W)),
    the exponent used by all t-series.  smith: elementary divisor exponents
    over O_E (split: pair of tuples).
    """

    field: LocalFieldSpec
    mat: list
    det_ord_e: int
    nu: int
    smith: tuple

    def double_coset_pair(self):
        """Component divisor types: i (non-split) or (i1, i2) (split), with a
        None entry when the component divisors leave {0, 1}."""
        sm = self.smith

        def ty(s):
            return sum(s) if all(x in (0, 1) for x in s) else None

        if self.field.splitting == SPLIT:
            return (ty(sm[0]), ty(sm[1]))
        return ty(sm)

    def double_coset_type(self):
        """i when the divisors are (1^{r-i}, pi^i) (split: in both components
        with the same i); None otherwise."""
        t = self.double_coset_pair()
        if self.field.splitting == SPLIT:
            return t[0] if t[0] is not None and t[0] == t[1] else None
        return t

    def m_weight(self) -> Fraction:
        """Mobius weight: (-1)^i q_E^{i(i-1)/2} on D_{r,i}; split fields carry
        the product of the per-component weights (independent types), which is
        what the inversion identities force."""
        t = self.double_coset_pair()
        if self.field.splitting == SPLIT:
            i1, i2 = t
            if i1 is None or i2 is None:
                return Fraction(0)
            q = self.field.q_E
            return Fraction((-1) ** (i1 + i2)) * Fraction(q) ** ((i1 * (i1 - 1) + i2 * (i2 - 1)) // 2)
        if t is None:
            return Fraction(0)
        return Fraction((-1) ** t) * Fraction(self.field.q_E) ** (t * (t - 1) // 2)


class _NonSplitCosets:
    """Left-coset reps for inert/ramified: upper triangular, diag pi_E^{a_i},
    entry (i,j), i<j, running over O_E mod pi_E^{a_j} (the column pivot)."""

    def __init__(self, F, n, max_e):
        self.F, self.n, self.max_e = F, n, max_e

    def __iter__(self):
        F, n = self.F, self.n
        piE = EElem.pi_E(F)
        zero = EElem.from_rational(F, 0)
        for diag in product(range(self.max_e + 1), repeat=n):
            if sum(diag) > self.max_e:
                continue
            entry_sets = []
            pos = []
            for i in range(n):
                for j in range(i + 1, n):
                    entry_sets.append(_residues(F, diag[j]))
                    pos.append((i, j))
            for combo in product(*entry_sets):
                rows = [[zero for _ in range(n)] for _ in range(n)]
                for i in range(n):
                    rows[i][i] = piE ** diag[i]
                for (i, j), v in zip(pos, combo):
                    rows[i][j] = v
                yield rows, sum(diag)


def _residues(F, a):
    """Representatives of O_E / pi_E^a O_E."""
    p = F.p
    if F.splitting == SPLIT:
        raise RuntimeError("internal")
    if F.splitting == "inert":
        m = p ** a
        return [EElem(F, x, y) for x in range(m) for y in range(m)]
    # ramified: O_E/pi_E^a: a = 2k + r: representatives x + y w, x mod p^{ceil(a/2)}, y mod p^{floor(a/2)}
    kx = (a + 1) // 2
    ky = a // 2
    return [EElem(F, x, y) for x in range(p ** kx) for y in range(p ** ky)]


def enumerate_cosets(F: LocalFieldSpec, n: int, max_ord: int, side="left"):
    """Complete duplicate-free left (or right) coset reps with nu <= max_ord.

    nu = ord_v N(det W): inert 2*ord_E, split sum of the two component
    valuations, ramified ord_E.
    """
    if n > 3:
        raise ValueError("coset enumeration supports n <= 3")
    out = []
    if F.splitting == SPLIT:
        singles = list(_SplitComponentCosets(F, n, max_ord))
        for (rows1, d1) in singles:
            for (rows2, d2) in singles:
                if d1 + d2 > max_ord:
                    continue
                rows = [[EElem(F, rows1[i][j], rows2[i][j]) for j in range(n)] for i in range(n)]
                sm1 = tuple(_smith_scales([[Fraction(rows1[i][j]) for j in range(n)] for i in range(n)], F.p))
                sm2 = tuple(_smith_scales([[Fraction(rows2[i][j]) for j in range(n)] for i in range(n)], F.p))
                rep = CosetRep(F, rows, min(d1, d2), d1 + d2, (sm1, sm2))
                out.append(rep)
    else:
        mult = 2 if F.splitting == "inert" else 1
        max_e = max_ord // mult
        for rows, de in _NonSplitCosets(F, n, max_e):
            sm = tuple(_smith_e(F, rows))
            rep = CosetRep(F, rows, de, mult * de, sm)
            out.append(rep)
    if side == "right":
        out = [CosetRep(r.field, _conj_transpose(F, r.mat), r.det_ord_e, r.nu, r.smith) for r in out]
    return out


class _SplitComponentCosets:
    """Upper triangular reps over Z_p with integer entries mod p^{a_i}."""

    def __init__(self, F, n, max_e):
        self.F, self.n, self.max_e = F, n, max_e

    def __iter__(self):
        p, n = self.F.p, self.n
        for diag in product(range(self.max_e + 1), repeat=n):
            if sum(diag) > self.max_e:
                continue
            entry_sets = []
            pos = []
            for i in range(n):
                for j in range(i + 1, n):
                    entry_sets.append(range(p ** diag[j]))
                    pos.append((i, j))
            for combo in product(*entry_sets):
                rows = [[0] * n for _ in range(n)]
                for i in range(n):
                    rows[i][i] = p ** diag[i]
                for (i, j), v in zip(pos, combo):
                    rows[i][j] = v
                yield rows, sum(diag)


def _conj_transpose(F, rows):
    n = len(rows)
    return [[rows[j][i].conj() for j in range(n)] for i in range(n)]


def _smith_e(F, rows):
    """ord_E elementary divisors of an exact matrix over O_E (non-split)."""
    n = len(rows)
    M = [row[:] for row in rows]
    scales = []
    while M:
        best = None
        k = len(M)
        for i in range(k):
            for j in range(k):
                v = M[i][j].ord_E()
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        v, i0, j0 = best
        scales.append(v)
        piv = M[i0][j0]
        rows_idx = [i for i in range(k) if i != i0]
        cols_idx = [j for j in range(k) if j != j0]
        M = [[M[i][j] - M[i][j0] * M[i0][j] / piv for j in cols_idx] for i in rows_idx]
    return sorted(scales)


def matrix_inverse(F, rows):
    """Exact inverse over E of a nondegenerate matrix (n <= 3)."""
    n = len(rows)
    one = EElem.from_rational(F, 1)
    zero = EElem.from_rational(F, 0)
    M = [row[:] + [one if i == j else zero for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if M[r][col]:
                piv = r
                break
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [x / pv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def gram_by_coset(A: HermitianMatrix, W: CosetRep, inverse=True) -> HermitianMatrix:
    """A[W^{-1}] (inverse=True) or A[W]."""
    X = matrix_inverse(A.F, W.mat) if inverse else W.mat
    return A.gram(X)


def cosets_in_D(F, r, i, side="left"):
    """Coset reps inside the double coset D_{r,i} (divisors (1^{r-i}, pi^i),
    split: both components of type i)."""
    mult = 2 if F.splitting == "inert" else 1
    max_ord = i * mult if F.splitting != SPLIT else 2 * i
    reps = enumerate_cosets(F, r, max_ord, side=side)
    return [w for w in reps if w.double_coset_type() == i]


def mobius_cosets(F, r, side="left"):
    """All cosets with nonzero Mobius weight (the support of every inversion
    sum): non-split D_{r,i}, split independent component types."""
    mult = 2 if F.splitting == "inert" else 1
    max_ord = r * mult if F.splitting != SPLIT else 2 * r
    reps = enumerate_cosets(F, r, max_ord, side=side)
    return [w for w in reps if w.m_weight()]


def verify_mobius(F, n, phi, max_ord, n_samples=6):
    """Check sum_W m(W) phi~(X W^{-1}) = phi(X) at sampled X, for phi a
    right-K-invariant function given as a callable on exact matrices.

    If X W^{-1} is integral then nu(W) <= nu(X), so every inner sum is finite
    once cosets are enumerated up to nu(X); max_ord caps the sampled depth.
    """
    ws = enumerate_cosets(F, n, max_ord)
    inv = [matrix_inverse(F, w.mat) for w in ws]
    dws = [(w, matrix_inverse(F, w.mat)) for w in ws if w.m_weight()]

    def phi_tilde(Xrows):
        tot = Fraction(0)
        for w, wi in zip(ws, inv):
            Y = _mat_mul(F, Xrows, wi)
            if _is_integral(F, Y):
                tot += phi(Y)
        return tot

    # spread samples across depths
    by_nu = {}
    for w in ws:
        by_nu.setdefault(w.nu, []).append(w)
    samples = []
    for nu in sorted(by_nu):
        samples.append(by_nu[nu][0].mat)
        if len(by_nu[nu]) > 2:
            samples.append(by_nu[nu][len(by_nu[nu]) // 2].mat)
    samples = samples[:n_samples]

    results = []
    for X in samples:
        lhs = Fraction(0)
        for w, wi in dws:
            Y = _mat_mul(F, X, wi)
            if _is_integral(F, Y):
                lhs += w.m_weight() * phi_tilde(Y)
        results.append((lhs, phi(X)))
    return results


def _mat_mul(F, A, B):
    n = len(A)
    zero = EElem.from_rational(F, 0)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), zero) for j in range(n)] for i in range(n)]


def _is_integral(F, rows):
    for row in rows:
        for x in row:
            if not x.is_integral():
                return False
    return True


def smith_type_of(F, rows):
    if F.splitting == SPLIT:
        n = len(rows)
        M1 = [[rows[i][j].a for j in range(n)] for i in range(n)]
        M2 = [[rows[i][j].b for j in range(n)] for i in range(n)]
        return (tuple(_smith_scales(M1, F.p)), tuple(_smith_scales(M2, F.p)))
    return tuple(_smith_e(F, rows))
