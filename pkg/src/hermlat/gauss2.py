"""Vectorized evaluation of the n = 2 character-box sum.

Same value as charsums.alpha_gauss_n2_at, but the Y box is classified with
integer numpy arrays and only the handful of distinct (class, psi-exponent)
cells are assembled exactly.  Key facts making this small: the line sums
S(c, e) depend on c only through its denominator depth j (inert, split) plus
the Legendre class of its unit part (ramified), and Legendre classes multiply,
so no modular inversions are needed.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .fields import LocalFieldSpec, RAMIFIED, SPLIT
from .hermitian import HermitianMatrix
from .qext import QExt, legendre, least_nonresidue
from .charsums import (PsiAccumulator, norm_table, block_T, blocks_rank,
                       BudgetExceeded, DEFAULT_BUDGET, _U_plane)
from .fields import EElem


def _ordp_array(x, p, cap):
    """Entrywise p-valuation of |x|, capped; zeros get cap."""
    x = np.abs(x)
    v = np.zeros(x.shape, dtype=np.int64)
    rem = x.copy()
    for _ in range(cap):
        m = (rem != 0) & (rem % p == 0)
        if not m.any():
            break
        v[m] += 1
        rem[m] //= p
    v[x == 0] = cap
    return v, rem  # rem = unit part (or 0)


def alpha_gauss_n2_fast(F: LocalFieldSpec, blocks, B: HermitianMatrix, e: int,
                        budget=DEFAULT_BUDGET) -> Fraction:
    p = F.p
    pe = p ** e
    if pe ** 4 > budget:
        raise BudgetExceeded("n=2 character box %d exceeds budget" % pe ** 4)
    if F.splitting == SPLIT:
        return _fast_split(F, blocks, B, e)
    return _fast_nonsplit(F, blocks, B, e)


def _line_value(F, j, s):
    """A representative Fraction with denominator depth j and unit class s."""
    if j <= 0:
        return Fraction(0)
    u = 1
    if F.splitting == RAMIFIED and s == -1:
        u = least_nonresidue(F.p)
    return Fraction(u, F.p ** j)


def _key_product(F, table, blocks, e, j1, s1, j2, s2) -> QExt:
    out = QExt(1)
    for c in (_line_value(F, j1, s1), _line_value(F, j2, s2)):
        for blk in blocks:
            out = out * block_T(F, table, blk, c, e)
            if not out:
                return out
    return out


def _theta_key_value(F, blocks, vwE_box, e) -> QExt:
    # the actual Y-entry has ord_E = vwE_box - 2e (odd); delta = pi_E to that order
    v = vwE_box - 2 * e
    k = (v - 1) // 2
    return _U_plane(F, blocks, EElem(F, 0, Fraction(F.p) ** k), e)


def _fast_nonsplit(F, blocks, B, e):
    p = F.p
    pe = p ** e
    ram = F.splitting == RAMIFIED
    f = F.f_exp
    k_psi = e + f
    Mpsi = p ** k_psi
    table = norm_table(F)
    m = blocks_rank(blocks)
    cap = 4 * e + 4

    # structure constants: w^2 = s + t w; trace(x) = 2 xa + t xb; N = xa^2 + t xa xb - s xb^2
    s_c, t_c = int(F.w_sq[0]), int(F.w_sq[1])

    # B-entry integers scaled by p^f on the off-diagonal coordinate lattice
    B11 = B.a[0][0].rational()
    B22 = B.a[1][1].rational()
    B12 = B.a[0][1]
    # psi exponent of -tr(YB) over modulus p^{e+f}: r = -(a*B11 + d*B22 + tr(w-bar B12)) * M / p^e
    # with w = (wa + wb w)/p^e.  tr(w-bar B12) = linear in (wa, wb):
    # w-bar = (wa + t wb) - wb w;  tr(z) = 2 za + t zb
    Ba, Bb = B12.a, B12.b
    coef_wa = 2 * Ba + t_c * Bb
    coef_wb = t_c * Ba - 2 * s_c * Bb
    # all of B11, B22, coef_* are rationals with denominator dividing p^f
    scaleM = Fraction(Mpsi, pe)
    c_a = B11 * scaleM
    c_d = B22 * scaleM
    c_wa = coef_wa * scaleM
    c_wb = coef_wb * scaleM
    for v in (c_a, c_d, c_wa, c_wb):
        if Fraction(v).denominator != 1:
            raise ValueError("psi modulus too small for target entries")
    c_a, c_d, c_wa, c_wb = int(c_a), int(c_d), int(c_wa), int(c_wb)

    wa = np.repeat(np.arange(pe, dtype=np.int64), pe)
    wb = np.tile(np.arange(pe, dtype=np.int64), pe)
    Nw = wa * wa + t_c * wa * wb - s_c * wb * wb
    vwa, _ = _ordp_array(wa, p, cap)
    vwb, _ = _ordp_array(wb, p, cap)
    if ram:
        vwE = np.minimum(2 * vwa, 2 * vwb + 1)
    else:
        vwE = np.minimum(vwa, vwb)
    re = F.ram_e

    # precompute lift constants for u in {1, w}: cand = a + tr(u-bar w) + N(u) d
    # tr(u-bar w) for u = 1: tr(w-bar)? no: formula uses u-bar * w: tr(u-bar w)
    lifts = []
    for u in (EElem(F, 1, 0), EElem(F, 0, 1)):
        # tr(u-bar * (wa + wb w)) = wa * tr(u-bar) + wb * tr(u-bar w)
        tu = u.conj()
        A1 = tu.trace()
        A2 = (tu * EElem(F, 0, 1)).trace()
        lifts.append((int(A1), int(A2), int(u.norm())))

    acc = PsiAccumulator(p, k_psi)
    key_cache = {}
    keybase = 3 * (e + 1) * 3 * (e + 1) + 9
    count_table = np.zeros((keybase + 2 * e + 2) * Mpsi, dtype=np.int64)

    for a0 in range(pe):
        va = cap if a0 == 0 else _ordp_int(a0, p)
        for d0 in range(pe):
            vd = cap if d0 == 0 else _ordp_int(d0, p)
            det = a0 * d0 - Nw
            vdet, udet = _ordp_array(det, p, 4 * e + 4)
            diag_min = min(re * va, re * vd)
            # psi exponent array
            r = (-(c_a * a0 + c_d * d0 + c_wa * wa + c_wb * wb)) % Mpsi

            off_lt = vwE < diag_min
            theta_mask = off_lt & (vwE % 2 == 1) if ram else np.zeros(len(wa), dtype=bool)
            lift_mask = off_lt & ~theta_mask
            diag_mask = ~off_lt

            # diagonal pivot branch
            P = np.where(np.int64(va) <= np.int64(vd), a0, d0).astype(np.int64)
            Pv = np.where(np.int64(va) <= np.int64(vd), va, vd).astype(np.int64)
            P = np.broadcast_to(P, wa.shape).copy()
            Pv = np.broadcast_to(Pv, wa.shape).copy()

            if lift_mask.any():
                tgt = vwE[lift_mask] // re if not ram else vwE[lift_mask] // 2
                best = None
                cands = []
                for (A1, A2, Nu) in lifts:
                    cand = a0 + A1 * wa[lift_mask] + A2 * wb[lift_mask] + Nu * d0
                    vv, _u = _ordp_array(cand, p, cap)
                    cands.append((cand, vv))
                c0, v0 = cands[0]
                c1, v1 = cands[1]
                use0 = v0 <= tgt
                Pl = np.where(use0, c0, c1)
                Pvl = np.where(use0, v0, v1)
                if not (np.where(use0, v0, v1) <= tgt).all():
                    raise ArithmeticError("lift to diagonal failed")
                P[lift_mask] = Pl
                Pv[lift_mask] = Pvl

            # line keys: j1 from pivot, j2 from det/pivot
            uP = np.abs(P) // (p ** np.minimum(Pv, cap))
            signP = np.sign(P).astype(np.int64)
            j1 = np.maximum(0, e - Pv)
            j2 = np.where(det == 0, 0, np.maximum(0, e + Pv - vdet))
            live = ~theta_mask
            if ((j2 > e) & live).any() or ((j1 > e) & live).any():
                raise ArithmeticError("class depth exceeded the box")
            j1 = np.where(live, j1, 0)
            j2 = np.where(live, j2, 0)
            if ram:
                lp = _legendre_array((signP * uP) % p, p)
                ld = _legendre_array((np.sign(det).astype(np.int64) * udet) % p, p)
                s1 = lp
                s2 = lp * ld  # class of det/pivot = class(det) * class(pivot)
            else:
                s1 = np.zeros(len(wa), dtype=np.int64)
                s2 = s1
            j1 = np.where(j1 > 0, j1, 0)
            j2 = np.where(j2 > 0, j2, 0)
            s1 = np.where(j1 > 0, s1, 0)
            s2 = np.where(j2 > 0, s2, 0)

            # pack keys: lines occupy [0, keybase); theta planes sit above
            key = np.where(theta_mask,
                           keybase + vwE,
                           ((j1 * 3 + (s1 + 1)) * (3 * (e + 1)) + (j2 * 3 + (s2 + 1))))
            count_table += np.bincount(key * Mpsi + r, minlength=len(count_table))

    nz = np.nonzero(count_table)[0]
    for idx in nz.tolist():
        kk, rr = divmod(idx, Mpsi)
        if kk not in key_cache:
            if kk >= keybase:
                key_cache[kk] = _theta_key_value(F, blocks, int(kk - keybase), e)
            else:
                kj1, kj2 = divmod(kk, 3 * (e + 1))
                jj1, ss1 = divmod(kj1, 3)
                jj2, ss2 = divmod(kj2, 3)
                key_cache[kk] = _key_product(F, table, blocks, e, jj1, ss1 - 1, jj2, ss2 - 1)
        v = key_cache[kk]
        if v:
            acc.add(rr, v * int(count_table[idx]))
    total = acc.total()
    if not total.is_rational:
        raise ArithmeticError("irrational n=2 density")
    return total.rational() * Fraction(p) ** (-4 * m * e)


def _ordp_int(x, p):
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _legendre_array(x, p):
    x = x % p
    out = np.zeros(x.shape, dtype=np.int64)
    for u in range(1, p):
        out[x == u] = legendre(u, p)
    return out


def _fast_split(F, blocks, B, e):
    p = F.p
    pe = p ** e
    k_psi = e
    Mpsi = p ** k_psi
    table = norm_table(F)
    m = blocks_rank(blocks)
    cap = 4 * e + 4
    B11 = int(B.a[0][0].rational())
    B22 = int(B.a[1][1].rational())
    Ba, Bb = int(B.a[0][1].a), int(B.a[0][1].b)
    # tr(w-bar B12) = wb * Ba + wa * Bb  (w-bar = (wb, wa))
    wa = np.repeat(np.arange(pe, dtype=np.int64), pe)
    wb = np.tile(np.arange(pe, dtype=np.int64), pe)
    vwa, _ = _ordp_array(wa, p, cap)
    vwb, _ = _ordp_array(wb, p, cap)
    acc = PsiAccumulator(p, k_psi)
    key_cache = {}
    nkeys = (e + 1) * (e + 1) + 2
    count_table = np.zeros(nkeys * Mpsi, dtype=np.int64)
    for a0 in range(pe):
        va = cap if a0 == 0 else _ordp_int(a0, p)
        for d0 in range(pe):
            vd = cap if d0 == 0 else _ordp_int(d0, p)
            # M-matrix [[a, wa],[wb, d]]: Smith j1 = min ord entry, j2 via det
            det = a0 * d0 - wa * wb
            vdet, _ = _ordp_array(det, p, 4 * e + 4)
            vmin = np.minimum(np.minimum(vwa, vwb), min(va, vd))
            j1 = np.maximum(0, e - vmin)
            j2 = np.where(det == 0, 0, np.maximum(0, e - (vdet - vmin)))
            if (j2 > e).any():
                raise ArithmeticError("class depth exceeded the box")
            r = (-(a0 * B11 + d0 * B22 + wb * Ba + wa * Bb)) % Mpsi
            key = j1 * (e + 1) + j2
            count_table += np.bincount(key * Mpsi + r, minlength=len(count_table))
    nz = np.nonzero(count_table)[0]
    for idx in nz.tolist():
        kk, rr = divmod(idx, Mpsi)
        if kk not in key_cache:
            jj1, jj2 = divmod(kk, e + 1)
            key_cache[kk] = _key_product(F, table, blocks, e, jj1, 0, jj2, 0)
        v = key_cache[kk]
        if v:
            acc.add(rr, v * int(count_table[idx]))
    total = acc.total()
    if not total.is_rational:
        raise ArithmeticError("irrational split n=2 density")
    return total.rational() * Fraction(p) ** (-4 * m * e)
