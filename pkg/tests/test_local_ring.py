"""Ring axioms, involutions and norm classes over O_E / p^e, checked exhaustively."""

from fractions import Fraction

import pytest

from hermlat.fields import EElem, ResidueRing, make_field, ord_p
from hermlat.qext import QExt, legendre, reduce_root_sum

FIELDS = [
    make_field(2, "inert"),
    make_field(3, "inert"),
    make_field(5, "inert"),
    make_field(2, "split"),
    make_field(3, "split"),
    make_field(5, "split"),
    make_field(3, "ramified", 1),
    make_field(3, "ramified", 2),
    make_field(5, "ramified", 1),
]


def test_make_field_invariants():
    F = make_field(3, "inert")
    assert (F.xi, F.q, F.q_E, F.f_exp) == (-1, 3, 9, 0)
    F = make_field(2, "split")
    assert (F.xi, F.q, F.q_E) == (1, 2, 2)
    F = make_field(3, "ramified", 1)
    assert (F.xi, F.f_exp, F.q_E) == (0, 1, 3)
    with pytest.raises(ValueError):
        make_field(4, "inert")
    with pytest.raises(ValueError):
        make_field(2, "ramified")


@pytest.mark.parametrize("F", FIELDS, ids=str)
def test_conj_norm_trace_exhaustive(F):
    if F.splitting == "ramified" and F.p == 2:
        return
    R = ResidueRing(F, 2)
    m = R.m
    for x in R.elements():
        cc = R.conj(R.conj(x))
        assert cc == x
        lx = R.lift(x)
        n = lx.norm()
        t = lx.trace()
        assert n.denominator == 1 and t.denominator == 1
        assert R.trace(x) == R.trace(R.conj(x))
    # multiplicativity of the norm on a subgrid
    pts = [(a, b) for a in range(0, m, max(1, m // 4)) for b in range(0, m, max(1, m // 4))]
    for x in pts:
        for y in pts:
            assert (R.lift(x) * R.lift(y)).norm() == R.lift(x).norm() * R.lift(y).norm()


@pytest.mark.parametrize("F", FIELDS, ids=str)
def test_ord_additivity(F):
    R = ResidueRing(F, 3)
    xs = [EElem(F, 1, 0), EElem(F, F.p, 0), EElem.pi_E(F), EElem(F, 1, 1), EElem(F, 0, 1)]
    for x in xs:
        for y in xs:
            vx, vy = x.ord_E(), y.ord_E()
            if vx is None or vy is None:
                continue
            if F.splitting == "split":
                continue  # ord is min of components, additive only componentwise
            assert (x * y).ord_E() == vx + vy


def test_ord_examples():
    assert EElem(make_field(3, "inert"), 3, 0).ord_E() == 1
    assert EElem(make_field(2, "split"), 4, 1).ord_E() == 0
    assert EElem(make_field(3, "ramified"), 3, 0).ord_E() == 2
    assert EElem.pi_E(make_field(3, "ramified")).ord_E() == 1


def _norms_mod(F, e):
    R = ResidueRing(F, e)
    return {R.norm(x) for x in R.elements()}


@pytest.mark.parametrize("F", FIELDS, ids=str)
def test_norm_class_against_enumeration(F):
    e = 2
    m = F.p ** e
    norms = _norms_mod(F, e)
    unit_norms = {n % F.p ** e for n in norms if n % F.p != 0}
    for x in range(1, m):
        if x % F.p == 0:
            continue
        claimed = F.norm_class(Fraction(x))
        seen = x % m in unit_norms
        assert (claimed == 1) == seen, (F, x)


def test_norm_class_special_values():
    F = make_field(3, "inert")
    assert F.norm_class(Fraction(3)) == -1
    assert F.norm_class(Fraction(9)) == 1
    assert make_field(2, "split").norm_class(Fraction(2)) == 1
    F = make_field(3, "ramified", 1)  # E = Q_3(sqrt(3))
    assert F.norm_class(Fraction(-1)) == legendre(-1, 3) == -1
    # pi_F = N(pi_E) must be a norm
    assert F.norm_class(F.pi_F) == 1


@pytest.mark.parametrize("F", FIELDS, ids=str)
def test_norm_class_is_multiplicative(F):
    vals = [Fraction(1), Fraction(2), Fraction(F.p), Fraction(1, F.p), Fraction(-1), Fraction(F.p + 1)]
    for x in vals:
        for y in vals:
            assert F.norm_class(x * y) == F.norm_class(x) * F.norm_class(y)


def test_qext_and_root_sums():
    i = QExt(0, 1, -1)
    assert i * i == QExt(-1)
    assert (QExt(1, 1, -1) ** 4) == QExt(-4)
    # Ramanujan sums: sum over primitive residues mod 9 of zeta^r = 0
    counts = {r: 1 for r in range(9) if r % 3 != 0}
    assert reduce_root_sum(counts, 3, 2) == QExt(0)
    counts = {r: 1 for r in range(1, 3)}
    assert reduce_root_sum(counts, 3, 1) == QExt(-1)
    # quadratic Gauss sum mod 3: sum (r|3) zeta^r = i sqrt(3)
    counts = {1: 1, 2: 0}
    v = reduce_root_sum(counts, 3, 1)
    c = v.to_complex()
    assert abs(c - (-0.5 + 0.5 * 3 ** 0.5 * 1j)) < 1e-12


def test_ord_p():
    assert ord_p(Fraction(18), 3) == 2
    assert ord_p(Fraction(1, 9), 3) == -2
    assert ord_p(Fraction(0), 3) is None
