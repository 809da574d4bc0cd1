"""Semi-integrality, Theta, Gram transforms, classification and enumeration."""

from fractions import Fraction

import pytest

from hermlat.fields import EElem, make_field
from hermlat.hermitian import (
    ClassDescriptor, HermBox, HermitianMatrix, classify, enumerate_classes,
    theta, theta_block,
)

I3 = make_field(3, "inert")
S2 = make_field(2, "split")
R3 = make_field(3, "ramified", 1)


def test_semi_integral_examples():
    A = HermitianMatrix.diagonal(I3, [1, 3])
    assert A.is_semi_integral()
    w = EElem(I3, Fraction(1, 3), 0)
    B = HermitianMatrix(I3, [[EElem.from_rational(I3, 1), w], [w.conj(), EElem.from_rational(I3, 1)]])
    assert not B.is_semi_integral()
    assert theta(R3, 2).is_semi_integral()


def test_theta():
    assert theta(I3, 3) == HermitianMatrix.identity(I3, 3)
    assert theta(S2, 2) == HermitianMatrix.identity(S2, 2)
    th = theta(R3, 2)
    assert th.a[0][1] == EElem.pi_E(R3).inverse()
    assert th.det_ord() == -1
    with pytest.raises(ValueError):
        theta(R3, 3)


def test_gram_examples():
    A = HermitianMatrix.identity(I3, 2)
    X = [[EElem.pi_E(I3), EElem.from_rational(I3, 0)],
         [EElem.from_rational(I3, 0), EElem.from_rational(I3, 1)]]
    B = A.gram(X)
    assert B == HermitianMatrix.diagonal(I3, [9, 1])  # pi_E = 3 inert: N(3) = 9
    # split rank 1: X = (2,1) gives N((2,1)) = 2 acting on the F-side as (2,2)
    A1 = HermitianMatrix.identity(S2, 1)
    X1 = [[EElem(S2, 2, 1)]]
    assert A1.gram(X1) == HermitianMatrix.diagonal(S2, [EElem(S2, 2, 2)])


def test_epsilon_invariant():
    A = HermitianMatrix.diagonal(I3, [1, 1, 3])
    assert A.epsilon() == -1
    assert HermitianMatrix.diagonal(S2, [5]).epsilon() == 1
    th = theta(R3, 2)
    assert th.epsilon() == R3.norm_class(th.det().rational())


def test_classify_diagonal_unramified():
    A = HermitianMatrix.diagonal(I3, [9, 1, 3])
    d = classify(A)
    assert [a for a, _ in d.lines] == [0, 1, 2]
    assert d.det_ord == 3 and d.thetas == ()


def test_classify_split_smith():
    A = HermitianMatrix(S2, [[EElem(S2, 2, 2), EElem(S2, 1, 0)],
                             [EElem(S2, 0, 1), EElem(S2, 2, 2)]])
    # M = [[2,1],[0,2]]: Smith scales (0, 2)
    d = classify(A)
    assert [a for a, _ in d.lines] == [0, 2]


def test_classify_theta_and_gram_invariance():
    th = theta_block(R3, 0)
    d = classify(th)
    assert d.thetas == (0,) and d.lines == ()
    # gram twists do not change the class
    u = EElem(R3, 1, 1)
    X = [[EElem.from_rational(R3, 1), u], [EElem.from_rational(R3, 0), EElem.from_rational(R3, 1)]]
    assert classify(th.gram(X)).key() == d.key()
    big = HermitianMatrix.block_diag([th, HermitianMatrix.diagonal(R3, [2])])
    d2 = classify(big)
    assert d2.thetas == (0,) and len(d2.lines) == 1


def test_classify_matches_descriptor_representatives():
    for F in (I3, S2, R3):
        for d, rep in enumerate_classes(F, 2, 3):
            assert classify(rep).key() == d.key()
            assert d.det_ord == rep.det_ord()


def test_enumerate_counts():
    # inert n=2 up to det ord 1: diag(1,1), diag(1,3)
    assert len(enumerate_classes(I3, 2, 1)) == 2
    # split n=1 up to ord 2: (1),(2),(4)
    assert len(enumerate_classes(S2, 1, 2)) == 3
    # ramified n=2 with Theta present exactly once
    cls = enumerate_classes(R3, 2, 1)
    thetas = [d for d, _ in cls if d.thetas]
    assert any(d.thetas == (0,) for d in thetas)


@pytest.mark.parametrize("F,n,e,maxdet", [
    (I3, 2, 2, 1),
    (S2, 2, 2, 1),
    (make_field(2, "inert"), 2, 2, 1),
])
def test_orbit_partition_matches_enumeration(F, n, e, maxdet):
    """Every orbit of the brute-force partition with small det ord maps to
    exactly one enumerated descriptor, and all descriptors appear."""
    box = HermBox(F, n, e)
    orbits, index, mats = box.orbit_partition()
    seen = {}
    for orb in orbits:
        A = box.to_matrix(orb[0])
        dord = A.det_ord()
        if dord is None or dord > maxdet:
            continue
        d = classify(A)
        key = d.key()
        # one orbit per descriptor, consistent across members
        for el in orb[:20]:
            assert classify(box.to_matrix(el)).key() == key
        assert key not in seen, "two orbits with one descriptor"
        seen[key] = len(orb)
    enum_keys = {d.key() for d, _ in enumerate_classes(F, n, maxdet)}
    assert enum_keys == set(seen)


def test_orbit_partition_ramified_theta_distinct():
    box = HermBox(R3, 2, 2)
    orbits, index, mats = box.orbit_partition()
    keys = {}
    for orb in orbits:
        A = box.to_matrix(orb[0])
        if A.det_ord() is None or A.det_ord() > 0:
            continue
        keys.setdefault(classify(A).key(), 0)
        keys[classify(A).key()] += 1
    th_key = classify(theta_block(R3, 0)).key()
    assert keys.get(th_key) == 1
    # Theta_2 inequivalent to any diagonal of equal det ord (no diagonal has det ord -1)
    assert all(k == th_key or ClassDescriptor(R3, k[3], k[4]).det_ord != -1 for k in keys)


def test_gram_preserves_invariants_random():
    import random

    rng = random.Random(7)
    for F in (I3, S2, R3):
        for d, rep in enumerate_classes(F, 2, 2):
            n = rep.n
            X = [[EElem(F, rng.randrange(9), rng.randrange(9)) for _ in range(n)] for _ in range(n)]
            B = rep.gram(X)
            det = B.det()
            if not det:
                continue
            if B.det_ord() == rep.det_ord():  # unimodular transform
                assert B.is_semi_integral()
                assert classify(B).key() == d.key()
