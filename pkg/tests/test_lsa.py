from __future__ import annotations

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest

from conftest import rational_alphas
from flataffine.lsa import (
    AFF_LINE_BRACKET,
    CATALOG_NAMES,
    EXCEPTIONAL_NAMES,
    FAMILY_NAMES,
    LSA,
    InfinitesimalAffineRep,
    LieBracket,
    NotEtale,
    UnknownCatalogEntry,
    axiom_reports,
    bracket_of,
    catalog_lsa,
    infinitesimal_rep_from_lsa,
    is_associative,
    is_flat_compatible,
    is_left_symmetric,
    is_torsion_free_compatible,
    lsa_from_etale,
)
from flataffine.report import EXACT_ZERO

F = Fraction
ZERO2 = LSA(2, np.zeros((2, 2, 2), dtype=int))


def table(entries, name=""):
    """{(i, j): (coef e1, coef e2)} with 1-based keys."""
    c = [[[F(0)] * 2 for _ in range(2)] for _ in range(2)]
    for (i, j), v in entries.items():
        c[i - 1][j - 1] = [F(x) for x in v]
    return LSA(2, c, name)


def all_catalog(alphas=(F(-2), F(-1), F(1), F(2), F(3))):
    out = [catalog_lsa(n) for n in CATALOG_NAMES if n not in FAMILY_NAMES]
    out += [catalog_lsa(f, a) for f in FAMILY_NAMES for a in alphas]
    return out


# --- catalog tables ---------------------------------------------------------

def test_catalog_e1():
    assert catalog_lsa("E1") == table({(1, 1): (1, 1), (1, 2): (0, 1)})


def test_catalog_f2_at_minus_one():
    assert catalog_lsa("F2", -1) == table({(1, 1): (-1, 0), (2, 1): (0, -1)})


def test_catalog_e3_e4():
    assert catalog_lsa("E3") == table({(1, 1): (2, 0), (1, 2): (0, 1), (2, 2): (1, 0)})
    assert catalog_lsa("E4") == table({(1, 1): (2, 0), (1, 2): (0, 1), (2, 2): (-1, 0)})


def test_catalog_planar_entries():
    assert catalog_lsa("P1") == ZERO2
    assert catalog_lsa("P2") == table({(2, 2): (1, 0)})
    assert catalog_lsa("P3") == table({(2, 2): (0, 1)})
    assert catalog_lsa("P4") == table({(1, 1): (1, 0), (1, 2): (0, 1), (2, 1): (0, 1)})
    assert catalog_lsa("P5") == table({(1, 1): (1, 0), (2, 2): (0, 1)})
    # complex multiplication: e1 = 1, e2 = i
    assert catalog_lsa("P6") == table({(1, 1): (1, 0), (1, 2): (0, 1), (2, 1): (0, 1), (2, 2): (-1, 0)})


def test_catalog_errors():
    with pytest.raises(UnknownCatalogEntry):
        catalog_lsa("E9")
    with pytest.raises(ValueError):
        catalog_lsa("F2", 0)
    with pytest.raises(ValueError):
        catalog_lsa("F1")


def test_catalog_size():
    assert len(CATALOG_NAMES) == 12


# --- bracket ---------------------------------------------------------------

def test_bracket_examples():
    assert bracket_of(ZERO2) == LieBracket(2, np.zeros((2, 2, 2), dtype=int))
    assert bracket_of(catalog_lsa("F1", F(5, 3))) == AFF_LINE_BRACKET
    assert bracket_of(catalog_lsa("E3")) == AFF_LINE_BRACKET


@pytest.mark.parametrize("a", all_catalog(), ids=lambda a: a.label)
def test_bracket_is_lie(a):
    g = bracket_of(a)
    assert g.antisymmetry_residual() == 0
    assert g.jacobi_residual() == 0


# --- axiom checks ----------------------------------------------------------

def test_torsion_free_examples():
    for a in rational_alphas(5):
        assert is_torsion_free_compatible(catalog_lsa("F2", a), AFF_LINE_BRACKET).passed
    assert not is_torsion_free_compatible(ZERO2, AFF_LINE_BRACKET).passed
    assert is_torsion_free_compatible(catalog_lsa("E2"), AFF_LINE_BRACKET).passed


def test_left_symmetric_examples():
    e3 = catalog_lsa("E3")
    assert list(e3.associator(0, 1, 1)) == [-1, 0]
    assert list(e3.associator(1, 0, 1)) == [-1, 0]
    assert is_left_symmetric(e3).residual == EXACT_ZERO
    bad = table({(2, 2): (1, 0), (1, 2): (0, 1)})
    assert not is_left_symmetric(bad).passed


def test_flat_examples():
    assert is_flat_compatible(ZERO2).passed
    perturbed = catalog_lsa("F1", 1).c.copy()
    perturbed[1, 1, 1] += F(1, 3)
    assert not is_flat_compatible(LSA(2, perturbed)).passed


def _matrix_algebra() -> LSA:
    """3x3 matrices [[A, b], [0, 0]] under the matrix product."""
    basis = []
    for r, c in itertools.product(range(2), range(3)):
        m = np.zeros((3, 3), dtype=int)
        m[r, c] = 1
        basis.append(m)
    flat = np.array([b.ravel() for b in basis]).T
    cs = np.zeros((6, 6, 6), dtype=object)
    for i, j in itertools.product(range(6), repeat=2):
        prod = (basis[i] @ basis[j]).ravel()
        coords = np.linalg.lstsq(flat, prod, rcond=None)[0]
        cs[i, j] = [F(int(round(v))) for v in coords]
    return LSA(6, cs, "affine-matrices")


def test_associative_examples():
    assert is_associative(_matrix_algebra()).passed
    assert not is_associative(catalog_lsa("E3")).passed
    assert is_associative(ZERO2).passed
    e3 = catalog_lsa("E3")
    e1, e2 = e3.basis(0), e3.basis(1)
    assert list(e3.mul(e3.mul(e2, e2), e1)) == [2, 0]
    assert list(e3.mul(e2, e3.mul(e2, e1))) == [0, 0]


@pytest.mark.parametrize("a", all_catalog(tuple(rational_alphas(20))), ids=lambda a: a.label)
def test_catalog_axioms_exact(a):
    reports = axiom_reports(a)
    assert [r.residual for r in reports] == [EXACT_ZERO] * 3


def test_float_products_use_tolerance():
    a = LSA(2, np.asarray(catalog_lsa("E1").c, dtype=float), "E1")
    reps = axiom_reports(a, AFF_LINE_BRACKET)
    assert all(r.passed and r.tolerance == 1e-9 for r in reps)


# --- étale bridge ----------------------------------------------------------

def test_koszul_rho5():
    rep = InfinitesimalAffineRep(([[1, 0], [0, 0]], [[0, 0], [0, 1]]), ([0, 0], [0, 0]))
    assert lsa_from_etale(rep, [1, 1]) == table({(1, 1): (1, 0), (2, 2): (0, 1)})


def test_koszul_rho3():
    rep = InfinitesimalAffineRep(([[0, 0], [0, 0]], [[0, 0], [0, 1]]), ([1, 0], [0, 0]))
    assert lsa_from_etale(rep, [0, 1]) == table({(2, 2): (0, 1)})


def test_koszul_rho1_and_not_etale():
    rep = InfinitesimalAffineRep(([[0, 0], [0, 0]], [[0, 0], [0, 0]]), ([1, 0], [0, 1]))
    assert lsa_from_etale(rep, [0, 0]) == ZERO2
    rep5 = InfinitesimalAffineRep(([[1, 0], [0, 0]], [[0, 0], [0, 1]]), ([0, 0], [0, 0]))
    with pytest.raises(NotEtale):
        lsa_from_etale(rep5, [0, 0])


def test_rep_from_lsa_examples():
    rep = infinitesimal_rep_from_lsa(ZERO2)
    assert all(not np.any(A) for A in rep.linear)
    assert [list(v) for v in rep.translation] == [[1, 0], [0, 1]]
    rep = infinitesimal_rep_from_lsa(catalog_lsa("F1", 0))
    assert rep.linear[0].tolist() == [[0, 0], [0, 1]]
    assert not np.any(rep.linear[1])


@pytest.mark.parametrize("a", all_catalog(), ids=lambda a: a.label)
def test_round_trip(a):
    back = lsa_from_etale(infinitesimal_rep_from_lsa(a), [0] * a.dim)
    assert back == a


def test_json_round_trip():
    a = catalog_lsa("F2", F(-3, 4))
    data = json.loads(json.dumps(a.to_json()))
    assert data["alpha"] == "-3/4"
    assert LSA.from_json(data) == a and LSA.from_json(data).alpha == F(-3, 4)


def test_exceptional_names():
    assert EXCEPTIONAL_NAMES == ("E1", "E2", "E3", "E4")
