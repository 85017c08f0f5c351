import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sievekit.arith.counting import rho_exhaustive
from sievekit.arith.polys import FactoredBinaryForm
from sievekit.lod import (
    CSV_HEADER,
    A_count,
    A_count_scan,
    Lattice2,
    box_half_planes,
    gauss_reduce,
    lattice_points_in_region,
    lod_sum_experiment,
    r_remainder,
    rho_pair,
)
from sievekit.sifter import CongruenceClass, Region
from sievekit.specfun import DomainError

vectors = st.tuples(st.integers(-60, 60), st.integers(-60, 60))


def shortest_by_scan(v1, v2, box=8):
    best = math.inf
    for i, j in itertools.product(range(-box, box + 1), repeat=2):
        if i or j:
            best = min(best, math.hypot(i * v1[0] + j * v2[0], i * v1[1] + j * v2[1]))
    return best


def brute_count(lat, off, contains, reach=150):
    return sum(contains(off[0] + i * lat[0][0] + j * lat[1][0], off[1] + i * lat[0][1] + j * lat[1][1])
               for i in range(-reach, reach) for j in range(-reach, reach))


def test_gauss_examples():
    assert gauss_reduce([(1, 0), (0, 1)]).lambda1 == 1
    assert gauss_reduce([(2, 0), (1, 2)]).lambda1 == 2
    assert gauss_reduce([(100, 1), (99, 1)]).lambda1 == 1
    with pytest.raises(DomainError):
        gauss_reduce([(2, 4), (1, 2)])


@settings(max_examples=60)
@given(vectors, vectors)
def test_gauss_reduction_properties(v1, v2):
    if v1[0] * v2[1] - v1[1] * v2[0] == 0:
        return
    L = gauss_reduce([v1, v2])
    n1 = L.v1[0] ** 2 + L.v1[1] ** 2
    n2 = L.v2[0] ** 2 + L.v2[1] ** 2
    dot = L.v1[0] * L.v2[0] + L.v1[1] * L.v2[1]
    assert n1 <= n2 and 2 * abs(dot) <= n1
    assert L.det == abs(v1[0] * v2[1] - v1[1] * v2[0])
    assert n1 <= 2 / math.sqrt(3) * L.det + 1e-9
    assert math.isclose(L.lambda1, shortest_by_scan(L.v1, L.v2), rel_tol=1e-12)


def test_unit_lattice_square():
    for L in (1, 7, 50):
        c = lattice_points_in_region(Lattice2((1, 0), (0, 1)), (0, 0), box_half_planes(L))
        assert c.count == L * L and c.model == L * L and c.constant <= 4


def test_det_five_sublattice():
    lat = gauss_reduce([(5, 0), (2, 1)])  # a = 2b mod 5
    c = lattice_points_in_region(lat, (0, 0), box_half_planes(100))
    brute = sum(1 for a in range(1, 101) for b in range(1, 101) if (a - 2 * b) % 5 == 0)
    assert c.count == brute
    assert abs(c.count - 2000) <= c.constant * (c.perimeter / c.lambda1 + 1)


@settings(max_examples=20, deadline=None)
@given(vectors, vectors, st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
def test_lattice_count_matches_brute_force(v1, v2, off):
    if v1[0] * v2[1] - v1[1] * v2[0] == 0:
        return
    region = Region(Fraction(4, 3), Fraction(1, 2), 40)
    lat = gauss_reduce([v1, v2])
    c = lattice_points_in_region(lat, off, region)
    assert c.count == brute_count((lat.v1, lat.v2), off, region.contains, reach=90)


def test_empty_region():
    region = Region(Fraction(141421, 100000), Fraction(1, 10 ** 9), 100)
    assert lattice_points_in_region(Lattice2((1, 0), (0, 1)), (0, 0), region).count == 0


def test_A_count_examples():
    reg = Region(1, Fraction(1, 2), 120)
    one = CongruenceClass(1, 0, 0)
    a1 = A_count("x^2+y^2", "y", 1, 1, reg, one)
    assert a1 == lattice_points_in_region(Lattice2((1, 0), (0, 1)), (0, 0), reg).count
    sq = box_half_planes(50)
    assert A_count("x", "x^2+y^2", 1, 5, sq, one) == 9 * 2500 // 25 == A_count_scan("x", "x^2+y^2", 1, 5, sq, one)
    f = FactoredBinaryForm.parse("x^2+y^2")
    g = FactoredBinaryForm.parse("y*(x^2+y^2)")
    for d1, d2 in [(3, 5), (4, 9), (7, 8)]:
        assert rho_pair(f, g, d1, d2) == rho_exhaustive(f, d1) * rho_exhaustive(g, d2)


def test_A_count_against_scan():
    reg = Region(Fraction(6, 5), Fraction(1, 3), 150)
    for cong in (CongruenceClass(1, 0, 0), CongruenceClass(3, 1, 2), CongruenceClass(4, 1, 3)):
        for d1 in range(1, 23):
            for d2 in range(1, 23):
                if d1 * d2 > 500 or math.gcd(d1, d2) != 1 or math.gcd(d1 * d2, cong.modulus) != 1:
                    continue
                assert A_count("x^2+y^2", "y*(x^3-2y^3)", d1, d2, reg, cong) == \
                    A_count_scan("x^2+y^2", "y*(x^3-2y^3)", d1, d2, reg, cong)


def test_gcd_violations():
    reg = Region(1, Fraction(1, 2), 50)
    with pytest.raises(DomainError):
        A_count("x^2+y^2", "y", 2, 4, reg, CongruenceClass(1, 0, 0))
    with pytest.raises(DomainError):
        A_count("x^2+y^2", "y", 3, 5, reg, CongruenceClass(3, 0, 1))


def test_r_one_one_is_lattice_discrepancy():
    reg = Region(1, Fraction(1, 2), 500)
    rem = r_remainder("x^2+y^2", "y", 1, 1, reg, CongruenceClass(1, 0, 0))
    c = lattice_points_in_region(Lattice2((1, 0), (0, 1)), (0, 0), reg)
    assert rem.A == c.count and math.isclose(rem.r, c.count - c.model)


def test_trivial_lod_sum():
    rep = lod_sum_experiment("x^2+y^2", "y*(x^2+y^2)", [500], e1=0.0, e2=0.0)
    assert rep.D1 == [1] and rep.D2 == [1]
    assert rep.totals[0] <= 4 * Region(1, Fraction(1, 2), 500).perimeter_bound()


def test_lod_report_invariants_and_csv():
    rep = lod_sum_experiment("x^2+y^2", "y*(x^2+y^2)", [200, 400], delta=3, a0=1, b0=1)
    for total, blocks in zip(rep.totals, rep.blocks):
        assert math.isclose(total, sum(blocks.values()), rel_tol=1e-12)
    assert all(row[3] >= 0 for row in rep.rows)
    text = rep.to_csv().splitlines()
    assert text[0] == CSV_HEADER and text[1] == "N,d1,d2,A,rho,model,r"
    assert len(text) == 2 + len(rep.rows)
    swapped = lod_sum_experiment("x^2+y^2", "y*(x^2+y^2)", [200, 400], delta=3, a0=1, b0=1,
                                 workers=3)
    assert swapped.totals == rep.totals


def test_default_mode_rejects_linear_factor():
    with pytest.raises(DomainError):
        lod_sum_experiment("x*(x^2+y^2)", "y", [100])


@pytest.mark.slow
def test_linear_mode_slope():
    rep = lod_sum_experiment("x", "y", [500, 1000, 2000, 4000], e1=0.4, e2=0.4, mode="linear")
    assert rep.slope < 1.9
