import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sievekit.permdens import (
    CycleType,
    GroupSpec,
    T_exact,
    T_k_of_n,
    T_of_group,
    T_upper_bound,
    analytic_cutoff,
    cycle_type,
    cycle_type_distribution,
    excluded_degrees,
    excluded_report,
    h_fixed_point_free,
    hw_condition_check,
    mobius,
    stirling_first,
)
from sievekit.selfcheck import T_by_enumeration
from sievekit.specfun import CertifiedValue, DomainError

EXCLUDED_AT_DEGREE_BOUND = [2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 15, 16, 18, 20, 22, 24, 26, 28, 30, 36, 42, 48]


def _cycle_counts(m):
    counts = [0] * (m + 1)
    for p in itertools.permutations(range(m)):
        counts[len(cycle_type(p).parts)] += 1
    return counts


def test_stirling_small():
    assert [stirling_first(3, i) for i in (1, 2, 3)] == [2, 3, 1]
    assert all(stirling_first(m, m) == 1 for m in range(11))
    assert stirling_first(3, 5) == 0
    for m in range(1, 7):
        assert [stirling_first(m, i) for i in range(m + 1)] == _cycle_counts(m)


@settings(max_examples=30)
@given(st.integers(0, 12), st.fractions(min_value=-5, max_value=5, max_denominator=50))
def test_stirling_generating_function(m, w):
    lhs = sum(stirling_first(m, i) * w ** i for i in range(m + 1))
    assert lhs == math.prod((w + j for j in range(m)), start=Fraction(1))


def test_stirling_generating_function_one_third():
    w = Fraction(1, 3)
    assert sum(stirling_first(6, i) * w ** i for i in range(7)) == math.prod(w + j for j in range(6))


def test_T_k_examples():
    assert all(T_k_of_n(n, 1) == 1 for n in range(1, 30))
    assert T_k_of_n(4, 2) == Fraction(3, 8)
    for q in (2, 3, 5, 7, 11):
        assert T_k_of_n(q, q) == Fraction(1, q)
    with pytest.raises(DomainError):
        T_k_of_n(5, 2)


def test_T_k_matches_stirling_sum():
    # T_k(n) = (1/m!) sum_i k^{-i} c(m, i) with m = n/k
    for n in range(1, 40):
        for k in range(1, n + 1):
            if n % k == 0:
                m = n // k
                s = sum(Fraction(stirling_first(m, i), k ** i) for i in range(m + 1))
                assert T_k_of_n(n, k) == s / math.factorial(m)


def test_T_exact_examples():
    assert T_exact(1) == 0
    assert T_exact(2) == Fraction(1, 2)
    assert T_exact(4) == Fraction(3, 8)
    for p in (2, 3, 5, 7, 11):
        assert T_exact(p) == Fraction(1, p)


def test_T_exact_enumeration():
    for n in range(1, 9):
        assert T_exact(n) == T_by_enumeration(n)


def test_mobius_consistency():
    for n in range(1, 65):
        s = sum(mobius(k) * T_k_of_n(n, k) for k in range(1, n + 1) if n % k == 0)
        assert s == 1 - T_exact(n)


def test_upper_bound():
    assert abs(T_upper_bound(4) - 1 / math.sqrt(math.pi)) < 1e-15
    for n in range(2, 65):
        assert T_upper_bound(n) > T_exact(n)
    for p in (5, 7, 11, 13):
        assert T_upper_bound(p) >= Fraction(1, p)
    vals = [T_upper_bound(2 ** j) for j in range(2, 7)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_analytic_cutoff_clears_everything_beyond():
    thr = 0.14071
    n0 = analytic_cutoff(thr)
    for n in range(n0 + 1, n0 + 3000):
        assert T_upper_bound(n) < thr


def test_excluded_list_at_rational_bound():
    assert excluded_degrees(Fraction("0.14071"), 200) == EXCLUDED_AT_DEGREE_BOUND


def test_excluded_list_from_certified_interval():
    rep = excluded_report(CertifiedValue(0.14071543, 2e-6), 200)
    assert rep.degrees == EXCLUDED_AT_DEGREE_BOUND
    assert rep.boundary == []
    # nearest competitors sit well away from the threshold
    assert T_exact(48) > Fraction("0.1408") and T_exact(49) < Fraction("0.14")


def test_other_thresholds():
    assert excluded_degrees(Fraction(9, 10), 200) == []
    assert excluded_degrees(Fraction(49, 100), 200) == [2]


def test_boundary_flag():
    rep = excluded_report((Fraction(1, 3), Fraction(1, 3)), 50)
    assert 3 in rep.boundary and 3 not in rep.degrees


def test_small_nmax_is_rejected_when_needed():
    with pytest.raises(DomainError):
        excluded_report(Fraction("0.14071"), 30)


def test_groups():
    for n in range(1, 10):
        assert T_of_group(GroupSpec.symmetric(n)) == T_exact(n)
    for q in (3, 5, 7, 11, 101):
        G = GroupSpec.agl1(q)
        assert T_of_group(G) == h_fixed_point_free(G) == Fraction(1, q)
    assert h_fixed_point_free(GroupSpec.symmetric(3)) == Fraction(1, 3)
    assert T_of_group(GroupSpec.alternating(4)) == Fraction(1, 4)
    assert T_of_group(GroupSpec.explicit([(0,)])) == 0
    with pytest.raises(DomainError):
        GroupSpec.agl1(9)


def _affine(q):
    return [tuple((a * x + b) % q for x in range(q)) for a in range(1, q) for b in range(q)]


def _cyclic(k):
    return [tuple((x + s) % k for x in range(k)) for s in range(k)]


def _dihedral(k):
    rots = _cyclic(k)
    refl = [tuple((s - x) % k for x in range(k)) for s in range(k)]
    return rots + refl


def test_explicit_groups_match_closed_forms():
    for q in (3, 5, 7):
        G = GroupSpec.explicit(_affine(q))
        assert T_of_group(G) == T_of_group(GroupSpec.agl1(q))
        assert h_fixed_point_free(G) == Fraction(1, q)
    S4 = GroupSpec.explicit(itertools.permutations(range(4)))
    assert cycle_type_distribution(S4) == cycle_type_distribution(GroupSpec.symmetric(4))


def test_fixed_point_free_lower_bound_on_transitive_groups():
    groups = [_cyclic(k) for k in range(2, 8)] + [_dihedral(k) for k in range(3, 8)]
    groups += [_affine(q) for q in (3, 5, 7)] + [list(itertools.permutations(range(5)))]
    for elems in groups:
        G = GroupSpec.explicit(elems)
        assert h_fixed_point_free(G) >= Fraction(1, G.degree)


def test_explicit_rejects_non_groups():
    with pytest.raises(DomainError):
        GroupSpec.explicit([(0, 1, 2), (1, 2, 0)])
    with pytest.raises(DomainError):
        GroupSpec.explicit([(0, 0, 1)])


def test_cycle_type():
    ct = cycle_type((1, 2, 0, 4, 3))
    assert ct.parts == (3, 2) and ct.n == 5 and ct.gcd == 1
    assert CycleType((2, 4)).gcd == 2
    assert str(CycleType((1, 2))) == "{2,1}"


def test_hw_examples():
    assert hw_condition_check([1], [7], "quadratic").holds
    assert not hw_condition_check([3], [7], "cubic").holds
    c = hw_condition_check([2, 2], [101, 103], "quadratic")
    assert c.holds and abs(c.margin - (0.0975 - (1 / 101 + 1 / 103))) < 1e-12
    with pytest.raises(DomainError):
        hw_condition_check([1], [8], "quadratic")
