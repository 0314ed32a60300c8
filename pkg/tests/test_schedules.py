import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from symrecur.errors import RecurError
from symrecur.schedules import (INF, Schedule, case_of, make_schedule, parse_extended,
                                property_e_violations, shift_indices, validate)

PAIRS = [(1, 1), (0.5, 1), (0, 1), (0.5, INF), (0, 0), (INF, INF), (0, INF)]


def oracle(a, b, P, literal=False):
    """Direct high-precision evaluation of the recursions (ell_p, gamma_p), p = 1..P."""
    mp = mpmath.mp
    mp.dps = 400
    a_ = None if a == INF else mpmath.mpf(a)
    b_ = None if b == INF else mpmath.mpf(b)
    case = case_of(a, b)
    sq = mpmath.sqrt
    if case in ("I", "II"):
        ell = [1 / b_ ** 2 + 1]
    elif case == "III":
        ell = [a_ + 1]
    else:
        ell = [mpmath.mpf(1)]
    ell0 = ell[0]
    for p in range(1, P):
        L = ell[-1]
        even = p % 2 == 0
        if case == "I":
            nxt = (b_ / a_) * (L + sq(L)) if even else L + sq(L)
        elif case == "II":
            nxt = b_ * sq(L) * (L + sq(L)) if even else L + sq(L)
        elif case == "III":
            nxt = (L / a_) * (L + sq(L)) if even else L + sq(L)
        elif case == "IV":
            nxt = L + sq(L) if literal else L + 2 * sq(L) + 2
        elif case == "V":
            nxt = L + sq(L)
        else:
            nxt = L * sq(L) * (L + sq(L)) if even else L + sq(L)
        ell.append(nxt)
    gamma = []
    for i, L in enumerate(ell):
        p = i + 1
        even = p % 2 == 0
        prev = ell[i - 1] if i > 0 else ell0
        if case == "I":
            g = b_ if even else a_
        elif case == "II":
            g = b_ if even else 1 / sq(prev)
        elif case == "III":
            g = L if even else a_
        elif case == "IV":
            g = 1 / sq(L)
        elif case == "V":
            g = L
        else:
            g = L if even else 1 / sq(prev)
        gamma.append(g)
    return ell, gamma


def _terms(a, b):
    # log ell doubles (III) or grows 2.5-fold (VI) every two steps; keep ell within 400 digits of sqrt(ell)
    return 14 if case_of(a, b) in ("III", "VI") else 30


def test_examples():
    s = make_schedule(1, 1, 5)
    assert s.case == "I"
    assert s.ell[0] == pytest.approx(2) and s.ell[1] == pytest.approx(2 + 2 ** 0.5)
    assert s.gamma[:2] == pytest.approx([1, 1])
    lit = make_schedule(0, 0, 5, literal=True)
    assert lit.ell[:3] == pytest.approx([1, 2, 2 + 2 ** 0.5])
    assert lit.gamma == pytest.approx(lit.ell ** -0.5)
    v = make_schedule(INF, INF, 10)
    assert v.gamma == pytest.approx(v.ell)
    assert np.diff(v.ell) == pytest.approx(np.sqrt(v.ell[:-1]))


@pytest.mark.parametrize("a,b", PAIRS + [(1, 2), (2, INF), (1.5, INF)])
@pytest.mark.parametrize("literal", [False, True])
def test_against_high_precision_recursion(a, b, literal):
    if literal and case_of(a, b) != "IV":
        return
    P = _terms(a, b)
    s = make_schedule(a, b, P, literal=literal)
    ell, gamma = oracle(a, b, P, literal)
    log = mpmath.log
    for i in range(P):
        assert s.log_ell[i] == pytest.approx(float(log(ell[i])), rel=1e-12, abs=1e-12)
        assert s.log_gamma[i] == pytest.approx(float(log(gamma[i])), rel=1e-12, abs=1e-12)
        assert s.log_gamma_ell[i] == pytest.approx(float(log(gamma[i] * ell[i])), rel=1e-12, abs=1e-12)
    for i in range(P - 1):
        gap = ell[i + 1] - ell[i]
        assert s.log_gap[i] == pytest.approx(float(log(gap)), rel=1e-10, abs=1e-10)
        inc = gamma[i + 1] * ell[i + 1] - gamma[i] * ell[i]
        scale = abs(gamma[i + 1] * ell[i + 1])
        if abs(inc) > scale * mpmath.mpf(10) ** -300:  # the oracle still resolves the difference
            if inc > 0:
                assert s.log_increment[i] == pytest.approx(float(log(inc)), rel=1e-10, abs=1e-10)
            else:
                assert s.log_increment[i] == -math.inf or s.log_increment[i] < 0
        d = gamma[i + 1] * ell[i + 1] / ell[i]
        assert s.log_d[i] == pytest.approx(float(log(d)), rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("a,b", PAIRS)
def test_property_e_against_oracle(a, b):
    P = _terms(a, b)
    ell, gamma = oracle(a, b, P)
    ge = [g * l for g, l in zip(gamma, ell)]
    expect = [p for p in range(1, P) if not ge[p - 1] + 1 <= ge[p]]
    assert property_e_violations(make_schedule(a, b, P)) == expect == []


def test_literal_case_four_breaks_e():
    lit = make_schedule(0, 0, 40, literal=True)
    bad = property_e_violations(lit)
    assert 1 in bad
    ell, gamma = oracle(0, 0, 3, literal=True)
    assert gamma[0] * ell[0] + 1 > gamma[1] * ell[1]  # 1 + 1 > sqrt(2)
    assert not validate(lit).passed and not validate(lit).get("e").passed


@pytest.mark.parametrize("a,b", PAIRS)
@pytest.mark.parametrize("P", [200, 1000])
def test_validate_passes(a, b, P):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rep = validate(make_schedule(a, b, P))
    assert rep.passed, [(c.name, c.detail) for c in rep.failures()]
    assert rep.get("e").exact


def test_case_two_gamma_odd_tends_to_zero():
    s = make_schedule(0, 1, 200)
    odd = s.gamma[0::2]
    assert odd[-10:].max() < 0.05
    assert s.gamma[1::2] == pytest.approx(1.0)


def test_fault_injection_halved_gamma():
    s = make_schedule(0.5, 1, 20)
    ell, gamma = s.ell.copy(), s.gamma.copy()
    gamma[1] /= 2
    bad = Schedule.from_sequences(ell, gamma, 0.5, 1)
    assert property_e_violations(bad)[0] == 1
    rep = validate(bad)
    assert not rep.get("e").passed and "p=1" in rep.get("e").detail


def _scan_shift(a, b, P, k, t):
    ell, gamma = oracle(a, b, P)
    for i in range(0, P - 1, 2):
        if all(ell[j + 1] - ell[j] >= k + t for j in range(i, P - 1)) \
                and mpmath.exp(gamma[i] * ell[i]) >= 2 * k + t and ell[i] > k:
            return i
    return None


@pytest.mark.parametrize("a,b,k,t", [(1, 1, 4, 0), (0.5, 1, 9, 0), (1, 2, 5, 1), (INF, INF, 3, 1), (0.6, 1.0, 9, 0)])
def test_shift_matches_scan(a, b, k, t):
    s = make_schedule(a, b, 300)
    sh = shift_indices(s, k, t)
    i = _scan_shift(a, b, 300, k, t)
    assert sh.index_shift == i and i % 2 == 0
    assert np.all(sh.log_gap >= math.log(k + t))
    assert math.exp(sh.gamma_ell[0]) >= 2 * k + t
    assert property_e_violations(sh) == []


def test_shift_trivial_and_errors():
    s = make_schedule(1, 1, 50)
    assert shift_indices(s, 0, 0, min_ell=0).index_shift == 0
    with pytest.raises(RecurError):
        shift_indices(make_schedule(1, 1, 6), 40, 0)
    with pytest.raises(RecurError):
        shift_indices(s, -1, 0)


def test_case_five_shift_is_small():
    assert shift_indices(make_schedule(INF, INF, 100), 9, 0).index_shift <= 80


@given(st.one_of(st.just(0.0), st.floats(0.01, 50), st.just(INF)),
       st.one_of(st.just(0.0), st.floats(0.01, 50), st.just(INF)))
def test_case_selection_total(a, b):
    if a > b:
        with pytest.raises(RecurError, match="a must not exceed b"):
            case_of(a, b)
        return
    c = case_of(a, b)
    expect = {(True, True): "IV"}.get((a == 0, b == 0))
    if expect is None:
        if a == INF:
            expect = "V"
        elif a == 0:
            expect = "VI" if b == INF else "II"
        else:
            expect = "III" if b == INF else "I"
    assert c == expect


def test_parse_extended():
    assert parse_extended("inf") == INF and parse_extended("0.5") == 0.5
    with pytest.raises(RecurError):
        parse_extended("-1")
    with pytest.raises(RecurError):
        make_schedule(2, 1, 10)
    with pytest.raises(RecurError):
        make_schedule(1, 1, 1)
    with pytest.raises(RecurError):
        validate(make_schedule(1, 1, 5))
