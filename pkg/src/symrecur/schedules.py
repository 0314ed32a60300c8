"""Schedules (ell_p, gamma_p) steering a constructed point toward the exponents (a, b).

Several cases grow doubly exponentially, so every sequence is stored as
log(ell_p) and log(gamma_p); e^{gamma_p ell_p} is only ever handled through
its logarithm gamma_p * ell_p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import RecurError

INF = math.inf


def parse_extended(text) -> float:
    if isinstance(text, (int, float)):
        v = float(text)
    else:
        s = str(text).strip().lower()
        v = INF if s in ("inf", "infinity", "oo", "+inf") else float(s)
    if math.isnan(v) or v < 0:
        raise RecurError(f"exponent must be a non-negative real or inf, got {text!r}")
    return v


def case_of(a: float, b: float) -> str:
    if a > b:
        raise RecurError("a must not exceed b")
    if a < 0:
        raise RecurError("a and b must be non-negative")
    if a == 0 and b == 0:
        return "IV"
    if a == INF:
        return "V"
    if a == 0:
        return "VI" if b == INF else "II"
    return "III" if b == INF else "I"


def _log1pexp_neg(x: float) -> float:
    """log(1 + e^{-x})."""
    return math.log1p(math.exp(-x)) if x > -700 else -x


def _log_expm1(x: float) -> float:
    """log(e^x - 1) for x > 0."""
    return x + math.log(-math.expm1(-x)) if x > 0 else -math.inf


def _lse(*xs: float) -> float:
    m = max(xs)
    if m == -math.inf:
        return m
    return m + math.log(sum(math.exp(x - m) for x in xs))


@dataclass
class Schedule:
    """Schedule sequences in log space.

    Besides log(ell_p) and log(gamma_p) each schedule carries, per step p -> p+1,
    the logs of the gap ell_{p+1} - ell_p, of the increment
    gamma_{p+1} ell_{p+1} - gamma_p ell_p and of gamma_{p+1} ell_{p+1} / ell_p.
    Generated schedules evaluate these from the simplified closed forms so that
    no cancellation between huge logarithms occurs.
    """

    case: str
    a: float
    b: float
    log_ell: np.ndarray
    log_gamma: np.ndarray
    log_gamma_ell: np.ndarray
    log_gap: np.ndarray
    log_increment: np.ndarray
    log_d: np.ndarray
    index_shift: int = 0
    note: str = ""

    def __len__(self) -> int:
        return len(self.log_ell)

    @property
    def ell(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_ell)

    @property
    def gamma(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_gamma)

    @property
    def gamma_ell(self) -> np.ndarray:
        """gamma_p * ell_p, the logarithm of e^{gamma_p ell_p}."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_gamma_ell)

    def sliced(self, start: int) -> "Schedule":
        return replace(self, log_ell=self.log_ell[start:].copy(), log_gamma=self.log_gamma[start:].copy(),
                       log_gamma_ell=self.log_gamma_ell[start:].copy(), log_gap=self.log_gap[start:].copy(),
                       log_increment=self.log_increment[start:].copy(), log_d=self.log_d[start:].copy(),
                       index_shift=self.index_shift + start)

    @classmethod
    def from_sequences(cls, ell, gamma, a: float = math.nan, b: float = math.nan,
                       note: str = "custom") -> "Schedule":
        ell = np.asarray(ell, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        if ell.shape != gamma.shape or ell.ndim != 1 or len(ell) < 1:
            raise RecurError("ell and gamma must be equal-length sequences")
        if np.any(ell <= 0) or np.any(gamma <= 0):
            raise RecurError("ell and gamma must be positive")
        ge = gamma * ell
        with np.errstate(divide="ignore", invalid="ignore"):
            gap = np.log(np.diff(ell))
            inc = np.log(np.diff(ge))
        gap = np.where(np.diff(ell) > 0, gap, -np.inf)
        inc = np.where(np.diff(ge) > 0, inc, -np.inf)
        return cls("custom", a, b, np.log(ell), np.log(gamma), np.log(ge), gap, inc,
                   np.log(ge[1:] / ell[:-1]), note=note)

    def log_target(self, i: int) -> float:
        """gamma_p ell_p for the 0-based index i: the log of the target return time."""
        return float(math.exp(self.log_gamma_ell[i]))

    def rows(self):
        """(p, ell, gamma, gamma*ell) with p counted from 1 after the shift."""
        ell, gamma, ge = self.ell, self.gamma, self.gamma_ell
        for i in range(len(self)):
            yield (i + 1, float(ell[i]), float(gamma[i]), float(ge[i]))


def make_schedule(a, b, P: int, literal: bool = False) -> Schedule:
    """Generate P terms of the schedule for the exponent pair (a, b).

    ``literal=True`` keeps the a = b = 0 recursion ell_{p+1} = ell_p + sqrt(ell_p)
    with gamma_p = ell_p^{-1/2}, which breaks property (e) at p = 1.  The default
    uses ell_{p+1} = ell_p + 2 sqrt(ell_p) + 2, so that
    sqrt(ell_{p+1}) > sqrt(ell_p) + 1 holds strictly.
    """
    a, b = parse_extended(a), parse_extended(b)
    case = case_of(a, b)
    if P < 2:
        raise RecurError("need at least two terms")
    le = np.zeros(P)
    lg = np.zeros(P)
    lge = np.zeros(P)
    gap = np.zeros(P - 1)
    inc = np.zeros(P - 1)
    ld = np.zeros(P - 1)
    la = math.log(a) if 0 < a < INF else None
    lb = math.log(b) if 0 < b < INF else None
    if case == "I":
        le[0] = math.log(b ** -2 + 1)
    elif case == "II":
        le[0] = math.log(b ** -2 + 1)
    elif case == "III":
        le[0] = math.log(a + 1)
    l0 = le[0]  # the auxiliary ell_0 of Cases II and VI equals ell_1
    for i in range(P - 1):
        p = i + 1
        L = le[i]
        S = L / 2
        T = _log1pexp_neg(S)
        even = p % 2 == 0
        Sprev = (le[i - 1] if i > 0 else l0) / 2
        if case == "I":
            lr = lb - la if even else 0.0
            le[i + 1] = lr + L + T
            gap[i] = _lse(_log_expm1(lr) + L, lr + S)
            if even or a == b:
                inc[i] = lb + S
            else:
                inc[i] = _lse(math.log(b - a) + L, lb + S)
            ld[i] = lb + T
        elif case == "II":
            lr = lb + S if even else 0.0
            le[i + 1] = lr + L + T
            gap[i] = _lse(_log_expm1(lr) + L, lr + S)
            inc[i] = lb + S if even else _lse(L + math.log(b - math.exp(-Sprev)), lb + S)
            ld[i] = lb + T
        elif case == "III":
            lr = L - la if even else 0.0
            le[i + 1] = lr + L + T
            gap[i] = _lse(_log_expm1(lr) + L, lr + S)
            if even:
                inc[i] = 1.5 * L
            elif a <= 1:
                inc[i] = _lse(2 * L, math.log(2) + 1.5 * L, math.log1p(-a) + L if a < 1 else -INF)
            else:
                inc[i] = _lse(2 * L + math.log1p(-(a - 1) * math.exp(-L)), math.log(2) + 1.5 * L)
            ld[i] = L + T if even else L + 2 * T
        elif case == "IV":
            if literal:
                le[i + 1] = L + T
                gap[i] = S
            else:
                le[i + 1] = L + math.log1p(2 * math.exp(-S) + 2 * math.exp(-L))
                gap[i] = _lse(math.log(2) + S, math.log(2))
            inc[i] = gap[i] - _lse(le[i + 1] / 2, S)
            ld[i] = le[i + 1] / 2 - L
        elif case == "V":
            le[i + 1] = L + T
            gap[i] = S
            inc[i] = _lse(math.log(2) + 1.5 * L, L)
            ld[i] = L + 2 * T
        else:  # VI
            lr = 1.5 * L if even else 0.0
            le[i + 1] = lr + L + T
            gap[i] = _lse(_log_expm1(lr) + L, lr + S)
            if even:
                inc[i] = 1.5 * L
            else:
                third = L + math.log1p(-math.exp(-Sprev)) if Sprev > 0 else -INF
                inc[i] = _lse(2 * L, math.log(2) + 1.5 * L, third)
            ld[i] = L + T if even else L + 2 * T
    for i in range(P):
        p = i + 1
        L = le[i]
        even = p % 2 == 0
        Sprev = (le[i - 1] if i > 0 else l0) / 2
        if case == "I":
            lg[i] = lb if even else la
            lge[i] = lg[i] + L
        elif case == "II":
            lg[i] = lb if even else -Sprev
            if even:
                lge[i] = lb + L
            elif p == 1:
                lge[i] = L - Sprev
            else:
                # ell_p / sqrt(ell_{p-1}) = b (ell_{p-1} + sqrt(ell_{p-1}))
                lge[i] = lb + le[i - 1] + _log1pexp_neg(Sprev)
        elif case == "III":
            lg[i] = L if even else la
            lge[i] = 2 * L if even else la + L
        elif case == "IV":
            lg[i] = -L / 2
            lge[i] = L / 2
        elif case == "V":
            lg[i] = L
            lge[i] = 2 * L
        else:
            lg[i] = L if even else -Sprev
            if even:
                lge[i] = 2 * L
            elif p == 1:
                lge[i] = L - Sprev
            else:
                lge[i] = le[i - 1] + le[i - 1] + _log1pexp_neg(Sprev)
    note = "literal" if (literal and case == "IV") else ""
    return Schedule(case, a, b, le, lg, lge, gap, inc, ld, note=note)


def shift_indices(s: Schedule, k: int, t: int, min_ell: Optional[float] = None) -> Schedule:
    """Drop a prefix so that gaps are >= k + t, e^{gamma_1 ell_1} >= 2k + t and ell_1 > min_ell.

    The shift is even so that odd indices keep carrying the target a and even
    ones the target b.  ``min_ell`` defaults to k (a checkpoint prefix must
    reach past the first seed block).
    """
    if k < 0 or t < 0:
        raise RecurError("k and t must be non-negative")
    min_ell = k if min_ell is None else min_ell
    n = len(s)
    if n < 2:
        raise RecurError("schedule too short to shift")
    gap_ok = s.log_gap >= math.log(k + t) if k + t > 0 else np.ones(n - 1, bool)
    # every later gap must also pass
    suffix_ok = np.logical_and.accumulate(gap_ok[::-1])[::-1]
    ge = s.log_gamma_ell
    for i in range(0, n - 1, 2):
        if not suffix_ok[i]:
            continue
        if math.exp(min(ge[i], 700.0)) < 2 * k + t:
            continue
        if s.log_ell[i] <= math.log(min_ell) if min_ell > 0 else False:
            continue
        return s.sliced(i)
    raise RecurError(f"no admissible shift within {n} terms; generate more terms")


# -- validation -----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    exact: bool = False


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def property_e_violations(s: Schedule) -> list[int]:
    """Indices p (1-based) where gamma_p ell_p + 1 <= gamma_{p+1} ell_{p+1} fails."""
    bad = s.log_increment < 0
    # where the values are moderate, the plain float comparison must agree
    small = np.maximum(s.log_gamma_ell[:-1], s.log_gamma_ell[1:]) < math.log(1e9)
    lo = np.exp(np.where(small, s.log_gamma_ell[:-1], 0.0))
    hi = np.exp(np.where(small, s.log_gamma_ell[1:], 0.0))
    bad |= small & (hi < lo + 1)
    return [int(i) + 1 for i in np.nonzero(bad)[0]]


def _tail(n: int, frac: float = 0.1) -> slice:
    return slice(max(0, n - max(2, int(round(n * frac)))), n)


def _target_check(name, logs: np.ndarray, target: float, rel: float) -> Check:
    tail = logs[_tail(len(logs))]
    if target == INF:
        ok = bool(np.all(np.diff(tail) > 0) and tail[-1] > math.log(1e3))
        return Check(name, ok, f"tail log rises to {tail[-1]:.3g} (target inf)")
    vals = np.exp(tail)
    if target == 0:
        ok = bool(np.max(vals) < 0.05)
        return Check(name, ok, f"tail max {np.max(vals):.3g} (target 0, threshold 0.05)")
    dev = float(np.max(np.abs(vals - target)) / target)
    return Check(name, dev <= rel, f"tail relative deviation {dev:.3g} (target {target:g})")


def validate(s: Schedule, rel_tol: float = 0.05, small: float = 1e-3) -> ValidationReport:
    n = len(s)
    if n < 10:
        raise RecurError("validate needs at least 10 terms")
    checks: list[Check] = []
    le, lg = s.log_ell, s.log_gamma
    lge = s.log_gamma_ell
    shift = s.index_shift

    checks.append(Check("positive", bool(np.all(np.isfinite(le)) and np.all(np.isfinite(lg))),
                        "ell and gamma positive and finite in log space", exact=True))
    inc = np.nonzero(~np.isfinite(s.log_gap))[0]
    checks.append(Check("increasing", len(inc) == 0,
                        "ell strictly increasing" if len(inc) == 0 else f"ell fails to increase at p={inc[0] + 1}",
                        exact=True))
    bad = property_e_violations(s)
    checks.append(Check("e", not bad, "holds at every p" if not bad else f"violated at p={bad[0]}",
                        exact=True))

    # (a): odd terms -> a, even terms -> b (parity counted in the original indexing)
    p = np.arange(1, n + 1) + shift
    if math.isnan(s.a) or math.isnan(s.b):
        checks.append(Check("a", True, "custom schedule: no target"))
    else:
        ca = _target_check("a", lg[p % 2 == 1], s.a, rel_tol)
        cb = _target_check("a", lg[p % 2 == 0], s.b, rel_tol)
        checks.append(Check("a", ca.passed and cb.passed, f"odd: {ca.detail}; even: {cb.detail}"))

    lgap = s.log_gap
    first, second = lgap[: max(1, len(lgap) // 10)], lgap[len(lgap) // 2:]
    ok_b = bool(np.min(second) > np.max(first) and lgap[-1] > math.log(10))
    checks.append(Check("b", ok_b, f"min late log-gap {np.min(second):.3g} vs max early {np.max(first):.3g}"))

    # (c): log(ell / e^{gamma ell}) = log ell - gamma ell
    with np.errstate(over="ignore"):
        lr = le - np.exp(np.minimum(lge, 700.0))
    tail = lr[_tail(n)]
    ok_c = bool(tail[-1] < math.log(small) and np.max(tail) < math.log(small))
    checks.append(Check("c", ok_c, f"tail max log-ratio {np.max(tail):.3g} (need < {math.log(small):.3g})"))

    # (d): gamma_{p+1} ell_{p+1} / ell_p
    if math.isnan(s.b) or s.b == INF:
        checks.append(Check("d", True, "b infinite or unset: vacuous"))
    else:
        with np.errstate(over="ignore"):
            ld = np.exp(np.minimum(s.log_d, 700.0))
        tmax = float(np.max(ld[_tail(len(ld))]))
        bound = s.b * (1 + rel_tol) if s.b > 0 else 0.05
        checks.append(Check("d", tmax <= bound, f"tail max {tmax:.4g} vs bound {bound:.4g}"))

    # (f): log((c p + sum ell_j) / e^{gamma_p ell_p}) must head to -inf
    with np.errstate(over="ignore"):
        ge = np.exp(np.minimum(lge, 700.0))
    cum = np.logaddexp.accumulate(le)
    ok_f, parts = True, []
    for c in (0.0, 10.0):
        num = np.logaddexp(cum, np.log(c * p)) if c > 0 else cum
        f = num - ge
        good = bool(f[-1] < -10 and f[-1] <= f[n // 2])
        ok_f = ok_f and good
        parts.append(f"c={c:g}: end {f[-1]:.3g}")
    checks.append(Check("f", ok_f, "; ".join(parts)))
    return ValidationReport(checks)
