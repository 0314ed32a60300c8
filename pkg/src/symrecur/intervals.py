"""Alpha-beta transformations, digit expansions, cylinders and transitivity.

T(x) = beta*x + alpha - floor(beta*x + alpha) on [0, 1), with T(1) the left
limit.  Branch boundaries and cylinder endpoints are computed exactly (see
:mod:`symrecur.numbers`); orbits of float starting points use binary64 and flag
iterates that come within ``TOL`` of a branch endpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import RecurError
from .numbers import Surd, parse_number
from .words import Word

TOL = 1e-12


@dataclass(frozen=True)
class AlphaBetaParams:
    alpha: Surd
    beta: Surd

    def __init__(self, alpha, beta):
        a, b = parse_number(alpha), parse_number(beta)
        if not (Surd(0) <= a < Surd(1)):
            raise RecurError(f"alpha must lie in [0, 1), got {float(a)}")
        if not b > Surd(1):
            raise RecurError(f"beta must exceed 1, got {float(b)}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def m(self) -> int:
        # least m with beta <= m - alpha; then m - 1 - alpha < beta holds automatically
        s = self.alpha + self.beta
        f = s.floor()
        return f if Surd(f) == s else f + 1

    @property
    def a(self) -> float:
        return float(self.alpha)

    @property
    def b(self) -> float:
        return float(self.beta)

    def boundaries(self) -> list[Surd]:
        """Exact branch endpoints 0 = c_0 < c_1 < ... < c_m = 1."""
        m = self.m
        return [Surd(0)] + [(Surd(j) - self.alpha) / self.beta for j in range(1, m)] + [Surd(1)]

    def full_branches(self) -> list[int]:
        """Branches j whose image T(I_j) is all of [0, 1)."""
        m = self.m
        out = list(range(1, m - 1))
        if self.alpha == 0:
            out.insert(0, 0)
        if self.alpha + self.beta == Surd(m):
            out.append(m - 1)
        return sorted(out)

    def branch_image(self, j: int) -> tuple[Surd, Surd]:
        """Closure of T(I_j)."""
        c = self.boundaries()
        return (self.forward(c[j], j), self.forward(c[j + 1], j))

    def forward(self, x: Surd, j: int) -> Surd:
        return self.beta * x + self.alpha - j

    def backward(self, y: Surd, j: int) -> Surd:
        return (y + j - self.alpha) / self.beta

    def as_map(self) -> "PiecewiseMonotonicMap":
        c = [float(v) for v in self.boundaries()]
        a, b = self.a, self.b
        branches = [(lambda x, j=j: b * x + a - j) for j in range(self.m)]
        derivs = [(lambda x: b) for _ in range(self.m)]
        return PiecewiseMonotonicMap(c, branches, derivs)

    def __str__(self):
        return f"alpha={self.a:g}, beta={self.b:g}"


@dataclass
class PiecewiseMonotonicMap:
    """General map given by breakpoints and per-branch callables."""

    breakpoints: Sequence[float]
    branches: Sequence[Callable[[float], float]]
    derivatives: Sequence[Callable[[float], float]]

    def __post_init__(self):
        if len(self.branches) != len(self.breakpoints) - 1 or len(self.derivatives) != len(self.branches):
            raise RecurError("need one branch and one derivative per interval")
        if self.breakpoints[0] != 0 or self.breakpoints[-1] != 1:
            raise RecurError("breakpoints must start at 0 and end at 1")

    def branch_index(self, x: float) -> int:
        bp = self.breakpoints
        for j in range(len(bp) - 1):
            if x < bp[j + 1]:
                return j
        return len(bp) - 2

    def near_endpoint(self, x: float, tol: float = TOL) -> bool:
        return any(abs(x - c) < tol for c in self.breakpoints[1:-1])

    def __call__(self, x: float) -> float:
        return self.branches[self.branch_index(x)](x)

    def derivative(self, x: float) -> float:
        return self.derivatives[self.branch_index(x)](x)


def apply(p: AlphaBetaParams, x):
    """One step of T; exact inputs give exact output, floats give floats."""
    if isinstance(x, (Surd, Fraction, int)) and not isinstance(x, bool):
        x = Surd.coerce(x)
        if x < Surd(0) or x > Surd(1):
            raise RecurError("x must lie in [0, 1]")
        if x == Surd(1):
            return p.forward(Surd(1), p.m - 1)
        y = p.beta * x + p.alpha
        return y - y.floor()
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise RecurError(f"x must lie in [0, 1], got {x}")
    if x == 1.0:
        return p.b + p.a - (p.m - 1)
    y = p.b * x + p.a
    return y - math.floor(y)


def branch_intervals(p: AlphaBetaParams) -> list[tuple[float, float]]:
    c = [float(v) for v in p.boundaries()]
    return [(c[j], c[j + 1]) for j in range(p.m)]


@dataclass
class DigitTrace:
    x0: object
    digits: Word
    orbit: list
    flags: list[bool]

    @property
    def unreliable_from(self) -> Optional[int]:
        """1-based index of the first flagged digit, None if all are clean."""
        for i, f in enumerate(self.flags):
            if f:
                return i + 1
        return None


def _digit_exact(p: AlphaBetaParams, x: Surd) -> int:
    return min((p.beta * x + p.alpha).floor(), p.m - 1)


def digits(p: AlphaBetaParams, x, n: int, tol: float = TOL) -> DigitTrace:
    """First n (alpha, beta)-digits of x together with the orbit that produced them.

    Exact inputs (``Fraction``, ``Surd``, numeric strings) are iterated exactly
    and never flagged.  Float inputs are flagged from the first iterate that
    lies within ``tol`` of a branch endpoint.
    """
    if n < 1:
        raise RecurError("n must be positive")
    exact = isinstance(x, (Surd, Fraction, str))
    out, orbit, flags = [], [], []
    if exact:
        x = parse_number(x)
        if x < Surd(0) or not x < Surd(1):
            raise RecurError("x must lie in [0, 1)")
        for _ in range(n):
            j = _digit_exact(p, x)
            out.append(j)
            orbit.append(x)
            flags.append(False)
            x = p.forward(x, j)
        return DigitTrace(orbit[0], Word(bytes(out), p.m), orbit, flags)

    x = float(x)
    if not 0.0 <= x < 1.0:
        raise RecurError(f"x must lie in [0, 1), got {x}")
    c = [float(v) for v in p.boundaries()][1:-1]
    a, b, m = p.a, p.b, p.m
    bad = False
    x0 = x
    for _ in range(n):
        j = min(int(math.floor(b * x + a)), m - 1)
        bad = bad or any(abs(x - cj) < tol for cj in c)
        out.append(j)
        orbit.append(x)
        flags.append(bad)
        x = b * x + a - j
        if x < 0.0:
            x = 0.0
        elif x >= 1.0:
            x = math.nextafter(1.0, 0.0)
    return DigitTrace(x0, Word(bytes(out), m), orbit, flags)


def reconstruct(p: AlphaBetaParams, w: Word, exact: bool = False):
    """Partial sum of (e_k - alpha) / beta^k over the given digits."""
    if len(w) == 0:
        raise RecurError("need at least one digit")
    if exact:
        total, scale = Surd(0), Surd(1)
        for e in w:
            scale = scale / p.beta
            total = total + (Surd(e) - p.alpha) * scale
        return total
    a, b = p.a, p.b
    total, scale = 0.0, 1.0
    for e in w:
        scale /= b
        total += (e - a) * scale
    return total


def cylinder_interval_exact(p: AlphaBetaParams, w: Word) -> Optional[tuple[Surd, Surd]]:
    """Closure of the n-cylinder of w as exact endpoints, None when it is degenerate."""
    if w.m != p.m:
        raise RecurError(f"word alphabet {w.m} does not match map with {p.m} branches")
    lo, hi = Surd(0), Surd(1)
    for j in reversed(w.symbols):
        ilo, ihi = p.branch_image(j)
        lo, hi = max(lo, ilo), min(hi, ihi)
        if not lo < hi:
            return None
        lo, hi = p.backward(lo, j), p.backward(hi, j)
    return lo, hi


def cylinder_interval(p: AlphaBetaParams, w: Word) -> Optional[tuple[float, float]]:
    """Float view of :func:`cylinder_interval_exact`; None stands for Empty."""
    r = cylinder_interval_exact(p, w)
    return None if r is None else (float(r[0]), float(r[1]))


def lyapunov_sum(t, x: float, n: int, tol: float = TOL) -> float:
    """Birkhoff average (1/n) sum log|T'(T^k x)| along the orbit of x."""
    if isinstance(t, AlphaBetaParams):
        return math.log(t.b)
    if n < 1:
        raise RecurError("n must be positive")
    total = 0.0
    for _ in range(n):
        if t.near_endpoint(x, tol):
            raise RecurError(f"orbit hits a branch endpoint near {x}")
        total += math.log(abs(t.derivative(x)))
        x = t(x)
    return total / n


# -- transitivity certificate -------------------------------------------------


@dataclass
class CertificatePiece:
    itinerary: Word
    image: tuple[Surd, Surd]
    preimage: tuple[Surd, Surd]


@dataclass
class TransitivityResult:
    transitive: bool
    reason: str
    a0: tuple[Surd, Surd]
    steps: int = 0
    pieces: list[CertificatePiece] = field(default_factory=list)
    trail: list[tuple[float, float]] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "Transitive" if self.transitive else "Inconclusive"


def _pull_back(p: AlphaBetaParams, itinerary: Sequence[int], image: tuple[Surd, Surd]):
    lo, hi = image
    for j in reversed(itinerary):
        lo, hi = p.backward(lo, j), p.backward(hi, j)
    return lo, hi


def verify_piece(p: AlphaBetaParams, piece: CertificatePiece, a0: tuple[Surd, Surd]) -> bool:
    """Re-check a certificate piece by forward iteration of its preimage."""
    lo, hi = piece.preimage
    if not (a0[0] <= lo < hi <= a0[1]):
        return False
    c = p.boundaries()
    for j in piece.itinerary:
        if lo < c[j] or hi > c[j + 1]:
            return False
        lo, hi = p.forward(lo, j), p.forward(hi, j)
    return (lo, hi) == tuple(piece.image)


def check_transitive(p: AlphaBetaParams, a0=None, cap: int = 10_000) -> TransitivityResult:
    """Grow an open interval under T until some subinterval maps onto (0, 1).

    Splits at a discontinuity keep the larger piece (the right one on ties).
    For beta = 2 the walk also stops when it meets T(I_0) followed by T(I_2),
    or when it captures the fixed point 1 - alpha, after which the piece
    containing the fixed point is followed until it swallows the middle branch.
    """
    if a0 is None:
        a0 = (Fraction(3173, 10000), Fraction(3193, 10000))
    a0 = (parse_number(a0[0]), parse_number(a0[1]))
    if p.beta < Surd(2):
        return TransitivityResult(False, "beta < 2: outside the covered parameter region", a0)
    c = p.boundaries()
    S = c[1:-1]
    if sum(1 for s in S if a0[0] < s < a0[1]) >= 2:
        raise RecurError("initial interval must not contain two discontinuities")
    full = p.full_branches()
    beta2 = p.beta == Surd(2)
    fixed = Surd(1) - p.alpha
    track_fixed = False
    lo, hi = a0
    itin: list[int] = []
    trail = [(float(lo), float(hi))]
    prev = None  # (itinerary length, interval) of the previous step

    def _full_piece(lo, hi):
        for j in full:
            if lo <= c[j] and c[j + 1] <= hi:
                return j
        return None

    for n in range(cap):
        j = _full_piece(lo, hi)
        if j is not None:
            it = Word(bytes(itin + [j]), p.m)
            image = (Surd(0), Surd(1))
            piece = CertificatePiece(it, image, _pull_back(p, it, image))
            return TransitivityResult(True, "covers a full branch", a0, n, [piece], trail)
        if beta2 and prev is not None:
            img0, img2 = p.branch_image(0), p.branch_image(p.m - 1)
            for first, second, label in ((img0, img2, "case (i)"), (img2, img0, "case (ii)")):
                if prev[1] == first and (lo, hi) == second:
                    pieces = []
                    for its, image in ((prev[0], first), (itin, second)):
                        w = Word(bytes(its), p.m)
                        pieces.append(CertificatePiece(w, image, _pull_back(p, its, image)))
                    return TransitivityResult(True, label, a0, n, pieces, trail)
        if beta2 and not track_fixed and lo < fixed < hi:
            track_fixed = True
        prev = (list(itin), (lo, hi))
        inside = [k for k in range(1, p.m) if lo < c[k] < hi]
        if not inside:
            j = next(k for k in range(p.m) if c[k] <= lo and hi <= c[k + 1])
            plo, phi = lo, hi
        else:
            pieces = []
            edges = [lo] + [c[k] for k in inside] + [hi]
            for a_, b_ in zip(edges, edges[1:]):
                k = next(k for k in range(p.m) if c[k] <= a_ and b_ <= c[k + 1])
                pieces.append((a_, b_, k))
            imgs = sorted((p.forward(a_, k), p.forward(b_, k), i) for i, (a_, b_, k) in enumerate(pieces))
            reach = Surd(0)
            for ilo, ihi, _ in imgs:
                if ilo > reach:
                    break
                reach = max(reach, ihi)
            if reach >= Surd(1):
                # the pieces of A_n already map onto [0, 1] between them
                cert = []
                for a_, b_, k in pieces:
                    w = Word(bytes(itin + [k]), p.m)
                    image = (p.forward(a_, k), p.forward(b_, k))
                    cert.append(CertificatePiece(w, image, _pull_back(p, w, image)))
                return TransitivityResult(True, "pieces of A_n cover [0, 1]", a0, n, cert, trail)
            if track_fixed:
                plo, phi, j = next(pc for pc in pieces if pc[0] < fixed < pc[1])
            else:
                # larger piece; on a tie the right-hand one
                best = max(range(len(pieces)), key=lambda i: (pieces[i][1] - pieces[i][0], i))
                plo, phi, j = pieces[best]
        itin.append(j)
        lo, hi = p.forward(plo, j), p.forward(phi, j)
        trail.append((float(lo), float(hi)))
    return TransitivityResult(False, f"iteration cap {cap} reached", a0, cap, [], trail)


def certificate_ok(p: AlphaBetaParams, res: TransitivityResult) -> bool:
    """Independent check: every piece verifies and the images cover [0, 1]."""
    if not res.transitive or not res.pieces:
        return False
    if not all(verify_piece(p, pc, res.a0) for pc in res.pieces):
        return False
    spans = sorted((pc.image for pc in res.pieces), key=lambda iv: iv[0])
    reach = Surd(0)
    for lo, hi in spans:
        if lo > reach:
            return False
        reach = max(reach, hi)
    return reach >= Surd(1)


def return_time_digits(p: AlphaBetaParams, x, n: int, horizon: int):
    """tau_{alpha,beta,n}(x): least k <= horizon with a repeat of the first n digits."""
    from .recurrence import first_return, Undetermined, NotFoundWithin

    if n < 1 or horizon < 1:
        raise RecurError("n and horizon must be positive")
    tr = digits(p, x, horizon + n)
    r = first_return(tr.digits, n)
    if isinstance(r, Undetermined):
        return NotFoundWithin(horizon)
    return r
