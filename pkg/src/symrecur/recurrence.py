"""First-return times into n-cylinders and recurrence-rate statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import RecurError
from .words import Word


@dataclass(frozen=True)
class Undetermined:
    """No return is visible in the prefix; tau is at least ``lower_bound``."""

    lower_bound: int


@dataclass(frozen=True)
class NotFoundWithin:
    horizon: int


Tau = Union[int, Undetermined]


def _raw(x) -> bytes:
    return x.symbols if isinstance(x, Word) else bytes(x)


def first_return(x, n: int, start: int = 1) -> Tau:
    """Least k >= 1 with x_{i+k} = x_i for i = 1..n, decided inside the prefix.

    ``start`` lets callers skip shifts already known to fail (tau is
    non-decreasing in n).
    """
    if n < 1:
        raise RecurError("n must be at least 1")
    s = _raw(x)
    if n >= len(s):
        return Undetermined(1)
    k = s.find(s[:n], max(start, 1))
    if k < 0:
        return Undetermined(len(s) - n + 1)
    return k


@dataclass
class TraceEntry:
    n: int
    tau: Tau

    @property
    def determined(self) -> bool:
        return isinstance(self.tau, int)

    @property
    def ratio(self) -> Optional[float]:
        return math.log(self.tau) / self.n if self.determined else None


@dataclass
class RecurrenceTrace:
    length: int
    entries: list[TraceEntry]

    def ratios(self) -> list[Optional[float]]:
        return [e.ratio for e in self.entries]


def trace(x, n_max: int) -> RecurrenceTrace:
    if n_max < 1:
        raise RecurError("n_max must be at least 1")
    s = _raw(x)
    out = []
    k = 1
    for n in range(1, n_max + 1):
        t = first_return(s, n, start=k)
        if isinstance(t, int):
            k = t
        out.append(TraceEntry(n, t))
    return RecurrenceTrace(len(s), out)


def rate_bounds(tr: RecurrenceTrace, tail_start: int) -> tuple[float, float]:
    """Windowed min and max of log(tau_n)/n over n >= tail_start."""
    n_max = tr.entries[-1].n
    if not 1 <= tail_start <= n_max:
        raise RecurError(f"tail_start must lie in [1, {n_max}]")
    tail = [e for e in tr.entries if e.n >= tail_start]
    bad = [e.n for e in tail if not e.determined]
    if bad:
        raise RecurError(f"undetermined return time at n={bad[0]} inside the window")
    rs = [e.ratio for e in tail]
    return min(rs), max(rs)


# -- Ornstein-Weiss experiment ---------------------------------------------------


class BernoulliSampler:
    def __init__(self, probs: Sequence[float]):
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or len(p) < 2 or np.any(p < 0) or not math.isclose(p.sum(), 1.0, abs_tol=1e-9):
            raise RecurError("probabilities must be >= 0, at least two, and sum to 1")
        self.p = p / p.sum()
        self.m = len(p)
        self._cdf = np.cumsum(self.p)
        self._cdf[-1] = 1.0

    def entropy(self) -> float:
        q = self.p[self.p > 0]
        return float(-(q * np.log(q)).sum())

    def stream(self, rng: np.random.Generator):
        def draw(size: int) -> bytes:
            u = rng.random(size)
            return np.searchsorted(self._cdf, u, side="right").astype(np.uint8).tobytes()
        return draw


class MarkovSampler:
    """Stationary Markov chain; the first symbol is drawn from the stationary law."""

    def __init__(self, P, init: Optional[Sequence[float]] = None):
        P = np.asarray(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise RecurError("transition matrix must be square with at least two states")
        if np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0):
            raise RecurError("transition rows must be probability vectors")
        self.P = P
        self.m = P.shape[0]
        self.pi = np.asarray(init, dtype=float) if init is not None else self.stationary()
        self._cdf = np.cumsum(P, axis=1)
        self._cdf[:, -1] = 1.0

    def stationary(self) -> np.ndarray:
        w, v = np.linalg.eig(self.P.T)
        i = int(np.argmin(np.abs(w - 1.0)))
        pi = np.real(v[:, i])
        return pi / pi.sum()

    def entropy(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(self.P > 0, np.log(np.where(self.P > 0, self.P, 1.0)), 0.0)
        return float(-(self.pi[:, None] * self.P * logs).sum())

    def stream(self, rng: np.random.Generator):
        state = {"s": None}
        cdf0 = np.cumsum(self.pi)
        cdf0[-1] = 1.0

        def draw(size: int) -> bytes:
            u = rng.random(size)
            out = bytearray(size)
            s = state["s"]
            for i in range(size):
                row = cdf0 if s is None else self._cdf[s]
                s = int(np.searchsorted(row, u[i], side="right"))
                out[i] = s
            state["s"] = s
            return bytes(out)
        return draw


@dataclass
class OWSummary:
    n: int
    ratios: list[float]
    censored: list[bool]
    entropy: float

    @property
    def median(self) -> float:
        return float(np.median(self.ratios))

    @property
    def mean(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def iqr(self) -> float:
        q1, q3 = np.percentile(self.ratios, [25, 75])
        return float(q3 - q1)

    @property
    def censored_fraction(self) -> float:
        return sum(self.censored) / len(self.censored)


def _sample_tau(draw, n: int, horizon: int) -> Tau:
    buf = bytearray(draw(max(4 * n, 256)))
    while True:
        limit = min(len(buf), horizon + n)
        k = bytes(buf[:limit]).find(bytes(buf[:n]), 1)
        if k > 0:
            return k
        if limit >= horizon + n:
            return Undetermined(horizon + 1)
        buf += draw(min(len(buf), horizon + n - len(buf)))


def ornstein_weiss_experiment(sampler, n: int, num_samples: int, horizon: int,
                              seed: int) -> OWSummary:
    """log(tau_n)/n for independent samples; censored samples report log(horizon)/n."""
    if n < 1 or num_samples < 1 or horizon < 1:
        raise RecurError("n, num_samples and horizon must be positive")
    children = np.random.SeedSequence(seed).spawn(num_samples)
    ratios, cens = [], []
    for ss in children:
        tau = _sample_tau(sampler.stream(np.random.Generator(np.random.PCG64(ss))), n, horizon)
        if isinstance(tau, Undetermined):
            ratios.append(math.log(horizon) / n)
            cens.append(True)
        else:
            ratios.append(math.log(tau) / n)
            cens.append(False)
    return OWSummary(n, ratios, cens, sampler.entropy())
