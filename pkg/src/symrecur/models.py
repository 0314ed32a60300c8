"""Concrete subshifts as deterministic follower automata.

Every model exposes ``initial_state``, ``step(state, symbol)`` (``None`` means
the extended word is not admissible) and ``state_key`` (a hashable description
of the follower set reached).  Admissibility, exact language counts and the
Markov diagram are all built on this interface.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Hashable, Iterable, Optional

from .errors import BudgetExceeded, RecurError
from .intervals import AlphaBetaParams
from .numbers import Surd
from .words import Word

MODEL_SCHEMA = "recur-model/1"
DEFAULT_BUDGET = 10**7


def budget(default: int = DEFAULT_BUDGET) -> int:
    """Enumeration cap; the ``RECUR_BUDGET`` environment variable overrides it."""
    raw = os.environ.get("RECUR_BUDGET")
    if raw is None:
        return default
    try:
        return int(float(raw))
    except ValueError as exc:
        raise RecurError(f"RECUR_BUDGET must be an integer, got {raw!r}") from exc


class SubshiftModel:
    kind = "abstract"
    m: int

    def initial_state(self):
        raise NotImplementedError

    def step(self, state, sym: int):
        raise NotImplementedError

    def state_key(self, state) -> Hashable:
        return state

    def follower(self, w: Word):
        """State reached after reading w, or None when w is not admissible."""
        self._check(w)
        s = self.initial_state()
        for c in w.symbols:
            s = self.step(s, c)
            if s is None:
                return None
        return s

    def admits(self, w: Word) -> bool:
        return self.follower(w) is not None

    def _check(self, w: Word) -> None:
        if w.m != self.m:
            raise RecurError(f"word alphabet {w.m} does not match model alphabet {self.m}")

    def to_config(self) -> dict:
        raise NotImplementedError


class Full(SubshiftModel):
    kind = "full"

    def __init__(self, m: int = 2):
        if m < 2:
            raise RecurError("alphabet size must be at least 2")
        self.m = m

    def initial_state(self):
        return 0

    def step(self, state, sym):
        return 0

    def to_config(self):
        return {"kind": "full", "m": self.m}


class SFT(SubshiftModel):
    """Shift of finite type given by a finite list of forbidden words."""

    kind = "sft"

    def __init__(self, m: int, forbidden: Iterable[Word]):
        self.m = m
        fw = []
        for w in forbidden:
            if not isinstance(w, Word):
                w = Word.parse(str(w), m)
            if len(w) == 0:
                raise RecurError("forbidden words must be non-empty")
            if w.m != m:
                raise RecurError("forbidden word alphabet mismatch")
            fw.append(w.symbols)
        self.forbidden = tuple(sorted(set(fw)))
        self.span = max((len(f) for f in self.forbidden), default=1)
        self._keys: dict = {}

    def initial_state(self):
        return b""

    def _clean_tail(self, ctx: bytes) -> bool:
        return not any(ctx.endswith(f) for f in self.forbidden)

    def step(self, state: bytes, sym: int):
        ctx = state + bytes((sym,))
        if not self._clean_tail(ctx):
            return None
        return ctx[-(self.span - 1):] if self.span > 1 else b""

    def state_key(self, state: bytes):
        # follower set is fixed by which continuations of length < span stay clean
        key = self._keys.get(state)
        if key is None:
            ok = []
            for n in range(self.span):
                for u in product(range(self.m), repeat=n):
                    s = state
                    for c in u:
                        s2 = s + bytes((c,))
                        if not self._clean_tail(s2):
                            break
                        s = s2
                    else:
                        ok.append(bytes(u))
            key = frozenset(ok)
            self._keys[state] = key
        return key

    def to_config(self):
        return {"kind": "sft", "m": self.m,
                "forbidden": [Word(f, self.m).format() for f in self.forbidden]}


class SGap(SubshiftModel):
    """Binary S-gap shift.  S is a finite set, optionally joined with {s >= s_min}.

    The state is the set of run lengths still reachable, shifted by the zeros
    read so far; it is also the canonical follower-set key.
    """

    kind = "sgap"

    def __init__(self, S: Iterable[int] = (), s_min: Optional[int] = None):
        self.m = 2
        self.S = frozenset(int(s) for s in S)
        if any(s < 0 for s in self.S) or (s_min is not None and s_min < 0):
            raise RecurError("gap lengths must be non-negative")
        if s_min is not None:
            self.S = frozenset(s for s in self.S if s < s_min)
        self.s_min = s_min
        if not self.S and s_min is None:
            raise RecurError("S must be non-empty")

    def contains(self, s: int) -> bool:
        return s in self.S or (self.s_min is not None and s >= self.s_min)

    def _full(self):
        return (self.S, self.s_min)

    def initial_state(self):
        # a leading run only needs some s >= its length
        if self.s_min is not None:
            return (frozenset(), 0)
        return (frozenset(range(max(self.S) + 1)), None)

    def step(self, state, sym):
        fin, thr = state
        if sym == 1:
            return self._full() if (0 in fin or thr == 0) else None
        fin2 = frozenset(x - 1 for x in fin if x >= 1)
        thr2 = None if thr is None else max(thr - 1, 0)
        if thr2 is not None:
            fin2 = frozenset(x for x in fin2 if x < thr2)
        if not fin2 and thr2 is None:
            return None
        return (fin2, thr2)

    def to_config(self):
        cfg = {"kind": "sgap", "m": 2, "S": {"set": sorted(self.S)}}
        if self.s_min is not None:
            cfg["S"]["min"] = self.s_min
        return cfg


class Coded(SubshiftModel):
    """Closure of bi-infinite concatenations of a finite generator list.

    The state is the set of generator positions consistent with the word read
    so far (subset construction over the position automaton), which decides
    admissibility exactly.
    """

    kind = "coded"

    def __init__(self, m: int, generators: Iterable[Word]):
        self.m = m
        gens = []
        for g in generators:
            if not isinstance(g, Word):
                g = Word.parse(str(g), m)
            if len(g) == 0:
                raise RecurError("generators must be non-empty")
            if g.m != m:
                raise RecurError("generator alphabet mismatch")
            gens.append(g.symbols)
        if not gens:
            raise RecurError("need at least one generator")
        self.generators = tuple(sorted(set(gens)))
        self._starts = frozenset((g, 0) for g in range(len(self.generators)))
        self._all = frozenset((g, i) for g, s in enumerate(self.generators) for i in range(len(s)))
        self._memo: dict = {}

    def initial_state(self):
        return self._all

    def step(self, state, sym):
        hit = self._memo.get((state, sym))
        if hit is None:
            nxt = set()
            for g, i in state:
                gen = self.generators[g]
                if gen[i] == sym:
                    if i + 1 == len(gen):
                        nxt |= self._starts
                    else:
                        nxt.add((g, i + 1))
            hit = frozenset(nxt) if nxt else False
            self._memo[(state, sym)] = hit
        return hit or None

    def at_boundary(self, state) -> bool:
        return state == self._starts

    def to_config(self):
        return {"kind": "coded", "m": self.m,
                "generators": [Word(g, self.m).format() for g in self.generators]}


class IntervalCoding(SubshiftModel):
    """Coding space of an alpha-beta map; the state is T^n of the cylinder closure."""

    kind = "interval"

    def __init__(self, params: AlphaBetaParams, alpha_text: Optional[str] = None,
                 beta_text: Optional[str] = None):
        self.params = params
        self.m = params.m
        self._c = params.boundaries()
        self._texts = (alpha_text, beta_text)
        self._memo: dict = {}

    def initial_state(self):
        return (Surd(0), Surd(1))

    def step(self, state, sym):
        key = (self.state_key(state), sym)
        if key in self._memo:
            return self._memo[key]
        lo, hi = state
        lo, hi = max(lo, self._c[sym]), min(hi, self._c[sym + 1])
        out = (self.params.forward(lo, sym), self.params.forward(hi, sym)) if lo < hi else None
        if len(self._memo) < 100_000:
            self._memo[key] = out
        return out

    def state_key(self, state):
        return (state[0].key(), state[1].key())

    def to_config(self):
        a, b = self._texts
        return {"kind": "interval", "m": self.m, "interval_map": {
            "alpha": a if a is not None else str(self.params.alpha.a) if self.params.alpha.d == 0 else repr(self.params.alpha),
            "beta": b if b is not None else str(self.params.beta.a) if self.params.beta.d == 0 else repr(self.params.beta),
        }}


# -- language ------------------------------------------------------------------


@dataclass
class LanguageSlice:
    n: int
    words: list[Word]
    count: int


def count_words(model: SubshiftModel, n: int, max_states: Optional[int] = None) -> int:
    """#L_n by dynamic programming over follower states (exact: the automaton is deterministic)."""
    if n < 0:
        raise RecurError("n must be non-negative")
    cap = max_states if max_states is not None else budget()
    layer = {model.state_key(model.initial_state()): (model.initial_state(), 1)}
    for _ in range(n):
        nxt: dict = {}
        for state, c in layer.values():
            for j in range(model.m):
                s2 = model.step(state, j)
                if s2 is None:
                    continue
                k = model.state_key(s2)
                if k in nxt:
                    nxt[k] = (nxt[k][0], nxt[k][1] + c)
                else:
                    nxt[k] = (s2, c)
        if len(nxt) > cap:
            raise BudgetExceeded(f"follower-state count {len(nxt)} exceeds budget {cap}")
        layer = nxt
    return sum(c for _, c in layer.values())


def enumerate_language(model: SubshiftModel, n: int, cap: Optional[int] = None) -> LanguageSlice:
    """All admissible words of length n in lexicographic order."""
    cap = cap if cap is not None else budget()
    if n < 0:
        raise RecurError("n must be non-negative")
    if n > 0 and n * math.log(model.m) > math.log(cap):
        total = count_words(model, n)
        if total > cap:
            raise BudgetExceeded(f"#L_{n} = {total} exceeds the enumeration budget {cap}")
    out: list[Word] = []
    buf = bytearray()

    def rec(state, depth):
        if depth == n:
            out.append(Word(bytes(buf), model.m))
            return
        for j in range(model.m):
            s2 = model.step(state, j)
            if s2 is not None:
                buf.append(j)
                rec(s2, depth + 1)
                buf.pop()

    rec(model.initial_state(), 0)
    return LanguageSlice(n, out, len(out))


@dataclass
class EntropyEstimate:
    series: list[tuple[int, int, float]]  # (n, #L_n, log(#L_n)/n)

    @property
    def estimate(self) -> float:
        return self.series[-1][2]


def entropy_estimate(model: SubshiftModel, n_max: int) -> EntropyEstimate:
    if n_max < 1:
        raise RecurError("n_max must be at least 1")
    series = []
    cap = budget()
    layer = {model.state_key(model.initial_state()): (model.initial_state(), 1)}
    for n in range(1, n_max + 1):
        nxt: dict = {}
        for state, c in layer.values():
            for j in range(model.m):
                s2 = model.step(state, j)
                if s2 is None:
                    continue
                k = model.state_key(s2)
                prev = nxt.get(k)
                nxt[k] = (s2, c + (prev[1] if prev else 0))
        if len(nxt) > cap:
            raise BudgetExceeded(f"follower-state count {len(nxt)} exceeds budget {cap}")
        layer = nxt
        total = sum(c for _, c in layer.values())
        if total == 0:
            raise RecurError(f"language is empty at length {n}")
        series.append((n, total, math.log(total) / n))
    return EntropyEstimate(series)


# -- configuration ---------------------------------------------------------------


def model_from_config(cfg: dict) -> SubshiftModel:
    schema = cfg.get("schema", MODEL_SCHEMA)
    if schema != MODEL_SCHEMA:
        raise RecurError(f"unsupported model schema {schema!r}")
    kind = cfg.get("kind")
    m = int(cfg.get("m", 2))
    if kind == "full":
        return Full(m)
    if kind == "sft":
        return SFT(m, [Word.parse(str(w), m) for w in cfg.get("forbidden", [])])
    if kind == "sgap":
        if m != 2:
            raise RecurError("S-gap shifts use the binary alphabet")
        S = cfg.get("S", {})
        return SGap(S.get("set", []), S.get("min"))
    if kind == "coded":
        return Coded(m, [Word.parse(str(w), m) for w in cfg.get("generators", [])])
    if kind == "interval":
        im = cfg.get("interval_map", {})
        if "alpha" not in im or "beta" not in im:
            raise RecurError("interval_map needs alpha and beta")
        p = AlphaBetaParams(str(im["alpha"]), str(im["beta"]))
        if "m" in cfg and m != p.m:
            raise RecurError(f"m={m} does not match the {p.m} branches of the map")
        return IntervalCoding(p, str(im["alpha"]), str(im["beta"]))
    raise RecurError(f"unknown model kind {kind!r}")


def model_to_config(model: SubshiftModel) -> dict:
    return {"schema": MODEL_SCHEMA, **model.to_config()}


def load_model(path) -> SubshiftModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise RecurError(f"cannot read model file {path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RecurError(f"model file {path} is not valid JSON: {exc.msg}") from exc
    if cfg.get("schema") != MODEL_SCHEMA:
        raise RecurError(f"model file must declare schema {MODEL_SCHEMA!r}")
    return model_from_config(cfg)


def save_model(model: SubshiftModel, path) -> None:
    cfg = model_to_config(model)
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in cfg.items())
    Path(path).write_text("{\n" + body + "\n}\n")


def sample_word(model: SubshiftModel, length: int, rng) -> Word:
    """Random admissible word: each symbol uniform among those the follower state allows."""
    if length < 0:
        raise RecurError("length must be non-negative")
    s = model.initial_state()
    out = bytearray()
    for i in range(length):
        nxt = [(j, s2) for j in range(model.m) if (s2 := model.step(s, j)) is not None]
        if not nxt:
            raise RecurError(f"no admissible continuation after {i} symbols")
        j, s = nxt[int(rng.integers(len(nxt)))]
        out.append(j)
    return Word(bytes(out), model.m)
