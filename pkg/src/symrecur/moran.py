"""Seed sets, the Moran-point constructor and its verification.

A seed point is ``x = v* w^1 v^1 w^2 v^2 ...`` with blocks ``v^i`` from Q_k and
connectors of length at most t.  The constructed point ``y(x)`` copies a long
prefix of itself back into the sequence at the checkpoint levels M_p, which
pins the first-return time of that prefix to roughly e^{gamma_p ell_p}.
"""
from __future__ import annotations

import bisect
import hashlib
import json
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .diagram import Decomposition, connect_from_state, decompose, in_good_set
from .errors import BudgetExceeded, NotFound, RecurError
from .models import Full, IntervalCoding, budget, enumerate_language, model_from_config, model_to_config
from .recurrence import first_return
from .schedules import Schedule
from .words import Word

LEDGER_SCHEMA = "recur-ledger/1"
WORD_SCHEMA = "recur-word/1"
SEED_MAX = 2**64
BLOCK_CHUNK = 4096


def _fmt(b: bytes, m: int) -> str:
    return Word(b, m).format(cli=True)


def _unbordered(w: bytes) -> bool:
    return all(w[:i] != w[-i:] for i in range(1, len(w)))


def _run(model, s, word: bytes):
    for c in word:
        s = model.step(s, c)
        if s is None:
            return None
    return s


def check_seed(seed) -> int:
    try:
        if isinstance(seed, float) and not seed.is_integer():
            raise ValueError(seed)
        s = int(seed)
    except (TypeError, ValueError) as exc:
        raise RecurError(f"seed must be an integer, got {seed!r}") from exc
    if not 0 <= s < SEED_MAX:
        raise RecurError("seed must be an unsigned 64-bit integer")
    return s


# -- seed configuration --------------------------------------------------------


@dataclass
class SeedConfig:
    decomposition: Decomposition
    k: int
    t: int
    Q: list[bytes]
    v_star: bytes
    good_count: int
    u_star: bytes = b""
    eps: float = 0.01
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.Q)}

    @property
    def model(self):
        return self.decomposition.model

    @property
    def m(self) -> int:
        return self.model.m

    def __contains__(self, v: bytes) -> bool:
        return v in self.index


def _good_words(dec: Decomposition, k: int, cap: Optional[int]) -> list[bytes]:
    sl = enumerate_language(dec.model, k, cap)
    return [w.symbols for w in sl.words if in_good_set(dec, w)]


def _prune(good: list[bytes], v_star: bytes, k: int) -> list[bytes]:
    top = (2 * k) // 3 + 1
    out = []
    for v in good:
        bad = False
        for i in range(1, top + 1):
            r = k - i + 1
            if r <= 0:
                break
            if v[-r:] == v_star[:r] or v[:r] == v_star[-r:]:
                bad = True
                break
        if not bad:
            out.append(v)
    return out


def _connector_words(m: int, t: int) -> list[bytes]:
    return [bytes(w) for n in range(t + 1) for w in product(range(m), repeat=n)]


def seed_property_violation(cfg: SeedConfig) -> Optional[tuple[bytes, bytes, bytes]]:
    """A triple (u, w, v) with v* inside u w v, or None when the seed property holds.

    u ranges over Q_k and v*, v over Q_k and w over all words of length at most t
    for which u w v is admissible.  A window of length k meets at most two blocks,
    so this is exhaustive.
    """
    model, k, vs = cfg.model, cfg.k, cfg.v_star
    if vs in cfg.index:
        return (vs, b"", b"")
    lefts: dict[bytes, list[bytes]] = {}
    for u in [vs] + cfg.Q:
        lefts.setdefault(u[1:], []).append(u)
    rights: dict[bytes, list[bytes]] = {}
    for v in cfg.Q:
        rights.setdefault(v[:-1], []).append(v)
    ws = _connector_words(cfg.m, cfg.t)
    for su, us in lefts.items():
        for w in ws:
            for pv, vlist in rights.items():
                window = su + w + pv
                if vs not in window:
                    continue
                for u in us:
                    s = _run(model, model.initial_state(), u + w)
                    if s is None:
                        continue
                    for v in vlist:
                        if _run(model, s, v) is not None:
                            return (u, w, v)
    return None


def _try_build(dec, k, t, cap, eps) -> Optional[SeedConfig]:
    good = sorted(_good_words(dec, k, cap))
    cands = [v for v in good if _unbordered(v)]
    if not cands:
        return None
    v_star = cands[0]
    Q = _prune(good, v_star, k)
    if not Q:
        return None
    cfg = SeedConfig(dec, k, t, Q, v_star, len(good), eps=eps)
    if seed_property_violation(cfg) is not None:
        return None
    return cfg


def build_qk(dec: Decomposition, k: int, selection_budget: Optional[int] = None,
             t: Optional[int] = None, eps: float = 0.01, scan: int = 16) -> SeedConfig:
    """Q_k, v* and the pruning of the seed construction.

    v* is the lexicographically least unbordered good word of length k; Q_k is
    what survives the prefix/suffix pruning against v*.
    """
    t = dec.t if t is None else t
    if k <= 3 * t:
        raise RecurError(f"k={k} must exceed 3t={3 * t}")
    cap = selection_budget if selection_budget is not None else budget()
    cfg = _try_build(dec, k, t, cap, eps)
    if cfg is not None:
        return cfg
    for k2 in range(k + 1, k + scan + 1):
        try:
            if _try_build(dec, k2, t, cap, eps) is not None:
                raise RecurError(f"Q_k is empty or fails the seed property for k={k}; "
                                 f"smallest passing k is {k2}")
        except BudgetExceeded:
            break
    raise RecurError(f"Q_k is empty or fails the seed property for k={k}; no passing k up to {k + scan}")


# -- construction ----------------------------------------------------------------


@dataclass
class InsertionEvent:
    p: int
    M: int
    log_target: float  # gamma_p * ell_p
    ell: float
    seed_length: int  # |v* w^1 v^1 ... w^M v^M|
    theta_len: int
    lam: int  # index into Q_k
    w1: bytes
    w2: bytes
    w3: bytes
    tau_pred: int  # |y_M w^{p,1}|
    s_p: int

    def to_json(self, m: int) -> dict:
        return {"p": self.p, "M": self.M, "log_target": self.log_target, "ell": self.ell,
                "seed_length": self.seed_length, "theta_len": self.theta_len, "lam": self.lam,
                "w1": _fmt(self.w1, m), "w2": _fmt(self.w2, m), "w3": _fmt(self.w3, m),
                "tau_pred": self.tau_pred, "s_p": self.s_p}

    @classmethod
    def from_json(cls, d: dict, m: int) -> "InsertionEvent":
        return cls(int(d["p"]), int(d["M"]), float(d["log_target"]), float(d["ell"]), int(d["seed_length"]),
                   int(d["theta_len"]), int(d["lam"]), Word.parse(d["w1"], m).symbols,
                   Word.parse(d["w2"], m).symbols, Word.parse(d["w3"], m).symbols,
                   int(d["tau_pred"]), int(d["s_p"]))


def _reached(length: int, log_target: float) -> bool:
    """length >= e^{log_target}, compared in log space."""
    return math.log(length) >= log_target


class _Builder:
    """Incremental y_q(x); one ``push`` appends v^{q+1}."""

    def __init__(self, cfg: SeedConfig, schedule: Optional[Schedule], allow_exhaustion: bool):
        self.cfg = cfg
        self.schedule = schedule
        self.allow_exhaustion = allow_exhaustion
        model = cfg.model
        self.trivial = isinstance(model, Full)
        self.y = bytearray(cfg.v_star)
        self.ys = None if self.trivial else _run(model, model.initial_state(), cfg.v_star)
        self.xs = self.ys
        self.L = cfg.k
        self.q = 0
        self.p_next = 0
        self.blocks: list[int] = []
        self.x_conn: dict[int, bytes] = {}
        self.y_conn: dict[int, bytes] = {}
        self.events: list[InsertionEvent] = []
        self.case2_levels: set[int] = set()
        if schedule is not None and len(schedule) and _reached(cfg.k, schedule.log_target(0)):
            raise RecurError("e^{gamma_1 ell_1} must exceed k; shift the schedule first")

    def clone(self) -> "_Builder":
        b = object.__new__(_Builder)
        b.__dict__.update(self.__dict__)
        b.y = bytearray(self.y)
        b.blocks = list(self.blocks)
        b.x_conn = dict(self.x_conn)
        b.y_conn = dict(self.y_conn)
        b.events = list(self.events)
        b.case2_levels = set(self.case2_levels)
        return b

    def _connect(self, s, v: bytes, left: str) -> bytes:
        if self.trivial:
            return b""
        w = connect_from_state(self.cfg.model, s, v, self.cfg.t)
        if w is None:
            raise NotFound(f"no connector of length <= {self.cfg.t} after {left} before "
                           f"{_fmt(v, self.cfg.m)}")
        return w

    def _advance(self, s, word: bytes):
        return None if self.trivial else _run(self.cfg.model, s, word)

    def _checkpoint_here(self) -> Optional[int]:
        """Index of the checkpoint with M_p = q, if any."""
        s = self.schedule
        if s is None or self.p_next >= len(s):
            return None
        ge = s.log_target(self.p_next)
        if not _reached(self.L, ge):
            return None
        if self.q > 0 and _reached(self._prev_L, ge):
            raise RecurError(f"checkpoints p={self.p_next} and p={self.p_next + 1} share M_p; "
                             "the schedule violates the spacing condition")
        if self.p_next + 1 < len(s) and _reached(self.L, s.log_target(self.p_next + 1)):
            raise RecurError(f"checkpoints p={self.p_next + 1} and p={self.p_next + 2} share M_p; "
                             "the schedule violates the spacing condition")
        return self.p_next

    def push(self, idx: int) -> None:
        cfg = self.cfg
        k, t = cfg.k, cfg.t
        v = cfg.Q[idx]
        s = self.schedule
        if (s is not None and self.p_next >= len(s) and not self.allow_exhaustion):
            raise RecurError(f"schedule exhausted at |y|={len(self.y)}; generate more terms")
        pi = self._checkpoint_here()
        y = self.y
        if pi is None:
            w = self._connect(self.ys, v, "y_q")
            if w:
                self.y_conn[self.q + 1] = w
            y += w + v
            self.ys = self._advance(self.ys, w + v)
        else:
            ell = float(s.ell[pi])
            lo = max(k, math.ceil(ell))
            theta_len = None
            n = lo
            while n < ell + k + t and n <= len(y):
                if bytes(y[n - k:n]) in cfg.index:
                    theta_len = n
                    break
                n += 1
            if theta_len is None:
                raise RecurError(f"no admissible theta for p={pi + 1}: y_q has length {len(y)}, "
                                 f"window [{lo}, {ell + k + t:.6g})")
            theta = bytes(y[:theta_len])
            th_state = None if self.trivial else _run(cfg.model, cfg.model.initial_state(), theta)
            w1 = self._connect(self.ys, theta, "y_q")
            s1 = self._advance(self.ys, w1 + theta)
            lam = None
            conns = _connector_words(cfg.m, t)
            for li, cand in enumerate(cfg.Q):
                ok = True
                for w in conns:
                    tail = w + cand
                    if not self.trivial and _run(cfg.model, th_state, tail) is None:
                        continue
                    if bytes(y[theta_len:theta_len + len(tail)]) == tail:
                        ok = False
                        break
                if ok:
                    lam = li
                    break
            if lam is None:
                raise RecurError(f"no lambda in Q_k avoids the prefix of y_q at p={pi + 1}")
            lam_w = cfg.Q[lam]
            w2 = self._connect(s1, lam_w, "theta")
            s2 = self._advance(s1, w2 + lam_w)
            w3 = self._connect(s2, v, "lambda")
            tau_pred = len(y) + len(w1)
            probe = theta + w2 + lam_w
            sp = theta_len
            while sp < len(probe) and sp < len(y) and probe[sp] == y[sp]:
                sp += 1
            ev = InsertionEvent(pi + 1, self.q, s.log_target(pi), ell, self.L, theta_len, lam,
                                w1, w2, w3, tau_pred, sp)
            self.events.append(ev)
            self.case2_levels.add(self.q)
            add = w1 + theta + w2 + lam_w + w3 + v
            y += add
            self.ys = self._advance(self.ys, add)
            self.p_next += 1
        # seed side
        wx = self._connect(self.xs, v, "x_q")
        if wx:
            self.x_conn[self.q + 1] = wx
        self.xs = self._advance(self.xs, wx + v)
        self._prev_L = self.L
        self.L += len(wx) + k
        self.blocks.append(idx)
        self.q += 1


class BlockStream:
    """Seeded selector of Q_k indices, drawn in fixed-size chunks."""

    def __init__(self, n: int, seed: int):
        self.n = n
        self.rng = np.random.Generator(np.random.PCG64(check_seed(seed)))
        self.buf: list[int] = []
        self.pos = 0

    def __next__(self) -> int:
        if self.pos >= len(self.buf):
            self.buf = self.rng.integers(0, self.n, size=BLOCK_CHUNK).tolist()
            self.pos = 0
        self.pos += 1
        return self.buf[self.pos - 1]

    def __iter__(self):
        return self


@dataclass
class MoranPoint:
    config: SeedConfig
    schedule: Optional[Schedule]
    seed: int
    target: int
    prefix: bytes
    blocks: list[int]
    x_connectors: dict[int, bytes]
    y_connectors: dict[int, bytes]
    events: list[InsertionEvent]

    @property
    def checkpoints(self) -> list[tuple[int, int, float]]:
        return [(e.p, e.theta_len, e.log_target) for e in self.events]

    def digest(self) -> str:
        return hashlib.sha256(self.prefix).hexdigest()


def construct_point(cfg: SeedConfig, schedule: Optional[Schedule], target_length: int, seed: int,
                    allow_exhaustion: bool = False) -> MoranPoint:
    """Build y(x) until its prefix reaches ``target_length`` symbols."""
    if target_length < 1:
        raise RecurError("target length must be positive")
    seed = check_seed(seed)
    b = _Builder(cfg, schedule, allow_exhaustion)
    stream = BlockStream(len(cfg.Q), seed)
    while len(b.y) < target_length:
        b.push(next(stream))
    return MoranPoint(cfg, schedule, seed, target_length, bytes(b.y), b.blocks, b.x_conn, b.y_conn, b.events)


def seed_prefix(cfg: SeedConfig, length: int, seed: int) -> bytes:
    """Prefix of the seed point x (no insertions) with at least ``length`` symbols."""
    b = _Builder(cfg, None, True)
    stream = BlockStream(len(cfg.Q), seed)
    while len(b.y) < length:
        b.push(next(stream))
    return bytes(b.y)


def replay_prefix(cfg: SeedConfig, blocks: Sequence[int], y_connectors: dict, events: Sequence[InsertionEvent]) -> bytes:
    """Rebuild y from the ledger alone."""
    y = bytearray(cfg.v_star)
    ev = {e.M: e for e in events}
    for q, idx in enumerate(blocks):
        v = cfg.Q[idx]
        e = ev.get(q)
        if e is None:
            y += y_connectors.get(q + 1, b"") + v
        else:
            theta = bytes(y[:e.theta_len])
            y += e.w1 + theta + e.w2 + cfg.Q[e.lam] + e.w3 + v
    return bytes(y)


# -- verification -----------------------------------------------------------------


@dataclass
class CheckpointRow:
    p: int
    n: int
    tau: Optional[int]
    tau_pred: int
    log_target: float
    upper: float
    equal: bool
    sandwich: bool
    constant: Optional[bool]

    @property
    def ratio(self) -> Optional[float]:
        return math.log(self.tau) / self.n if self.tau else None


@dataclass
class VerifyReport:
    rows: list[CheckpointRow]
    failures: list[str]
    head_mismatches: int
    ledger_ok: bool

    @property
    def passed(self) -> bool:
        return not self.failures

    def last_ratio(self, parity: int) -> Optional[float]:
        """Ratio at the last checkpoint with p % 2 == parity."""
        for r in reversed(self.rows):
            if r.p % 2 == parity and r.tau is not None:
                return r.ratio
        return None


def verify_point(point: MoranPoint) -> VerifyReport:
    """Exact checkpoint equality, the sandwich bound and piecewise constancy of tau_n."""
    cfg, y = point.config, point.prefix
    k, t = cfg.k, cfg.t
    failures: list[str] = []
    ledger_ok = replay_prefix(cfg, point.blocks, point.y_connectors, point.events)[:len(y)] == y
    if not ledger_ok:
        failures.append("ledger does not re-parse the prefix")
    rows: list[CheckpointRow] = []
    ell_sum = 0.0
    evs = point.events
    for i, e in enumerate(evs):
        tau = first_return(y, e.theta_len)
        tau = tau if isinstance(tau, int) else None
        upper = math.exp(e.log_target) + k + t + ell_sum + i * (2 * k + 4 * t)
        equal = tau == e.tau_pred
        sandwich = tau is not None and _reached(tau, e.log_target) and tau <= upper
        # tau_n is tau at theta^p on N_1(p) = [theta_p, s_p] and tau at theta^{p+1} on N_2(p)
        const = True
        hint = 1
        for n in range(e.theta_len, e.s_p + 1):
            r = first_return(y, n, start=hint)
            if r != tau:
                const = False
                failures.append(f"tau_n != tau at p={e.p} for n={n} in N_1")
                break
            hint = r
        if const and i + 1 < len(evs):
            nxt = evs[i + 1]
            tau_next = nxt.tau_pred
            for n in range(e.s_p + 1, nxt.theta_len):
                r = first_return(y, n, start=hint)
                if r != tau_next:
                    const = False
                    failures.append(f"tau_n != tau at p={nxt.p} for n={n} in N_2")
                    break
                hint = r
        if not equal:
            failures.append(f"checkpoint p={e.p}: tau at n={e.theta_len} is {tau}, ledger predicts {e.tau_pred}")
        if not sandwich:
            failures.append(f"checkpoint p={e.p}: tau={tau} outside [e^{e.log_target:.6g}, {upper:.6g}]")
        rows.append(CheckpointRow(e.p, e.theta_len, tau, e.tau_pred, e.log_target, upper, equal, sandwich, const))
        ell_sum += e.ell
    head = 0
    if evs:
        tau1 = evs[0].tau_pred
        head = sum(1 for n in range(1, evs[0].theta_len) if first_return(y, n) != tau1)
    return VerifyReport(rows, failures, head, ledger_ok)


# -- ledger I/O ------------------------------------------------------------------


def _schedule_json(s: Optional[Schedule]) -> Optional[dict]:
    if s is None:
        return None
    return {"case": s.case, "a": s.a, "b": s.b, "index_shift": s.index_shift, "note": s.note,
            "log_ell": s.log_ell.tolist(), "log_gamma": s.log_gamma.tolist(),
            "log_gamma_ell": s.log_gamma_ell.tolist(), "log_gap": s.log_gap.tolist(),
            "log_increment": s.log_increment.tolist(), "log_d": s.log_d.tolist()}


def _schedule_from_json(d: Optional[dict]) -> Optional[Schedule]:
    if d is None:
        return None
    arr = {k: np.asarray(d[k], dtype=float) for k in
           ("log_ell", "log_gamma", "log_gamma_ell", "log_gap", "log_increment", "log_d")}
    nan = math.nan
    return Schedule(d["case"], nan if d["a"] is None else float(d["a"]), nan if d["b"] is None else float(d["b"]),
                    index_shift=int(d["index_shift"]), note=d.get("note", ""), **arr)


def ledger_dict(point: MoranPoint) -> dict:
    cfg, m = point.config, point.config.m
    dec = cfg.decomposition
    return {
        "schema": LEDGER_SCHEMA,
        "model": model_to_config(cfg.model),
        "decomposition": {"kind": dec.kind, "N": dec.N},
        "k": cfg.k, "t": cfg.t, "eps": cfg.eps,
        "v_star": _fmt(cfg.v_star, m),
        "Q": [_fmt(v, m) for v in cfg.Q],
        "good_count": cfg.good_count,
        "seed": point.seed, "target": point.target,
        "prefix_length": len(point.prefix), "prefix_sha256": point.digest(),
        "schedule": _schedule_json(point.schedule),
        "blocks": point.blocks,
        "x_connectors": {str(q): _fmt(w, m) for q, w in sorted(point.x_connectors.items())},
        "y_connectors": {str(q): _fmt(w, m) for q, w in sorted(point.y_connectors.items())},
        "events": [e.to_json(m) for e in point.events],
    }


def _json_nan(o):
    return None if isinstance(o, float) and math.isnan(o) else o


def write_ledger(point: MoranPoint, path) -> None:
    d = ledger_dict(point)
    if d["schedule"] is not None:
        d["schedule"]["a"] = _json_nan(d["schedule"]["a"])
        d["schedule"]["b"] = _json_nan(d["schedule"]["b"])
    keys = list(d)
    lines = ["{"]
    for i, key in enumerate(keys):
        val = d[key]
        if key == "events":
            body = "[" + ",".join("\n    " + json.dumps(e) for e in val) + ("\n  ]" if val else "]")
        else:
            body = json.dumps(val, allow_nan=True)
        lines.append(f"  {json.dumps(key)}: {body}" + ("," if i + 1 < len(keys) else ""))
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_prefix(point: MoranPoint, path) -> None:
    Path(path).write_text(f"# schema: {WORD_SCHEMA}\n# m: {point.config.m}\n"
                          + Word(point.prefix, point.config.m).format(cli=True) + "\n")


def read_prefix(path) -> Word:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise RecurError(f"cannot read {path}: {exc.strerror}") from exc
    if not lines or lines[0].strip() != f"# schema: {WORD_SCHEMA}":
        raise RecurError(f"{path} must start with '# schema: {WORD_SCHEMA}'")
    m = 2
    body = []
    for ln in lines[1:]:
        if ln.startswith("# m:"):
            m = int(ln.split(":", 1)[1])
        elif ln.strip() and not ln.startswith("#"):
            body.append(ln.strip())
    return Word.parse("".join(body), m)


def load_point(directory) -> MoranPoint:
    """Rebuild a MoranPoint from ``ledger.json`` and ``prefix.txt`` in a build directory."""
    d = Path(directory)
    try:
        raw = json.loads((d / "ledger.json").read_text())
    except OSError as exc:
        raise RecurError(f"cannot read ledger in {d}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise RecurError(f"ledger in {d} is not valid JSON: {exc.msg}") from exc
    if raw.get("schema") != LEDGER_SCHEMA:
        raise RecurError(f"ledger must declare schema {LEDGER_SCHEMA!r}")
    model = model_from_config(raw["model"])
    m = model.m
    dec = decompose(model, int(raw["decomposition"]["N"])) if raw["decomposition"]["kind"] == "diagram" \
        else decompose(model)
    cfg = SeedConfig(dec, int(raw["k"]), int(raw["t"]), [Word.parse(v, m).symbols for v in raw["Q"]],
                     Word.parse(raw["v_star"], m).symbols, int(raw["good_count"]), eps=float(raw["eps"]))
    prefix = read_prefix(d / "prefix.txt").symbols
    if hashlib.sha256(prefix).hexdigest() != raw["prefix_sha256"]:
        raise RecurError("prefix file does not match the ledger digest")
    return MoranPoint(cfg, _schedule_from_json(raw["schedule"]), int(raw["seed"]), int(raw["target"]), prefix,
                      [int(i) for i in raw["blocks"]],
                      {int(q): Word.parse(w, m).symbols for q, w in raw["x_connectors"].items()},
                      {int(q): Word.parse(w, m).symbols for q, w in raw["y_connectors"].items()},
                      [InsertionEvent.from_json(e, m) for e in raw["events"]])


# -- Delta-tree combinatorics ---------------------------------------------------------


@dataclass
class LevelStats:
    q: int
    nodes: int
    min_children: int
    max_children: int
    min_len: int
    max_len: int


@dataclass
class DeltaStats:
    q_max: int
    branching: int
    exhaustive: bool
    levels: list[LevelStats]
    case1_max: int
    case2_max: int
    bound1: int
    bound2: int
    case2_levels: list[int]

    @property
    def branching_exact(self) -> bool:
        return all(lv.min_children == lv.max_children == self.branching for lv in self.levels[:-1])

    @property
    def within_bounds(self) -> bool:
        return self.case1_max <= self.bound1 and self.case2_max <= self.bound2


def _count_prefixed(sorted_words: list[bytes], pre: bytes) -> int:
    lo = bisect.bisect_left(sorted_words, pre)
    hi = bisect.bisect_left(sorted_words, pre + b"\xff")
    return hi - lo


def delta_stats(cfg: SeedConfig, schedule: Optional[Schedule], q_max: int,
                sample_width: Optional[int] = None, seed: int = 0) -> DeltaStats:
    """Materialize (or sample) the tree of y_q words and count prefix ambiguity.

    For every leaf y and n, q_n(y) is the least q such that y_1..y_n extends to
    some word of level q+1; the count is the number of such level-(q+1) words,
    split by whether level q performs an insertion.
    """
    if q_max < 1:
        raise RecurError("q_max must be at least 1")
    nq = len(cfg.Q)
    cap = budget(2_000_000)
    exhaustive = sample_width is None
    if exhaustive and nq ** q_max > cap:
        raise BudgetExceeded(f"{nq}^{q_max} leaves exceed the budget {cap}; pass a sample width")
    rng = np.random.Generator(np.random.PCG64(check_seed(seed)))
    root = _Builder(cfg, schedule, True)
    level = [root]
    words: list[list[bytes]] = [[bytes(root.y)]]
    flags: list[dict[bytes, bool]] = [{bytes(root.y): False}]
    stats: list[LevelStats] = []
    case2 = set()
    for q in range(q_max):
        nxt = []
        counts = []
        for node in level:
            kids = []
            for i in range(nq):
                c = node.clone()
                c.push(i)
                kids.append(c)
            counts.append(len({bytes(c.y) for c in kids}))
            if q in node.case2_levels or any(q in c.case2_levels for c in kids[:1]):
                case2.add(q)
            nxt.extend(kids)
        lens = [len(n.y) for n in level]
        stats.append(LevelStats(q, len(level), min(counts), max(counts), min(lens), max(lens)))
        if not exhaustive and len(nxt) > sample_width:
            pick = sorted(rng.choice(len(nxt), size=sample_width, replace=False).tolist())
            nxt = [nxt[i] for i in pick]
        level = nxt
        ws = sorted(bytes(n.y) for n in level)
        words.append(ws)
        flags.append({bytes(n.y): (q in n.case2_levels) for n in level})
    lens = [len(n.y) for n in level]
    stats.append(LevelStats(q_max, len(level), 0, 0, min(lens), max(lens)))

    case1_max = case2_max = 0
    for leaf in words[q_max]:
        for n in range(1, len(leaf) + 1):
            pre = leaf[:n]
            # q_n is the least q with pre extending into level q + 1
            qq = 0
            while _count_prefixed(words[qq + 1], pre) == 0:
                qq += 1
            cnt = _count_prefixed(words[qq + 1], pre)
            if qq in case2:
                case2_max = max(case2_max, cnt)
            else:
                case1_max = max(case1_max, cnt)
    m, k, t = cfg.m, cfg.k, cfg.t
    return DeltaStats(q_max, nq, exhaustive, stats, case1_max, case2_max,
                      m ** (k + t + 1), m ** (2 * k + 3 * t + 3), sorted(case2))


# -- dimension estimates ----------------------------------------------------------------


@dataclass
class DimensionEstimate:
    mode: str
    bound: float
    eps: float
    slope: Optional[float] = None
    closed_form: Optional[float] = None
    points: list[tuple[int, float, float]] = field(default_factory=list)  # (q, -log diam, log count)


def symbolic_bound(cfg: SeedConfig) -> float:
    return math.log(len(cfg.Q)) / ((1 + 2 * cfg.eps) * (cfg.k + cfg.t))


def dimension_lower_bound(cfg: SeedConfig, schedule: Optional[Schedule] = None, mode: str = "symbolic",
                          q_max: int = 3, sample_width: int = 64, seed: int = 0) -> DimensionEstimate:
    """Mass-distribution lower bound; interval mode adds a box-count slope.

    In interval mode each level-q word of the seed tree is mapped to its cylinder
    interval.  The tree has #Q_k^q words of (empirical) maximal diameter d_q, so
    the slope of q log #Q_k against -log d_q estimates the dimension.
    """
    bound = symbolic_bound(cfg)
    if mode == "symbolic":
        return DimensionEstimate("symbolic", bound, cfg.eps)
    if mode != "interval":
        raise RecurError(f"unknown mode {mode!r}; use symbolic or interval")
    model = cfg.model
    if not isinstance(model, IntervalCoding):
        raise RecurError("interval mode needs an interval-map model")
    from .intervals import cylinder_interval

    params = model.params
    nq = len(cfg.Q)
    rng = np.random.Generator(np.random.PCG64(check_seed(seed)))
    pts = []
    for q in range(1, q_max + 1):
        diam = 0.0
        total = nq ** q
        n_samp = min(sample_width, total)
        if total <= sample_width:
            seqs = list(product(range(nq), repeat=q))
        else:
            seqs = [tuple(rng.integers(0, nq, size=q).tolist()) for _ in range(n_samp)]
        for seq in seqs:
            b = _Builder(cfg, schedule, True)
            for i in seq:
                b.push(i)
            iv = cylinder_interval(params, Word(bytes(b.y), model.m))
            if iv is None:
                raise RecurError("a constructed word has an empty cylinder")
            diam = max(diam, iv[1] - iv[0])
        pts.append((q, -math.log(diam), q * math.log(nq)))
    xs = np.array([p[1] for p in pts])
    ys = np.array([p[2] for p in pts])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(pts) > 1 else float(ys[0] / xs[0])
    lb = math.log(params.b)
    closed = (lb - cfg.eps) / (lb + 2 * cfg.eps)
    return DimensionEstimate("interval", bound, cfg.eps, slope, closed, pts)
