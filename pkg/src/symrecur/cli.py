"""Command-line entry point: ``symrecur <group> <command> [options]``.

Exit status: 0 on success, 1 on a domain or usage error (one diagnostic line on
stderr), 2 when a budget or the ``--timeout`` is exceeded.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import signal
import sys
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import BudgetExceeded, RecurError
from .words import Word

CSV_SCHEMA = "recur-csv/1"
JSON_SCHEMA = "recur-json/1"
MANIFEST_SCHEMA = "recur-manifest/1"


class UsageError(RecurError):
    pass


class Timeout(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- tables ------------------------------------------------------------------


@dataclass
class Table:
    name: str
    columns: list[str]
    units: list[str]
    rows: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return _jsonable(float(v))
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render(table: Table, as_json: bool) -> str:
    if as_json:
        doc = {"schema": JSON_SCHEMA, "table": table.name,
               "units": dict(zip(table.columns, table.units)),
               "records": [dict(zip(table.columns, (_jsonable(c) for c in r))) for r in table.rows]}
        if table.meta:
            doc["meta"] = _jsonable(table.meta)
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema: {CSV_SCHEMA} table={table.name}\n")
    buf.write("# units: " + ",".join(f"{c}={u}" for c, u in zip(table.columns, table.units)) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(c) for c in r])
    return buf.getvalue()


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Run:
    """Collects the artifacts of one command and writes its manifest."""

    def __init__(self, argv: list[str], args: argparse.Namespace):
        self.argv = argv
        self.args = args
        self.start = time.time()
        self.artifacts: list[Path] = []
        self.manifest_path: Optional[Path] = None

    def write_text(self, path, text: str) -> Path:
        p = Path(path)
        try:
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text)
        except OSError as exc:
            raise RecurError(f"cannot write {p}: {exc.strerror}") from exc
        self.artifacts.append(p)
        return p

    def emit(self, table: Table) -> None:
        text = render(table, getattr(self.args, "json", False))
        out = getattr(self.args, "out", None)
        if out:
            self.write_text(out, text)
        else:
            sys.stdout.write(text)

    def finish(self, manifest_path=None) -> None:
        if not self.artifacts:
            return
        path = Path(manifest_path) if manifest_path else Path(str(self.artifacts[0]) + ".manifest.json")
        base = path.parent
        arts = {}
        for a in self.artifacts:
            try:
                rel = str(a.resolve().relative_to(base.resolve()))
            except ValueError:
                rel = str(a)
            arts[rel] = _sha(a)
        digest = hashlib.sha256("".join(f"{k}:{v}\n" for k, v in sorted(arts.items())).encode()).hexdigest()
        params = {k: v for k, v in vars(self.args).items() if k not in ("func",) and not callable(v)}
        man = {
            "schema": MANIFEST_SCHEMA,
            "tool": "symrecur",
            "version": __version__,
            "command": self.argv,
            "params": _jsonable(params),
            "seed": getattr(self.args, "seed", None),
            "schemas": {"csv": CSV_SCHEMA, "json": JSON_SCHEMA},
            "started_utc": datetime.fromtimestamp(self.start, timezone.utc).isoformat(),
            "wall_clock_s": round(time.time() - self.start, 6),
            "artifacts": arts,
            "digest": digest,
        }
        try:
            path.write_text(json.dumps(man, indent=1) + "\n")
        except OSError as exc:
            raise RecurError(f"cannot write manifest {path}: {exc.strerror}") from exc
        self.manifest_path = path


# -- shared helpers -------------------------------------------------------------


def _model(args):
    from .models import Full, load_model

    if getattr(args, "model", None):
        return load_model(args.model)
    return Full(args.m)


def _params(args):
    from .intervals import AlphaBetaParams

    return AlphaBetaParams(args.alpha, args.beta)


def _plot(args, fn, *a, **kw):
    path = getattr(args, "plot", None)
    if path:
        from . import plotting

        getattr(plotting, fn)(path, *a, **kw)


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}") from exc


def _info(msg: str) -> None:
    sys.stderr.write(msg + "\n")


# -- lang ---------------------------------------------------------------------------


def cmd_lang_enum(args, run: Run):
    from .models import enumerate_language

    model = _model(args)
    sl = enumerate_language(model, args.n, args.cap)
    t = Table("lang-enum", ["index", "word"], ["ordinal", "symbols"],
              [(i + 1, w.format(cli=True)) for i, w in enumerate(sl.words)], {"n": args.n, "count": sl.count})
    run.emit(t)


def cmd_lang_entropy(args, run: Run):
    from .models import entropy_estimate

    est = entropy_estimate(_model(args), args.nmax)
    t = Table("lang-entropy", ["n", "count", "ratio"], ["symbols", "words", "nats per symbol"],
              list(est.series), {"estimate": est.estimate})
    run.emit(t)
    _plot(args, "line_plot", [r[0] for r in est.series], {"log #L_n / n": [r[2] for r in est.series]},
          "n", "nats per symbol", "entropy estimate")


# -- map ------------------------------------------------------------------------------


def cmd_map_digits(args, run: Run):
    from .intervals import digits

    p = _params(args)
    x = float(args.x) if args.float else args.x
    tr = digits(p, x, args.n, tol=args.tol)
    rows = [(k + 1, repr(o), int(d), f)
            for k, (o, d, f) in enumerate(zip(tr.orbit, tr.digits.symbols, tr.flags))]
    run.emit(Table("map-digits", ["k", "orbit_x", "digit", "flag"],
                   ["iterate", "point of the unit interval", "symbol", "near endpoint"], rows,
                   {"word": tr.digits.format(cli=True), "unreliable_from": tr.unreliable_from}))


def cmd_map_transitive(args, run: Run):
    from .intervals import certificate_ok, check_transitive

    p = _params(args)
    res = check_transitive(p, cap=args.cap)
    ok = certificate_ok(p, res) if res.transitive else False
    rows = [(i + 1, pc.itinerary.format(cli=True), repr(pc.preimage[0]), repr(pc.preimage[1]),
             repr(pc.image[0]), repr(pc.image[1])) for i, pc in enumerate(res.pieces)]
    run.emit(Table("map-transitive", ["piece", "itinerary", "pre_lo", "pre_hi", "img_lo", "img_hi"],
                   ["ordinal", "symbols", "point", "point", "point", "point"], rows,
                   {"status": res.status, "reason": res.reason, "steps": res.steps, "certificate_checked": ok}))
    _info(f"{res.status}: {res.reason} (steps={res.steps}, certificate {'verified' if ok else 'absent'})")


def cmd_map_cylinder(args, run: Run):
    from .intervals import cylinder_interval_exact

    p = _params(args)
    w = Word.parse(args.word, p.m)
    iv = cylinder_interval_exact(p, w)
    if iv is None:
        rows = [(w.format(cli=True), "Empty", "", "", "", "")]
    else:
        rows = [(w.format(cli=True), "interval", repr(iv[0]), repr(iv[1]), float(iv[0]), float(iv[1]))]
    run.emit(Table("map-cylinder", ["word", "status", "lo", "hi", "lo_float", "hi_float"],
                   ["symbols", "-", "exact point", "exact point", "point", "point"], rows))


# -- diagram -------------------------------------------------------------------------------


def cmd_diagram_build(args, run: Run):
    from .diagram import build_diagram

    d = build_diagram(_model(args), args.N)
    text = d.to_text()
    if args.out:
        run.write_text(args.out, text)
    else:
        sys.stdout.write(text)
    _info(f"built D_{args.N}: {len(d.vertices)} vertices")


def _decomp(args):
    from .diagram import decompose

    return decompose(_model(args), args.N, args.depth)


def cmd_diagram_gap(args, run: Run):
    from .diagram import gap_size

    dec = _decomp(args)
    tn = gap_size(dec)
    run.emit(Table("diagram-gap", ["N", "kind", "t_edges", "t", "C_size", "F_size"],
                   ["level", "-", "edges", "symbols", "vertices", "vertices"],
                   [(args.N, dec.kind, tn, dec.t, len(dec.C), len(dec.F))]))


def cmd_diagram_wprime(args, run: Run):
    from .diagram import verify_w_prime

    dec = _decomp(args)
    rep = verify_w_prime(dec, args.L, args.t)
    rows = [(u.format(cli=True), v.format(cli=True)) for u, v in rep.counterexamples]
    run.emit(Table("diagram-wprime", ["u", "v"], ["symbols", "symbols"], rows,
                   {"passed": rep.passed, "t": rep.t, "t_needed": rep.t_needed, "L": rep.L,
                    "pairs_checked": rep.pairs_checked}))
    _info(f"(W') {'passed' if rep.passed else 'failed'} at L={rep.L} with t={rep.t}; "
          f"pairs checked {rep.pairs_checked}" + (f"; counterexample u={rows[0][0]} v={rows[0][1]}" if rows else ""))


# -- recur --------------------------------------------------------------------------------


def cmd_recur_trace(args, run: Run):
    from .moran import check_seed, read_prefix
    from .models import sample_word
    from .recurrence import trace

    if args.input:
        x = read_prefix(args.input)
    else:
        if args.seed is None:
            raise UsageError("--seed is required when sampling from a model")
        rng = np.random.Generator(np.random.PCG64(check_seed(args.seed)))
        x = sample_word(_model(args), args.length, rng)
    tr = trace(x, args.nmax)
    rows = []
    for e in tr.entries:
        if e.determined:
            rows.append((e.n, e.tau, e.ratio, True))
        else:
            rows.append((e.n, e.tau.lower_bound, None, False))
    run.emit(Table("recur-trace", ["n", "tau", "ratio", "determined"],
                   ["symbols", "shifts (lower bound when undetermined)", "nats per symbol", "bool"], rows,
                   {"length": tr.length}))
    det = [r for r in rows if r[3]]
    _plot(args, "line_plot", [r[0] for r in det], {"log tau_n / n": [r[2] for r in det]}, "n", "log tau_n / n",
          "recurrence trace")


def cmd_recur_ow(args, run: Run):
    from .recurrence import BernoulliSampler, MarkovSampler, ornstein_weiss_experiment

    if args.markov:
        P = [_floats(r, "--markov") for r in args.markov.split(";")]
        sampler = MarkovSampler(P)
    else:
        sampler = BernoulliSampler(_floats(args.dist, "--dist"))
    s = ornstein_weiss_experiment(sampler, args.n, args.samples, args.horizon, args.seed)
    rows = [(i + 1, r, c) for i, (r, c) in enumerate(zip(s.ratios, s.censored))]
    meta = {"n": s.n, "median": s.median, "mean": s.mean, "iqr": s.iqr, "censored_fraction": s.censored_fraction,
            "entropy": s.entropy}
    run.emit(Table("recur-ow", ["sample", "ratio", "censored"], ["ordinal", "nats per symbol", "bool"], rows, meta))
    _info(f"median {s.median:.6g} (entropy {s.entropy:.6g}), IQR {s.iqr:.4g}, censored {s.censored_fraction:.3g}")
    _plot(args, "histogram", s.ratios, "log tau_n / n", s.entropy, "entropy", f"n={s.n}")


# -- schedule ------------------------------------------------------------------------------


def cmd_schedule_make(args, run: Run):
    from .schedules import case_of, make_schedule, parse_extended, shift_indices, validate

    a, b = parse_extended(args.a), parse_extended(args.b)
    case_of(a, b)
    s = make_schedule(a, b, args.P, literal=args.literal)
    if args.k is not None or args.t is not None:
        s = shift_indices(s, args.k or 0, args.t or 0)
    rows = []
    for (p, ell, g, ge), le, lg in zip(s.rows(), s.log_ell, s.log_gamma):
        rows.append((p, ell, g, ge, ge, float(le), float(lg)))
    meta = {"case": s.case, "index_shift": s.index_shift}
    if len(s) >= 10:
        rep = validate(s, args.rel_tol, args.small)
        meta["checks"] = {c.name: c.passed for c in rep.checks}
        for c in rep.checks:
            _info(f"check {c.name}: {'PASS' if c.passed else 'FAIL'} ({c.detail})")
    run.emit(Table("schedule", ["p", "ell", "gamma", "gamma_ell", "exp_gamma_ell_log", "log_ell", "log_gamma"],
                   ["index", "symbols", "nats per symbol", "nats", "nats (log of e^{gamma ell})", "log symbols",
                    "log nats per symbol"], rows, meta))
    _plot(args, "line_plot", [r[0] for r in rows], {"log ell": [r[5] for r in rows], "log gamma": [r[6] for r in rows]},
          "p", "natural log", f"schedule case {s.case}")


def _read_schedule_csv(path):
    from .schedules import Schedule

    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise RecurError(f"cannot read schedule {path}: {exc.strerror}") from exc
    rd = list(csv.DictReader(lines))
    if not rd or "ell" not in rd[0] or "gamma" not in rd[0]:
        raise RecurError(f"schedule {path} needs columns ell and gamma")
    try:
        ell = [float(r["ell"]) for r in rd]
        gamma = [float(r["gamma"]) for r in rd]
    except ValueError as exc:
        raise RecurError(f"schedule {path}: {exc}") from exc
    return Schedule.from_sequences(ell, gamma, note=f"file:{Path(path).name}")


# -- moran --------------------------------------------------------------------------------


def _verify_table(rep) -> Table:
    rows = [(r.p, r.n, r.tau, r.tau_pred, r.log_target, r.upper, r.ratio, r.equal, r.sandwich, r.constant)
            for r in rep.rows]
    return Table("moran-verify", ["p", "n", "tau", "tau_pred", "gamma_ell", "upper", "ratio", "equal", "sandwich",
                                  "constant"],
                 ["checkpoint", "symbols", "shifts", "shifts", "nats", "shifts", "nats per symbol", "bool", "bool",
                  "bool"], rows,
                 {"passed": rep.passed, "ledger_ok": rep.ledger_ok, "head_mismatches": rep.head_mismatches,
                  "last_odd_ratio": rep.last_ratio(1), "last_even_ratio": rep.last_ratio(0)})


def cmd_moran_build(args, run: Run):
    from .diagram import decompose
    from .moran import build_qk, check_seed, construct_point, verify_point, write_ledger, write_prefix
    from .schedules import case_of, make_schedule, parse_extended, shift_indices

    a, b = parse_extended(args.a), parse_extended(args.b)
    case_of(a, b)
    seed = check_seed(args.seed)
    model = _model(args)
    dec = decompose(model, args.N)
    cfg = build_qk(dec, args.k, eps=args.eps)
    if args.schedule:
        sched = _read_schedule_csv(args.schedule)
        sched.a, sched.b = a, b
        custom = True
    else:
        sched = shift_indices(make_schedule(a, b, args.P), cfg.k, cfg.t)
        custom = False
    pt = construct_point(cfg, sched, args.target, seed, allow_exhaustion=custom)
    rep = verify_point(pt)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RecurError(f"cannot create {out}: {exc.strerror}") from exc
    write_prefix(pt, out / "prefix.txt")
    write_ledger(pt, out / "ledger.json")
    run.artifacts += [out / "prefix.txt", out / "ledger.json"]
    run.write_text(out / "verify.csv", render(_verify_table(rep), False))
    run.finish(out / "manifest.json")
    _info(f"built |y|={len(pt.prefix)} with #Q_k={len(cfg.Q)}, t={cfg.t}, {len(pt.events)} checkpoint(s); "
          f"verify {'PASS' if rep.passed else 'FAIL'}")
    if not pt.events:
        _info(f"warning: no checkpoint reached within |y|={args.target}; the return-time checks are vacuous")
    if not rep.passed:
        raise RecurError(rep.failures[0])


def cmd_moran_verify(args, run: Run):
    from .moran import load_point, verify_point

    rep = verify_point(load_point(args.dir))
    run.emit(_verify_table(rep))
    rs = [r for r in rep.rows if r.ratio is not None]
    _plot(args, "line_plot", [r.n for r in rs], {"log tau / n": [r.ratio for r in rs]}, "|theta^p|",
          "log tau / n", "checkpoint ratios")
    if not rep.passed:
        raise RecurError(rep.failures[0])


def cmd_moran_dim(args, run: Run):
    from .moran import dimension_lower_bound, load_point

    pt = load_point(args.dir)
    est = dimension_lower_bound(pt.config, pt.schedule, "interval" if args.interval else "symbolic",
                                q_max=args.q, sample_width=args.samples, seed=pt.seed)
    rows = [(q, x, y) for q, x, y in est.points]
    run.emit(Table("moran-dim", ["q", "neg_log_diam", "log_count"], ["level", "nats", "nats"], rows,
                   {"mode": est.mode, "bound": est.bound, "eps": est.eps, "slope": est.slope,
                    "closed_form": est.closed_form}))
    _info(f"{est.mode} lower bound {est.bound:.6g}" +
          (f"; box-count slope {est.slope:.6g}; closed form {est.closed_form:.6g}" if est.slope is not None else ""))
    if est.points and args.plot:
        xs = [p[1] for p in est.points]
        ys = [p[2] for p in est.points]
        icpt = float(np.mean(ys) - est.slope * np.mean(xs))
        _plot(args, "scatter_fit", xs, ys, est.slope, icpt, "-log diameter", "log count", "box count")


# -- replay ----------------------------------------------------------------------------------


def cmd_replay(args, run: Run):
    try:
        man = json.loads(Path(args.manifest).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise RecurError(f"cannot read manifest {args.manifest}: {exc}") from exc
    if man.get("schema") != MANIFEST_SCHEMA:
        raise RecurError(f"manifest must declare schema {MANIFEST_SCHEMA!r}")
    argv = list(man["command"])
    out = man["params"].get("out")
    if not out or "--out" not in argv:
        raise RecurError("manifest has no --out artifact to replay")
    with tempfile.TemporaryDirectory() as tmp:
        new_out = Path(tmp) / Path(out).name
        i = argv.index("--out")
        argv[i + 1] = str(new_out)
        code = main(argv, _nested=True)
        if code != 0:
            raise RecurError(f"replayed command exited with status {code}")
        man_path = new_out / "manifest.json" if new_out.is_dir() else Path(str(new_out) + ".manifest.json")
        new = json.loads(man_path.read_text())
        same = new["digest"] == man["digest"]
        sys.stdout.write(f"replay digest {'match' if same else 'MISMATCH'}: {new['digest']}\n")
        if not same:
            raise RecurError("replayed outputs differ from the manifest digest")


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit records as JSON instead of CSV")
    common.add_argument("--out", help="write the output to this file and a manifest next to it")
    common.add_argument("--timeout", type=float, default=None, help="wall-clock limit in seconds (exit 2)")
    plot = _Parser(add_help=False)
    plot.add_argument("--plot", metavar="FILE", help="also write a PNG figure")
    model = _Parser(add_help=False)
    model.add_argument("--model", help="model config file (recur-model/1); default full shift")
    model.add_argument("--m", type=int, default=2, help="alphabet size of the default full shift")
    amap = _Parser(add_help=False)
    amap.add_argument("--alpha", required=True)
    amap.add_argument("--beta", required=True)

    p = _Parser(prog="symrecur", description="Symbolic dynamics and return-time recurrence toolkit.")
    p.add_argument("--version", action="version", version=f"symrecur {__version__}")
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    lang = groups.add_parser("lang", help="languages of subshifts").add_subparsers(dest="cmd", required=True)
    c = lang.add_parser("enum", parents=[common, model], help="list L_n")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--cap", type=int, default=None, help="enumeration cap (default RECUR_BUDGET or 10^7)")
    c.set_defaults(func=cmd_lang_enum)
    c = lang.add_parser("entropy", parents=[common, model, plot], help="log #L_n / n series")
    c.add_argument("--nmax", type=int, required=True)
    c.set_defaults(func=cmd_lang_entropy)

    mp = groups.add_parser("map", help="alpha-beta interval maps").add_subparsers(dest="cmd", required=True)
    c = mp.add_parser("digits", parents=[common, amap], help="digit expansion of x")
    c.add_argument("--x", required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--float", action="store_true", help="iterate in floating point and flag near-endpoint digits")
    c.add_argument("--tol", type=float, default=1e-12)
    c.set_defaults(func=cmd_map_digits)
    c = mp.add_parser("transitive", parents=[common, amap], help="transitivity certificate")
    c.add_argument("--cap", type=int, default=10_000)
    c.set_defaults(func=cmd_map_transitive)
    c = mp.add_parser("cylinder", parents=[common, amap], help="cylinder interval of a word")
    c.add_argument("--word", required=True)
    c.set_defaults(func=cmd_map_cylinder)

    dg = groups.add_parser("diagram", help="Markov diagrams").add_subparsers(dest="cmd", required=True)
    c = dg.add_parser("build", parents=[common, model], help="build and dump D_N")
    c.add_argument("--N", type=int, required=True)
    c.set_defaults(func=cmd_diagram_build)
    for name, fn, hlp in (("gap", cmd_diagram_gap, "gap size t_N"), ("wprime", cmd_diagram_wprime, "(W') check")):
        c = dg.add_parser(name, parents=[common, model], help=hlp)
        c.add_argument("--N", type=int, default=4)
        c.add_argument("--depth", type=int, default=None)
        if name == "wprime":
            c.add_argument("--L", type=int, required=True)
            c.add_argument("--t", type=int, default=None)
        c.set_defaults(func=fn)

    rc = groups.add_parser("recur", help="return times").add_subparsers(dest="cmd", required=True)
    c = rc.add_parser("trace", parents=[common, model, plot], help="tau_n along one sequence")
    c.add_argument("--input", help="word file (recur-word/1)")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--length", type=int, default=10_000)
    c.add_argument("--nmax", type=int, required=True)
    c.set_defaults(func=cmd_recur_trace)
    c = rc.add_parser("ow", parents=[common, plot], help="Ornstein-Weiss experiment")
    c.add_argument("--dist", default="0.5,0.5", help="Bernoulli probabilities p0,p1,...")
    c.add_argument("--markov", default=None, help="transition matrix rows 'a,b;c,d' (overrides --dist)")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--samples", type=int, default=100)
    c.add_argument("--horizon", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.set_defaults(func=cmd_recur_ow)

    sc = groups.add_parser("schedule", help="schedules").add_subparsers(dest="cmd", required=True)
    c = sc.add_parser("make", parents=[common, plot], help="generate (ell_p, gamma_p)")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--P", type=int, required=True)
    c.add_argument("--k", type=int, default=None)
    c.add_argument("--t", type=int, default=None)
    c.add_argument("--rel-tol", type=float, default=0.05)
    c.add_argument("--small", type=float, default=1e-3)
    c.add_argument("--literal", action="store_true", help="keep the (e)-violating a = b = 0 recursion")
    c.set_defaults(func=cmd_schedule_make)

    mo = groups.add_parser("moran", help="Moran-point construction").add_subparsers(dest="cmd", required=True)
    c = mo.add_parser("build", parents=[common, model], help="construct a point with exponents (a, b)")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--target", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--N", type=int, default=4)
    c.add_argument("--P", type=int, default=400)
    c.add_argument("--eps", type=float, default=0.01)
    c.add_argument("--schedule", help="custom schedule CSV with columns ell and gamma")
    c.set_defaults(func=cmd_moran_build)
    c = mo.add_parser("verify", parents=[common, plot], help="re-check a build directory")
    c.add_argument("--dir", required=True)
    c.set_defaults(func=cmd_moran_verify)
    c = mo.add_parser("dim", parents=[common, plot], help="dimension lower bound")
    c.add_argument("--dir", required=True)
    c.add_argument("--interval", action="store_true")
    c.add_argument("--q", type=int, default=3)
    c.add_argument("--samples", type=int, default=64)
    c.set_defaults(func=cmd_moran_dim)

    c = groups.add_parser("replay", help="re-run a manifest and compare digests")
    c.add_argument("manifest")
    c.set_defaults(func=cmd_replay)
    return p


def _on_alarm(signum, frame):
    raise Timeout()


def main(argv: Optional[list[str]] = None, _nested: bool = False) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.group == "moran" and args.cmd == "build" and not args.out:
            raise UsageError("moran build needs --out DIR")
        run = Run(argv, args)
        timeout = getattr(args, "timeout", None)
        armed = timeout is not None and hasattr(signal, "SIGALRM") and not _nested
        if armed:
            signal.signal(signal.SIGALRM, _on_alarm)
            signal.setitimer(signal.ITIMER_REAL, timeout)
        try:
            args.func(args, run)
        finally:
            if armed:
                signal.setitimer(signal.ITIMER_REAL, 0)
        if run.manifest_path is None and run.artifacts:
            run.finish()
        return 0
    except BudgetExceeded as exc:
        _info(f"budget exceeded: {_one_line(exc)}")
        return 2
    except Timeout:
        _info("timeout: wall-clock limit reached")
        return 2
    except RecurError as exc:
        _info(f"error: {_one_line(exc)}")
        return 1
    except RecursionError:
        _info("budget exceeded: recursion depth")
        return 2
    except (ValueError, OSError) as exc:
        _info(f"error: {_one_line(exc)}")
        return 1


def _one_line(exc: Exception) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


if __name__ == "__main__":
    sys.exit(main())
