"""Command-line interface and the scheme file format.

File layout (LF line endings, no trailing spaces)::

    RINGSTORE v1
    n=<int> alpha=<int> M=<int> q=<prime>
    G=
    <M rows of n*alpha space-separated integers in [0, q)>
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import asdict
from math import comb
from pathlib import Path
from typing import Sequence

from . import __version__
from .algebra import FieldSpec, Matrix, is_prime, next_prime
from .construct import Lcg64, build_cauchy_mds, build_ed_matrix, greedy_mds_columns
from .errors import (
    BadArguments,
    NotFullRank,
    ParseError,
    PartitionMismatch,
    RingStoreError,
    TooFewNodes,
    InvariantViolation,
)
from .protocol import (
    LinkTransfer,
    execute_reconstruction,
    execute_repair,
    plan_reconstruction,
    plan_repair,
)
from .scheme import (
    Scheme,
    cut_constraints,
    encode,
    make_scheme,
    reconstruct_lower_bound,
    validate_ordss,
)
from .simnet import run_script, sim_new, sim_stats

MAGIC = "RINGSTORE v1"
_PARAMS = re.compile(r"n=(\d+) alpha=(\d+) M=(\d+) q=(\d+)")


def scheme_serialize(s: Scheme) -> str:
    lines = [MAGIC, f"n={s.n} alpha={s.alpha} M={s.m} q={s.field.p}", "G="]
    lines += [" ".join(str(v) for v in row) for row in s.g.to_lists()]
    return "\n".join(lines) + "\n"


def scheme_parse(text: str) -> Scheme:
    if "\r" in text:
        line = text[: text.index("\r")].count("\n") + 1
        raise ParseError("carriage return found; lines must end with LF", line)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise ParseError(f"expected header {MAGIC!r}", 1, 1)
    if len(lines) < 2:
        raise ParseError("missing parameter line", 2)
    match = _PARAMS.fullmatch(lines[1])
    if not match:
        raise ParseError("expected 'n=<int> alpha=<int> M=<int> q=<prime>'", 2, 1)
    n, alpha, m, q = (int(v) for v in match.groups())
    for name, value, col in (("n", n, match.start(1)), ("alpha", alpha, match.start(2)), ("M", m, match.start(3))):
        if value < 1:
            raise ParseError(f"{name} must be positive", 2, col + 1)
    if not is_prime(q):
        raise ParseError(f"q={q} is not prime", 2, match.start(4) + 1)
    if len(lines) < 3 or lines[2] != "G=":
        raise ParseError("expected 'G='", 3, 1)
    body = lines[3:]
    if len(body) != m:
        raise ParseError(f"expected {m} matrix rows, found {len(body)}", 4 + min(len(body), m))
    width = n * alpha
    rows = []
    for r, line in enumerate(body):
        lineno = 4 + r
        if line != line.strip() or "  " in line:
            raise ParseError("entries must be separated by single spaces", lineno)
        tokens = line.split(" ")
        if len(tokens) != width:
            raise ParseError(f"expected {width} entries, found {len(tokens)}", lineno)
        row = []
        col = 1
        for tok in tokens:
            if not re.fullmatch(r"0|[1-9]\d*", tok) or int(tok) >= q:
                raise ParseError(f"entry {tok!r} is not an integer in [0, {q})", lineno, col)
            row.append(int(tok))
            col += len(tok) + 1
        rows.append(row)
    g = Matrix(rows, FieldSpec(q))
    try:
        return make_scheme(g, n, alpha)
    except (NotFullRank, TooFewNodes, PartitionMismatch) as exc:
        raise InvariantViolation(exc.category, str(exc)) from exc


def load_scheme(path: str) -> Scheme:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return scheme_parse(text)


def build_scheme(construction: str, n: int, alpha: int, m: int, q: int | None = None, seed: int = 0) -> Scheme:
    cols = n * alpha
    if construction == "ed":
        if m >= cols:
            raise BadArguments(f"ED construction needs M < n*alpha, got M={m}, n*alpha={cols}")
        g = build_ed_matrix(m, cols)
    elif construction == "mds-cauchy":
        g = build_cauchy_mds(m, cols, FieldSpec(q if q is not None else next_prime(cols)))
    elif construction == "mds-greedy":
        if not 0 < m <= cols:
            raise BadArguments(f"need 0 < M <= n*alpha, got M={m}")
        field = FieldSpec(q if q is not None else next_prime(comb(cols - 1, m - 1) + 1))
        g = greedy_mds_columns(m, cols, field, seed)
    else:
        raise BadArguments(f"unknown construction {construction!r}")
    return make_scheme(g, n, alpha)


# ---------------------------------------------------------------- output


def _fmt_vec(v: Sequence[int]) -> str:
    return "[" + " ".join(str(t) for t in v) + "]"


def _hop_json(h: LinkTransfer) -> dict:
    return {
        "link": h.label,
        "from": h.from_node,
        "to": h.to_node,
        "receiver": h.receiver,
        "size": h.size,
        "payload": [list(v) for v in h.payload],
    }


def _print_hops(hops: Sequence[LinkTransfer]) -> None:
    for h in hops:
        print(f"  {h.label}: {h.size} symbol(s)")
        for v in h.payload:
            print(f"    {_fmt_vec(v)}")


def _emit(as_json: bool, payload: dict, human) -> None:
    if as_json:
        print(json.dumps(payload, sort_keys=True))
    else:
        human()


def _data_vector(s: Scheme, data: str | None, seed: int) -> tuple[int, ...]:
    if data is None:
        return Lcg64(seed).vector(s.m, s.field.p)
    try:
        values = tuple(int(t) for t in data.split(","))
    except ValueError as exc:
        raise BadArguments(f"--data must be comma-separated integers: {data!r}") from exc
    if len(values) != s.m:
        raise BadArguments(f"--data has {len(values)} values, scheme needs M={s.m}")
    return tuple(v % s.field.p for v in values)


# -------------------------------------------------------------- commands


def cmd_build(args) -> int:
    s = build_scheme(args.construction, args.n, args.a, args.M, args.q, args.seed)
    Path(args.output).write_text(scheme_serialize(s), encoding="utf-8", newline="\n")
    _emit(
        args.json,
        {"construction": args.construction, "n": s.n, "alpha": s.alpha, "M": s.m, "q": s.field.p, "output": args.output},
        lambda: print(f"wrote {args.construction} scheme n={s.n} alpha={s.alpha} M={s.m} q={s.field.p} to {args.output}"),
    )
    return 0


def cmd_validate(args) -> int:
    s = load_scheme(args.file)
    rep = validate_ordss(s)

    def human():
        print(f"ORDSS: {'yes' if rep.is_ordss else 'no'} (n={s.n} alpha={s.alpha} M={s.m} q={s.field.p} k={s.k})")
        if not rep.is_ordss:
            print(f"condition (i) fails at start nodes: {list(rep.failed_window_condition_i)}")
            print(f"condition (ii) fails at start nodes: {list(rep.failed_window_condition_ii)}")

    _emit(
        args.json,
        {
            "is_ordss": rep.is_ordss,
            "failed_window_condition_i": list(rep.failed_window_condition_i),
            "failed_window_condition_ii": list(rep.failed_window_condition_ii),
        },
        human,
    )
    return 0


def cmd_bounds(args) -> int:
    n, alpha, m = args.n, args.a, args.M
    rec = reconstruct_lower_bound(n, alpha, m)
    cuts = cut_constraints(n, alpha, m)

    def name(i: int) -> str:
        return "U" if i == 0 else f"N{i}"

    def human():
        print(f"reconstruct lower bound: {rec}")
        print(f"repair lower bound: {m}")
        print("link        min symbols")
        for c in cuts:
            print(f"{name(c.link[0]) + '->' + name(c.link[1]):<12}{c.min_symbols}")

    _emit(
        args.json,
        {
            "reconstruct_lower_bound": rec,
            "repair_lower_bound": m,
            "cut_constraints": [{"link": f"{name(c.link[0])}->{name(c.link[1])}", "min_symbols": c.min_symbols} for c in cuts],
        },
        human,
    )
    return 0


def cmd_reconstruct(args) -> int:
    s = load_scheme(args.file)
    x = _data_vector(s, args.data, args.seed)
    plan = plan_reconstruction(s, args.user)
    recovered, used = execute_reconstruction(s, encode(s, x), plan)
    ok = recovered == x

    def human():
        print(f"reconstruction plan for user U{args.user}:")
        _print_hops(plan.hops)
        print(f"basis columns: {list(plan.basis_columns)}")
        print(f"data:      {_fmt_vec(x)}")
        print(f"recovered: {_fmt_vec(recovered)} ({'exact' if ok else 'MISMATCH'})")
        print(f"bandwidth: {used} (lower bound {reconstruct_lower_bound(s.n, s.alpha, s.m)})")

    _emit(
        args.json,
        {
            "user": args.user,
            "hops": [_hop_json(h) for h in plan.hops],
            "basis_columns": list(plan.basis_columns),
            "data": list(x),
            "recovered": list(recovered),
            "exact": ok,
            "bandwidth": used,
            "lower_bound": reconstruct_lower_bound(s.n, s.alpha, s.m),
        },
        human,
    )
    return 0 if ok else 1


def cmd_repair(args) -> int:
    s = load_scheme(args.file)
    x = Lcg64(args.seed).vector(s.m, s.field.p)
    st = encode(s, x)
    plan = plan_repair(s, args.node)
    repaired, used = execute_repair(s, st.erase(args.node), plan)
    original = st.node(args.node)
    ok = repaired == original

    def human():
        print(f"repair plan for node N{args.node}:")
        _print_hops(plan.hops)
        print(f"original: {_fmt_vec(original)}")
        print(f"repaired: {_fmt_vec(repaired)} ({'exact' if ok else 'MISMATCH'})")
        print(f"bandwidth: {used} (lower bound {s.m})")

    _emit(
        args.json,
        {
            "node": args.node,
            "hops": [_hop_json(h) for h in plan.hops],
            "basis_columns": list(plan.basis_columns),
            "extra_columns": list(plan.extra_columns),
            "expression_coeffs": plan.expression_coeffs.to_lists(),
            "original": list(original),
            "repaired": list(repaired),
            "exact": ok,
            "bandwidth": used,
            "lower_bound": s.m,
        },
        human,
    )
    return 0 if ok else 1


def parse_script(text: str) -> list[tuple[str, int]]:
    ops = []
    for item in text.split(","):
        m = re.fullmatch(r"\s*(read|fail|crash|repair):(\d+)\s*", item)
        if not m:
            raise BadArguments(f"bad script item {item!r}; expected op:index with op in read/fail/crash/repair")
        ops.append((m.group(1), int(m.group(2))))
    return ops


def cmd_simulate(args) -> int:
    s = load_scheme(args.file)
    ops = parse_script(args.script)
    sim = sim_new(s, args.seed)
    error: RingStoreError | None = None
    for op in ops:
        try:
            run_script(sim, [op])
        except RingStoreError as exc:
            error = exc
            break
    stats = sim_stats(sim)

    def human():
        print("events:")
        for i, ev in enumerate(sim.event_log):
            status = "ok" if ev.success else "FAILED"
            print(f"  {i:>3} {ev.kind:<9} {ev.node_or_user:>3} bandwidth={ev.bandwidth} {status}")
        print("per-link totals:")
        for link, count in stats.per_link.items():
            print(f"  {link:<10} {count}")
        print("per-kind totals:")
        for kind, total in stats.per_kind.items():
            print(f"  {kind:<9} {total}")
        print(f"event count: {stats.events}")

    _emit(
        args.json,
        {
            "events": [asdict(ev) for ev in sim.event_log],
            "per_link": stats.per_link,
            "per_kind": stats.per_kind,
            "event_count": stats.events,
        },
        human,
    )
    if error is not None:
        raise error
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        print(f"error: UsageError: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ringstore", description="Optimal-reconstruction storage on unidirectional rings")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def params(p):
        p.add_argument("-n", type=int, required=True, help="number of storage nodes")
        p.add_argument("-a", type=int, required=True, help="capacity alpha of each node")
        p.add_argument("-M", type=int, required=True, help="original data size")

    p = sub.add_parser("build", help="construct a scheme and write it to a file")
    p.add_argument("--construction", choices=["ed", "mds-cauchy", "mds-greedy"], required=True)
    params(p)
    p.add_argument("--q", type=int, default=None, help="field size (prime); ignored for ed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", help="check the two window conditions")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bounds", help="print bandwidth lower bounds and cut constraints")
    params(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("reconstruct", help="plan and run a user reconstruction")
    p.add_argument("file")
    p.add_argument("--user", type=int, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", default=None, help="comma-separated data symbols")
    src.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("repair", help="plan and run exact repair of one node")
    p.add_argument("file")
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("simulate", help="run a scripted scenario on the ring simulator")
    p.add_argument("file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--script", required=True, help="comma list such as read:1,fail:2,read:3")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RingStoreError as exc:
        message = " ".join(str(exc).split())
        print(f"error: {exc.category}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
