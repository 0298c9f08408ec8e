"""
Convertible Codes
=================
CLI entry point: encode files into stripes, convert stripes between code
parameters with access-optimal plans, verify, decode, and sweep.

Usage:
    convertible encode FILE DIR --n 6 --k 5 [--nf 13 --kf 12]
    convertible convert DIR OUT --nf 13 --kf 12 [--plan-out P] [--report-out R]
    convertible verify DIR
    convertible decode DIR FILE
    convertible sweep [--max-k 8] [--out results/]
    convertible figures

Exit codes: 0 ok, 1 verification failure, 2 parameter error, 3 construction failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from convertible.bounds import bound_for
from convertible.codes import MdsCode, decode, is_mds, make_systematic_mds
from convertible.config.loader import SETTINGS, get_runtime_config
from convertible.conversions import build_spec, compute_new_nodes, plan_general, tree_to_dict
from convertible.errors import (
    BudgetError,
    ConstructionError,
    ConvertibleError,
    PayloadCorruptionError,
)
from convertible.framework import (
    ConversionParams,
    ConvertibleCodeSpec,
    PartitionPair,
    default_plan,
    plan_to_dict,
    report_to_dict,
)
from convertible.galois import FieldSpec, dot
from convertible.oracle import audit_access
from convertible.storage import Manifest, NodeStore, symbols_to_bytes, write_encoded

logger = logging.getLogger("convertible")


def configure_logging(level: str | None = None) -> None:
    logging.basicConfig(format=SETTINGS["logging"]["format"], stream=sys.stderr)
    logger.setLevel((level or get_runtime_config()["log_level"]).upper())


def _field(args) -> FieldSpec:
    bits = args.field_bits or get_runtime_config()["field_bits"]
    return FieldSpec.from_bits(bits)


def _seed(args, fallback: int | None = None) -> int:
    if args.seed is not None:
        return args.seed
    return fallback if fallback is not None else get_runtime_config()["seed"]


# ── Commands ──────────────────────────────────────────────────────────────

def cmd_encode(args) -> int:
    """Encode a file into [n, k] stripes, optionally merge-compatible with [nf, kf]."""
    f, seed = _field(args), _seed(args)
    hints = {}
    if args.nf is not None and args.kf is not None:
        spec = build_spec(ConversionParams(args.n, args.k, args.nf, args.kf), f, seed)
        code = spec.initial_code
        hints = {"nf": args.nf, "kf": args.kf}
    else:
        code = make_systematic_mds(args.n, args.k, f, seed)
    payload = Path(args.input).read_bytes()
    chunk = args.chunk or get_runtime_config()["chunk_symbols"]
    manifest = write_encoded(args.out, payload, code, seed, chunk, hints)
    print(f"Encoded {manifest.payload_len} bytes → {manifest.stripes} stripes "
          f"of [{code.n},{code.k}]")
    print(f"  field GF(2^{code.field.w}), {manifest.chunk} symbols per node → {args.out}")
    return 0


def _default_spec(params: ConversionParams, code: MdsCode, seed: int) -> ConvertibleCodeSpec:
    final = make_systematic_mds(params.n_f, params.k_f, code.field, seed)
    return ConvertibleCodeSpec(params, PartitionPair.contiguous(params), code, final, code.field)


def _final_positions(spec: ConvertibleCodeSpec, source: Manifest, batches: int) -> list[list[int]]:
    """Data chunk held by every systematic node of the converted stripes."""
    p = spec.params
    where = {
        pos: (i, local)
        for i, s in enumerate(spec.partitions.initial_sets)
        for local, pos in enumerate(s)
    }
    fresh = max((c for row in source.positions for c in row), default=-1) + 1
    pad_chunk: dict[tuple[int, int], int] = {}
    positions = []
    for batch in range(batches):
        for fs in spec.partitions.final_sets:
            row = []
            for pos in fs:
                i, local = where[pos]
                g = batch * p.s_i_count + i
                if g < source.stripes:
                    row.append(source.positions[g][local])
                else:
                    row.append(pad_chunk.setdefault((g, local), fresh + len(pad_chunk)))
            positions.append(row)
    return positions


def cmd_convert(args) -> int:
    """Convert a stripe directory to [nf, kf] with an access-optimal plan."""
    source = NodeStore.open(args.stripe_dir)
    m = source.manifest
    params = ConversionParams(m.n, m.k, args.nf, args.kf)
    seed = _seed(args, m.seed)
    stored = m.code

    spec = build_spec(params, m.field_spec, seed)
    tree = None
    if spec.initial_code.generator == stored.generator:
        tree, plan = plan_general(spec)
    elif args.allow_default:
        logger.warning("stored code is not convertible to %s; using the default approach", params)
        spec = _default_spec(params, stored, seed)
        plan = default_plan(spec)
    else:
        raise ConstructionError(
            f"stripes in {args.stripe_dir} were not encoded for conversion to "
            f"[{args.nf},{args.kf}]; re-encode with --nf/--kf or pass --allow-default"
        )
    report = audit_access(spec, plan)

    batches = -(-m.stripes // params.s_i_count)
    pad = batches * params.s_i_count - m.stripes
    target = NodeStore(
        args.out,
        replace(
            m,
            n=params.n_f,
            k=params.k_f,
            stripes=batches * params.s_f_count,
            parity=spec.final_code.parity.tolist(),
            positions=_final_positions(spec, m, batches),
            pad_stripes=pad,
            batch_stripes=params.s_f_count,
            hints={},
        ),
    )
    for batch in range(batches):
        first_i, first_f = batch * params.s_i_count, batch * params.s_f_count

        def fetch(ref):
            stripe, node = first_i + ref[0] - 1, ref[1] - 1
            values = source.read_node(stripe, node)
            if values.size != m.chunk:
                raise PayloadCorruptionError(
                    f"stripe {stripe} node {node} holds {values.size} symbols, expected {m.chunk}"
                )
            return values

        result = compute_new_nodes(spec, plan, fetch)
        for (j, node), values in result.nodes.items():
            target.write_node(first_f + j - 1, node - 1, values)
        for (i, a), (j, b) in plan.unchanged:
            target.relabel_from(source, (first_i + i - 1, a - 1), (first_f + j - 1, b - 1))
    expected = batches * plan.reads * m.chunk
    if source.symbols_read != expected:
        raise PayloadCorruptionError(
            f"read {source.symbols_read} symbols, the plan predicts {expected}"
        )
    target.save_manifest()

    summary = {
        "params": [params.n_i, params.k_i, params.n_f, params.k_f],
        "regime": params.regime,
        **report_to_dict(report),
        "batches": batches,
        "pad_stripes": pad,
        "node_reads": len(source.reads),
        "node_writes": len(target.writes),
        "symbols_read": source.symbols_read,
        "symbols_written": target.symbols_written,
    }
    if args.plan_out:
        plan_data = plan_to_dict(plan)
        if tree is not None:
            plan_data["tree"] = tree_to_dict(tree)
        Path(args.plan_out).write_text(json.dumps(plan_data, indent=2))
    if args.report_out:
        Path(args.report_out).write_text(json.dumps(summary, indent=2))

    print(f"Converted {m.stripes} stripes [{m.n},{m.k}] → {target.manifest.stripes} stripes "
          f"[{params.n_f},{params.k_f}] ({batches} batches, {pad} zero stripes)")
    print(f"  per batch: reads {report.reads}, writes {report.writes}, total {report.total} "
          f"(bound {report.bound}, default {report.default_total}, {report.verdict})")
    print(f"  read savings vs default: {report.savings:.0%}")
    return 0


def _locate_corruption(code: MdsCode, codeword: np.ndarray) -> int | None:
    """The single node whose removal makes the rest a consistent codeword."""
    for suspect in range(code.n):
        others = [j for j in range(code.n) if j != suspect]
        message = decode(code, {j + 1: codeword[j] for j in others[: code.k]})
        rebuilt = code.encode(message)
        if np.array_equal(rebuilt[others], codeword[others]):
            return suspect
    return None


def cmd_verify(args) -> int:
    """Check every stripe's parities and the stored code's MDS property."""
    store = NodeStore.open(args.stripe_dir)
    m = store.manifest
    code = m.code
    failures = []
    try:
        if not is_mds(code):
            failures.append("stored code is not MDS")
    except BudgetError as exc:
        logger.warning("skipping MDS check: %s", exc)

    for s in range(m.stripes):
        missing = [j for j in range(m.n) if not store.exists(s, j)]
        if missing:
            failures.append(f"stripe {s}: missing nodes {missing}")
            continue
        codeword = np.vstack([store.peek_node(s, j) for j in range(m.n)])
        parity = dot(code.parity.data.T, codeword[: m.k], code.field)
        if np.array_equal(parity, codeword[m.k :]):
            continue
        culprit = _locate_corruption(code, codeword)
        if culprit is None:
            bad = int(np.nonzero((parity != codeword[m.k :]).any(axis=1))[0][0]) + m.k
            failures.append(f"stripe {s}: parity node {bad} inconsistent")
        else:
            failures.append(f"stripe {s}: node {culprit} corrupted (s{s}_n{culprit}.dat)")

    if failures:
        for line in failures:
            print(f"FAIL {line}")
        return 1
    print(f"OK {m.stripes} stripes of [{m.n},{m.k}] verified")
    return 0


def cmd_decode(args) -> int:
    """Reassemble the original file, tolerating up to n - k missing nodes per stripe."""
    store = NodeStore.open(args.stripe_dir)
    m = store.manifest
    code = m.code
    chunks = max((c for row in m.positions for c in row), default=-1) + 1
    buffer = np.zeros((chunks, m.chunk), dtype=np.int64)
    for s in range(m.stripes):
        present = {j + 1: store.peek_node(s, j) for j in range(m.n) if store.exists(s, j)}
        if all(j in present for j in range(1, m.k + 1)):
            data = np.vstack([present[j] for j in range(1, m.k + 1)])
        elif len(present) >= m.k:
            logger.info("stripe %d: decoding around %d missing nodes", s, m.n - len(present))
            data = decode(code, present)
        else:
            raise PayloadCorruptionError(
                f"stripe {s} keeps {len(present)} nodes, {m.k} are needed to decode"
            )
        buffer[m.positions[s]] = data
    payload = symbols_to_bytes(buffer.ravel(), m.field_spec)[: m.payload_len]
    Path(args.output).write_bytes(payload)
    print(f"Decoded {len(payload)} bytes from {m.stripes} stripes → {args.output}")
    return 0


def cmd_sweep(args) -> int:
    """Audit every parameter set in the grid and chart read savings."""
    from convertible.utils.plotting import access_by_regime, save_figure, savings_heatmap
    from convertible.utils.processing import run_sweep, summarize_sweep, sweep_parameters

    cfg = SETTINGS["sweep"]
    grid = sweep_parameters(
        max_k=args.max_k or cfg["max_k"],
        max_r=args.max_r or cfg["max_r"],
        max_m=args.max_m or cfg["max_m"],
    )
    df = run_sweep(grid, trials=args.trials if args.trials is not None else cfg["trials"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    df.to_csv(out / "sweep.csv", index=False)
    save_figure(savings_heatmap(df), out, "savings")
    save_figure(access_by_regime(df), out, "access")

    print(f"Sweep: {len(df)} parameter sets")
    print(summarize_sweep(df).to_string())
    bad = df[~df["optimal"] | ~df["preserved"]]
    if len(bad):
        print(f"\n{len(bad)} parameter sets missed the bound or failed preservation:")
        columns = ["n_i", "k_i", "n_f", "k_f", "total", "bound", "preserved"]
        print(bad[columns].to_string(index=False))
        return 1
    return 0


def cmd_figures(args) -> int:
    """Print the two worked examples: (6,5;13,12) and (13,12;6,5)."""
    f = _field(args)
    for params in (ConversionParams(6, 5, 13, 12), ConversionParams(13, 12, 6, 5)):
        spec = build_spec(params, f, _seed(args))
        tree, plan = plan_general(spec)
        report = audit_access(spec, plan)
        bound = bound_for(params)
        print(f"\n{'=' * 60}")
        print(f"  {params}  M={params.M}  ς^I={params.s_i_count}  ς^F={params.s_f_count}")
        print(f"{'=' * 60}")
        print(f"  phases        {' → '.join(tree.phases)}")
        print(f"  reads/stripe  {list(tree.stripe_reads)}")
        print(f"  reads {report.reads}  writes {report.writes}  total {report.total}")
        print(f"  bound {bound.total}  default {report.default_total}  "
              f"savings {report.savings:.0%}")
    return 0


# ── CLI ───────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convertible",
        description="Access-optimal conversion of MDS-coded stripes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--field-bits", type=int, default=None, help="w for GF(2^w)")
        p.add_argument("--seed", type=int, default=None)

    enc = sub.add_parser("encode", help="Encode a file into stripes")
    enc.add_argument("input")
    enc.add_argument("out")
    enc.add_argument("--n", type=int, required=True)
    enc.add_argument("--k", type=int, required=True)
    enc.add_argument("--nf", type=int, default=None, help="planned final n (merge-compatible code)")
    enc.add_argument("--kf", type=int, default=None, help="planned final k")
    enc.add_argument("--chunk", type=int, default=None, help="symbols per node")
    common(enc)

    conv = sub.add_parser("convert", help="Convert stripes to new parameters")
    conv.add_argument("stripe_dir")
    conv.add_argument("out")
    conv.add_argument("--nf", type=int, required=True)
    conv.add_argument("--kf", type=int, required=True)
    conv.add_argument("--plan-out", default=None)
    conv.add_argument("--report-out", default=None)
    conv.add_argument("--allow-default", action="store_true",
                      help="fall back to read-all re-encoding for incompatible stripes")
    conv.add_argument("--seed", type=int, default=None)

    ver = sub.add_parser("verify", help="Verify stripe consistency")
    ver.add_argument("stripe_dir")

    dec = sub.add_parser("decode", help="Reassemble the original file")
    dec.add_argument("stripe_dir")
    dec.add_argument("output")

    sw = sub.add_parser("sweep", help="Audit a parameter grid")
    sw.add_argument("--max-k", type=int, default=None)
    sw.add_argument("--max-r", type=int, default=None)
    sw.add_argument("--max-m", type=int, default=None)
    sw.add_argument("--trials", type=int, default=None)
    sw.add_argument("--out", default="results")

    fig = sub.add_parser("figures", help="Print the worked examples")
    common(fig)
    return parser


COMMANDS = {
    "encode": cmd_encode,
    "convert": cmd_convert,
    "verify": cmd_verify,
    "decode": cmd_decode,
    "sweep": cmd_sweep,
    "figures": cmd_figures,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    if args.command not in COMMANDS:
        parser.print_help()
        return 2
    try:
        return COMMANDS[args.command](args)
    except ConvertibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
