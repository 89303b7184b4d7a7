"""``aesrv`` command-line entry point."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

from aesrv import __version__
from aesrv.config import ALL_CONFIGS, AesConfig


def _combos(text):
    if text in (None, "all"):
        return ALL_CONFIGS
    return tuple(AesConfig.parse(t) for t in text.split(",") if t.strip())


def cmd_kat(args):
    from aesrv.bench import run_kats

    results = run_kats()
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<24} {r.config:<8} reference={'ok' if r.reference_ok else 'BAD'} "
              f"simulated={'ok' if r.simulated_ok else 'BAD'}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} vectors passed")
    return 1 if failed else 0


def cmd_fuzz(args):
    from aesrv.bench import fuzz

    results = fuzz(args.per_combo, args.seed, _combos(args.combos), args.workers)
    bad = 0
    for r in results:
        bad += len(r.mismatches)
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.config:<8} trials={r.trials} blocks={r.blocks} "
              f"mismatches={len(r.mismatches)}")
        for m in r.mismatches[:3]:
            print("      ", json.dumps(m))
    print(f"total mismatches: {bad}")
    return 1 if bad else 0


def cmd_bench(args):
    from aesrv.bench import SuiteConfig, report_csv, report_json, run_benchmark_suite
    from aesrv.errors import OracleMismatch

    ts = args.timestamp or _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    suite = SuiteConfig(_combos(args.combos), tuple(args.blocks), args.seed, args.fmax, ts, args.workers)
    try:
        report = run_benchmark_suite(suite)
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return 2
    print(f"{'config':<8} {'blocks':>6} {'baseline':>10} {'accel':>7} {'speedup':>9}  "
          f"{'pub base':>10} {'pub acc':>9} {'pub x':>8}")
    for r in report["results"]:
        p = r["published"] or {}
        print(f"{r['config']:<8} {r['n_blocks']:>6} {r['baseline_cycles']:>10} {r['accel_cycles']:>7} "
              f"{r['speedup']:>9.2f}  {p.get('baseline_cycles', '-'):>10} {p.get('accel_cycles', '-'):>9} "
              f"{p.get('speedup_printed', '-'):>8}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.json").write_text(report_json(report))
        (out / "bench.csv").write_text(report_csv(report))
        print(f"wrote {out / 'bench.json'} and {out / 'bench.csv'}")
    return 0


def cmd_cosim(args):
    from aesrv.system import TransferModel, cosimulate, gantt, to_csv

    model = TransferModel(args.pio_rate, args.dma_rate, args.dma_setup)
    rep = cosimulate(AesConfig.parse(args.combo), args.chunks, args.blocks_per_chunk, model)
    t = rep.timeline
    print(f"{rep.config} chunks={rep.n_chunks} blocks/chunk={rep.blocks_per_chunk}")
    print(f"write={rep.write_cycles} exec={rep.exec_cycles} read={rep.read_cycles} prologue={rep.prologue_cycles}")
    print(f"total={t.total_cycles} (+prologue {rep.total_with_prologue}) exec_busy={t.exec_busy_cycles} "
          f"hidden_transfer={t.transfer_hidden_cycles} utilization={t.utilization:.4f} "
          f"{'exec-bound' if rep.exec_bound else 'transfer-bound'}")
    if args.gantt:
        print(gantt(rep.schedule))
    if args.csv:
        Path(args.csv).write_text(to_csv(rep.schedule))
    return 0


def cmd_asm(args):
    from aesrv.asm import assemble
    from aesrv.core import write_hex
    from aesrv.errors import AsmError

    try:
        prog = assemble(Path(args.file).read_text())
    except AsmError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return 1
    if args.output:
        write_hex(args.output, prog.words)
    else:
        sys.stdout.write("".join(f"{w:08x}\n" for w in prog.words))
    return 0


def cmd_disasm(args):
    from aesrv.asm import disassemble
    from aesrv.core import read_hex

    sys.stdout.write(disassemble(read_hex(args.file), addresses=args.addresses))
    return 0


def cmd_run(args):
    from aesrv.core import CoreState, read_hex, run_functional, words_to_bytes
    from aesrv.pipeline import run

    state = CoreState.with_program(read_hex(args.im), words_to_bytes(read_hex(args.dm)) if args.dm else b"")
    if args.functional:
        run_functional(state, args.max_cycles)
        print(f"retired={state.retired} dm_sha256={state.dm_digest()}")
    else:
        rep = run(state, args.max_cycles)
        print(f"cycles={rep.cycles} retired={rep.retired} load_use_stalls={rep.load_use_stalls} "
              f"flushed={rep.flushed} ext_stall_cycles={rep.ext_stall_cycles} dm_sha256={rep.dm_digest}")
    for i in range(0, 32, 4):
        print("  ".join(f"x{j:<2}={state.regs[j]:08x}" for j in range(i, i + 4)))
    return 0


def cmd_metrics(args):
    from aesrv.bench import EfficiencyInputs

    m = EfficiencyInputs(args.fmax, args.block_bits, args.cycles_per_block, args.power, args.slices).metrics()
    print(f"throughput        {m['throughput_mbps']:.4f} Mbps")
    print(f"energy efficiency {m['energy_efficiency_mbps_per_w']:.4f} Mbps/W")
    print(f"area efficiency   {m['area_efficiency_mbps_per_slice']:.6g} Mbps/slice")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="aesrv", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("kat", help="run the known-answer vectors through reference and simulated paths")
    p.set_defaults(func=cmd_kat)

    p = sub.add_parser("fuzz", help="random SAU vs reference cross-validation")
    p.add_argument("--per-combo", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--combos", default="all", help="comma list such as ecb-128,cbc-256")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("bench", help="baseline vs accelerated cycle benchmark")
    p.add_argument("--blocks", type=int, nargs="+", default=[4])
    p.add_argument("--combos", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fmax", type=float, default=241.0, help="MHz used for throughput")
    p.add_argument("--timestamp", help="report timestamp (default: now, UTC)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="directory for bench.json / bench.csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cosim", help="ping-pong SoC schedule with measured EXEC latency")
    p.add_argument("--chunks", type=int, default=8)
    p.add_argument("--blocks-per-chunk", type=int, default=4)
    p.add_argument("--combo", default="ecb-128")
    p.add_argument("--dma-rate", type=float, default=4.0, help="DMA words per cycle")
    p.add_argument("--dma-setup", type=int, default=16)
    p.add_argument("--pio-rate", type=float, default=0.25, help="PIO words per cycle")
    p.add_argument("--gantt", action="store_true")
    p.add_argument("--csv", help="write the phase timeline as CSV")
    p.set_defaults(func=cmd_cosim)

    p = sub.add_parser("asm", help="assemble a source file to a hex image")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_asm)

    p = sub.add_parser("disasm", help="disassemble a hex image")
    p.add_argument("file")
    p.add_argument("-a", "--addresses", action="store_true")
    p.set_defaults(func=cmd_disasm)

    p = sub.add_parser("run", help="run IM/DM hex images on the core")
    p.add_argument("im")
    p.add_argument("--dm")
    p.add_argument("--functional", action="store_true", help="use the single-cycle ISS")
    p.add_argument("--max-cycles", type=int, default=50_000_000)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("metrics", help="throughput / energy / area efficiency")
    p.add_argument("--fmax", type=float, required=True, help="MHz")
    p.add_argument("--power", type=float, required=True, help="W")
    p.add_argument("--slices", type=float, required=True)
    p.add_argument("--cycles-per-block", type=float, required=True)
    p.add_argument("--block-bits", type=int, default=128)
    p.set_defaults(func=cmd_metrics)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surfaced as a one-line error for CLI users
        from aesrv.errors import AesRvError

        if isinstance(exc, AesRvError):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        raise


if __name__ == "__main__":
    sys.exit(main())
