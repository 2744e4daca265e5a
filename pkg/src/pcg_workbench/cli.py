"""Command-line entry point: ``pcg-workbench <subcommand>``.

Subcommands::

    generate       raw big-endian 32-bit words on stdout (pipe into dieharder -g 200)
    simulate       run the Wishbone RNG with a program-and-sample testbench, write VCD
    emit-verilog   write the RNG Verilog module
    battery        run the statistical battery on a raw word stream
    wb-demo        program the generator over the bus and print the transcript
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
from pathlib import Path

from . import pcg
from .battery import TESTS, BatterySizes, WordStream, format_report, format_tsv, run_battery, write_words
from .battery.report import Assessment
from .pcg import PcgConfig, golden_blocks
from .sim import REPRODUCIBLE_DATE, free_run, write_vcd
from .verilog import emit_verilog, port_roster
from .wishbone import (
    CLOCK,
    CTRL_LOAD,
    CTRL_STEP,
    Reg,
    WbBench,
    WbTimeout,
    build_rng_with_wishbone,
    format_transcript,
    program_script,
)

log = logging.getLogger("pcg_workbench")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal or 0x-prefixed integer: {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"{text} does not fit in 64 bits")
    return value


def _add_pcg_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=_u64, default=0, help="initial state (default 0)")
    p.add_argument("--mult", type=_u64, default=pcg.DEFAULT_MULTIPLIER, help="LCG multiplier")
    p.add_argument("--inc", type=_u64, default=pcg.DEFAULT_INCREMENT, help="LCG increment")


def _config(args) -> PcgConfig:
    return PcgConfig(args.seed, args.mult, args.inc)


def _binary_stdout():
    return getattr(sys.stdout, "buffer", sys.stdout)


def _open_out(path: str, binary: bool = False):
    if path == "-":
        return contextlib.nullcontext(_binary_stdout() if binary else sys.stdout)
    return open(path, "wb" if binary else "w", **({} if binary else {"newline": "\n"}))


def cmd_generate(args) -> int:
    config = _config(args)
    for w in pcg.validate_config(config):
        log.warning("degenerate parameters: %s", w.value)
    if args.source == "golden":
        blocks = golden_blocks(config, args.count)
    else:
        design = build_rng_with_wishbone(config)
        blocks = free_run(design, "output", args.count)
    try:
        with _open_out(args.out, binary=True) as out:
            for block in blocks:
                out.write(write_words(block))
            out.flush()
    except BrokenPipeError:
        # the consumer (e.g. dieharder) stopped reading; silence the exit-time flush
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
    return 0


def cmd_simulate(args) -> int:
    config = _config(args)
    bench = WbBench(config, trace=True)
    samples = args.cycles // 6 + 1
    for item in program_script(config, samples):
        bench.master.submit(item[0], int(item[1]), *item[2:])
    for _ in range(args.cycles):
        bench.sim.step()
    state = bench.finish()
    date = REPRODUCIBLE_DATE if args.reproducible else None
    with _open_out(args.vcd) as fh:
        write_vcd(bench.trace, fh, date=date)
    done = bench.master.completed
    print(
        f"cycles={state.cycle} transactions={len(done)} "
        f"state=0x{state['state']:016X} output=0x{state['output']:08X} "
        f"ack_pulses={bench.monitor.acks} vcd={args.vcd}"
    )
    return 0


def cmd_emit_verilog(args) -> int:
    design = build_rng_with_wishbone(_config(args))
    text = emit_verilog(design, clock=CLOCK)
    report = sys.stderr if args.out == "-" else sys.stdout
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, newline="\n")
    for direction, name, width in port_roster(design, clock=CLOCK):
        print(f"{direction:6} {name} [{width}]", file=report)
    return 0


def cmd_battery(args) -> int:
    sizes = BatterySizes()
    if args.tsamples is not None:
        sizes.tsamples = args.tsamples
    if args.psamples is not None:
        sizes.psamples = args.psamples
    if args.serial_m:
        sizes.serial_m = tuple(int(m) for m in args.serial_m.split(","))
    tests = tuple(t.strip() for t in args.tests.split(",")) if args.tests else TESTS
    unknown = [t for t in tests if t not in TESTS]
    if unknown:
        print(f"error: unknown test(s) {', '.join(unknown)}; choose from {', '.join(TESTS)}",
              file=sys.stderr)
        return 2

    def skipped(name, exc):
        print(f"notice: skipping {name}: {exc}", file=sys.stderr)

    if args.generator == "golden":
        stream = WordStream.golden(_config(args))
        results = run_battery(stream, tests, sizes, on_skip=skipped)
    elif args.generator == "randu":
        results = run_battery(WordStream.randu(args.seed | 1), tests, sizes, on_skip=skipped)
    elif args.input == "-":
        results = run_battery(WordStream.from_file(sys.stdin.buffer), tests, sizes, on_skip=skipped)
    else:
        try:
            fh = open(args.input, "rb")
        except OSError as exc:
            print(f"error: cannot read {args.input}: {exc.strerror}", file=sys.stderr)
            return 2
        with fh:
            results = run_battery(WordStream.from_file(fh), tests, sizes, on_skip=skipped)
    sys.stdout.write(format_tsv(results) if args.tsv else format_report(results))
    return 1 if any(r.assessment is Assessment.FAILED for r in results) else 0


def demo_script(config: PcgConfig, samples: int) -> list[tuple]:
    """Program, LOAD, read every register back, then sample ``samples`` outputs."""
    script = program_script(config, 0)
    script += [("R", reg) for reg in Reg if reg is not Reg.OUTPUT]
    for _ in range(samples):
        script += [("R", Reg.OUTPUT), ("W", Reg.CTRL, CTRL_STEP)]
    return script


def cmd_wb_demo(args) -> int:
    from .wishbone import run_wb_scenario

    config = _config(args)
    script = demo_script(config, args.samples)
    date = REPRODUCIBLE_DATE if args.reproducible else None
    try:
        # the design powers up with the default constants; the script reprograms it
        transcript = run_wb_scenario(script, vcd=args.vcd, config=PcgConfig(), date=date)
    except WbTimeout as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(format_transcript(transcript))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcg-workbench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="stream raw big-endian 32-bit words")
    _add_pcg_flags(p)
    p.add_argument("--count", type=_u64, default=1000)
    p.add_argument("--source", choices=("golden", "rtl"), default="golden")
    p.add_argument("--out", default="-", help="output file or - for stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="simulate the Wishbone RNG and write a VCD")
    _add_pcg_flags(p)
    p.add_argument("--cycles", type=_u64, default=100)
    p.add_argument("--vcd", default="rng.vcd")
    p.add_argument("--reproducible", action="store_true", help="fixed VCD $date")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("emit-verilog", help="write the RNG Verilog module")
    _add_pcg_flags(p)
    p.add_argument("--out", default="RNG.v", help="output file or - for stdout")
    p.set_defaults(func=cmd_emit_verilog)

    p = sub.add_parser("battery", help="run the statistical battery")
    _add_pcg_flags(p)
    p.add_argument("--input", default="-", help="raw word file or - for stdin")
    p.add_argument("--generator", choices=("golden", "randu"),
                   help="test an internal generator instead of --input")
    p.add_argument("--tests", help=f"comma-separated subset of {','.join(TESTS)}")
    p.add_argument("--tsamples", type=_u64, help="bits per p-sample for bit tests")
    p.add_argument("--psamples", type=_u64)
    p.add_argument("--serial-m", help="comma-separated serial tuple sizes (default 2,4,8)")
    p.add_argument("--tsv", action="store_true", help="tab-separated rows instead of the table")
    p.set_defaults(func=cmd_battery)

    p = sub.add_parser("wb-demo", help="program and sample the RNG over Wishbone")
    _add_pcg_flags(p)
    p.add_argument("--samples", type=_u64, default=8)
    p.add_argument("--vcd")
    p.add_argument("--reproducible", action="store_true", help="fixed VCD $date")
    p.set_defaults(func=cmd_wb_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cycles", 1) < 1:
        parser.error("--cycles must be at least 1")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
