"""Wishbone B4 classic-cycle slave around the PCG datapath, plus a master model.

Register map (byte offsets, decoded from ``wbs_adr_i[7:0]``)::

    0x00  OUTPUT   read-only, current permuted output
    0x04  SEED_LO  0x08 SEED_HI
    0x0C  MULT_LO  0x10 MULT_HI
    0x14  INC_LO   0x18 INC_HI
    0x1C  CTRL     bit0 LOAD  (write-only strobe: state <- seed)
                   bit1 ENABLE (free-run, resets to 1)
                   bit2 STEP  (write-only strobe: advance the generator once)

Unmapped offsets read as zero.  ``wbs_ack_o`` is a registered response: it
rises one cycle after ``cyc & stb`` is seen, lasts one cycle, and is gated
by ``cyc & stb`` so it can never be high outside a bus cycle.  Writes
commit on the ack cycle.  ``wbs_sel_i`` is accepted but ignored.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .pcg import PcgConfig, pcg_datapath
from .rtl_core import Const, RtlDesign, cat, mux, validate, zext
from .sim import ProcessContext, Simulator, VcdTrace, write_vcd


class Reg(enum.IntEnum):
    OUTPUT = 0x00
    SEED_LO = 0x04
    SEED_HI = 0x08
    MULT_LO = 0x0C
    MULT_HI = 0x10
    INC_LO = 0x14
    INC_HI = 0x18
    CTRL = 0x1C


CTRL_LOAD = 1 << 0
CTRL_ENABLE = 1 << 1
CTRL_STEP = 1 << 2

WRITABLE = (Reg.SEED_LO, Reg.SEED_HI, Reg.MULT_LO, Reg.MULT_HI, Reg.INC_LO, Reg.INC_HI)

CLOCK = "wb_clk_i"
RESET = "wb_rst_i"

# (name, width, direction) in module port order, clock first
WB_PORTS = (
    ("wb_clk_i", 1, "input"),
    ("wb_rst_i", 1, "input"),
    ("wbs_stb_i", 1, "input"),
    ("wbs_cyc_i", 1, "input"),
    ("wbs_we_i", 1, "input"),
    ("wbs_sel_i", 4, "input"),
    ("wbs_dat_i", 32, "input"),
    ("wbs_adr_i", 32, "input"),
    ("wbs_ack_o", 1, "output"),
    ("wbs_dat_o", 32, "output"),
)

TIMEOUT_CYCLES = 16


def build_rng_with_wishbone(config: PcgConfig = PcgConfig()) -> RtlDesign:
    d = RtlDesign("RNG", reset_name=RESET)
    stb = d.add_input("wbs_stb_i", 1)
    cyc = d.add_input("wbs_cyc_i", 1)
    we = d.add_input("wbs_we_i", 1)
    d.add_input("wbs_sel_i", 4)
    dat_i = d.add_input("wbs_dat_i", 32)
    adr = d.add_input("wbs_adr_i", 32)
    ack_o = d.add_output("wbs_ack_o", 1)
    dat_o = d.add_output("wbs_dat_o", 32)

    seed = d.add_signal("seed", 64)
    mult = d.add_signal("multiplier", 64)
    inc = d.add_signal("increment", 64)
    state = d.add_signal("state", 64)
    enable = d.add_signal("enable", 1)
    ack_q = d.add_signal("ack_q", 1)

    request = d.wire("bus_request", cyc & stb)
    d.add_register(ack_q, request & ~ack_q)
    d.assign_comb(ack_o, ack_q & request)
    offset = d.wire("reg_offset", adr[0:8])
    write = d.wire("bus_write", ack_o & we)

    def hit(reg: Reg):
        return d.wire(f"wr_{reg.name.lower()}", write & offset.eq(int(reg)))

    def split_reg(sig, lo: Reg, hi: Reg, reset_value: int):
        wlo, whi = hit(lo), hit(hi)
        nxt = mux(wlo, cat(sig[32:64], dat_i), mux(whi, cat(dat_i, sig[0:32]), sig))
        d.add_register(sig, nxt, reset_value)

    split_reg(seed, Reg.SEED_LO, Reg.SEED_HI, config.seed)
    split_reg(mult, Reg.MULT_LO, Reg.MULT_HI, config.multiplier)
    split_reg(inc, Reg.INC_LO, Reg.INC_HI, config.increment)

    wr_ctrl = hit(Reg.CTRL)
    d.add_register(enable, mux(wr_ctrl, dat_i[1], enable), reset_value=1)
    load = d.wire("load", wr_ctrl & dat_i[0])
    advance = d.wire("advance", enable | (wr_ctrl & dat_i[2]))
    next_state, permuted = pcg_datapath(state, mult, inc)
    d.add_register(state, mux(load, seed, mux(advance, next_state, state)), config.seed)
    output = d.wire("output", permuted)

    readable = [
        (Reg.OUTPUT, output),
        (Reg.SEED_LO, seed[0:32]),
        (Reg.SEED_HI, seed[32:64]),
        (Reg.MULT_LO, mult[0:32]),
        (Reg.MULT_HI, mult[32:64]),
        (Reg.INC_LO, inc[0:32]),
        (Reg.INC_HI, inc[32:64]),
        (Reg.CTRL, zext(cat(enable, Const(0, 1)), 32)),
    ]
    data = Const(0, 32)
    for reg, value in reversed(readable):
        data = mux(offset.eq(int(reg)), value, data)
    read_data = d.wire("read_data", data)
    d.assign_comb(dat_o, mux(ack_o, read_data, 0))
    return validate(d)


# --------------------------------------------------------------------------
# bus master model


class WbTimeout(Exception):
    def __init__(self, txn: "Transaction", cycles: int):
        super().__init__(f"no ack within {cycles} cycles for {txn.describe()}")
        self.transaction = txn


@dataclass
class Transaction:
    kind: str  # "R" or "W"
    offset: int
    value: int = 0
    start_cycle: int = -1
    ack_cycle: int = -1
    done: bool = False
    timed_out: bool = False

    def describe(self) -> str:
        if self.kind == "W":
            return f"W 0x{self.offset:02X} <= 0x{self.value:08X}"
        return f"R 0x{self.offset:02X}"

    def line(self) -> str:
        if self.kind == "W":
            return f"W 0x{self.offset:02X} <= 0x{self.value:08X}"
        return f"R 0x{self.offset:02X} -> 0x{self.value:08X}"


class WbMaster:
    """Testbench process performing classic cycles one at a time.

    A cycle is held until ack is observed, then ``cyc``/``stb`` drop for
    at least one idle cycle before the next transaction starts.
    """

    def __init__(self, timeout: int = TIMEOUT_CYCLES):
        self.queue: deque[Transaction] = deque()
        self.current: Transaction | None = None
        self.completed: list[Transaction] = []
        self.timeout = timeout

    def submit(self, kind: str, offset: int, value: int = 0) -> Transaction:
        if offset % 4:
            raise ValueError(f"offset 0x{offset:X} is not word aligned")
        if kind not in ("R", "W"):
            raise ValueError(f"unknown transaction kind {kind!r}")
        txn = Transaction(kind, offset, value & 0xFFFFFFFF)
        self.queue.append(txn)
        return txn

    @property
    def busy(self) -> bool:
        return self.current is not None or bool(self.queue)

    def _idle(self, ctx: ProcessContext):
        ctx.set("wbs_cyc_i", 0)
        ctx.set("wbs_stb_i", 0)
        ctx.set("wbs_we_i", 0)

    def __call__(self, ctx: ProcessContext) -> None:
        txn = self.current
        if txn is not None:
            if ctx.get("wbs_ack_o"):
                if txn.kind == "R":
                    txn.value = ctx.get("wbs_dat_o")
                txn.ack_cycle = ctx.cycle - 1
                txn.done = True
                self.completed.append(txn)
                self.current = None
                self._idle(ctx)
                return
            if ctx.cycle - txn.start_cycle >= self.timeout:
                txn.timed_out = True
                self.current = None
                self._idle(ctx)
            return
        if not self.queue:
            self._idle(ctx)
            return
        txn = self.current = self.queue.popleft()
        txn.start_cycle = ctx.cycle
        ctx.set("wbs_cyc_i", 1)
        ctx.set("wbs_stb_i", 1)
        ctx.set("wbs_we_i", int(txn.kind == "W"))
        ctx.set("wbs_sel_i", 0xF)
        ctx.set("wbs_adr_i", txn.offset)
        ctx.set("wbs_dat_i", txn.value if txn.kind == "W" else 0)


class AckMonitor:
    """Process asserting ack discipline on every observed cycle."""

    def __init__(self):
        self.violations: list[str] = []
        self.acks = 0
        self.cycles = 0
        self._last_ack = 0

    def __call__(self, ctx: ProcessContext) -> None:
        if ctx.cycle == 0:
            return
        self.observe(ctx.cycle - 1, ctx.get("wbs_ack_o"), ctx.get("wbs_cyc_i"), ctx.get("wbs_stb_i"))

    def observe(self, cycle: int, ack: int, cyc: int, stb: int) -> None:
        self.cycles += 1
        if ack and not (cyc and stb):
            self.violations.append(f"cycle {cycle}: ack without cyc&stb")
        if ack and self._last_ack:
            self.violations.append(f"cycle {cycle}: ack held for more than one cycle")
        self.acks += ack
        self._last_ack = ack


def _complete(master: WbMaster, sim: Simulator, txn: Transaction) -> int:
    start = sim.cycle
    while not txn.done:
        if txn.timed_out or sim.cycle - start > master.timeout + len(master.queue) * 4 + 4:
            raise WbTimeout(txn, master.timeout)
        sim.step()
    return sim.cycle - start


def wb_write(master: WbMaster, sim: Simulator, offset: int, value: int) -> int:
    """Perform one write cycle; returns the simulator cycles consumed."""
    return _complete(master, sim, master.submit("W", offset, value))


def wb_read(master: WbMaster, sim: Simulator, offset: int) -> int:
    txn = master.submit("R", offset)
    _complete(master, sim, txn)
    return txn.value


class WbBench:
    """A Wishbone RNG simulation with a master (and ack monitor) attached."""

    def __init__(self, config: PcgConfig = PcgConfig(), trace: bool = False, design=None):
        self.design = design if design is not None else build_rng_with_wishbone(config)
        self.master = WbMaster()
        self.monitor = AckMonitor()
        self.trace = VcdTrace.for_design(self.design) if trace else None
        self.sim = Simulator(self.design, [self.master, self.monitor], self.trace)

    def write(self, offset: int, value: int) -> int:
        return wb_write(self.master, self.sim, offset, value)

    def read(self, offset: int) -> int:
        return wb_read(self.master, self.sim, offset)

    def finish(self):
        """Settle the last cycle and let the monitor see it."""
        state = self.sim.finish()
        v = self.sim.values
        d = self.design
        self.monitor.observe(
            self.sim.cycle,
            v[d.signal("wbs_ack_o").id],
            v[d.signal("wbs_cyc_i").id],
            v[d.signal("wbs_stb_i").id],
        )
        return state


def program_script(config: PcgConfig, samples: int) -> list[tuple]:
    """Disable, program seed/multiplier/increment, LOAD, then read-and-step ``samples`` times."""
    script: list[tuple] = [("W", Reg.CTRL, 0)]
    for lo, hi, value in (
        (Reg.SEED_LO, Reg.SEED_HI, config.seed),
        (Reg.MULT_LO, Reg.MULT_HI, config.multiplier),
        (Reg.INC_LO, Reg.INC_HI, config.increment),
    ):
        script.append(("W", lo, value & 0xFFFFFFFF))
        script.append(("W", hi, (value >> 32) & 0xFFFFFFFF))
    script.append(("W", Reg.CTRL, CTRL_LOAD))
    for _ in range(samples):
        script.append(("R", Reg.OUTPUT))
        script.append(("W", Reg.CTRL, CTRL_STEP))
    return script


def run_wb_scenario(
    script: Iterable[Sequence],
    vcd: TextIO | str | Path | None = None,
    config: PcgConfig = PcgConfig(),
    date: str | None = None,
) -> list[Transaction]:
    """Run ``("R", offset)`` / ``("W", offset, value)`` transactions in order.

    Returns the completed transactions (offset, kind, value, ack cycle).
    Raises :class:`WbTimeout` if the slave stops acknowledging.
    """
    bench = WbBench(config, trace=vcd is not None)
    for item in script:
        kind, offset, *rest = item
        if kind == "W":
            bench.write(int(offset), rest[0])
        else:
            bench.read(int(offset))
    bench.finish()
    if vcd is not None:
        if isinstance(vcd, (str, Path)):
            with open(vcd, "w", newline="\n") as fh:
                write_vcd(bench.trace, fh, date=date)
        else:
            write_vcd(bench.trace, vcd, date=date)
    return bench.master.completed


def format_transcript(transcript: Iterable[Transaction]) -> str:
    return "".join(t.line() + "\n" for t in transcript)
