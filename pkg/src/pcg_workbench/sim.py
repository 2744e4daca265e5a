"""Cycle-accurate two-phase simulation of :class:`~pcg_workbench.rtl_core.RtlDesign`.

A design is compiled once into Python source: one function that settles every
combinational signal in topological order and one that computes all register
next-values from the settled state.  Registers are then committed together,
which gives the usual non-blocking (two-phase) semantics.

Each simulated cycle is::

    processes drive inputs -> settle -> trace -> clock edge

and a final settle is traced after the last edge, so a run of ``n`` cycles
produces timestamps ``0..n``.
"""

from __future__ import annotations

import datetime
import io
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, TextIO

from . import __version__
from .rtl_core import (
    BinKind,
    BinOp,
    Concat,
    Const,
    Eq,
    Expr,
    Mux,
    Not,
    Ref,
    RtlDesign,
    Signal,
    Slice,
    comb_order,
    mask,
    rotr,
    validate,
)


class SimError(Exception):
    pass


class NotAnInput(SimError):
    """A testbench process tried to drive something other than an input port."""


class ProcessFault(SimError):
    def __init__(self, cycle: int, error: BaseException):
        super().__init__(f"testbench process failed at cycle {cycle}: {error!r}")
        self.cycle = cycle
        self.error = error


# --------------------------------------------------------------------------
# expression -> python source


def _py(e: Expr, name: Callable[[Signal], str]) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Ref):
        return name(e.signal)
    if isinstance(e, BinOp):
        a, w, m = _py(e.lhs, name), e.width, mask(e.width)
        k = e.kind
        if k in (BinKind.SHL, BinKind.SHR, BinKind.ROTR):
            if isinstance(e.rhs, Const):
                amt = e.rhs.value % w
                if k is BinKind.SHL:
                    return f"(({a} << {amt}) & {m})"
                if k is BinKind.SHR:
                    return f"({a} >> {amt})"
                if amt == 0:
                    return a
                return f"((({a}) >> {amt}) | ((({a}) << {w - amt}) & {m}))"
            b = _py(e.rhs, name)
            if k is BinKind.SHL:
                return f"(({a} << ({b} % {w})) & {m})"
            if k is BinKind.SHR:
                return f"({a} >> ({b} % {w}))"
            return f"_rotr({a}, {b}, {w})"
        b = _py(e.rhs, name)
        if k is BinKind.ADD:
            return f"(({a} + {b}) & {m})"
        if k is BinKind.SUB:
            return f"(({a} - {b}) & {m})"
        if k is BinKind.MUL:
            return f"(({a} * {b}) & {m})"
        op = {BinKind.AND: "&", BinKind.OR: "|", BinKind.XOR: "^"}[k]
        return f"({a} {op} {b})"
    if isinstance(e, Not):
        return f"({_py(e.operand, name)} ^ {mask(e.width)})"
    if isinstance(e, Slice):
        inner = _py(e.operand, name)
        if e.low == 0:
            return f"({inner} & {mask(e.length)})"
        if e.low + e.length == e.operand.width:
            return f"({inner} >> {e.low})"
        return f"(({inner} >> {e.low}) & {mask(e.length)})"
    if isinstance(e, Concat):
        terms, shift = [], e.width
        for p in e.parts:
            shift -= p.width
            s = _py(p, name)
            terms.append(f"({s} << {shift})" if shift else s)
        return "(" + " | ".join(terms) + ")"
    if isinstance(e, Mux):
        return (
            f"({_py(e.when_one, name)} if {_py(e.select, name)} "
            f"else {_py(e.when_zero, name)})"
        )
    if isinstance(e, Eq):
        return f"(1 if {_py(e.lhs, name)} == {_py(e.rhs, name)} else 0)"
    raise TypeError(f"unknown expression node {e!r}")


_NAMESPACE = {"_rotr": rotr}


def _exec(src: str, fn: str):
    ns = dict(_NAMESPACE)
    exec(compile(src, f"<rtl:{fn}>", "exec"), ns)
    return ns[fn]


@dataclass
class CompiledDesign:
    settle: Callable[[list], None]
    next_values: Callable[[list], tuple]
    reg_ids: tuple[int, ...]
    reset_values: tuple[int, ...]
    input_ids: frozenset[int]
    source: str


def compile_design(design: RtlDesign) -> CompiledDesign:
    """Compile (and cache on the design) the settle/next functions."""
    validate(design)
    if design._compiled is not None:
        return design._compiled
    name = lambda s: f"v[{s.id}]"  # noqa: E731
    lines = ["def settle(v):"]
    for t, e in comb_order(design):
        lines.append(f"    v[{t.id}] = {_py(e, name)}")
    lines.append("    return None")
    settle_src = "\n".join(lines)
    regs = design.registers
    nxt = ", ".join(_py(r.next, name) for r in regs)
    next_src = f"def next_values(v):\n    return ({nxt}{',' if len(regs) == 1 else ''})"
    compiled = CompiledDesign(
        settle=_exec(settle_src, "settle"),
        next_values=_exec(next_src, "next_values"),
        reg_ids=tuple(r.target.id for r in regs),
        reset_values=tuple(r.reset_value for r in regs),
        input_ids=frozenset(s.id for s in design.inputs),
        source=settle_src + "\n\n" + next_src,
    )
    design._compiled = compiled
    return compiled


# --------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class SimState:
    """Value of every signal at one simulation instant."""

    design: RtlDesign = field(repr=False)
    cycle: int
    values: tuple[int, ...]

    def __getitem__(self, key: Signal | str) -> int:
        if isinstance(key, str):
            key = self.design.signal(key)
        return self.values[key.id]

    def as_dict(self) -> dict[str, int]:
        return {s.name: self.values[s.id] for s in self.design.signals}

    @property
    def registers(self) -> dict[str, int]:
        return {r.target.name: self.values[r.target.id] for r in self.design.registers}


def initial_state(design: RtlDesign) -> SimState:
    """Registers at their reset values, inputs at zero, combinational logic settled."""
    c = compile_design(design)
    v = [0] * len(design.signals)
    for i, r in zip(c.reg_ids, c.reset_values):
        v[i] = r
    c.settle(v)
    return SimState(design, 0, tuple(v))


def settle(design: RtlDesign, state: SimState) -> SimState:
    v = list(state.values)
    compile_design(design).settle(v)
    return SimState(design, state.cycle, tuple(v))


def step_clock(design: RtlDesign, state: SimState) -> SimState:
    """Commit all registers simultaneously from a settled state."""
    c = compile_design(design)
    v = list(state.values)
    new = c.reset_values if v[design.reset.id] else c.next_values(v)
    for i, x in zip(c.reg_ids, new):
        v[i] = x
    c.settle(v)
    return SimState(design, state.cycle + 1, tuple(v))


# --------------------------------------------------------------------------
# testbench processes and the simulator


class ProcessContext:
    """What a testbench process sees during its per-cycle callback."""

    def __init__(self, sim: "Simulator"):
        self._sim = sim

    @property
    def cycle(self) -> int:
        return self._sim.cycle

    def get(self, sig: Signal | str) -> int:
        """Settled value from the previous cycle (initial settle at cycle 0)."""
        sig = self._sim._sig(sig)
        return self._sim._prev[sig.id]

    def set(self, sig: Signal | str, value: int) -> None:
        sig = self._sim._sig(sig)
        if sig.id not in self._sim.compiled.input_ids:
            raise NotAnInput(sig.name)
        self._sim.values[sig.id] = value & mask(sig.width)


Process = Callable[[ProcessContext], None]


class Simulator:
    """Interactive simulation of one design; not shareable during a run."""

    def __init__(
        self,
        design: RtlDesign,
        processes: Iterable[Process] = (),
        trace: "VcdTrace | None" = None,
    ):
        self.design = design
        self.compiled = compile_design(design)
        self.processes: list[Process] = list(processes)
        self.trace = trace
        state = initial_state(design)
        self.values = list(state.values)
        self._prev = tuple(self.values)
        self.cycle = 0
        self._ctx = ProcessContext(self)
        self._by_name = {s.name: s for s in design.signals}

    def _sig(self, sig: Signal | str) -> Signal:
        return self._by_name[sig] if isinstance(sig, str) else sig

    def peek(self, sig: Signal | str) -> int:
        return self.values[self._sig(sig).id]

    def poke(self, sig: Signal | str, value: int) -> None:
        self._ctx.set(sig, value)

    @property
    def state(self) -> SimState:
        return SimState(self.design, self.cycle, tuple(self.values))

    def step(self) -> None:
        """One full cycle: processes, settle, trace, clock edge."""
        for proc in self.processes:
            try:
                proc(self._ctx)
            except SimError:
                raise
            except Exception as exc:
                raise ProcessFault(self.cycle, exc) from exc
        c = self.compiled
        v = self.values
        c.settle(v)
        if self.trace is not None:
            self.trace.record(self.cycle, v)
        self._prev = tuple(v)
        new = c.reset_values if v[self.design.reset.id] else c.next_values(v)
        for i, x in zip(c.reg_ids, new):
            v[i] = x
        self.cycle += 1

    def finish(self) -> SimState:
        """Settle after the last edge and trace the final timestamp."""
        self.compiled.settle(self.values)
        if self.trace is not None:
            self.trace.record(self.cycle, self.values)
        self._prev = tuple(self.values)
        return self.state

    def run(self, cycles: int) -> SimState:
        for _ in range(cycles):
            self.step()
        return self.finish()


def run(
    design: RtlDesign,
    cycles: int,
    processes: Sequence[Process] = (),
    trace: "VcdTrace | None" = None,
) -> SimState:
    if cycles < 0:
        raise ValueError("cycles must be non-negative")
    return Simulator(design, processes, trace).run(cycles)


# --------------------------------------------------------------------------
# fast free-running kernel


def _fold(e: Expr, consts: Mapping[int, int]) -> Expr:
    """Constant-fold ``e`` given known signal values (by signal id)."""
    from .rtl_core import eval_expr

    if isinstance(e, Ref):
        if e.signal.id in consts:
            return Const(consts[e.signal.id], e.width)
        return e
    if isinstance(e, Const):
        return e
    kids = [_fold(k, consts) for k in e.children()]
    if all(isinstance(k, Const) for k in kids):
        return Const(eval_expr(_rebuild(e, kids), {}), e.width)
    if isinstance(e, Mux) and isinstance(kids[0], Const):
        return kids[1] if kids[0].value == 1 else kids[2]
    if isinstance(e, BinOp):
        a, b = kids
        if e.kind is BinKind.AND and any(isinstance(k, Const) and k.value == 0 for k in kids):
            return Const(0, e.width)
        if e.kind in (BinKind.OR, BinKind.XOR, BinKind.ADD):
            if isinstance(a, Const) and a.value == 0:
                return b
            if isinstance(b, Const) and b.value == 0:
                return a
    return _rebuild(e, kids)


def _rebuild(e: Expr, kids: list[Expr]) -> Expr:
    if isinstance(e, BinOp):
        return BinOp(e.kind, kids[0], kids[1])
    if isinstance(e, Not):
        return Not(kids[0])
    if isinstance(e, Slice):
        return Slice(kids[0], e.low, e.length)
    if isinstance(e, Concat):
        return Concat(tuple(kids))
    if isinstance(e, Mux):
        return Mux(*kids)
    if isinstance(e, Eq):
        return Eq(*kids)
    raise TypeError(e)


def free_run(
    design: RtlDesign,
    probe: Signal | str,
    cycles: int,
    inputs: Mapping[str, int] | None = None,
    chunk: int = 1 << 16,
) -> Iterable[list[int]]:
    """Sample ``probe`` once per cycle with all inputs held constant.

    Produces exactly what :class:`Simulator` would (one sample per cycle,
    taken after settle), in chunks.  The design is specialised for the held
    inputs: registers that only ever hold their value become constants and
    logic outside the cone of the probe and the live registers is dropped.
    """
    state = initial_state(design)
    probe = design.signal(probe) if isinstance(probe, str) else probe
    held = {design.signal(k).id: v for k, v in (inputs or {}).items()}
    for s in design.inputs:
        held.setdefault(s.id, 0)
    if held[design.reset.id]:
        raise SimError("free_run cannot hold reset asserted")
    comb = comb_order(design)
    regs = list(design.registers)

    consts = dict(held)
    while True:
        for t, e in comb:
            if t.id not in consts:
                f = _fold(e, consts)
                if isinstance(f, Const):
                    consts[t.id] = f.value
        changed = False
        for r in regs:
            tid = r.target.id
            if tid in consts:
                continue
            f = _fold(r.next, consts)
            holds = isinstance(f, Ref) and f.signal.id == tid
            stuck = isinstance(f, Const) and f.value == state.values[tid]
            if holds or stuck:
                consts[tid] = state.values[tid]
                changed = True
        if not changed:
            break

    live_regs = [r for r in regs if r.target.id not in consts]
    folded_comb = {t.id: _fold(e, consts) for t, e in comb if t.id not in consts}
    folded_next = [_fold(r.next, consts) for r in live_regs]

    needed: set[int] = set()
    stack = [probe.id] + [
        s.id for f in folded_next for s in _refs(f)
    ]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        if i in folded_comb:
            stack.extend(s.id for s in _refs(folded_comb[i]))

    name = lambda s: f"s{s.id}"  # noqa: E731
    body = []
    for t, _ in comb:
        if t.id in folded_comb and t.id in needed:
            body.append(f"        s{t.id} = {_py(folded_comb[t.id], name)}")
    probe_src = f"s{probe.id}" if probe.id not in consts else str(consts[probe.id])
    body.append(f"        ap({probe_src})")
    if live_regs:
        lhs = ", ".join(f"s{r.target.id}" for r in live_regs)
        rhs = ", ".join(_py(f, name) for f in folded_next)
        body.append(f"        {lhs}{',' if len(live_regs) == 1 else ''} = {rhs}"
                    f"{',' if len(live_regs) == 1 else ''}")
    reg_tuple = "".join(f"s{r.target.id}, " for r in live_regs)
    src = "\n".join(
        [
            "def kernel(regs, n):",
            f"    ({reg_tuple}) = regs",
            "    out = []",
            "    ap = out.append",
            "    for _ in range(n):",
            *body,
            f"    return out, ({reg_tuple})",
        ]
    )
    kernel = _exec(src, "kernel")
    regs_now = tuple(state.values[r.target.id] for r in live_regs)
    remaining = cycles
    while remaining > 0:
        n = min(chunk, remaining)
        out, regs_now = kernel(regs_now, n)
        remaining -= n
        yield out


def _refs(e: Expr) -> list[Signal]:
    from .rtl_core import walk

    return [n.signal for n in walk(e) if isinstance(n, Ref)]


# --------------------------------------------------------------------------
# VCD


def _vcd_id(index: int) -> str:
    """Printable identifier codes '!'..'~', extended base-94 beyond 94 vars."""
    chars = []
    index += 1
    while index > 0:
        index, r = divmod(index - 1, 94)
        chars.append(chr(33 + r))
    return "".join(reversed(chars))


_VCD_NAME = re.compile(r"\s")


class VcdTrace:
    """Change records of a set of signals, one timestamp per clock cycle."""

    timescale = "1ns"

    def __init__(self, scope: str, signals: Sequence[Signal]):
        self.scope = scope
        self.signals = list(signals)
        self.codes = {s.id: _vcd_id(i) for i, s in enumerate(self.signals)}
        self.initial: dict[int, int] | None = None
        self.changes: list[tuple[int, list[tuple[int, int]]]] = []
        self._last: dict[int, int] = {}

    @classmethod
    def for_design(cls, design: RtlDesign) -> "VcdTrace":
        return cls(design.name, design.signals)

    def record(self, time: int, values: Sequence[int]) -> None:
        if self.initial is None:
            self.initial = {s.id: values[s.id] for s in self.signals}
            self._last = dict(self.initial)
            return
        diff = []
        last = self._last
        for s in self.signals:
            x = values[s.id]
            if last[s.id] != x:
                diff.append((s.id, x))
                last[s.id] = x
        if diff:
            self.changes.append((time, diff))

    def _fmt(self, sig_id: int, width: int, value: int) -> str:
        code = self.codes[sig_id]
        if width == 1:
            return f"{value}{code}"
        return f"b{value:b} {code}"


REPRODUCIBLE_DATE = "1970-01-01 00:00:00"


def write_vcd(trace: VcdTrace, sink: TextIO | None = None, date: str | None = None) -> str:
    """Serialise ``trace`` as a VCD document; also written to ``sink`` if given."""
    if date is None:
        date = datetime.datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    widths = {s.id: s.width for s in trace.signals}
    out = io.StringIO()
    w = out.write
    w(f"$date\n  {date}\n$end\n")
    w(f"$version\n  pcg_workbench {__version__}\n$end\n")
    w(f"$timescale {trace.timescale} $end\n")
    w(f"$scope module {_VCD_NAME.sub('_', trace.scope)} $end\n")
    for s in trace.signals:
        w(f"$var wire {s.width} {trace.codes[s.id]} {_VCD_NAME.sub('_', s.name)} $end\n")
    w("$upscope $end\n")
    w("$enddefinitions $end\n")
    w("#0\n$dumpvars\n")
    for sid, x in (trace.initial or {}).items():
        w(trace._fmt(sid, widths[sid], x) + "\n")
    w("$end\n")
    for time, diff in trace.changes:
        w(f"#{time}\n")
        for sid, x in diff:
            w(trace._fmt(sid, widths[sid], x) + "\n")
    text = out.getvalue()
    if sink is not None:
        try:
            sink.write(text)
        except OSError as exc:
            raise SimError(f"cannot write VCD: {exc}") from exc
    return text


class VcdFormatError(ValueError):
    pass


@dataclass
class VcdDocument:
    scope: str
    timescale: str
    variables: dict[str, tuple[str, int]]  # code -> (name, width)
    changes: list[tuple[int, dict[str, int]]]  # (time, {name: value})

    def values_at(self, time: int) -> dict[str, int]:
        """Replay change records up to and including ``time``."""
        cur: dict[str, int] = {}
        for t, diff in self.changes:
            if t > time:
                break
            cur.update(diff)
        return cur


def parse_vcd(text: str) -> VcdDocument:
    """Parse the subset of VCD written by :func:`write_vcd`, checking structure."""
    tokens = text.split()
    pos = 0
    scope = timescale = None
    variables: dict[str, tuple[str, int]] = {}

    def until_end(start: int) -> tuple[list[str], int]:
        try:
            end = tokens.index("$end", start)
        except ValueError:
            raise VcdFormatError(f"unterminated {tokens[start - 1]}") from None
        return tokens[start:end], end + 1

    while True:
        if pos >= len(tokens):
            raise VcdFormatError("missing $enddefinitions")
        tok = tokens[pos]
        if tok == "$enddefinitions":
            _, pos = until_end(pos + 1)
            break
        if tok in ("$date", "$version", "$comment", "$upscope"):
            _, pos = until_end(pos + 1)
        elif tok == "$timescale":
            body, pos = until_end(pos + 1)
            timescale = "".join(body)
        elif tok == "$scope":
            body, pos = until_end(pos + 1)
            if len(body) != 2:
                raise VcdFormatError(f"bad $scope {body}")
            scope = body[1]
        elif tok == "$var":
            body, pos = until_end(pos + 1)
            if len(body) != 4 or not body[1].isdigit():
                raise VcdFormatError(f"bad $var {body}")
            if body[2] in variables:
                raise VcdFormatError(f"duplicate identifier {body[2]}")
            variables[body[2]] = (body[3], int(body[1]))
        else:
            raise VcdFormatError(f"unexpected token {tok!r} in header")
    if scope is None or timescale is None:
        raise VcdFormatError("missing $scope or $timescale")

    changes: list[tuple[int, dict[str, int]]] = []
    time = None
    last_time = -1
    while pos < len(tokens):
        tok = tokens[pos]
        pos += 1
        if tok.startswith("#"):
            time = int(tok[1:])
            if time <= last_time:
                raise VcdFormatError(f"timestamps not increasing at #{time}")
            last_time = time
            changes.append((time, {}))
        elif tok in ("$dumpvars", "$end"):
            continue
        elif time is None:
            raise VcdFormatError("value change before first timestamp")
        elif tok[0] in "bB":
            code = tokens[pos]
            pos += 1
            _put(changes, variables, code, int(tok[1:], 2))
        elif tok[0] in "01":
            _put(changes, variables, tok[1:], int(tok[0]))
        else:
            raise VcdFormatError(f"unsupported value change {tok!r}")
    return VcdDocument(scope, timescale, variables, changes)


def _put(changes, variables, code, value):
    if code not in variables:
        raise VcdFormatError(f"unknown identifier {code!r}")
    name, width = variables[code]
    if value >> width:
        raise VcdFormatError(f"value {value} too wide for {name}[{width}]")
    changes[-1][1][name] = value
