"""Verilog-2001 emission for validated designs.

Output uses two-space indentation and ``\\n`` line endings so it can be
compared byte-for-byte against committed golden files.
"""

from __future__ import annotations

import re

from .rtl_core import (
    BinKind,
    BinOp,
    Concat,
    Const,
    Direction,
    Eq,
    Expr,
    Mux,
    Not,
    Ref,
    RtlDesign,
    Slice,
    comb_order,
    validate,
)

VERILOG_KEYWORDS = frozenset(
    """
    always and assign automatic begin buf bufif0 bufif1 case casex casez cell cmos
    config deassign default defparam design disable edge else end endcase endconfig
    endfunction endgenerate endmodule endprimitive endspecify endtable endtask event
    for force forever fork function generate genvar highz0 highz1 if ifnone incdir
    include initial inout input instance integer join large liblist library localparam
    macromodule medium module nand negedge nmos nor noshowcancelled not notif0 notif1
    or output parameter pmos posedge primitive pull0 pull1 pulldown pullup
    pulsestyle_onevent pulsestyle_ondetect rcmos real realtime reg release repeat
    rnmos rpmos rtran rtranif0 rtranif1 scalared showcancelled signed small specify
    specparam strong0 strong1 supply0 supply1 table task time tran tranif0 tranif1
    tri tri0 tri1 triand trior trireg unsigned use uwire vectored wait wand weak0
    weak1 while wire wor xnor xor
    """.split()
)

_IDENT = re.compile(r"[a-zA-Z_][a-zA-Z0-9_$]*\Z")


def legalize_name(name: str) -> str:
    """Map an arbitrary name onto a legal, non-keyword Verilog identifier."""
    out = re.sub(r"[^a-zA-Z0-9_$]", "_", name)
    if not out or not (out[0].isalpha() or out[0] == "_") or not out[0].isascii():
        out = "_" + out
    if out in VERILOG_KEYWORDS:
        out += "_sig"
    return out


class Namer:
    """Allocates unique legal identifiers; later collisions get ``_1``, ``_2``..."""

    def __init__(self):
        self.used: set[str] = set()

    def __call__(self, name: str) -> str:
        base = legalize_name(name)
        cand, n = base, 0
        while cand in self.used:
            n += 1
            cand = f"{base}_{n}"
        self.used.add(cand)
        return cand


def _const(value: int, width: int) -> str:
    if width == 1:
        return f"1'b{value}"
    return f"{width}'h{value:x}"


def _range(width: int) -> str:
    return f"[{width - 1}:0] " if width > 1 else ""


class _Emitter:
    def __init__(self, design: RtlDesign, clock: str, reset: str | None):
        self.d = design
        self.namer = Namer()
        self.clock = self.namer(clock)
        self.names: dict[int, str] = {}
        if reset is not None:
            self.names[design.reset.id] = self.namer(reset)
        for s in design.signals:
            if s.id not in self.names:
                self.names[s.id] = self.namer(s.name)
        self.temps: list[tuple[str, int, str]] = []

    def ref(self, sig) -> str:
        return self.names[sig.id]

    def temp(self, e: Expr) -> str:
        """Hoist ``e`` into its own exactly-sized wire and return the wire name."""
        text = self.expr(e)
        name = self.namer(f"_t{len(self.temps)}")
        self.temps.append((name, e.width, text))
        return name

    def atom(self, e: Expr) -> str:
        if isinstance(e, (Ref, Const)):
            return self.expr(e)
        return self.temp(e)

    def amount(self, amt: Expr, width: int) -> str:
        if isinstance(amt, Const):
            return str(amt.value % width)
        text = self.expr(amt)
        if (1 << amt.width) <= width:
            return text
        return f"({text} % {width})"

    def expr(self, e: Expr) -> str:
        if isinstance(e, Const):
            return _const(e.value, e.width)
        if isinstance(e, Ref):
            return self.ref(e.signal)
        if isinstance(e, BinOp):
            k, w = e.kind, e.width
            if k is BinKind.ROTR:
                x = self.atom(e.lhs)
                if isinstance(e.rhs, Const):
                    amt = e.rhs.value % w
                    if amt == 0:
                        return x
                    return self.temp_text(f"(({x} >> {amt}) | ({x} << {w - amt}))", w)
                a = self.amount(e.rhs, w)
                if not isinstance(e.rhs, (Ref, Const)):
                    a = self.temp_text(a, max(1, (w - 1).bit_length()) if (1 << e.rhs.width) > w else e.rhs.width)
                return self.temp_text(f"(({x} >> {a}) | ({x} << ({w} - {a})))", w)
            if k in (BinKind.SHL, BinKind.SHR):
                op = "<<" if k is BinKind.SHL else ">>"
                return f"({self.expr(e.lhs)} {op} {self.amount(e.rhs, w)})"
            op = {
                BinKind.ADD: "+",
                BinKind.SUB: "-",
                BinKind.MUL: "*",
                BinKind.AND: "&",
                BinKind.OR: "|",
                BinKind.XOR: "^",
            }[k]
            return f"({self.expr(e.lhs)} {op} {self.expr(e.rhs)})"
        if isinstance(e, Not):
            return f"(~{self.expr(e.operand)})"
        if isinstance(e, Slice):
            op = e.operand
            if isinstance(op, Const):
                return _const((op.value >> e.low) & ((1 << e.length) - 1), e.length)
            if e.low == 0 and e.length == op.width:
                return self.expr(op)
            base = self.atom(op)
            if e.length == 1:
                return f"{base}[{e.low}]"
            return f"{base}[{e.low + e.length - 1}:{e.low}]"
        if isinstance(e, Concat):
            return "{" + ", ".join(self.expr(p) for p in e.parts) + "}"
        if isinstance(e, Mux):
            return f"({self.expr(e.select)} ? {self.expr(e.when_one)} : {self.expr(e.when_zero)})"
        if isinstance(e, Eq):
            return f"({self.expr(e.lhs)} == {self.expr(e.rhs)})"
        raise TypeError(f"unknown expression node {e!r}")

    def temp_text(self, text: str, width: int) -> str:
        name = self.namer(f"_t{len(self.temps)}")
        self.temps.append((name, width, text))
        return name

    def emit(self) -> str:
        d = self.d
        reg_targets = {r.target.id for r in d.registers}
        port_ids = {s.id for s, _ in d.ports}

        ports = [f"input wire {self.clock}"]
        for s, direction in d.ports:
            kind = "reg" if s.id in reg_targets else "wire"
            ports.append(f"{direction.value} {kind} {_range(s.width)}{self.ref(s)}")

        assigns = [f"  assign {self.ref(t)} = {self.expr(e)};" for t, e in comb_order(d)]
        clocked = []
        for r in d.registers:
            q = self.ref(r.target)
            clocked.append(f"    if ({self.ref(d.reset)}) {q} <= {_const(r.reset_value, r.target.width)};")
            clocked.append(f"    else {q} <= {self.expr(r.next)};")

        decls = []
        for s in d.signals:
            if s.id in port_ids:
                continue
            kind = "reg" if s.id in reg_targets else "wire"
            decls.append(f"  {kind} {_range(s.width)}{self.ref(s)};")
        temp_decls = [f"  wire {_range(w)}{n} = {text};" for n, w, text in self.temps]

        lines = [f"module {legalize_name(d.name)}("]
        lines += [f"  {p}," for p in ports[:-1]] + [f"  {ports[-1]}", ");"]
        lines += decls + temp_decls + assigns
        if clocked:
            lines.append(f"  always @(posedge {self.clock}) begin")
            lines += clocked
            lines.append("  end")
        lines.append("endmodule")
        return "\n".join(lines) + "\n"


def emit_verilog(design: RtlDesign, clock: str = "clk", reset: str | None = None) -> str:
    """Verilog text for ``design``.

    ``clock`` names the implicit clock port; ``reset`` renames the design's
    reset input (defaults to its own name).
    """
    validate(design)
    return _Emitter(design, clock, reset).emit()


def port_roster(design: RtlDesign, clock: str = "clk") -> list[tuple[str, str, int]]:
    """``(direction, name, width)`` for each module port, clock first."""
    em = _Emitter(design, clock, None)
    roster = [("input", em.clock, 1)]
    roster += [(d.value, em.ref(s), s.width) for s, d in design.ports]
    return roster


__all__ = ["emit_verilog", "legalize_name", "port_roster", "Namer", "VERILOG_KEYWORDS", "Direction"]
