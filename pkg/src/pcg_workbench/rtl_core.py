"""A small register-transfer intermediate representation.

Designs are built from width-checked :class:`Signal` objects, combinational
expression trees (:class:`Expr` subclasses), and clocked :class:`Register`
elements.  Every design has an implicit clock and a synchronous, active-high
reset input which is an ordinary 1-bit input port.

Expressions can be written with Python operators::

    d = RtlDesign("counter")
    c = d.add_signal("c", 3)
    d.add_register(c, c + 1, reset_value=0)

``==`` is deliberately *not* overloaded (signals are used as dict keys); use
:meth:`Expr.eq` instead.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Union

MAX_WIDTH = 64


class RtlError(Exception):
    """Base class for design-construction errors."""


class DuplicateName(RtlError):
    pass


class BadWidth(RtlError):
    pass


class WidthMismatch(RtlError):
    pass


class MultipleDrivers(RtlError):
    pass


class BadResetValue(RtlError):
    pass


class BadConstant(RtlError):
    pass


class BadSlice(RtlError):
    pass


class ForeignSignal(RtlError):
    pass


class FrozenDesign(RtlError):
    pass


class UnboundSignal(RtlError):
    pass


class DesignInvalid(RtlError):
    """Raised by :func:`validate` when :func:`check_design` finds violations."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("\n".join(str(v) for v in report.violations))
        self.report = report


def mask(width: int) -> int:
    return (1 << width) - 1


IntoExpr = Union["Expr", "Signal", int]


def as_expr(value: IntoExpr, width: int | None = None) -> "Expr":
    """Coerce a signal or Python int into an expression.

    Integers need ``width``; they become :class:`Const` nodes.
    """
    if isinstance(value, Expr):
        return value
    if isinstance(value, Signal):
        return Ref(value)
    if isinstance(value, int) and not isinstance(value, bool):
        if width is None:
            raise WidthMismatch(f"cannot infer width for bare integer {value}")
        return Const(value, width)
    raise TypeError(f"not an expression: {value!r}")


def _pair(lhs: IntoExpr, rhs: IntoExpr) -> tuple["Expr", "Expr"]:
    if isinstance(lhs, int) and not isinstance(rhs, int):
        rhs = as_expr(rhs)
        return Const(lhs, rhs.width), rhs
    lhs = as_expr(lhs)
    return lhs, as_expr(rhs, lhs.width)


class _Operators:
    """Operator sugar shared by :class:`Expr` and :class:`Signal`."""

    def _e(self) -> "Expr":
        return as_expr(self)  # type: ignore[arg-type]

    def __add__(self, other):
        return BinOp(BinKind.ADD, *_pair(self._e(), other))

    def __radd__(self, other):
        return BinOp(BinKind.ADD, *_pair(other, self._e()))

    def __sub__(self, other):
        return BinOp(BinKind.SUB, *_pair(self._e(), other))

    def __rsub__(self, other):
        return BinOp(BinKind.SUB, *_pair(other, self._e()))

    def __mul__(self, other):
        return BinOp(BinKind.MUL, *_pair(self._e(), other))

    def __rmul__(self, other):
        return BinOp(BinKind.MUL, *_pair(other, self._e()))

    def __and__(self, other):
        return BinOp(BinKind.AND, *_pair(self._e(), other))

    def __rand__(self, other):
        return BinOp(BinKind.AND, *_pair(other, self._e()))

    def __or__(self, other):
        return BinOp(BinKind.OR, *_pair(self._e(), other))

    def __ror__(self, other):
        return BinOp(BinKind.OR, *_pair(other, self._e()))

    def __xor__(self, other):
        return BinOp(BinKind.XOR, *_pair(self._e(), other))

    def __rxor__(self, other):
        return BinOp(BinKind.XOR, *_pair(other, self._e()))

    def __lshift__(self, amount):
        return BinOp(BinKind.SHL, self._e(), _amount(amount))

    def __rshift__(self, amount):
        return BinOp(BinKind.SHR, self._e(), _amount(amount))

    def __invert__(self):
        return Not(self._e())

    def __getitem__(self, key):
        e = self._e()
        if isinstance(key, int):
            if key < 0:
                key += e.width
            return Slice(e, key, 1)
        if isinstance(key, slice) and key.step is None:
            lo, hi, _ = key.indices(e.width)
            return Slice(e, lo, hi - lo)
        raise TypeError("only integer indices and unit-step slices are supported")

    def rotr(self, amount):
        return BinOp(BinKind.ROTR, self._e(), _amount(amount))

    def eq(self, other):
        return Eq(*_pair(self._e(), other))

    def trunc(self, width: int):
        return Slice(self._e(), 0, width)


def _amount(amount: IntoExpr) -> "Expr":
    if isinstance(amount, int) and not isinstance(amount, bool):
        return Const(amount, max(1, amount.bit_length()))
    return as_expr(amount)


@dataclass(frozen=True, eq=False)
class Signal(_Operators):
    id: int
    name: str
    width: int

    def __repr__(self):
        return f"Signal({self.name!r}, {self.width})"


class Expr(_Operators):
    """Base of all expression nodes. ``width`` is fixed at construction."""

    width: int

    def children(self) -> tuple["Expr", ...]:
        return ()


class BinKind(enum.Enum):
    ADD = "Add"
    SUB = "Sub"
    MUL = "Mul"
    AND = "And"
    OR = "Or"
    XOR = "Xor"
    SHL = "Shl"
    SHR = "ShrLogical"
    ROTR = "RotR"


_SAME_WIDTH = {BinKind.ADD, BinKind.SUB, BinKind.MUL, BinKind.AND, BinKind.OR, BinKind.XOR}


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: int
    width: int

    def __post_init__(self):
        _check_width(self.width)
        if not 0 <= self.value <= mask(self.width):
            raise BadConstant(f"constant {self.value} does not fit in {self.width} bits")


@dataclass(frozen=True, eq=False)
class Ref(Expr):
    signal: Signal

    @property
    def width(self):
        return self.signal.width


@dataclass(frozen=True, eq=False)
class BinOp(Expr):
    kind: BinKind
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        if self.kind in _SAME_WIDTH and self.lhs.width != self.rhs.width:
            raise WidthMismatch(
                f"{self.kind.value} operands have widths {self.lhs.width} and {self.rhs.width}"
            )

    @property
    def width(self):
        return self.lhs.width

    def children(self):
        return (self.lhs, self.rhs)


@dataclass(frozen=True, eq=False)
class Not(Expr):
    operand: Expr

    @property
    def width(self):
        return self.operand.width

    def children(self):
        return (self.operand,)


@dataclass(frozen=True, eq=False)
class Slice(Expr):
    operand: Expr
    low: int
    length: int

    def __post_init__(self):
        if self.length < 1 or self.low < 0 or self.low + self.length > self.operand.width:
            raise BadSlice(
                f"slice [{self.low}+:{self.length}] out of range for width {self.operand.width}"
            )

    @property
    def width(self):
        return self.length

    def children(self):
        return (self.operand,)


@dataclass(frozen=True, eq=False)
class Concat(Expr):
    """Concatenation, most-significant part first (Verilog ``{a, b}`` order)."""

    parts: tuple[Expr, ...]

    def __post_init__(self):
        if not self.parts:
            raise BadWidth("empty concatenation")
        _check_width(sum(p.width for p in self.parts))

    @property
    def width(self):
        return sum(p.width for p in self.parts)

    def children(self):
        return self.parts


@dataclass(frozen=True, eq=False)
class Mux(Expr):
    select: Expr
    when_one: Expr
    when_zero: Expr

    def __post_init__(self):
        if self.select.width != 1:
            raise WidthMismatch(f"mux select must be 1 bit, got {self.select.width}")
        if self.when_one.width != self.when_zero.width:
            raise WidthMismatch(
                f"mux branches have widths {self.when_one.width} and {self.when_zero.width}"
            )

    @property
    def width(self):
        return self.when_one.width

    def children(self):
        return (self.select, self.when_one, self.when_zero)


@dataclass(frozen=True, eq=False)
class Eq(Expr):
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        if self.lhs.width != self.rhs.width:
            raise WidthMismatch(f"Eq operands have widths {self.lhs.width} and {self.rhs.width}")

    width = 1

    def children(self):
        return (self.lhs, self.rhs)


def cat(*parts: IntoExpr) -> Concat:
    return Concat(tuple(as_expr(p) for p in parts))


def mux(select: IntoExpr, when_one: IntoExpr, when_zero: IntoExpr) -> Mux:
    sel = as_expr(select, 1)
    one, zero = _pair(when_one, when_zero)
    return Mux(sel, one, zero)


def zext(value: IntoExpr, width: int) -> Expr:
    e = as_expr(value)
    if e.width == width:
        return e
    if e.width > width:
        raise WidthMismatch(f"cannot zero-extend {e.width} bits to {width}")
    return Concat((Const(0, width - e.width), e))


def _check_width(width: int) -> None:
    if not isinstance(width, int) or not 1 <= width <= MAX_WIDTH:
        raise BadWidth(f"width must be in 1..{MAX_WIDTH}, got {width!r}")


def walk(expr: Expr) -> Iterable[Expr]:
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(node.children())


def signals_of(expr: Expr) -> set[Signal]:
    return {n.signal for n in walk(expr) if isinstance(n, Ref)}


# --------------------------------------------------------------------------
# evaluation


def rotr(value: int, amount: int, width: int) -> int:
    k = amount % width
    return ((value >> k) | (value << (width - k))) & mask(width)


def eval_expr(expr: Expr, env: Mapping[Signal, int] | Callable[[Signal], int]) -> int:
    """Reference interpreter for expression trees.

    ``env`` maps signals to their current values (a mapping or a callable).
    Arithmetic wraps modulo ``2**width``; shift and rotate amounts are taken
    modulo the shifted operand's width.
    """
    lookup = env if callable(env) else None

    def get(sig: Signal) -> int:
        try:
            return lookup(sig) if lookup is not None else env[sig]  # type: ignore[index]
        except KeyError:
            raise UnboundSignal(sig.name) from None

    def ev(e: Expr) -> int:
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Ref):
            return get(e.signal)
        if isinstance(e, BinOp):
            a, b, w = ev(e.lhs), ev(e.rhs), e.width
            k = e.kind
            if k is BinKind.ADD:
                return (a + b) & mask(w)
            if k is BinKind.SUB:
                return (a - b) & mask(w)
            if k is BinKind.MUL:
                return (a * b) & mask(w)
            if k is BinKind.AND:
                return a & b
            if k is BinKind.OR:
                return a | b
            if k is BinKind.XOR:
                return a ^ b
            if k is BinKind.SHL:
                return (a << (b % w)) & mask(w)
            if k is BinKind.SHR:
                return a >> (b % w)
            return rotr(a, b, w)
        if isinstance(e, Not):
            return ev(e.operand) ^ mask(e.width)
        if isinstance(e, Slice):
            return (ev(e.operand) >> e.low) & mask(e.length)
        if isinstance(e, Concat):
            acc = 0
            for p in e.parts:
                acc = (acc << p.width) | ev(p)
            return acc
        if isinstance(e, Mux):
            return ev(e.when_one) if ev(e.select) == 1 else ev(e.when_zero)
        if isinstance(e, Eq):
            return int(ev(e.lhs) == ev(e.rhs))
        raise TypeError(f"unknown expression node {e!r}")

    return ev(expr)


# --------------------------------------------------------------------------
# designs


class Direction(enum.Enum):
    IN = "input"
    OUT = "output"


@dataclass
class Register:
    target: Signal
    next: Expr
    reset_value: int = 0


@dataclass
class RtlDesign:
    """A single-clock netlist.

    The reset input is created with the design and is always the first
    signal.  Raw fields may be edited directly (e.g. to build deliberately
    broken designs for :func:`check_design`); the ``add_*`` methods enforce
    the construction rules eagerly.
    """

    name: str
    reset_name: str = "rst"
    signals: list[Signal] = field(default_factory=list)
    ports: list[tuple[Signal, Direction]] = field(default_factory=list)
    comb_assigns: list[tuple[Signal, Expr]] = field(default_factory=list)
    registers: list[Register] = field(default_factory=list)
    frozen: bool = field(default=False, repr=False)

    def __post_init__(self):
        if not self.signals:
            self.reset = self.add_input(self.reset_name, 1)
        else:
            self.reset = self.signals[0]
        self._compiled = None

    def _mutable(self):
        if self.frozen:
            raise FrozenDesign(f"design {self.name!r} is validated and immutable")

    def signal(self, name: str) -> Signal:
        for s in self.signals:
            if s.name == name:
                return s
        raise KeyError(name)

    def add_signal(self, name: str, width: int) -> Signal:
        self._mutable()
        if not name:
            raise DuplicateName("signal name must be nonempty")
        _check_width(width)
        if any(s.name == name for s in self.signals):
            raise DuplicateName(name)
        sig = Signal(len(self.signals), name, width)
        self.signals.append(sig)
        return sig

    def add_input(self, name: str, width: int) -> Signal:
        sig = self.add_signal(name, width)
        self.ports.append((sig, Direction.IN))
        return sig

    def add_output(self, name: str, width: int) -> Signal:
        sig = self.add_signal(name, width)
        self.ports.append((sig, Direction.OUT))
        return sig

    def _owned(self, sig: Signal):
        if sig.id >= len(self.signals) or self.signals[sig.id] is not sig:
            raise ForeignSignal(f"{sig.name} does not belong to design {self.name!r}")

    def _driven(self, sig: Signal) -> bool:
        return (
            any(t is sig for t, _ in self.comb_assigns)
            or any(r.target is sig for r in self.registers)
            or any(s is sig and d is Direction.IN for s, d in self.ports)
        )

    def _check_expr_signals(self, expr: Expr):
        for s in signals_of(expr):
            self._owned(s)

    def assign_comb(self, target: Signal, expr: IntoExpr) -> None:
        self._mutable()
        self._owned(target)
        expr = as_expr(expr, target.width)
        self._check_expr_signals(expr)
        if expr.width != target.width:
            raise WidthMismatch(f"{target.name} is {target.width} bits, expression is {expr.width}")
        if self._driven(target):
            raise MultipleDrivers(target.name)
        self.comb_assigns.append((target, expr))

    def add_register(self, target: Signal, next: IntoExpr, reset_value: int = 0) -> None:
        self._mutable()
        self._owned(target)
        expr = as_expr(next, target.width)
        self._check_expr_signals(expr)
        if expr.width != target.width:
            raise WidthMismatch(f"{target.name} is {target.width} bits, next is {expr.width}")
        if not 0 <= reset_value <= mask(target.width):
            raise BadResetValue(f"{reset_value} does not fit {target.name}[{target.width}]")
        if self._driven(target):
            raise MultipleDrivers(target.name)
        self.registers.append(Register(target, expr, reset_value))

    def reg(self, name: str, width: int, next: IntoExpr | None = None, reset_value: int = 0):
        """Declare a register; ``next`` may be supplied later via :meth:`add_register`."""
        sig = self.add_signal(name, width)
        if next is not None:
            self.add_register(sig, next, reset_value)
        return sig

    def wire(self, name: str, expr: IntoExpr, width: int | None = None) -> Signal:
        e = as_expr(expr, width)
        sig = self.add_signal(name, e.width if width is None else width)
        self.assign_comb(sig, e)
        return sig

    @property
    def inputs(self) -> list[Signal]:
        return [s for s, d in self.ports if d is Direction.IN]

    @property
    def outputs(self) -> list[Signal]:
        return [s for s, d in self.ports if d is Direction.OUT]


# --------------------------------------------------------------------------
# validation


class ViolationKind(enum.Enum):
    COMBINATIONAL_LOOP = "CombinationalLoop"
    UNDRIVEN = "Undriven"
    MULTIPLE_DRIVERS = "MultipleDrivers"
    WIDTH_MISMATCH = "WidthMismatch"
    BAD_RESET_VALUE = "BadResetValue"
    FOREIGN_SIGNAL = "ForeignSignal"
    DUPLICATE_NAME = "DuplicateName"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    signals: tuple[str, ...]
    detail: str = ""

    def __str__(self):
        return f"{self.kind.value}{{{', '.join(self.signals)}}}" + (
            f": {self.detail}" if self.detail else ""
        )


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[ViolationKind]:
        return {v.kind for v in self.violations}

    def __bool__(self):
        return self.ok


def comb_order(design: RtlDesign) -> list[tuple[Signal, Expr]]:
    """Combinational assignments in dependency order (Kahn's algorithm).

    Ties are broken by signal id so the order is deterministic.  Raises
    :class:`DesignInvalid` on a loop.
    """
    loops, order = _toposort(design)
    if loops:
        raise DesignInvalid(
            ValidationReport(
                tuple(Violation(ViolationKind.COMBINATIONAL_LOOP, c) for c in loops)
            )
        )
    return order


def _toposort(design: RtlDesign):
    import heapq

    comb = {t: e for t, e in design.comb_assigns}
    deps = {t: {s for s in signals_of(e) if s in comb} for t, e in comb.items()}
    users: dict[Signal, list[Signal]] = defaultdict(list)
    for t, ds in deps.items():
        for d in ds:
            users[d].append(t)
    indeg = {t: len(ds) for t, ds in deps.items()}
    ready = [(t.id, t) for t, n in indeg.items() if n == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, t = heapq.heappop(ready)
        order.append((t, comb[t]))
        for u in users[t]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, (u.id, u))
    if len(order) == len(comb):
        return [], order
    return _cycles(deps, {t for t, n in indeg.items() if n > 0}), order


def _cycles(deps, remaining) -> list[tuple[str, ...]]:
    """One representative cycle per strongly connected loop among ``remaining``."""
    import networkx as nx

    g = nx.DiGraph()
    for t in remaining:
        g.add_node(t.name)
        for d in deps[t]:
            if d in remaining:
                g.add_edge(t.name, d.name)
    out = []
    for comp in nx.strongly_connected_components(g):
        sub = g.subgraph(comp)
        if len(comp) == 1 and not sub.has_edge(*(2 * tuple(comp))):
            continue
        cycle = nx.find_cycle(sub)
        names = [u for u, _ in cycle]
        i = names.index(min(names))
        out.append(tuple(names[i:] + names[:i]))
    return sorted(out)


def check_design(design: RtlDesign) -> ValidationReport:
    """Collect every rule violation in ``design``; never raises."""
    found: list[Violation] = []
    owned = set(id(s) for s in design.signals)
    names: dict[str, int] = defaultdict(int)
    for s in design.signals:
        names[s.name] += 1
    for n, c in names.items():
        if c > 1:
            found.append(Violation(ViolationKind.DUPLICATE_NAME, (n,)))

    drivers: dict[Signal, list[str]] = defaultdict(list)
    for s, d in design.ports:
        if d is Direction.IN:
            drivers[s].append("input")
    for t, e in design.comb_assigns:
        drivers[t].append("assign")
        if e.width != t.width:
            found.append(
                Violation(
                    ViolationKind.WIDTH_MISMATCH, (t.name,), f"assign of {e.width} bits to {t.width}"
                )
            )
    for r in design.registers:
        drivers[r.target].append("register")
        if r.next.width != r.target.width:
            found.append(
                Violation(
                    ViolationKind.WIDTH_MISMATCH,
                    (r.target.name,),
                    f"next of {r.next.width} bits for {r.target.width}-bit register",
                )
            )
        if not 0 <= r.reset_value <= mask(r.target.width):
            found.append(Violation(ViolationKind.BAD_RESET_VALUE, (r.target.name,)))

    exprs = [e for _, e in design.comb_assigns] + [r.next for r in design.registers]
    foreign = sorted({s.name for e in exprs for s in signals_of(e) if id(s) not in owned})
    for n in foreign:
        found.append(Violation(ViolationKind.FOREIGN_SIGNAL, (n,)))

    for s in design.signals:
        ds = drivers.get(s, [])
        if len(ds) > 1:
            found.append(Violation(ViolationKind.MULTIPLE_DRIVERS, (s.name,), "+".join(sorted(ds))))
        elif not ds:
            found.append(Violation(ViolationKind.UNDRIVEN, (s.name,)))

    loops, _ = _toposort(design)
    for c in loops:
        found.append(Violation(ViolationKind.COMBINATIONAL_LOOP, c))

    found.sort(key=lambda v: (v.kind.value, v.signals, v.detail))
    return ValidationReport(tuple(found))


def validate(design: RtlDesign) -> RtlDesign:
    """Check ``design`` and freeze it; raises :class:`DesignInvalid` on violations."""
    if design.frozen:
        return design
    report = check_design(design)
    if not report.ok:
        raise DesignInvalid(report)
    design.frozen = True
    return design
