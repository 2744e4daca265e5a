import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcg_workbench.pcg import PcgConfig, build_pcg_rtl, golden_next
from pcg_workbench.rtl_core import (
    BadResetValue,
    BadWidth,
    BinKind,
    BinOp,
    Const,
    DesignInvalid,
    DuplicateName,
    FrozenDesign,
    MultipleDrivers,
    Register,
    RtlDesign,
    UnboundSignal,
    ViolationKind,
    WidthMismatch,
    cat,
    check_design,
    comb_order,
    eval_expr,
    mask,
    mux,
    validate,
)

widths = st.integers(1, 64)


@st.composite
def width_and_values(draw, n=2):
    w = draw(widths)
    return (w, *[draw(st.integers(0, mask(w))) for _ in range(n)])


# -- construction ----------------------------------------------------------


def test_add_signal_widths():
    d = RtlDesign("t")
    assert d.add_signal("state", 64).width == 64
    assert d.add_signal("output", 32).width == 32
    with pytest.raises(BadWidth):
        d.add_signal("x", 0)
    with pytest.raises(BadWidth):
        d.add_signal("y", 65)


def test_add_signal_rejects_duplicates_and_empty_names():
    d = RtlDesign("t")
    d.add_signal("a", 1)
    with pytest.raises(DuplicateName):
        d.add_signal("a", 2)
    with pytest.raises(DuplicateName):
        d.add_signal("rst", 1)  # the reset port already exists
    with pytest.raises(DuplicateName):
        d.add_signal("", 1)


def test_reset_is_first_signal():
    d = RtlDesign("t", reset_name="wb_rst_i")
    assert d.signals[0] is d.reset
    assert d.reset.name == "wb_rst_i" and d.reset.width == 1
    assert d.inputs == [d.reset]


def test_assign_comb_width_and_drivers():
    d = RtlDesign("t")
    a = d.add_input("a", 32)
    b = d.add_input("b", 64)
    y = d.add_signal("y", 32)
    with pytest.raises(WidthMismatch):
        d.assign_comb(y, b)
    d.assign_comb(y, a)
    with pytest.raises(MultipleDrivers):
        d.assign_comb(y, a)
    with pytest.raises(MultipleDrivers):
        d.assign_comb(a, y)  # inputs are driven from outside


def test_add_register_rules():
    d = RtlDesign("t")
    state = d.add_signal("state", 64)
    d.add_register(state, state * 5 + 1, reset_value=0)
    s2 = d.add_signal("s2", 8)
    with pytest.raises(BadResetValue):
        d.add_register(s2, s2, reset_value=256)
    c = d.wire("c", Const(1, 8))
    with pytest.raises(MultipleDrivers):
        d.add_register(c, c)
    with pytest.raises(WidthMismatch):
        d.add_register(s2, state)


def test_bare_int_needs_width():
    with pytest.raises(WidthMismatch):
        RtlDesign("t").wire("w", 5)


def test_validated_design_is_frozen():
    d = RtlDesign("t")
    d.reg("q", 1, ~d.signal("rst"))
    validate(d)
    with pytest.raises(FrozenDesign):
        d.add_signal("late", 1)


# -- check_design -----------------------------------------------------------


def test_combinational_loop_reported_with_cycle():
    d = RtlDesign("t")
    a = d.add_signal("a", 4)
    b = d.add_signal("b", 4)
    d.assign_comb(a, b)
    d.assign_comb(b, a)
    report = check_design(d)
    assert not report.ok
    loops = [v for v in report.violations if v.kind is ViolationKind.COMBINATIONAL_LOOP]
    assert [v.signals for v in loops] == [("a", "b")]
    assert str(loops[0]) == "CombinationalLoop{a, b}"
    with pytest.raises(DesignInvalid):
        validate(d)
    with pytest.raises(DesignInvalid):
        comb_order(d)


def test_self_loop_and_disjoint_loops():
    d = RtlDesign("t")
    x = d.add_signal("x", 1)
    d.assign_comb(x, ~x)
    p, q, r = (d.add_signal(n, 2) for n in "pqr")
    d.assign_comb(p, q)
    d.assign_comb(q, r)
    d.assign_comb(r, p + 1)
    loops = sorted(v.signals for v in check_design(d).violations)
    assert loops == [("p", "q", "r"), ("x",)]


def test_signal_driven_by_assign_and_register():
    d = RtlDesign("t")
    s = d.add_signal("s", 8)
    d.comb_assigns.append((s, Const(1, 8)))  # bypass the eager checks
    d.registers.append(Register(s, Const(2, 8), 0))
    assert ViolationKind.MULTIPLE_DRIVERS in check_design(d).kinds()


def test_undriven_and_raw_width_errors():
    d = RtlDesign("t")
    d.add_signal("floating", 3)
    y = d.add_signal("y", 3)
    d.comb_assigns.append((y, Const(0, 5)))
    r = d.add_signal("r", 2)
    d.registers.append(Register(r, Const(0, 2), 9))
    kinds = check_design(d).kinds()
    assert {ViolationKind.UNDRIVEN, ViolationKind.WIDTH_MISMATCH, ViolationKind.BAD_RESET_VALUE} <= kinds


def test_pcg_builder_passes_validation():
    for seed in (0, 1, 2**64 - 1):
        d = build_pcg_rtl(PcgConfig(seed=seed))
        assert check_design(d).ok
        assert d.frozen


def _build_shuffled(order):
    d = RtlDesign("t")
    a = d.add_input("a", 8)
    names = ["w0", "w1", "w2", "w3"]
    sigs = {n: d.add_signal(n, 8) for n in names}
    exprs = {"w0": a + 1, "w1": sigs["w0"] ^ a, "w2": sigs["w1"] + sigs["w0"], "w3": sigs["w2"] * 3}
    for n in order:
        d.assign_comb(sigs[n], exprs[n])
    return d


@given(st.permutations(["w0", "w1", "w2", "w3"]))
def test_check_design_idempotent_and_order_insensitive(order):
    d = _build_shuffled(order)
    first = check_design(d)
    assert first == check_design(d)
    assert first == check_design(_build_shuffled(["w0", "w1", "w2", "w3"]))
    assert [t.name for t, _ in comb_order(d)] == ["w0", "w1", "w2", "w3"]


@given(st.permutations(["a", "b", "c"]))
def test_loop_report_independent_of_construction_order(order):
    d = RtlDesign("t")
    sigs = {n: d.add_signal(n, 1) for n in order}
    nxt = {"a": "b", "b": "c", "c": "a"}
    for n in order:
        d.assign_comb(sigs[n], sigs[nxt[n]])
    assert [v.signals for v in check_design(d).violations] == [("a", "b", "c")]


# -- eval_expr -----------------------------------------------------------


def test_eval_examples():
    assert eval_expr(BinOp(BinKind.ROTR, Const(1, 32), Const(1, 32)), {}) == 0x8000_0000
    assert eval_expr(Const(30, 5) + Const(5, 5), {}) == 3


def test_eval_pcg_permutation_on_top_bit_state():
    d = RtlDesign("t")
    s = d.add_input("s", 64)
    xorshifted = ((s ^ (s >> 18)) >> 27).trunc(32)
    rot = (s >> 59).trunc(5)
    env = {s: 2**63}
    assert eval_expr(xorshifted, env) == 0x0004_0000
    assert eval_expr(rot, env) == 16
    assert eval_expr(xorshifted.rotr(rot), env) == 4
    assert golden_next(2**63, 12345, 678)[1] == 4


def test_eval_misc_operators():
    d = RtlDesign("t")
    a = d.add_input("a", 8)
    env = {a: 0b1010_0110}
    assert eval_expr(~a, env) == 0b0101_1001
    assert eval_expr(a >> 4, env) == 0b1010
    assert eval_expr(a << 4, env) == 0b0110_0000
    assert eval_expr(a - 0xA7, env) == 0xFF
    assert eval_expr(a[1:3], env) == 0b11
    assert eval_expr(a[7], env) == 1
    assert eval_expr(cat(a[0:4], a[4:8]), env) == 0b0110_1010
    assert eval_expr(mux(a[0], Const(1, 4), Const(2, 4)), env) == 2
    assert eval_expr(mux(a[1], Const(1, 4), Const(2, 4)), env) == 1
    assert eval_expr(a.eq(0xA6), env) == 1
    assert eval_expr(a >> 9, env) == 0b0101_0011  # amount taken mod 8


def test_eval_accepts_callable_env_and_reports_unbound():
    d = RtlDesign("t")
    a = d.add_input("a", 8)
    b = d.add_input("b", 8)
    assert eval_expr(a + 1, lambda s: 41) == 42
    with pytest.raises(UnboundSignal):
        eval_expr(a + b, {a: 1})


@given(width_and_values())
def test_add_wraps(wv):
    w, a, b = wv
    assert eval_expr(Const(a, w) + Const(b, w), {}) == (a + b) % 2**w


@given(width_and_values())
def test_mul_and_sub_wrap(wv):
    w, a, b = wv
    assert eval_expr(Const(a, w) * Const(b, w), {}) == (a * b) % 2**w
    assert eval_expr(Const(a, w) - Const(b, w), {}) == (a - b) % 2**w


def _rot(x, k, w):
    return eval_expr(BinOp(BinKind.ROTR, Const(x, w), Const(k, max(1, k.bit_length()))), {})


@given(st.data())
def test_rotr_properties(data):
    w = data.draw(widths)
    x = data.draw(st.integers(0, mask(w)))
    k = data.draw(st.integers(0, w))
    big = data.draw(st.integers(0, 4 * w))
    assert _rot(x, big, w) == _rot(x, big % w, w)
    assert _rot(_rot(x, k, w), w - k, w) == x
    # independent bit-list model
    bits = [(x >> i) & 1 for i in range(w)]
    rotated = [bits[(i + k) % w] for i in range(w)]
    assert _rot(x, k, w) == sum(b << i for i, b in enumerate(rotated))


@given(st.lists(st.tuples(st.integers(1, 16), st.integers(0, 2**16 - 1)), min_size=1, max_size=4))
def test_concat_then_slice_roundtrips(parts):
    parts = [(w, v & mask(w)) for w, v in parts]
    c = cat(*[Const(v, w) for w, v in parts])
    assert c.width == sum(w for w, _ in parts)
    hi = c.width
    for w, v in parts:
        assert eval_expr(c[hi - w : hi], {}) == v
        hi -= w


def test_random_expression_trees_match_python_model():
    rng = random.Random(7)
    d = RtlDesign("t")
    a = d.add_input("a", 16)
    b = d.add_input("b", 16)
    for _ in range(200):
        x, y = rng.randrange(2**16), rng.randrange(2**16)
        env = {a: x, b: y}
        e = ((a + b) ^ (a >> 3)) * 5 - b
        assert eval_expr(e, env) == ((((x + y) & 0xFFFF) ^ (x >> 3)) * 5 - y) & 0xFFFF
