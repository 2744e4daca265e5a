import io
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

import designs
from pcg_workbench.pcg import PcgConfig, build_pcg_rtl, golden_stream, permute
from pcg_workbench.rtl_core import eval_expr
from pcg_workbench.sim import (
    REPRODUCIBLE_DATE,
    NotAnInput,
    ProcessFault,
    SimError,
    Simulator,
    VcdFormatError,
    VcdTrace,
    free_run,
    initial_state,
    parse_vcd,
    run,
    settle,
    step_clock,
    write_vcd,
)

GOLDEN = Path(__file__).parent / "golden"


def drive(**values):
    def proc(ctx):
        for k, v in values.items():
            ctx.set(k, v)

    return proc


# -- settle / step ------------------------------------------------------------


def test_xor_settles():
    d = designs.xor_gate()
    st0 = initial_state(d)
    v = list(st0.values)
    v[d.signal("a").id] = 1
    v[d.signal("b").id] = 1
    out = settle(d, type(st0)(d, 0, tuple(v)))
    assert out["out"] == 0
    v[d.signal("b").id] = 0
    assert settle(d, type(st0)(d, 0, tuple(v)))["out"] == 1


@pytest.mark.parametrize("reverse", [False, True])
def test_chained_settle_ignores_declaration_order(reverse):
    d = designs.chained(reverse)
    assert initial_state(d)["c"] == 2


def test_register_swap_is_simultaneous():
    d = designs.swap()
    s = initial_state(d)
    assert (s["a"], s["b"]) == (1, 0)
    s = step_clock(d, s)
    assert (s["a"], s["b"]) == (0, 1)
    assert s.cycle == 1


@given(st.integers(0, 60), st.booleans(), st.booleans())
def test_swap_exchanges_every_cycle(n, a0, b0):
    d = designs.swap(int(a0), int(b0))
    s = run(d, n)
    expect = (int(a0), int(b0)) if n % 2 == 0 else (int(b0), int(a0))
    assert (s["a"], s["b"]) == expect


def test_counter_counts_and_wraps():
    d = designs.counter3()
    assert run(d, 0)["count"] == 0
    assert run(d, 5)["count"] == 5
    assert run(d, 11)["count"] == 3


def test_reset_loads_reset_values():
    d = designs.counter3()
    sim = Simulator(d)
    sim.run(4)
    assert sim.peek("count") == 4
    sim.poke("rst", 1)
    sim.step()
    sim.poke("rst", 0)
    assert sim.finish()["count"] == 0


def test_pcg_output_is_permutation_of_state_and_matches_golden():
    cfg = PcgConfig(seed=0xDEADBEEFCAFEF00D)
    d = build_pcg_rtl(cfg)
    s = initial_state(d)
    want = golden_stream(cfg, 25)
    state = cfg.seed
    for k in range(25):
        assert s["output"] == permute(s["state"]) == want[k]
        assert s["state"] == state
        state = (state * cfg.multiplier + cfg.increment) % 2**64
        s = step_clock(d, s)


def test_settled_values_equal_eval_of_drivers():
    d = build_pcg_rtl(PcgConfig(seed=99))
    s = run(d, 7)
    env = {sig: s[sig] for sig in d.signals}
    for target, expr in d.comb_assigns:
        assert s[target] == eval_expr(expr, env)


def test_run_samples_first_golden_outputs():
    cfg = PcgConfig(seed=5)
    d = build_pcg_rtl(cfg)
    seen = []

    def sample(ctx):
        if ctx.cycle:
            seen.append(ctx.get("output"))

    run(d, 11, [sample])
    assert seen == list(golden_stream(cfg, 10))


def test_tracing_does_not_change_final_state():
    d = build_pcg_rtl(PcgConfig(seed=3))
    assert run(d, 50).values == run(d, 50, trace=VcdTrace.for_design(d)).values


def test_processes_can_only_drive_inputs():
    d = designs.counter3()
    with pytest.raises(NotAnInput):
        run(d, 1, [drive(count=3)])


def test_process_fault_carries_cycle():
    def bad(ctx):
        if ctx.cycle == 3:
            raise RuntimeError("boom")

    with pytest.raises(ProcessFault) as info:
        run(designs.counter3(), 10, [bad])
    assert info.value.cycle == 3
    assert isinstance(info.value.__cause__, RuntimeError)


def test_negative_cycles_rejected():
    with pytest.raises(ValueError):
        run(designs.counter3(), -1)


def test_process_inputs_take_effect_same_cycle():
    d = designs.xor_gate()
    outs = []

    def stim(ctx):
        ctx.set("a", ctx.cycle % 2)
        ctx.set("b", 1)

    def watch(ctx):
        outs.append(ctx.get("out"))

    run(d, 4, [stim, watch])
    # watch reads the previous cycle; cycle k drives a = k % 2
    assert outs == [0, 1, 0, 1]


# -- free_run ----------------------------------------------------------------------


def test_free_run_matches_simulator():
    cfg = PcgConfig(seed=11, multiplier=0x1234567, increment=7)
    d = build_pcg_rtl(cfg)
    fast = [x for block in free_run(d, "output", 300, chunk=64) for x in block]
    sim = Simulator(d)
    slow = []
    for _ in range(300):
        sim.step()
        slow.append(sim._prev[d.signal("output").id])
    assert fast == slow == list(golden_stream(cfg, 300))


def test_free_run_refuses_held_reset():
    with pytest.raises(SimError):
        list(free_run(designs.counter3(), "count", 3, inputs={"rst": 1}))


# -- VCD ---------------------------------------------------------------------


def _vcd(design, cycles, signals=None):
    trace = VcdTrace(design.name, signals or design.signals)
    Simulator(design, trace=trace).run(cycles)
    return write_vcd(trace, date=REPRODUCIBLE_DATE)


def test_empty_trace_has_header_and_initial_dump_only():
    text = write_vcd(VcdTrace("top", []), date=REPRODUCIBLE_DATE)
    assert "$timescale 1ns $end" in text
    head, tail = text.split("$enddefinitions $end\n")
    assert "$scope module top $end" in head
    assert tail == "#0\n$dumpvars\n$end\n"


def test_toggle_vcd_matches_golden():
    d = designs.toggle()
    text = _vcd(d, 2, [d.signal("t")])
    assert text == (GOLDEN / "toggle.vcd").read_text()
    body = text.split("$enddefinitions $end\n")[1]
    assert body == "#0\n$dumpvars\n1!\n$end\n#1\n0!\n#2\n1!\n"


def test_vector_values_are_binary_without_leading_zeros():
    d = designs.const_out()
    text = _vcd(d, 1)
    code = VcdTrace.for_design(d).codes[d.signal("y").id]
    assert f"\nb1010 {code}\n" in text


def test_identifier_codes_in_declaration_order():
    d = build_pcg_rtl()
    codes = VcdTrace.for_design(d).codes
    assert [codes[s.id] for s in d.signals] == [chr(33 + i) for i in range(len(d.signals))]
    many = VcdTrace("x", [type(d.signals[0])(i, f"s{i}", 1) for i in range(200)]).codes
    assert len(set(many.values())) == 200
    assert all(all(33 <= ord(c) <= 126 for c in code) for code in many.values())


def test_trace_replay_reconstructs_every_cycle():
    cfg = PcgConfig(seed=77)
    d = build_pcg_rtl(cfg)
    trace = VcdTrace.for_design(d)
    sim = Simulator(d, trace=trace)
    history = []
    for _ in range(40):
        sim.step()
        history.append(dict(zip((s.name for s in d.signals), sim._prev)))
    history.append(sim.finish().as_dict())
    doc = parse_vcd(write_vcd(trace, date=REPRODUCIBLE_DATE))
    assert doc.scope == "pcg" and doc.timescale == "1ns"
    for t, expected in enumerate(history):
        assert doc.values_at(t) == expected


def test_change_records_only_on_change():
    d = designs.counter3()
    trace = VcdTrace("c", [d.signal("rst")])
    Simulator(d, trace=trace).run(10)
    assert trace.changes == []


def test_vcd_is_deterministic():
    d = build_pcg_rtl(PcgConfig(seed=1))
    assert _vcd(d, 30) == _vcd(d, 30)


def test_vcd_sink_receives_text():
    d = designs.counter3()
    trace = VcdTrace.for_design(d)
    Simulator(d, trace=trace).run(3)
    buf = io.StringIO()
    assert write_vcd(trace, buf, date=REPRODUCIBLE_DATE) == buf.getvalue()


def test_vcd_sink_failure_is_reported():
    class Broken(io.StringIO):
        def write(self, s):
            raise OSError("disk full")

    with pytest.raises(SimError):
        write_vcd(VcdTrace("x", []), Broken(), date=REPRODUCIBLE_DATE)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "$scope module a $end $enddefinitions $end",
        "$timescale 1ns $end $scope module a $end $var wire 1 ! x $end $enddefinitions $end 1!",
        "$timescale 1ns $end $scope module a $end $enddefinitions $end #0 1?",
        "$timescale 1ns $end $scope module a $end $enddefinitions $end #3 #2",
    ],
)
def test_parse_vcd_rejects_malformed(text):
    with pytest.raises(VcdFormatError):
        parse_vcd(text)
