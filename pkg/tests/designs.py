"""Small designs shared by the simulator and backend tests."""

from pcg_workbench.rtl_core import Const, RtlDesign, validate


def xor_gate():
    d = RtlDesign("xor_gate")
    a = d.add_input("a", 1)
    b = d.add_input("b", 1)
    out = d.add_output("out", 1)
    d.assign_comb(out, a ^ b)
    return validate(d)


def chained(reverse=False):
    """c := b + 1, b := a + 1, with the assignments declared in either order."""
    d = RtlDesign("chained")
    a = d.add_input("a", 8)
    b = d.add_signal("b", 8)
    c = d.add_output("c", 8)
    steps = [(c, b + 1), (b, a + 1)]
    for target, e in reversed(steps) if reverse else steps:
        d.assign_comb(target, e)
    return validate(d)


def swap(a0=1, b0=0):
    d = RtlDesign("swap")
    a = d.add_signal("a", 1)
    b = d.add_signal("b", 1)
    d.add_register(a, b, a0)
    d.add_register(b, a, b0)
    return validate(d)


def counter3():
    d = RtlDesign("counter3")
    c = d.add_output("count", 3)
    d.add_register(c, c + 1, 0)
    return validate(d)


def toggle():
    d = RtlDesign("toggle")
    t = d.add_signal("t", 1)
    d.add_register(t, ~t, 1)
    return validate(d)


def empty(name="top"):
    return validate(RtlDesign(name))


def const_out():
    d = RtlDesign("const_out")
    y = d.add_output("y", 32)
    d.assign_comb(y, Const(10, 32))
    return validate(d)
