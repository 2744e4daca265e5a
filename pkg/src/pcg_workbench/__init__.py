"""PCG random number generator hardware workbench.

RTL construction, cycle-accurate simulation with VCD output, Verilog
emission, a Wishbone slave wrapper and a Dieharder-style statistical battery.
"""

__version__ = "0.1.0"
