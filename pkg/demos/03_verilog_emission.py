"""Emit synthesizable Verilog for the Wishbone-wrapped generator."""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

from pcg_workbench.verilog import emit_verilog, port_roster
from pcg_workbench.wishbone import CLOCK, RESET, build_rng_with_wishbone

design = build_rng_with_wishbone()
text = emit_verilog(design, clock=CLOCK, reset=RESET)

for direction, name, width in port_roster(design, clock=CLOCK):
    print(f"{direction:6} {name:12} [{width}]")
print(f"{len(text.splitlines())} lines of Verilog")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else None
if out:
    out.write_text(text)
    print("written to", out)
else:
    print("\n".join(text.splitlines()[:25]), "\n...")

# If Icarus Verilog is around, make sure the output at least compiles.
if shutil.which("iverilog"):
    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp) / "RNG.v"
        src.write_text(text)
        r = subprocess.run(["iverilog", "-o", str(Path(tmp) / "a.out"), str(src)], capture_output=True, text=True)
        print("iverilog:", "ok" if r.returncode == 0 else r.stderr)
