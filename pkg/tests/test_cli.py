import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pcg_workbench.battery import read_words
from pcg_workbench.cli import build_parser, main
from pcg_workbench.pcg import PcgConfig, golden_stream
from pcg_workbench.sim import parse_vcd
from pcg_workbench.wishbone import WB_PORTS

GOLDEN = Path(__file__).parent / "golden"


def cli(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "pcg_workbench", *args], input=stdin, capture_output=True, check=False
    )


def test_generate_fixed_point_to_stdout():
    r = cli("generate", "--count", "4", "--seed", "0", "--mult", "1", "--inc", "0")
    assert r.returncode == 0
    assert r.stdout == bytes(16)
    assert b"EvenIncrement" in r.stderr


def test_generate_sources_agree(tmp_path):
    a, b = tmp_path / "g.bin", tmp_path / "r.bin"
    flags = ["--count", "1000", "--seed", "0x1234", "--mult", "12345678901", "--inc", "0xFF"]
    assert main(["generate", *flags, "--source", "golden", "--out", str(a)]) == 0
    assert main(["generate", *flags, "--source", "rtl", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    cfg = PcgConfig(0x1234, 12345678901, 0xFF)
    assert np.array_equal(read_words(a.read_bytes()), golden_stream(cfg, 1000))


def test_generate_zero_count(tmp_path):
    out = tmp_path / "z.bin"
    assert main(["generate", "--count", "0", "--out", str(out)]) == 0
    assert out.read_bytes() == b""


@pytest.mark.parametrize("bad", ["-1", "0x1" + "0" * 16, "ten"])
def test_bad_numbers_are_usage_errors(bad, capsys):
    with pytest.raises(SystemExit) as info:
        main(["generate", "--seed", bad])
    assert info.value.code == 2
    assert "--seed" in capsys.readouterr().err


def test_simulate_writes_parsable_deterministic_vcd(tmp_path, capsys):
    a, b = tmp_path / "a.vcd", tmp_path / "b.vcd"
    assert main(["simulate", "--cycles", "100", "--vcd", str(a), "--reproducible"]) == 0
    summary = capsys.readouterr().out
    assert summary.startswith("cycles=100 ")
    assert main(["simulate", "--cycles", "100", "--vcd", str(b), "--reproducible"]) == 0
    assert a.read_bytes() == b.read_bytes() == (GOLDEN / "simulate_100.vcd").read_bytes()
    doc = parse_vcd(a.read_text())
    assert doc.scope == "RNG"
    assert doc.changes[-1][0] <= 100


def test_simulate_zero_cycles_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--cycles", "0"])
    assert info.value.code == 2


def test_emit_verilog(tmp_path, capsys):
    out = tmp_path / "RNG.v"
    assert main(["emit-verilog", "--out", str(out)]) == 0
    roster = capsys.readouterr().out.splitlines()
    assert [line.split()[1] for line in roster] == [p[0] for p in WB_PORTS]
    assert out.read_text() == (GOLDEN / "RNG.v").read_text()
    assert "module RNG" in out.read_text()


def test_emit_verilog_to_stdout():
    r = cli("emit-verilog", "--out", "-")
    assert r.returncode == 0
    assert r.stdout == (GOLDEN / "RNG.v").read_bytes()
    assert b"wbs_dat_o" in r.stderr


def test_battery_zero_stream_fails(tmp_path, capsys):
    zeros = tmp_path / "zeros.bin"
    zeros.write_bytes(bytes(4 * 100_000))
    assert main(["battery", "--input", str(zeros), "--tests", "monobit"]) == 1
    out = capsys.readouterr().out
    assert "sts_monobit" in out and "FAILED" in out


def test_battery_on_piped_golden_stream():
    gen = cli("generate", "--count", "200000", "--seed", "99")
    r = cli("battery", "--tests", "monobit,runs,serial", "--psamples", "10", stdin=gen.stdout)
    assert r.returncode == 0, r.stdout.decode()
    lines = r.stdout.decode().splitlines()
    assert lines[0].strip() == "test_name |ntup| tsamples |psamples| p-value |Assessment"
    assert len(lines) == 1 + 2 + 6
    assert "FAILED" not in r.stdout.decode()


def test_battery_internal_generators(capsys):
    # with only a handful of psamples the asymptotic KS tail cannot reach the
    # fail threshold even for D = 1, so keep the default 20
    assert main(["battery", "--generator", "randu", "--tests", "rank32,serial", "--tsamples", "20000", "--tsv"]) == 1
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines()]
    assert all(len(r) == 6 for r in rows)
    assert any(r[5] == "FAILED" for r in rows)


def test_battery_missing_file_and_bad_test(capsys):
    assert main(["battery", "--input", "/nonexistent/missing.bin"]) == 2
    assert "cannot read" in capsys.readouterr().err
    assert main(["battery", "--generator", "golden", "--tests", "opso"]) == 2
    assert "unknown test" in capsys.readouterr().err


def test_battery_short_input_reports_skip(tmp_path, capsys):
    f = tmp_path / "short.bin"
    f.write_bytes(bytes(4 * 1000))
    main(["battery", "--input", str(f), "--tests", "rank32,monobit", "--tsamples", "1000", "--psamples", "5"])
    captured = capsys.readouterr()
    assert "skipping rank32" in captured.err
    assert "sts_monobit" in captured.out


def test_wb_demo_transcript(tmp_path, capsys):
    vcd = tmp_path / "demo.vcd"
    assert main(["wb-demo", "--seed", "42", "--vcd", str(vcd), "--reproducible"]) == 0
    lines = capsys.readouterr().out.splitlines()
    writes = {line.split()[1]: line.split()[3] for line in lines if line.startswith("W") and "0x1C" not in line}
    readbacks = [line for line in lines if line.startswith("R") and not line.startswith("R 0x00")]
    assert len(writes) == 6 and set(writes) <= {line.split()[1] for line in readbacks}
    for line in readbacks:
        offset, value = line.split()[1], line.split()[3]
        if offset in writes:
            assert value == writes[offset]
    assert "R 0x1C -> 0x00000000" in lines
    samples = [int(line.split()[3], 16) for line in lines if line.startswith("R 0x00")]
    assert samples == list(golden_stream(PcgConfig(seed=42), 8))
    assert parse_vcd(vcd.read_text()).scope == "RNG"


def test_every_subcommand_has_help():
    parser = build_parser()
    for cmd in ("generate", "simulate", "emit-verilog", "battery", "wb-demo"):
        with pytest.raises(SystemExit) as info:
            parser.parse_args([cmd, "--help"])
        assert info.value.code == 0
