from sttcim.cli import main


def test_device_mc_prints_csv(capsys):
    assert main(["device", "mc", "--samples", "4000", "--seed", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "samples,read_decision_rate,cim_decision_rate,margin_low_uA,margin_high_uA"
    fields = out[1].split(",")
    assert fields[0] == "4000"
    assert 0.0 <= float(fields[1]) < float(fields[2]) <= 1.0


def test_ecc_prove_passes(capsys):
    rc = main(["ecc", "prove", "--code", "secded", "--data-bits", "8", "--trials", "200"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "correct weight 1: 200/200 ok" in out
    assert "detect weight 2: 200/200 ok" in out


def test_array_selftest(capsys):
    assert main(["array", "selftest", "--words", "32", "--seed", "3"]) == 0
    assert "selftest ok" in capsys.readouterr().out


def test_map_plan_text(capsys):
    assert main(["map", "plan", "--pattern", "type2", "--n", "100"]) == 0
    out = capsys.readouterr().out
    assert "PATTERN type2" in out
    assert "PLACE A 0 0 100" in out
    assert "SPARE_FILL 1" in out


def test_xform_rewrites_file(tmp_path, capsys):
    src = tmp_path / "loop.asm"
    src.write_text(
        """
        ADDI r1, r0, 0
        ADDI r2, r0, 1024
        ADDI r3, r0, 32
    loop:
        LDW r5, 0(r1)
        LDW r6, 0(r2)
        XOR r7, r5, r6
        STW r7, 0(r1)
        ADDI r1, r1, 1
        ADDI r2, r2, 1
        BNE r1, r3, loop
        HALT
        """
    )
    out_file = tmp_path / "out.asm"
    rc = main(["xform", str(src), "--pattern", "type1", "--n", "32", "--out", str(out_file)])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "CIMXOR" in printed
    assert "induction k=0..31" in printed
    assert "CIMXOR" in out_file.read_text()


def test_bench_run_and_out_file(tmp_path, capsys):
    out_file = tmp_path / "bench.txt"
    rc = main([
        "bench", "run", "--kernel", "vecsum", "--mode", "cim",
        "--n", "256", "--out", str(out_file),
    ])
    assert rc == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("vecsum/cim n=256")
    assert out_file.read_text().strip() == line


def test_bench_run_bad_mode_fails(capsys):
    rc = main(["bench", "run", "--kernel", "vecsum", "--mode", "vec16"])
    assert rc == 1
    assert "bench failed" in capsys.readouterr().err


def test_bench_sweep_csv(capsys):
    rc = main(["bench", "sweep", "--kernel", "vecsum", "--mode", "cim",
               "--latencies", "1,16", "--n", "128"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "latency,speedup"
    assert lines[1] == "1,1.500000"
    assert lines[2].startswith("16,1.857")
