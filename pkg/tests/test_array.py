"""Array model: control table, addressing, logic and add correctness, the
spare-row alias, vector ops, and the error flow under injected noise."""

import numpy as np
import pytest

from sttcim.cimarray import (
    CONTROL_TABLE,
    AccessCounters,
    Addr,
    ArrayConfig,
    CimArray,
    CimOp,
    DeviceColumnSampler,
    HardError,
    InjectedColumnNoise,
    SPARE_ALIAS,
)
from sttcim.device import DeviceParams, VariationSpec


def test_control_table_frozen():
    assert CONTROL_TABLE[CimOp.READ] == ((1, 0, 0), (0, 0, 0), (1, 1, 0))
    assert CONTROL_TABLE[CimOp.NOT] == ((0, 0, 0), (1, 0, 0), (0, 1, 0))
    assert CONTROL_TABLE[CimOp.AND] == ((1, 0, 1), (0, 0, 0), (1, 1, 0))
    assert CONTROL_TABLE[CimOp.OR] == ((1, 1, 0), (0, 0, 0), (1, 1, 0))
    assert CONTROL_TABLE[CimOp.NAND] == ((0, 0, 0), (1, 0, 1), (0, 1, 0))
    assert CONTROL_TABLE[CimOp.NOR] == ((0, 0, 0), (1, 1, 0), (0, 1, 0))
    assert CONTROL_TABLE[CimOp.XOR] == ((1, 1, 0), (1, 0, 1), (0, 0, 1))
    assert CONTROL_TABLE[CimOp.ADD] == ((1, 1, 0), (1, 0, 1), (0, 0, 0))
    assert len(CONTROL_TABLE) == 8
    # Reference enables spell out read/or/and stacks in (REF, AP, P) order.
    assert CONTROL_TABLE[CimOp.READ][0] == (1, 0, 0)
    assert CONTROL_TABLE[CimOp.OR][0] == (1, 1, 0)
    assert CONTROL_TABLE[CimOp.AND][0] == (1, 0, 1)


def test_op_encoding_values():
    assert [op.value for op in CimOp] == [0, 1, 2, 3, 4, 5, 6, 7]
    assert CimOp.READ.value == 0 and CimOp.ADD.value == 7


def test_addr_linear_roundtrip():
    cfg = ArrayConfig()
    assert cfg.data_rows == 128
    assert cfg.words_per_bank == 2048
    assert cfg.total_words == 8192
    for linear in (0, 1, 15, 16, 2047, 2048, 8191):
        a = Addr.from_linear(cfg, linear)
        assert a.to_linear(cfg) == linear
    assert Addr.from_linear(cfg, 2048) == Addr(bank=1, row=0, group=0)
    with pytest.raises(ValueError):
        Addr.from_linear(cfg, 8192)


def test_config_validation():
    with pytest.raises(ValueError):
        ArrayConfig(vector_length=5)
    with pytest.raises(ValueError):
        ArrayConfig(rows_per_bank=1)
    with pytest.raises(ValueError):
        ArrayConfig(code="nope")


def test_write_read_roundtrip():
    arr = CimArray()
    arr.write_word(0, 0xDEADBEEF)
    arr.write_word(Addr(3, 127, 15), 123456789)
    assert arr.read_word(0) == 0xDEADBEEF
    assert arr.read_word(Addr(3, 127, 15)) == 123456789
    assert arr.counters.writes == 2 and arr.counters.reads == 2


def test_logic_and_add_against_alu():
    arr = CimArray()
    rng = np.random.default_rng(42)
    a_addr, b_addr = Addr(1, 3, 5), Addr(1, 77, 5)
    cases = [(0, 0), (0xFFFFFFFF, 1), (0xFFFFFFFF, 0xFFFFFFFF), (1, 1)]
    cases += [(int(rng.integers(0, 1 << 32)), int(rng.integers(0, 1 << 32))) for _ in range(40)]
    for a, b in cases:
        arr.write_word(a_addr, a)
        arr.write_word(b_addr, b)
        assert arr.cim_word(CimOp.AND, a_addr, b_addr) == (a & b, 1)
        assert arr.cim_word(CimOp.OR, a_addr, b_addr) == (a | b, 1)
        assert arr.cim_word(CimOp.XOR, a_addr, b_addr) == (a ^ b, 1)
        assert arr.cim_word(CimOp.NAND, a_addr, b_addr) == ((a & b) ^ 0xFFFFFFFF, 1)
        assert arr.cim_word(CimOp.NOR, a_addr, b_addr) == ((a | b) ^ 0xFFFFFFFF, 1)
        # full integer sum: carry-out rides at bit 32
        assert arr.cim_word(CimOp.ADD, a_addr, b_addr) == (a + b, 1)
        got, acc = arr.cim_not(a_addr)
        assert (got, acc) == (a ^ 0xFFFFFFFF, 1)


def test_selftest_passes_on_default_geometry():
    CimArray().selftest(seed=1, words=16)
    CimArray(ArrayConfig(code="secded")).selftest(seed=2, words=8)


def test_operand_alignment_enforced():
    arr = CimArray()
    arr.write_word(Addr(0, 0, 0), 5)
    arr.write_word(Addr(0, 1, 1), 6)
    arr.write_word(Addr(1, 1, 0), 7)
    with pytest.raises(ValueError):
        arr.cim_word(CimOp.AND, Addr(0, 0, 0), Addr(0, 1, 1))
    with pytest.raises(ValueError):
        arr.cim_word(CimOp.AND, Addr(0, 0, 0), Addr(1, 1, 0))
    with pytest.raises(ValueError):
        arr.cim_word(CimOp.AND, Addr(0, 0, 0), Addr(0, 0, 0))
    with pytest.raises(ValueError):
        arr.cim_word(CimOp.READ, Addr(0, 0, 0), Addr(0, 1, 0))


def test_spare_alias_semantics():
    arr = CimArray()
    arr.write_word(100, 0xF0F0F0F0)
    arr.write_spare(0, 0x0F0F0F0F)
    alias = 100 + SPARE_ALIAS
    assert arr.cim_word(CimOp.OR, 100, alias) == (0xFFFFFFFF, 1)
    assert arr.cim_word(CimOp.AND, 100, alias) == (0, 1)
    # The alias names the same column group, any base word works.
    arr.write_word(37, 3)
    assert arr.cim_word(CimOp.XOR, 37, 37 + SPARE_ALIAS)[0] == 3 ^ 0x0F0F0F0F
    with pytest.raises(ValueError):
        arr.read_word(alias)
    with pytest.raises(ValueError):
        arr.write_word(alias, 1)
    assert arr.counters.special_writes == 1


def test_vcim_sum_and_zcmp():
    arr = CimArray()
    base_a = Addr(2, 0, 0)
    base_b = Addr(2, 1, 0)
    a_vals = [10, 20, 30, 40, 50, 60, 70, 80]
    b_vals = [1, 2, 3, 4, 5, 6, 7, 8]
    for k in range(8):
        arr.write_word(Addr(2, 0, k), a_vals[k])
        arr.write_word(Addr(2, 1, k), b_vals[k])
    total = arr.vcim(CimOp.ADD, base_a, base_b, lanes=8, reduce="sum")
    assert total == sum(a + b for a, b in zip(a_vals, b_vals))
    arr.write_word(Addr(2, 1, 2), 30)
    zc = arr.vcim(CimOp.XOR, base_a, base_b, lanes=4, reduce="zcmp")
    assert zc == 0b1011
    assert arr.counters.vcim_ops == 2
    assert arr.counters.vcim_lanes == 12


def test_vcim_validation():
    arr = CimArray()
    with pytest.raises(ValueError):
        arr.vcim(CimOp.ADD, Addr(0, 0, 0), Addr(0, 1, 0), lanes=3, reduce="sum")
    with pytest.raises(ValueError):
        arr.vcim(CimOp.ADD, Addr(0, 0, 0), Addr(0, 1, 0), lanes=8, reduce="max")
    with pytest.raises(ValueError):
        arr.vcim(CimOp.ADD, Addr(0, 0, 12), Addr(0, 1, 12), lanes=8, reduce="sum")
    with pytest.raises(ValueError):
        arr.vcim(CimOp.ADD, Addr(0, 0, 0), Addr(1, 1, 0), lanes=4, reduce="sum")


def test_injected_noise_xor_fixup_stays_in_array():
    # p high enough to hit single-column confusions often, low enough to
    # keep multi-column words rare.
    arr = CimArray(sampler=InjectedColumnNoise(0.004, seed=3))
    a_addr, b_addr = Addr(0, 0, 0), Addr(0, 1, 0)
    arr.write_word(a_addr, 0x12345678)
    arr.write_word(b_addr, 0x0BADF00D)
    fixups = 0
    for _ in range(2000):
        got, acc = arr.cim_word(CimOp.XOR, a_addr, b_addr)
        assert got == 0x12345678 ^ 0x0BADF00D
        assert acc == 1
    fixups = arr.counters.xor_fixups
    assert fixups > 0
    assert arr.counters.fallbacks == 0
    assert arr.counters.nm_reads == 0


def test_injected_noise_nonxor_falls_back():
    arr = CimArray(sampler=InjectedColumnNoise(0.004, seed=4))
    a_addr, b_addr = Addr(0, 0, 0), Addr(0, 1, 0)
    arr.write_word(a_addr, 0xFFFF0000)
    arr.write_word(b_addr, 0x00FFFF00)
    total_accesses = 0
    trials = 2000
    for _ in range(trials):
        got, acc = arr.cim_word(CimOp.AND, a_addr, b_addr)
        assert got == 0xFFFF0000 & 0x00FFFF00
        assert acc in (1, 3)
        total_accesses += acc
    assert arr.counters.fallbacks > 0
    assert arr.counters.nm_reads == 2 * arr.counters.fallbacks
    # Every fallback costs exactly two extra accesses.
    assert total_accesses == trials + 2 * arr.counters.fallbacks
    p_fail = 1.0 - (1.0 - 0.004) ** arr.code.n
    observed = arr.counters.fallbacks / trials
    assert observed == pytest.approx(p_fail, rel=0.25)


def test_injected_noise_read_path_corrects():
    arr = CimArray(sampler=InjectedColumnNoise(0.004, seed=5))
    arr.write_word(0, 0xCAFEBABE)
    for _ in range(1500):
        assert arr.read_word(0) == 0xCAFEBABE
    assert arr.counters.corrected_words > 0


def test_heavy_noise_raises_hard_error():
    arr = CimArray(sampler=InjectedColumnNoise(0.5, seed=6))
    arr.write_word(0, 1)
    arr.write_word(16, 2)
    with pytest.raises(HardError):
        for _ in range(50):
            arr.cim_word(CimOp.AND, Addr(0, 0, 0), Addr(0, 1, 0))


def test_device_sampler_zero_variation_matches_ideal():
    sampler = DeviceColumnSampler(DeviceParams(), VariationSpec.zero(), seed=1)
    arr = CimArray(sampler=sampler)
    rng = np.random.default_rng(7)
    a_addr, b_addr = Addr(0, 5, 2), Addr(0, 9, 2)
    for _ in range(10):
        a = int(rng.integers(0, 1 << 32))
        b = int(rng.integers(0, 1 << 32))
        arr.write_word(a_addr, a)
        arr.write_word(b_addr, b)
        assert arr.cim_word(CimOp.XOR, a_addr, b_addr) == (a ^ b, 1)
        assert arr.read_word(a_addr) == a
    assert arr.counters.corrected_words == 0


def test_device_sampler_half_variation_all_corrected():
    sampler = DeviceColumnSampler(DeviceParams(), VariationSpec().scaled(0.5), seed=2)
    arr = CimArray(sampler=sampler)
    a_addr, b_addr = Addr(0, 0, 0), Addr(0, 1, 0)
    arr.write_word(a_addr, 0xA5A5A5A5)
    arr.write_word(b_addr, 0x5A5A5A5A)
    for _ in range(2000):
        got, _ = arr.cim_word(CimOp.XOR, a_addr, b_addr)
        assert got == 0xA5A5A5A5 ^ 0x5A5A5A5A
    assert arr.counters.corrected_words > 0


def test_device_sampler_full_variation_needs_error_flow():
    # At the calibrated sigmas a 51-column access fails ~0.5 columns on
    # average; the code absorbs up to 3, beyond that the access hard-fails.
    sampler = DeviceColumnSampler(seed=2)
    arr = CimArray(sampler=sampler)
    a_addr, b_addr = Addr(0, 0, 0), Addr(0, 1, 0)
    arr.write_word(a_addr, 0xA5A5A5A5)
    arr.write_word(b_addr, 0x5A5A5A5A)
    ok = hard = 0
    trials = 2000
    for _ in range(trials):
        try:
            got, _ = arr.cim_word(CimOp.XOR, a_addr, b_addr)
            if got == 0xA5A5A5A5 ^ 0x5A5A5A5A:
                ok += 1
        except HardError:
            hard += 1
    assert ok >= 0.9 * trials
    assert 0 < hard < 0.1 * trials
    assert arr.counters.corrected_words > 100


def test_counters_reset_and_dict():
    c = AccessCounters(reads=3, writes=1)
    d = c.as_dict()
    assert d["reads"] == 3 and d["writes"] == 1
    c.reset()
    assert all(v == 0 for v in c.as_dict().values())
