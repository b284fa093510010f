"""Bank/row/column array model with in-array logic and the controller's
error-handling flow.

Geometry: ``banks`` x ``rows_per_bank`` rows; each row stores
``words_per_row`` ECC codewords side by side.  The last row of every bank is
a spare that sits outside the linear address space; controllers reach it
through the alias window (base address + ``SPARE_ALIAS``) as a
compute-in-memory operand, and fill it with a broadcast special write.

An in-array access activates one row (READ, NOT) or two rows (the rest) and
senses every column of one word in parallel.  Each column carries two
comparator outputs: the source-line current against the or-reference and
against the and-reference (reference stacks hold REF, AP and P cells; the
read reference is the REF cell alone).  All logic outputs derive from those
two bits, so a column that thresholds correctly is correct for every mode at
once.

Error flow: the XOR of two codewords of a linear code is a codeword, so the
controller always decodes the XOR lane of a two-row access.

* CLEAN: trust the requested output, 1 access.
* CORRECTED on an XOR op: the corrected word is the result, 1 access.
* CORRECTED on any other op: the comparator bits of the flagged columns are
  suspect and the requested output cannot be repaired from the XOR lane, so
  fall back to two near-memory reads plus a register-file recompute,
  3 accesses total.
* DETECTED_UNCORRECTABLE: raise ``HardError``.

NOT activates a single row against the read reference with the inverting
amp; there is no second operand, the XOR sideband is identically zero and
sensing errors on NOT pass through undetected.  That asymmetry is inherent
to the access, not a modeling shortcut.

Column noise is pluggable: ``InjectedColumnNoise`` flips a column to an
adjacent decision level with a fixed probability, ``DeviceColumnSampler``
resolves every column against freshly drawn varied cells using the bit-cell
model.  Vector (multi-lane) ops model a digital vector unit and are
noise-free.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .device import DeviceParams, VariationSpec, cell_factors
from .ecc import DecodeStatus, make_code
from .streams import uniforms

__all__ = [
    "CimOp",
    "CONTROL_TABLE",
    "ArrayConfig",
    "Addr",
    "SPARE_ALIAS",
    "HardError",
    "AccessCounters",
    "IdealSampler",
    "InjectedColumnNoise",
    "DeviceColumnSampler",
    "CimArray",
]


class CimOp(enum.IntEnum):
    READ = 0
    NOT = 1
    AND = 2
    OR = 3
    NAND = 4
    NOR = 5
    XOR = 6
    ADD = 7


# Per op: (left reference stack enables, right reference stack enables,
# output select).  Stack order is (REF, AP, P): (1,0,0) is the read
# reference, (1,1,0) the or-reference, (1,0,1) the and-reference.  The left
# amp latches the direct comparison, the right amp the inverted one; select
# bit 2 routes their AND (the XOR lane).  Don't-care lines are driven to 0.
CONTROL_TABLE: dict[CimOp, tuple[tuple[int, int, int], ...]] = {
    CimOp.READ: ((1, 0, 0), (0, 0, 0), (1, 1, 0)),
    CimOp.NOT: ((0, 0, 0), (1, 0, 0), (0, 1, 0)),
    CimOp.AND: ((1, 0, 1), (0, 0, 0), (1, 1, 0)),
    CimOp.OR: ((1, 1, 0), (0, 0, 0), (1, 1, 0)),
    CimOp.NAND: ((0, 0, 0), (1, 0, 1), (0, 1, 0)),
    CimOp.NOR: ((0, 0, 0), (1, 1, 0), (0, 1, 0)),
    CimOp.XOR: ((1, 1, 0), (1, 0, 1), (0, 0, 1)),
    CimOp.ADD: ((1, 1, 0), (1, 0, 1), (0, 0, 0)),
}

# Linear addresses at or above this offset name the spare row of the bank
# the base address lives in; only CiM operands may use them.
SPARE_ALIAS = 1 << 20


class HardError(RuntimeError):
    """An ECC-uncorrectable word reached the controller."""


@dataclass(frozen=True)
class ArrayConfig:
    """Array geometry and word protection.

    rows_per_bank includes the spare row; the linear address space covers
    rows_per_bank - 1 data rows per bank.  vector_length is the lane count
    of the vector unit (4 or 8).
    """

    banks: int = 4
    rows_per_bank: int = 129
    words_per_row: int = 16
    word_width: int = 32
    vector_length: int = 8
    code: str = "ec3ed4"

    def __post_init__(self):
        if self.banks < 1 or self.words_per_row < 1:
            raise ValueError("banks and words_per_row must be positive")
        if self.rows_per_bank < 2:
            raise ValueError("need at least one data row plus the spare")
        if self.vector_length not in (4, 8):
            raise ValueError("vector_length must be 4 or 8")
        if self.vector_length > self.words_per_row:
            raise ValueError("vector_length cannot exceed words_per_row")
        make_code(self.code, self.word_width)

    @property
    def data_rows(self) -> int:
        return self.rows_per_bank - 1

    @property
    def spare_row(self) -> int:
        return self.rows_per_bank - 1

    @property
    def words_per_bank(self) -> int:
        return self.data_rows * self.words_per_row

    @property
    def total_words(self) -> int:
        return self.banks * self.words_per_bank


@dataclass(frozen=True)
class Addr:
    """bank / row / word-group coordinates of one stored word."""

    bank: int
    row: int
    group: int

    def to_linear(self, config: ArrayConfig) -> int:
        return (self.bank * config.data_rows + self.row) * config.words_per_row + self.group

    @classmethod
    def from_linear(cls, config: ArrayConfig, linear: int) -> "Addr":
        if not 0 <= linear < config.total_words:
            raise ValueError(f"linear address {linear} out of range")
        group = linear % config.words_per_row
        rows = linear // config.words_per_row
        return cls(bank=rows // config.data_rows, row=rows % config.data_rows, group=group)


@dataclass
class AccessCounters:
    """Array traffic by category; the energy model prices these."""

    reads: int = 0
    writes: int = 0
    special_writes: int = 0
    cim_ops: int = 0
    vcim_ops: int = 0
    vcim_lanes: int = 0
    nm_reads: int = 0
    corrected_words: int = 0
    xor_fixups: int = 0
    fallbacks: int = 0

    def reset(self) -> None:
        for name in self.__dataclass_fields__:
            setattr(self, name, 0)

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


class IdealSampler:
    """Noise-free sensing; comparator outputs follow the stored bits."""

    def sense_read(self, access: int, bits: np.ndarray) -> np.ndarray:
        return bits.copy()

    def sense_pair(self, access, a_bits, b_bits):
        return a_bits | b_bits, a_bits & b_bits


class InjectedColumnNoise:
    """Adjacent-level confusion with a fixed per-column probability.

    Every activated column independently misreads against one adjacent
    reference with probability p: the outer states can only cross their
    single neighboring reference, the middle state splits p evenly between
    dropping below the or-reference and rising above the and-reference.
    Any such confusion flips the column's XOR output, which is what the
    controller's check keys on.
    """

    def __init__(self, p: float, seed: int = 0):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be a probability")
        self.p = p
        self.seed = seed

    def _draws(self, access: int, n: int) -> np.ndarray:
        ent = np.uint64(access) * np.uint64(SPARE_ALIAS) + np.arange(n, dtype=np.uint64)
        return uniforms(self.seed, ent)

    def sense_read(self, access, bits):
        u = self._draws(access, len(bits))
        return np.where(u < self.p, 1 - bits, bits)

    def sense_pair(self, access, a_bits, b_bits):
        o_or = a_bits | b_bits
        o_and = a_bits & b_bits
        u = self._draws(access, len(a_bits))
        s = a_bits + b_bits
        hit = u < self.p
        o_or = np.where(hit & (s == 0), 1, o_or)
        o_and = np.where(hit & (s == 2), 0, o_and)
        o_or = np.where((u < 0.5 * self.p) & (s == 1), 0, o_or)
        o_and = np.where(hit & (u >= 0.5 * self.p) & (s == 1), 1, o_and)
        return o_or, o_and


class DeviceColumnSampler:
    """Column sensing resolved against the physical bit-cell model.

    Each access draws fresh varied cells for every activated column: two
    data cells and both three-cell reference stacks, all from the same
    deterministic stream layout the Monte Carlo uses (an access owns a
    2^20-column window of entity indices, each entity eight cells).
    """

    _SLOTS = 8

    def __init__(self, params: DeviceParams | None = None,
                 variation: VariationSpec | None = None, seed: int = 0):
        self.params = params if params is not None else DeviceParams()
        self.variation = variation if variation is not None else VariationSpec()
        self.seed = seed

    def _cells(self, access: int, n: int):
        ent = np.uint64(access) * np.uint64(SPARE_ALIAS) + np.arange(n, dtype=np.uint64)
        cells = ent[:, None] * np.uint64(self._SLOTS) + np.arange(self._SLOTS, dtype=np.uint64)
        return cell_factors(self.params, self.variation, self.seed, cells)

    def _currents(self, factor, r_t, slot, r_nominal):
        return self.params.read_voltage / (r_t[:, slot] + r_nominal * factor[:, slot])

    def sense_read(self, access, bits):
        p = self.params
        factor, r_t = self._cells(access, len(bits))
        r_cell = np.where(bits == 1, p.r_p, p.r_ap) * factor[:, 0]
        i_cell = p.read_voltage / (r_t[:, 0] + r_cell)
        i_ref = self._currents(factor, r_t, 2, p.r_ref)
        return (i_cell > i_ref).astype(np.int64)

    def sense_pair(self, access, a_bits, b_bits):
        p = self.params
        factor, r_t = self._cells(access, len(a_bits))
        r_a = np.where(a_bits == 1, p.r_p, p.r_ap) * factor[:, 0]
        r_b = np.where(b_bits == 1, p.r_p, p.r_ap) * factor[:, 1]
        i_sl = p.read_voltage / (r_t[:, 0] + r_a) + p.read_voltage / (r_t[:, 1] + r_b)
        i_ref_or = self._currents(factor, r_t, 2, p.r_ref) + self._currents(
            factor, r_t, 3, p.r_ap
        )
        i_ref_and = self._currents(factor, r_t, 5, p.r_ref) + self._currents(
            factor, r_t, 7, p.r_p
        )
        return (i_sl > i_ref_or).astype(np.int64), (i_sl > i_ref_and).astype(np.int64)


_TWO_ROW_OPS = (CimOp.AND, CimOp.OR, CimOp.NAND, CimOp.NOR, CimOp.XOR, CimOp.ADD)


class CimArray:
    """Array state plus the controller: ECC on the way in and out, the XOR
    check on every two-row access, near-memory fallback bookkeeping."""

    def __init__(self, config: ArrayConfig | None = None, sampler=None,
                 counters: AccessCounters | None = None):
        self.config = config if config is not None else ArrayConfig()
        self.code = make_code(self.config.code, self.config.word_width)
        self.sampler = sampler if sampler is not None else IdealSampler()
        self.counters = counters if counters is not None else AccessCounters()
        self._row_bits = self.config.words_per_row * self.code.n
        self._banks = [[0] * self.config.rows_per_bank for _ in range(self.config.banks)]
        self._access = 0

    # -- addressing -----------------------------------------------------

    def _resolve(self, addr, spare_ok: bool = False) -> Addr:
        if isinstance(addr, Addr):
            if addr.bank >= self.config.banks or addr.group >= self.config.words_per_row:
                raise ValueError(f"{addr} out of range")
            limit = self.config.rows_per_bank if spare_ok else self.config.data_rows
            if not 0 <= addr.row < limit:
                raise ValueError(f"{addr} row out of range")
            return addr
        linear = int(addr)
        if linear >= SPARE_ALIAS:
            if not spare_ok:
                raise ValueError("spare-row alias is only valid as a CiM operand")
            base = Addr.from_linear(self.config, linear - SPARE_ALIAS)
            return Addr(base.bank, self.config.spare_row, base.group)
        return Addr.from_linear(self.config, linear)

    def _get_word(self, a: Addr) -> int:
        row = self._banks[a.bank][a.row]
        return (row >> (a.group * self.code.n)) & ((1 << self.code.n) - 1)

    def _set_word(self, a: Addr, codeword: int) -> None:
        shift = a.group * self.code.n
        mask = ((1 << self.code.n) - 1) << shift
        row = self._banks[a.bank][a.row]
        self._banks[a.bank][a.row] = (row & ~mask) | (codeword << shift)

    def _column_base(self, a: Addr) -> int:
        return a.group * self.code.n

    def _bits(self, codeword: int) -> np.ndarray:
        return np.array([(codeword >> j) & 1 for j in range(self.code.n)], dtype=np.int64)

    @staticmethod
    def _pack(bits: np.ndarray) -> int:
        word = 0
        for j, b in enumerate(bits):
            if b:
                word |= 1 << j
        return word

    # -- scalar accesses -------------------------------------------------

    def write_word(self, addr, data: int) -> None:
        a = self._resolve(addr)
        self._set_word(a, self.code.encode(data))
        self.counters.writes += 1

    def write_spare(self, bank: int, data: int) -> None:
        """Broadcast one word into every group of a bank's spare row."""
        if not 0 <= bank < self.config.banks:
            raise ValueError("bank out of range")
        self._banks[bank][self.config.spare_row] = self._broadcast_row(data)
        self.counters.special_writes += 1

    def write_replicated(self, bank: int, row: int, data: int) -> None:
        """Fill a data row with one word in every group (pattern rows).
        Costs a whole row of ordinary writes."""
        if not 0 <= bank < self.config.banks:
            raise ValueError("bank out of range")
        if not 0 <= row < self.config.data_rows:
            raise ValueError("row out of range")
        self._banks[bank][row] = self._broadcast_row(data)
        self.counters.writes += self.config.words_per_row

    def _broadcast_row(self, data: int) -> int:
        cw = self.code.encode(data)
        row = 0
        for g in range(self.config.words_per_row):
            row |= cw << (g * self.code.n)
        return row

    def _decode_read(self, sensed: int):
        res = self.code.decode(sensed)
        if res.status is DecodeStatus.DETECTED_UNCORRECTABLE:
            raise HardError("uncorrectable word on read")
        if res.status is DecodeStatus.CORRECTED:
            self.counters.corrected_words += 1
        return res.data

    def read_word(self, addr, count: bool = True) -> int:
        a = self._resolve(addr)
        stored = self._get_word(a)
        self._access += 1
        bits = self.sampler.sense_read(self._access, self._bits(stored))
        if count:
            self.counters.reads += 1
        return self._decode_read(self._pack(bits))

    def _nm_read(self, a: Addr) -> int:
        """Near-memory fallback read; separate traffic category."""
        stored = self._get_word(a)
        self._access += 1
        bits = self.sampler.sense_read(self._access, self._bits(stored))
        self.counters.nm_reads += 1
        return self._decode_read(self._pack(bits))

    def cim_not(self, addr) -> tuple[int, int]:
        """Single-row inverted read.  No XOR sideband exists for one
        operand, so sensing errors here are invisible to the controller."""
        a = self._resolve(addr, spare_ok=True)
        stored = self._get_word(a)
        self._access += 1
        bits = self.sampler.sense_read(self._access, self._bits(stored))
        self.counters.cim_ops += 1
        inv = 1 - bits
        data = 0
        for j, pos in enumerate(self.code.data_positions):
            if inv[pos]:
                data |= 1 << j
        return data, 1

    def _ripple_add(self, o_xor: np.ndarray, o_and: np.ndarray) -> int:
        """Per-column ripple over the data positions, carry-in zero.  The
        final carry-out lands at bit word_width, so the result is the full
        integer sum of the operands."""
        result = 0
        carry = 0
        for j, pos in enumerate(self.code.data_positions):
            x = int(o_xor[pos])
            g = int(o_and[pos])
            s = x ^ carry
            carry = g | (x & carry)
            if s:
                result |= 1 << j
        if carry:
            result |= 1 << self.config.word_width
        return result

    def _op_output(self, op: CimOp, o_or, o_and, o_xor) -> int:
        if op is CimOp.ADD:
            return self._ripple_add(o_xor, o_and)
        if op is CimOp.AND:
            lane = o_and
        elif op is CimOp.OR:
            lane = o_or
        elif op is CimOp.NAND:
            lane = 1 - o_and
        elif op is CimOp.NOR:
            lane = 1 - o_or
        else:
            lane = o_xor
        data = 0
        for j, pos in enumerate(self.code.data_positions):
            if lane[pos]:
                data |= 1 << j
        return data

    def _alu(self, op: CimOp, a: int, b: int) -> int:
        mask = (1 << self.config.word_width) - 1
        if op is CimOp.AND:
            return a & b
        if op is CimOp.OR:
            return a | b
        if op is CimOp.NAND:
            return (a & b) ^ mask
        if op is CimOp.NOR:
            return (a | b) ^ mask
        if op is CimOp.XOR:
            return a ^ b
        if op is CimOp.ADD:
            return a + b  # carry-out kept at bit word_width
        raise ValueError(f"not a two-operand op: {op}")

    def cim_word(self, op: CimOp, addr_a, addr_b) -> tuple[int, int]:
        """Two-row in-array op.  Returns (result data, array accesses)."""
        if op not in _TWO_ROW_OPS:
            raise ValueError(f"{op!r} is not a two-row op")
        a = self._resolve(addr_a, spare_ok=True)
        b = self._resolve(addr_b, spare_ok=True)
        if a.bank != b.bank:
            raise ValueError("CiM operands must share a bank")
        if a.group != b.group:
            raise ValueError("CiM operands must be column-aligned")
        if a.row == b.row:
            raise ValueError("CiM operands must be distinct rows")
        cw_a = self._get_word(a)
        cw_b = self._get_word(b)
        self._access += 1
        self.counters.cim_ops += 1
        o_or, o_and = self.sampler.sense_pair(
            self._access, self._bits(cw_a), self._bits(cw_b)
        )
        o_xor = o_or & (1 - o_and)
        xor_word = self._pack(o_xor)
        res = self.code.decode(xor_word)
        if res.status is DecodeStatus.CLEAN:
            return self._op_output(op, o_or, o_and, o_xor), 1
        if res.status is DecodeStatus.CORRECTED:
            self.counters.corrected_words += 1
            if op is CimOp.XOR:
                self.counters.xor_fixups += 1
                return res.data, 1
            self.counters.fallbacks += 1
            da = self._nm_read(a)
            db = self._nm_read(b)
            return self._alu(op, da, db), 3
        raise HardError("uncorrectable XOR lane on CiM access")

    # -- vector accesses ---------------------------------------------------

    def vcim(self, op: CimOp, addr_a, addr_b, lanes: int, reduce: str) -> int:
        """Multi-lane op over consecutive groups with a reduction.

        Lane k pairs word addr_a+k with addr_b+k; all lanes must stay in
        the operands' rows.  Reductions: "sum" adds lane results modulo
        2^word_width, "zcmp" sets bit k iff lane k's result is nonzero.
        The vector unit is digital and noise-free.
        """
        if lanes not in (4, 8) or lanes > self.config.vector_length:
            raise ValueError("bad lane count")
        if reduce not in ("sum", "zcmp"):
            raise ValueError("reduce must be sum or zcmp")
        if op not in _TWO_ROW_OPS:
            raise ValueError(f"{op!r} is not a two-row op")
        a0 = self._resolve(addr_a, spare_ok=True)
        b0 = self._resolve(addr_b, spare_ok=True)
        if a0.bank != b0.bank or a0.group != b0.group or a0.row == b0.row:
            raise ValueError("vector operands must be aligned rows of one bank")
        if a0.group + lanes > self.config.words_per_row:
            raise ValueError("vector access crosses a row boundary")
        self.counters.vcim_ops += 1
        self.counters.vcim_lanes += lanes
        mask = (1 << self.config.word_width) - 1
        acc = 0
        for k in range(lanes):
            a = Addr(a0.bank, a0.row, a0.group + k)
            b = Addr(b0.bank, b0.row, b0.group + k)
            da = self.code.extract(self._get_word(a))
            db = self.code.extract(self._get_word(b))
            lane = self._alu(op, da, db)
            if reduce == "sum":
                acc = (acc + lane) & mask
            else:
                acc |= (1 if lane != 0 else 0) << k
        return acc

    # -- diagnostics -------------------------------------------------------

    def selftest(self, seed: int = 0, words: int = 64) -> None:
        """Randomized logic and addition check on a noise-free shadow array;
        raises AssertionError on any mismatch."""
        import random

        rng = random.Random(seed)
        shadow = CimArray(self.config)
        mask = (1 << self.config.word_width) - 1
        a_addr = Addr(0, 0, 0)
        b_addr = Addr(0, 1, 0)
        for _ in range(words):
            a = rng.getrandbits(self.config.word_width)
            b = rng.getrandbits(self.config.word_width)
            shadow.write_word(a_addr, a)
            shadow.write_word(b_addr, b)
            for op in _TWO_ROW_OPS:
                got, accesses = shadow.cim_word(op, a_addr, b_addr)
                assert accesses == 1
                assert got == shadow._alu(op, a, b), (op, a, b)
            got, _ = shadow.cim_not(a_addr)
            assert got == a ^ mask
            assert shadow.read_word(a_addr) == a
