"""Benchmark kernels and the measurement harness.

Six kernels, each in a scalar baseline plus whichever accelerated variants
its shape admits:

* xorcipher (elementwise pair): A[i] ^= B[i].  In-array variant produced
  by the program transform.
* blit (two elementwise passes over three arrays): S &= M, then D |= S.
  In-array variant produced by the transform, two rewrites.
* vecsum (pair reduction): sum of A[i] + B[i].  Transform variant plus
  4- and 8-lane vector variants.
* strmatch (pattern scan): count occurrences of an M-word pattern in an
  N-word text.  Hand-written in-array variant over a replicated-pattern
  layout; the early-exit control flow is beyond the transform's windows.
* editdist (scalar compare reduction): count words equal to a key.
  Hand-written in-array variant (the key is broadcast to spare rows) and
  vector variants using a 256-entry match-count table.
* saxpy_add (scalar add reduction): sum of x[i] + a.  Hand-written
  in-array variant and vector variants.

Baselines are deliberately unhoisted: every operand load sits inside the
loop, the way a non-optimizing compiler would emit it.  Measurement covers
the program run only; input placement (arrays, replicated pattern rows,
the vector match-count table) happens before the counters reset.  Spare
row broadcasts (SPWR) are instructions, so they run inside the measured
region.

Each run validates its result against a Python reference before reporting,
so a cycle or energy number from a wrong computation cannot escape.

Beware one accounting asymmetry: the scalar in-array variants of the
Type II kernels (editdist, saxpy_add) match the baseline cycle-for-cycle
but cost more energy per element (a two-row op against a read); they are
reported anyway because the vector variants build on the same layout.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from .cimarray import ArrayConfig, CimArray, SPARE_ALIAS
from .cpu import Cpu, Program, parse_program
from .energy import EnergyBreakdown, account
from .mapper import MapPlan, PlanSegment, plan_type1, plan_type2, plan_type3
from .xform import transform

__all__ = [
    "BenchError",
    "KernelRun",
    "KERNEL_MODES",
    "DEFAULT_SIZES",
    "kernel_names",
    "run_kernel",
    "marginal_cycles",
    "marginal_speedup",
    "latency_sweep",
    "transform_pair",
    "format_run",
]

MASK32 = 0xFFFFFFFF

KERNEL_MODES: dict[str, tuple[str, ...]] = {
    "xorcipher": ("base", "cim"),
    "blit": ("base", "cim"),
    "vecsum": ("base", "cim", "vec4", "vec8"),
    "strmatch": ("base", "cim"),
    "editdist": ("base", "cim", "vec4", "vec8"),
    "saxpy_add": ("base", "cim", "vec4", "vec8"),
}

DEFAULT_SIZES: dict[str, int] = {
    "xorcipher": 1024,
    "blit": 512,
    "vecsum": 1024,
    "strmatch": 1024,
    "editdist": 1024,
    "saxpy_add": 1024,
}

_PATTERN_WORDS = 2  # strmatch pattern length


class BenchError(RuntimeError):
    """A kernel produced a wrong result or an expected rewrite failed."""


@dataclass(frozen=True)
class KernelRun:
    kernel: str
    mode: str
    n: int
    latency: int
    seed: int
    cycles: int
    instructions: int
    program_length: int
    rewrites: int
    result: int
    counters: dict[str, int]
    energy: EnergyBreakdown


@dataclass(frozen=True)
class _Setup:
    program: Program
    prime: Callable[[CimArray], None]
    reference: int
    read_result: Callable[[CimArray, Cpu], int]
    rewrites: int = 0


def kernel_names() -> tuple[str, ...]:
    return tuple(KERNEL_MODES)


def _words(rng: random.Random, n: int) -> list[int]:
    return [rng.getrandbits(32) for _ in range(n)]


def _peek(arr: CimArray, addr: int) -> int:
    """Word inspection for result checking; stays out of the read counter."""
    return arr.read_word(addr, count=False)


def _fold(values) -> int:
    acc = 0
    for v in values:
        acc = (acc * 0x01000193 ^ v) & MASK32
    return acc


def _require_rewrites(report, expected: int, kernel: str):
    if len(report.rewrites) != expected:
        raise BenchError(
            f"{kernel}: transform made {len(report.rewrites)} rewrites, expected {expected}"
        )


# -- kernel builders ---------------------------------------------------------


def _single_segment(plan: MapPlan, *names: str) -> None:
    """The loop bodies walk one linear segment per operand."""
    for name in names:
        if sum(1 for s in plan.segments if s.name == name) != 1:
            raise BenchError(f"operand {name} spans banks; pick a smaller n")


def _setup_xorcipher(mode, n, seed, config):
    plan = plan_type1(config, n)
    _single_segment(plan, "A", "B")
    rng = random.Random(seed)
    a = _words(rng, n)
    b = _words(rng, n)
    base = plan.address("A", 0)
    bbase = plan.address("B", 0)
    src = f"""
        ADDI r1, r0, {base}
        ADDI r2, r0, {bbase}
        ADDI r3, r0, {base + n}
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
    prog = parse_program(src)
    rewrites = 0
    if mode == "cim":
        rep = transform(prog, plan)
        _require_rewrites(rep, 1, "xorcipher")
        prog = rep.program
        rewrites = 1
    elif mode != "base":
        raise BenchError(f"xorcipher has no mode {mode!r}")

    def prime(arr):
        for i in range(n):
            arr.write_word(plan.address("A", i), a[i])
            arr.write_word(plan.address("B", i), b[i])

    reference = _fold((x ^ y) & MASK32 for x, y in zip(a, b))

    def read_result(arr, cpu):
        return _fold(_peek(arr, plan.address("A", i)) for i in range(n))

    return _Setup(prog, prime, reference, read_result, rewrites)


def _blit_plan(config: ArrayConfig, n: int) -> MapPlan:
    """Three stacked arrays in one bank: sprite, mask, destination."""
    if 3 * n > config.words_per_bank:
        raise BenchError("blit arrays must fit one bank")
    if n % config.words_per_row:
        raise BenchError("blit arrays must be whole rows for column alignment")
    segments = (
        PlanSegment("S", 0, 0, n),
        PlanSegment("M", 0, n, n),
        PlanSegment("D", 0, 2 * n, n),
    )
    return MapPlan(config=config, pattern="type1", total={"S": n, "M": n, "D": n},
                   segments=segments, banks_used=1)


def _setup_blit(mode, n, seed, config):
    plan = _blit_plan(config, n)
    rng = random.Random(seed)
    sprite = _words(rng, n)
    mask = _words(rng, n)
    dest = _words(rng, n)
    src = f"""
        ADDI r1, r0, 0
        ADDI r2, r0, {n}
        ADDI r3, r0, {n}
    mask_pass:
        LDW r5, 0(r1)
        LDW r6, 0(r2)
        AND r7, r5, r6
        STW r7, 0(r1)
        ADDI r1, r1, 1
        ADDI r2, r2, 1
        BNE r1, r3, mask_pass
        ADDI r8, r0, {2 * n}
        ADDI r9, r0, 0
        ADDI r10, r0, {3 * n}
    merge_pass:
        LDW r5, 0(r8)
        LDW r6, 0(r9)
        OR r7, r5, r6
        STW r7, 0(r8)
        ADDI r8, r8, 1
        ADDI r9, r9, 1
        BNE r8, r10, merge_pass
        HALT
    """
    prog = parse_program(src)
    rewrites = 0
    if mode == "cim":
        rep = transform(prog, plan)
        _require_rewrites(rep, 2, "blit")
        prog = rep.program
        rewrites = 2
    elif mode != "base":
        raise BenchError(f"blit has no mode {mode!r}")

    def prime(arr):
        for i in range(n):
            arr.write_word(i, sprite[i])
            arr.write_word(n + i, mask[i])
            arr.write_word(2 * n + i, dest[i])

    masked = [(s & m) & MASK32 for s, m in zip(sprite, mask)]
    reference = _fold((d | s) & MASK32 for d, s in zip(dest, masked))

    def read_result(arr, cpu):
        return _fold(_peek(arr, 2 * n + i) for i in range(n))

    return _Setup(prog, prime, reference, read_result, rewrites)


def _setup_vecsum(mode, n, seed, config):
    plan = plan_type1(config, n)
    _single_segment(plan, "A", "B")
    rng = random.Random(seed)
    a = _words(rng, n)
    b = _words(rng, n)
    base = plan.address("A", 0)
    bbase = plan.address("B", 0)
    out = 2 * config.words_per_bank  # first word of an unused bank
    src = f"""
        ADDI r1, r0, {base}
        ADDI r2, r0, {bbase}
        ADDI r3, r0, {base + n}
        ADDI r4, r0, 0
    loop:
        LDW r5, 0(r1)
        LDW r6, 0(r2)
        ADD r7, r5, r6
        ADD r4, r4, r7
        ADDI r1, r1, 1
        ADDI r2, r2, 1
        BNE r1, r3, loop
        STW r4, {out}(r0)
        HALT
    """
    rewrites = 0
    if mode in ("base", "cim"):
        prog = parse_program(src)
        if mode == "cim":
            rep = transform(prog, plan)
            _require_rewrites(rep, 1, "vecsum")
            prog = rep.program
            rewrites = 1
    elif mode in ("vec4", "vec8"):
        lanes = int(mode[3:])
        if n % lanes:
            raise BenchError("n must be a lane multiple")
        prog = parse_program(f"""
            ADDI r1, r0, {base}
            ADDI r2, r0, {bbase}
            ADDI r3, r0, {base + n}
            ADDI r4, r0, 0
        loop:
            VCIM.ADD.SUM.{lanes} r7, r1, r2
            ADD r4, r4, r7
            ADDI r1, r1, {lanes}
            ADDI r2, r2, {lanes}
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """)
    else:
        raise BenchError(f"vecsum has no mode {mode!r}")

    def prime(arr):
        for i in range(n):
            arr.write_word(plan.address("A", i), a[i])
            arr.write_word(plan.address("B", i), b[i])

    reference = sum((x + y) for x, y in zip(a, b)) & MASK32

    def read_result(arr, cpu):
        return _peek(arr, out)

    return _Setup(prog, prime, reference, read_result, rewrites)


def _setup_strmatch(mode, n, seed, config):
    m = _PATTERN_WORDS
    rng = random.Random(seed)
    text = _words(rng, n)
    pattern = _words(rng, m)
    # Plant two full matches away from each other and the ends.
    plants = (n // 8, (3 * n) // 4)
    for p in plants:
        for j in range(m):
            text[p + j] = pattern[j]
    positions = n - m + 1
    reference = sum(
        1 for i in range(positions) if all(text[i + j] == pattern[j] for j in range(m))
    )
    out = 3 * config.words_per_bank

    if mode == "base":
        t_base = 0
        p_base = config.words_per_bank  # pattern copy in the next bank
        src = f"""
            ADDI r1, r0, {t_base}
            ADDI r3, r0, {t_base + positions}
            ADDI r4, r0, 0
            ADDI r9, r0, {p_base}
        loop:
            LDW r5, 0(r1)
            LDW r6, 0(r9)
            BNE r5, r6, nomatch
            LDW r5, 1(r1)
            LDW r6, 1(r9)
            BNE r5, r6, nomatch
            ADDI r4, r4, 1
        nomatch:
            ADDI r1, r1, 1
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """
        prog = parse_program(src)

        def prime(arr):
            for i, w in enumerate(text):
                arr.write_word(t_base + i, w)
            for j, w in enumerate(pattern):
                arr.write_word(p_base + j, w)

    elif mode == "cim":
        plan = plan_type3(config, n, m)
        _single_segment(plan, "T")
        t_base = plan.address("T", 0)
        group_mask = config.words_per_row - 1
        wpr = config.words_per_row
        src = f"""
            ADDI r1, r0, {t_base}
            ADDI r3, r0, {t_base + positions}
            ADDI r4, r0, 0
            ADDI r13, r0, {group_mask}
        loop:
            AND r7, r1, r13
            CIMXOR r6, r1, r7
            BNE r6, r0, nomatch
            ADDI r8, r1, 1
            AND r7, r8, r13
            ADDI r7, r7, {wpr}
            CIMXOR r6, r8, r7
            BNE r6, r0, nomatch
            ADDI r4, r4, 1
        nomatch:
            ADDI r1, r1, 1
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """
        prog = parse_program(src)

        def prime(arr):
            for i, w in enumerate(text):
                arr.write_word(plan.address("T", i), w)
            # Pattern rows replicated across all groups, one row per word.
            for j, w in enumerate(pattern):
                arr.write_replicated(0, j, w)

    else:
        raise BenchError(f"strmatch has no mode {mode!r}")

    def read_result(arr, cpu):
        return _peek(arr, out)

    return _Setup(prog, prime, reference, read_result)


def _scalar_reduce_sources(kind, n, base, out, key, lanes=None, table_base=None):
    """Shared program shapes for the broadcast-scalar kernels."""
    alias_hi = SPARE_ALIAS >> 16
    if kind == "editdist-base":
        return f"""
            ADDI r1, r0, {base}
            ADDI r3, r0, {base + n}
            ADDI r4, r0, 0
            ADDI r11, r0, {key}
        loop:
            LDW r5, 0(r1)
            XOR r6, r5, r11
            BNE r6, r0, differ
            ADDI r4, r4, 1
        differ:
            ADDI r1, r1, 1
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """
    if kind == "editdist-cim":
        return f"""
            ADDI r11, r0, {key}
            SPWR r11, 1
            ADDI r1, r0, {base}
            LUI r2, {alias_hi}
            ADDI r3, r0, {base + n}
            ADDI r4, r0, 0
        loop:
            CIMXOR r6, r1, r2
            BNE r6, r0, differ
            ADDI r4, r4, 1
        differ:
            ADDI r1, r1, 1
            ADDI r2, r2, 1
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """
    if kind == "editdist-vec":
        return f"""
            ADDI r11, r0, {key}
            SPWR r11, 1
            ADDI r1, r0, {base}
            LUI r2, {alias_hi}
            ADDI r3, r0, {base + n}
            ADDI r4, r0, 0
            ADDI r12, r0, {table_base}
        loop:
            VCIM.XOR.ZCMP.{lanes} r6, r1, r2
            ADD r7, r12, r6
            LDW r8, 0(r7)
            ADD r4, r4, r8
            ADDI r1, r1, {lanes}
            ADDI r2, r2, {lanes}
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """
    if kind == "saxpy-base":
        return f"""
            ADDI r1, r0, {base}
            ADDI r3, r0, {base + n}
            ADDI r4, r0, 0
            ADDI r11, r0, {key}
        loop:
            LDW r5, 0(r1)
            ADD r6, r5, r11
            ADD r4, r4, r6
            ADDI r1, r1, 1
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """
    if kind == "saxpy-cim":
        return f"""
            ADDI r11, r0, {key}
            SPWR r11, 1
            ADDI r1, r0, {base}
            LUI r2, {alias_hi}
            ADDI r3, r0, {base + n}
            ADDI r4, r0, 0
        loop:
            CIMADD r6, r1, r2
            ADD r4, r4, r6
            ADDI r1, r1, 1
            ADDI r2, r2, 1
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """
    if kind == "saxpy-vec":
        return f"""
            ADDI r11, r0, {key}
            SPWR r11, 1
            ADDI r1, r0, {base}
            LUI r2, {alias_hi}
            ADDI r3, r0, {base + n}
            ADDI r4, r0, 0
        loop:
            VCIM.ADD.SUM.{lanes} r6, r1, r2
            ADD r4, r4, r6
            ADDI r1, r1, {lanes}
            ADDI r2, r2, {lanes}
            BNE r1, r3, loop
            STW r4, {out}(r0)
            HALT
        """
    raise BenchError(f"unknown source kind {kind!r}")


def _setup_editdist(mode, n, seed, config):
    plan = plan_type2(config, n)
    _single_segment(plan, "A")
    rng = random.Random(seed)
    x = _words(rng, n)
    key = rng.getrandbits(32)
    for i in range(n):
        if i % 97 == 5:
            x[i] = key
    reference = sum(1 for w in x if w == key)
    base = plan.address("A", 0)
    out = 3 * config.words_per_bank
    table_base = config.words_per_bank  # 256 match-count entries in bank 1

    if mode == "base":
        src = _scalar_reduce_sources("editdist-base", n, base, out, key)
    elif mode == "cim":
        src = _scalar_reduce_sources("editdist-cim", n, base, out, key)
    elif mode in ("vec4", "vec8"):
        lanes = int(mode[3:])
        if n % lanes:
            raise BenchError("n must be a lane multiple")
        src = _scalar_reduce_sources(
            "editdist-vec", n, base, out, key, lanes=lanes, table_base=table_base
        )
    else:
        raise BenchError(f"editdist has no mode {mode!r}")
    prog = parse_program(src)
    needs_table = mode.startswith("vec")

    def prime(arr):
        for i in range(n):
            arr.write_word(plan.address("A", i), x[i])
        if needs_table:
            lanes = int(mode[3:])
            for mask_val in range(1 << lanes):
                matches = lanes - bin(mask_val).count("1")
                arr.write_word(table_base + mask_val, matches)

    def read_result(arr, cpu):
        return _peek(arr, out)

    return _Setup(prog, prime, reference, read_result)


def _setup_saxpy(mode, n, seed, config):
    plan = plan_type2(config, n)
    _single_segment(plan, "A")
    rng = random.Random(seed)
    x = _words(rng, n)
    a_val = rng.getrandbits(16)
    reference = sum((w + a_val) for w in x) & MASK32
    base = plan.address("A", 0)
    out = 3 * config.words_per_bank

    if mode == "base":
        src = _scalar_reduce_sources("saxpy-base", n, base, out, a_val)
    elif mode == "cim":
        src = _scalar_reduce_sources("saxpy-cim", n, base, out, a_val)
    elif mode in ("vec4", "vec8"):
        lanes = int(mode[3:])
        if n % lanes:
            raise BenchError("n must be a lane multiple")
        src = _scalar_reduce_sources("saxpy-vec", n, base, out, a_val, lanes=lanes)
    else:
        raise BenchError(f"saxpy_add has no mode {mode!r}")
    prog = parse_program(src)

    def prime(arr):
        for i in range(n):
            arr.write_word(plan.address("A", i), x[i])

    def read_result(arr, cpu):
        return _peek(arr, out)

    return _Setup(prog, prime, reference, read_result)


_BUILDERS = {
    "xorcipher": _setup_xorcipher,
    "blit": _setup_blit,
    "vecsum": _setup_vecsum,
    "strmatch": _setup_strmatch,
    "editdist": _setup_editdist,
    "saxpy_add": _setup_saxpy,
}

_PLANNERS = {
    "xorcipher": plan_type1,
    "blit": _blit_plan,
    "vecsum": plan_type1,
    "strmatch": lambda cfg, n: plan_type3(cfg, n, _PATTERN_WORDS),
    "editdist": plan_type2,
    "saxpy_add": plan_type2,
}


def transform_pair(kernel: str, n: int | None = None, seed: int = 7,
                   config: ArrayConfig | None = None):
    """Baseline program, its transform report, and the placement plan.

    Kernels whose baselines contain no eligible windows (early-exit scans,
    register-held scalars) come back with zero rewrites; that is the
    expected answer, not a failure.
    """
    if kernel not in _BUILDERS:
        raise BenchError(f"unknown kernel {kernel!r}")
    cfg = config if config is not None else ArrayConfig()
    size = n if n is not None else DEFAULT_SIZES[kernel]
    setup = _BUILDERS[kernel]("base", size, seed, cfg)
    plan = _PLANNERS[kernel](cfg, size)
    report = transform(setup.program, plan)
    return setup.program, report, plan


def run_kernel(kernel: str, mode: str, n: int | None = None, latency: int = 1,
               seed: int = 7, config: ArrayConfig | None = None) -> KernelRun:
    """Build, place, execute and validate one kernel variant."""
    if kernel not in _BUILDERS:
        raise BenchError(f"unknown kernel {kernel!r}")
    if mode not in KERNEL_MODES[kernel]:
        raise BenchError(f"{kernel} has no mode {mode!r}")
    cfg = config if config is not None else ArrayConfig()
    size = n if n is not None else DEFAULT_SIZES[kernel]
    setup = _BUILDERS[kernel](mode, size, seed, cfg)
    arr = CimArray(cfg)
    setup.prime(arr)
    arr.counters.reset()
    cpu = Cpu(arr, setup.program, memory_latency=latency)
    res = cpu.run()
    counters = arr.counters.as_dict()
    energy = account(arr.counters)
    result = setup.read_result(arr, cpu)
    if result != setup.reference:
        raise BenchError(
            f"{kernel}/{mode}: result {result:#x} != reference {setup.reference:#x}"
        )
    return KernelRun(
        kernel=kernel, mode=mode, n=size, latency=latency, seed=seed,
        cycles=res.cycles, instructions=res.instructions,
        program_length=len(setup.program), rewrites=setup.rewrites,
        result=result, counters=counters, energy=energy,
    )


def marginal_cycles(kernel: str, mode: str, n: int, latency: int = 1,
                    seed: int = 7, config: ArrayConfig | None = None) -> int:
    """Per-size cycle difference; cancels fixed program overhead."""
    full = run_kernel(kernel, mode, n, latency, seed, config)
    half = run_kernel(kernel, mode, n // 2, latency, seed, config)
    return full.cycles - half.cycles


def marginal_speedup(kernel: str, mode: str, n: int | None = None, latency: int = 1,
                     seed: int = 7, config: ArrayConfig | None = None) -> float:
    size = n if n is not None else DEFAULT_SIZES[kernel]
    base = marginal_cycles(kernel, "base", size, latency, seed, config)
    fast = marginal_cycles(kernel, mode, size, latency, seed, config)
    return base / fast


def latency_sweep(kernel: str, mode: str, latencies, n: int | None = None,
                  seed: int = 7, config: ArrayConfig | None = None):
    """(latency, marginal speedup over base) points."""
    return [(lat, marginal_speedup(kernel, mode, n, lat, seed, config)) for lat in latencies]


def format_run(run: KernelRun) -> str:
    e = run.energy
    return (
        f"{run.kernel}/{run.mode} n={run.n} latency={run.latency}: "
        f"cycles={run.cycles} instructions={run.instructions} "
        f"energy={e.total:.3f} (read={e.read:.3f} write={e.write:.3f} "
        f"cim={e.cim:.3f} nm={e.nm_corrections:.3f}) result={run.result:#x}"
    )
