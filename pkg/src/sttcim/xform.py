"""Rewrites eligible load/compute windows into in-array instructions.

Target patterns, always contiguous and entered only at the top (no labels
on the interior instructions):

    LDW rX, 0(rA); LDW rY, 0(rB); OP rZ, rX, rY   ->  CIMOP rZ, rA, rB
    LDW rX, 0(rA); NOT rZ, rX                     ->  CIMNOT rZ, rA

for OP in {ADD, AND, OR, XOR}.  A rewrite must preserve two things: the
architectural state any later instruction can observe, and the in-array
legality of the operand pair (same bank, same word group, different rows)
on every execution.

State safety: the loaded registers stop being written, so rX (and rY) must
be dead on every path leaving the window, shown by a DFS over the CFG; the
check is skipped for a register the window's own destination overwrites.
Only offset-0 loads qualify, since the in-array instructions take bare
register addresses.

Alignment safety, two proof strategies:

* Straight-line prefix: if no branch or jump precedes the window and no
  branch target lands at or before it, the window runs at most once, with
  register values known by constant propagation from entry; one concrete
  alignment check settles it.

* Loop induction: each base register is written exactly twice in the whole
  program, once by a constant init (``ADDI r, r0, c`` or ``LUI r, c``) and
  once by a self-step ``ADDI r, r, s``, with equal strides.  The init must
  dominate the window and must not be reachable from it (a re-init inside
  an enclosing loop would restart the sequence mid-flight), and both steps
  must sit in the window's own basic block after the window, so each window
  execution advances both pointers exactly once and in lockstep.  The pair
  sequence (c_a + k*s, c_b + k*s) is then checked exhaustively for every k
  at which both addresses still fall inside the plan's placed segments.
  Programs that walk pointers outside their planned arrays are outside the
  tool's contract, exactly as they would be for the original loads.

``CIMNOT`` needs only the liveness argument: a single operand has no
alignment constraint.

Rewriting runs to a fixed point (each pass restarts the scan), so the
transform is idempotent; every three-instruction rewrite shrinks the
program by two instructions, the NOT form by one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .cimarray import Addr, ArrayConfig, CimArray, SPARE_ALIAS
from .cpu import Cpu, CpuFault, Instruction, Program
from .mapper import MapPlan

__all__ = [
    "Rewrite",
    "XformReport",
    "transform",
    "addresses_aligned",
    "verify_equivalence",
]

_OP_TO_CIM = {"ADD": "CIMADD", "AND": "CIMAND", "OR": "CIMOR", "XOR": "CIMXOR"}
_BRANCHES = ("BEQ", "BNE")


@dataclass(frozen=True)
class Rewrite:
    index: int
    kind: str
    line: int
    proof: str


@dataclass(frozen=True)
class XformReport:
    program: Program
    rewrites: tuple[Rewrite, ...]
    instructions_before: int
    instructions_after: int


def addresses_aligned(config: ArrayConfig, addr_a: int, addr_b: int) -> bool:
    """True iff the pair satisfies the two-row access constraints."""

    def resolve(linear):
        spare = linear >= SPARE_ALIAS
        base = linear - SPARE_ALIAS if spare else linear
        if not 0 <= base < config.total_words:
            return None
        a = Addr.from_linear(config, base)
        return Addr(a.bank, config.spare_row if spare else a.row, a.group)

    a = resolve(addr_a)
    b = resolve(addr_b)
    if a is None or b is None:
        return False
    return a.bank == b.bank and a.group == b.group and a.row != b.row


def _uses(ins: Instruction) -> tuple[set[int], set[int]]:
    """(read registers, written registers) of one instruction."""
    op, a = ins.op, ins.args
    if op in ("ADD", "SUB", "AND", "OR", "XOR", "SLT"):
        return {a[1], a[2]}, {a[0]}
    if op in ("NOT",):
        return {a[1]}, {a[0]}
    if op == "ADDI":
        return {a[1]}, {a[0]}
    if op == "LUI":
        return set(), {a[0]}
    if op == "LDW":
        return {a[2]}, {a[0]}
    if op == "STW":
        return {a[0], a[2]}, set()
    if op in _BRANCHES:
        return {a[0], a[1]}, set()
    if op in ("JMP", "HALT"):
        return set(), set()
    if op.startswith("CIM") and op != "CIMNOT":
        return {a[1], a[2]}, {a[0]}
    if op == "CIMNOT":
        return {a[1]}, {a[0]}
    if op.startswith("VCIM."):
        return {a[1], a[2]}, {a[0]}
    if op == "SPWR":
        return {a[0]}, set()
    raise ValueError(f"unknown op {op!r}")


def _successors(prog: Program, labels: dict[str, int], i: int) -> list[int]:
    ins = prog.instructions[i]
    if ins.op == "HALT":
        return []
    if ins.op == "JMP":
        return [labels[ins.args[0]]]
    nxt = [i + 1] if i + 1 < len(prog.instructions) else []
    if ins.op in _BRANCHES:
        nxt.append(labels[ins.args[2]])
    return nxt


def _may_read_before_write(prog, labels, starts, reg) -> bool:
    """True if some path from the given points reads reg before writing it.
    r0 is constant and never considered live."""
    if reg == 0:
        return False
    seen: set[int] = set()
    stack = list(starts)
    while stack:
        i = stack.pop()
        if i in seen or i >= len(prog.instructions):
            continue
        seen.add(i)
        reads, writes = _uses(prog.instructions[i])
        if reg in reads:
            return True
        if reg in writes:
            continue
        stack.extend(_successors(prog, labels, i))
    return False


def _reachable_from(prog, labels, starts) -> set[int]:
    seen: set[int] = set()
    stack = list(starts)
    while stack:
        i = stack.pop()
        if i in seen or i >= len(prog.instructions):
            continue
        seen.add(i)
        stack.extend(_successors(prog, labels, i))
    return seen


def _reaches_avoiding(prog, labels, src: int, avoid: int, dst: int) -> bool:
    """Can execution get from src to dst without passing through avoid?"""
    if src == dst:
        return True
    seen = {avoid}
    stack = [src]
    while stack:
        i = stack.pop()
        if i in seen or i >= len(prog.instructions):
            continue
        if i == dst:
            return True
        seen.add(i)
        stack.extend(_successors(prog, labels, i))
    return False


def _branch_targets(prog: Program, labels) -> set[int]:
    out = set()
    for ins in prog.instructions:
        if ins.op in _BRANCHES:
            out.add(labels[ins.args[2]])
        elif ins.op == "JMP":
            out.add(labels[ins.args[0]])
    return out


def _block_end(prog: Program, labels, i: int) -> int:
    """One past the last instruction of the basic block containing i."""
    targets = _branch_targets(prog, labels)
    j = i
    n = len(prog.instructions)
    while j < n:
        ins = prog.instructions[j]
        if ins.op in _BRANCHES or ins.op in ("JMP", "HALT"):
            return j + 1
        if j + 1 < n and (j + 1 in targets or prog.instructions[j + 1].labels):
            return j + 1
        j += 1
    return n


def _const_prefix(prog: Program, labels, upto: int) -> dict[int, int] | None:
    """Register values at instruction upto when the window provably runs at
    most once on a straight line from entry; None otherwise."""
    targets = _branch_targets(prog, labels)
    if any(t <= upto for t in targets):
        return None
    known: dict[int, int] = {0: 0}

    def put(reg, val):
        if reg != 0:
            known[reg] = val & 0xFFFFFFFFFFFFFFFF

    def drop(reg):
        known.pop(reg, None)

    for idx in range(upto):
        ins = prog.instructions[idx]
        op, a = ins.op, ins.args
        if op in _BRANCHES or op == "JMP":
            return None
        if op == "HALT":
            return None
        if op == "ADDI":
            if a[1] in known:
                put(a[0], known[a[1]] + a[2])
            else:
                drop(a[0])
        elif op == "LUI":
            put(a[0], a[1] << 16)
        elif op in ("ADD", "SUB", "AND", "OR", "XOR"):
            if a[1] in known and a[2] in known:
                x, y = known[a[1]], known[a[2]]
                val = {
                    "ADD": x + y,
                    "SUB": x - y,
                    "AND": x & y,
                    "OR": x | y,
                    "XOR": x ^ y,
                }[op]
                put(a[0], val)
            else:
                drop(a[0])
        else:
            _, writes = _uses(ins)
            for w in writes:
                drop(w)
    return known


def _induction(prog: Program, reg: int):
    """(init_value, stride, init_index, step_index) if reg is a two-write
    induction register: one constant init, one self-step."""
    writers = [
        i for i, ins in enumerate(prog.instructions) if reg in _uses(ins)[1]
    ]
    if len(writers) != 2 or reg == 0:
        return None
    init = step = None
    for i in writers:
        ins = prog.instructions[i]
        if ins.op == "ADDI" and ins.args == (reg, 0, ins.args[2]):
            init = (i, ins.args[2])
        elif ins.op == "LUI" and ins.args[0] == reg:
            init = (i, ins.args[1] << 16)
        elif ins.op == "ADDI" and ins.args[1] == reg and ins.args[0] == reg:
            step = (i, ins.args[2])
    if init is None or step is None or step[1] == 0:
        return None
    return init[1], step[1], init[0], step[0]


def _in_plan(plan: MapPlan, linear: int) -> bool:
    base = linear - SPARE_ALIAS if linear >= SPARE_ALIAS else linear
    return any(seg.base <= base < seg.end for seg in plan.segments)


def _prove_alignment(prog, labels, plan, win_start, win_end, ra, rb):
    """Proof string if every execution of the window sees a legal pair."""
    cfg = plan.config
    known = _const_prefix(prog, labels, win_start)
    if known is not None and ra in known and rb in known:
        if addresses_aligned(cfg, known[ra], known[rb]):
            return "const"
        return None
    ia = _induction(prog, ra)
    ib = _induction(prog, rb)
    if ia is None or ib is None:
        return None
    base_a, stride_a, init_a, step_a = ia
    base_b, stride_b, init_b, step_b = ib
    if stride_a != stride_b:
        return None
    # Init must run before the window on every path and never after it.
    post = _reachable_from(prog, labels, [win_end])
    for init_idx in (init_a, init_b):
        if init_idx in post:
            return None
        if _reaches_avoiding(prog, labels, 0, init_idx, win_start):
            return None
    # Both steps inside the window's block, after the window.
    bend = _block_end(prog, labels, win_start)
    for step_idx in (step_a, step_b):
        if not win_end <= step_idx < bend:
            return None
    stride = stride_a
    limit = 2 * cfg.total_words // max(1, abs(stride)) + 4
    checked = 0
    for k in range(limit + 1):
        la = base_a + k * stride
        lb = base_b + k * stride
        if not (_in_plan(plan, la) and _in_plan(plan, lb)):
            break
        if not addresses_aligned(cfg, la, lb):
            return None
        checked += 1
    if checked == 0:
        return None
    return f"induction k=0..{checked - 1}"


def _try_cim_window(prog, labels, plan, i):
    ins0 = prog.instructions[i]
    if i + 2 >= len(prog.instructions):
        return None
    ins1 = prog.instructions[i + 1]
    ins2 = prog.instructions[i + 2]
    if ins0.op != "LDW" or ins1.op != "LDW" or ins2.op not in _OP_TO_CIM:
        return None
    if ins1.labels or ins2.labels:
        return None
    rx, off_x, ra = ins0.args
    ry, off_y, rb = ins1.args
    if off_x != 0 or off_y != 0:
        return None
    if rx == ry or rx == rb or rx == 0 or ry == 0:
        return None
    rz, s1, s2 = ins2.args
    if (s1, s2) == (rx, ry):
        bases = (ra, rb)
    elif (s1, s2) == (ry, rx):
        bases = (rb, ra)
    else:
        return None
    after = [i + 3] if i + 3 < len(prog.instructions) else []
    for loaded in (rx, ry):
        if loaded != rz and _may_read_before_write(prog, labels, after, loaded):
            return None
    proof = _prove_alignment(prog, labels, plan, i, i + 3, ra, rb)
    if proof is None:
        return None
    new_ins = Instruction(_OP_TO_CIM[ins2.op], (rz, bases[0], bases[1]), ins0.labels, ins0.line)
    return new_ins, 3, Rewrite(i, _OP_TO_CIM[ins2.op], ins0.line, proof)


def _try_not_window(prog, labels, i):
    ins0 = prog.instructions[i]
    if i + 1 >= len(prog.instructions):
        return None
    ins1 = prog.instructions[i + 1]
    if ins0.op != "LDW" or ins1.op != "NOT" or ins1.labels:
        return None
    rx, off, ra = ins0.args
    if off != 0 or rx == 0:
        return None
    rz, src = ins1.args
    if src != rx:
        return None
    after = [i + 2] if i + 2 < len(prog.instructions) else []
    if rx != rz and _may_read_before_write(prog, labels, after, rx):
        return None
    new_ins = Instruction("CIMNOT", (rz, ra), ins0.labels, ins0.line)
    return new_ins, 2, Rewrite(i, "CIMNOT", ins0.line, "liveness")


def transform(prog: Program, plan: MapPlan) -> XformReport:
    """Apply every provable rewrite; idempotent."""
    current = Program(list(prog.instructions))
    rewrites: list[Rewrite] = []
    before = len(current)
    changed = True
    while changed:
        changed = False
        labels = current.label_map()
        for i in range(len(current.instructions)):
            hit = _try_cim_window(current, labels, plan, i) or _try_not_window(
                current, labels, i
            )
            if hit is None:
                continue
            new_ins, width, note = hit
            current.instructions[i : i + width] = [new_ins]
            rewrites.append(note)
            changed = True
            break
    return XformReport(
        program=current,
        rewrites=tuple(rewrites),
        instructions_before=before,
        instructions_after=len(current),
    )


def verify_equivalence(original: Program, transformed: Program, plan: MapPlan,
                       seed: int = 0, max_steps: int = 1_000_000) -> bool:
    """Run both programs on identically seeded arrays and compare the final
    memory images.

    Every placed segment is filled with the same seeded random words before
    each run; unplaced words start zeroed in both.  Registers are not
    compared: the rewrite deliberately stops writing the dead loaded
    temporaries, and that difference must stay invisible through memory.
    Returns True iff both programs halt and leave byte-identical banks.
    """
    images = []
    for prog in (original, transformed):
        arr = CimArray(plan.config)
        rng = random.Random(seed)
        for seg in plan.segments:
            for i in range(seg.length):
                arr.write_word(seg.base + i, rng.getrandbits(plan.config.word_width))
        cpu = Cpu(arr, prog)
        try:
            cpu.run(max_steps=max_steps)
        except CpuFault:
            return False
        images.append([tuple(bank) for bank in arr._banks])
    return images[0] == images[1]
