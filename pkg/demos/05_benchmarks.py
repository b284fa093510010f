"""
What the kernels actually buy
=============================

Six small kernels, each run as written and as rewritten, with cycles and
normalized energy from the same accounting the tests freeze.  Two habits
keep the numbers honest: results are validated against a pure-Python
reference before anything is reported, and speedups are quoted from
marginal cycles (n minus n/2) so fixed setup cost cancels out.
"""

from sttcim import KERNEL_MODES, latency_sweep, marginal_speedup, run_kernel
from sttcim.bench import format_run

N = 1024

# Full table: every kernel in every mode it supports.
for kernel, modes in KERNEL_MODES.items():
    n = 512 if kernel == "blit" else N
    for mode in modes:
        print(format_run(run_kernel(kernel, mode, n=n)))
    print()

# Scalar CiM gains grow with memory latency: the rewrite removes loads,
# so the slower the memory, the more it saves.  Vector modes amortize
# one access over several lanes on top of that.
print("vecsum marginal speedup over the baseline")
print("latency   cim     vec4    vec8")
vec4 = dict(latency_sweep("vecsum", "vec4", (1, 2, 4, 8, 16), n=N))
vec8 = dict(latency_sweep("vecsum", "vec8", (1, 2, 4, 8, 16), n=N))
for lat, s in latency_sweep("vecsum", "cim", (1, 2, 4, 8, 16), n=N):
    print(f"{lat:7d}   {s:5.3f}   {vec4[lat]:5.3f}  {vec8[lat]:6.3f}")
print()

# Energy: one two-row operation against the two reads it replaces.
base = run_kernel("strmatch", "base", n=N)
cim = run_kernel("strmatch", "cim", n=N)
print(f"strmatch energy {base.energy.total:.1f} -> {cim.energy.total:.1f} "
      f"({cim.energy.total / base.energy.total:.3f}x), "
      f"matches found: base={base.result} cim={cim.result}")
print()

# Not everything wins.  Broadcasting a register scalar into the spare row
# makes scalar CiM cycle-neutral here and costs extra write energy; the
# case for this access pattern rests on the vector modes alone.
sb = run_kernel("saxpy_add", "base", n=N)
sc = run_kernel("saxpy_add", "cim", n=N)
print("scalar broadcast is not free:")
print(f"  saxpy_add base cycles={sb.cycles} energy={sb.energy.total:.1f}")
print(f"  saxpy_add cim  cycles={sc.cycles} energy={sc.energy.total:.1f}"
      f"  (marginal speedup {marginal_speedup('saxpy_add', 'cim', n=N):.3f})")
print(f"  saxpy_add vec8 marginal speedup {marginal_speedup('saxpy_add', 'vec8', n=N):.3f}")
