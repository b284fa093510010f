"""
Two cells on one source line are a logic gate
=============================================

A bit-cell is an access transistor in series with a magnetic tunnel
junction.  Parallel magnetization means low resistance and is our logic 1;
anti-parallel is high resistance, logic 0.  Reading is just current
comparison, and enabling two rows at once sums two cell currents, so one
threshold turns the array into an OR gate and a higher threshold into an
AND gate.  This script walks the current levels and recovers the whole
truth-table family from nothing but thresholds.
"""

from sttcim import CimOp, CONTROL_TABLE, DeviceParams, current_levels, sense_bit

params = DeviceParams()
lv = current_levels(params)

uA = 1e6  # print in microamps

print("single-cell currents")
print(f"  P  (stores 1): {lv.i_p * uA:8.3f} uA")
print(f"  AP (stores 0): {lv.i_ap * uA:8.3f} uA")
print(f"  read ref     : {lv.i_ref_read * uA:8.3f} uA")
print()

# Reading: the sensed bit is 1 iff the cell current beats the reference.
assert sense_bit(lv.i_p, lv.i_ref_read) == 1
assert sense_bit(lv.i_ap, lv.i_ref_read) == 0

print("two-cell sums and the two references between them")
print(f"  both 0 : {lv.i_apap * uA:8.3f} uA")
print(f"  or-ref : {lv.i_ref_or * uA:8.3f} uA")
print(f"  mixed  : {lv.i_ap_p * uA:8.3f} uA")
print(f"  and-ref: {lv.i_ref_and * uA:8.3f} uA")
print(f"  both 1 : {lv.i_pp * uA:8.3f} uA")
print()

# The three sum levels interleave with the two references, so one sense
# amplifier per reference yields two independent bits per column access.
pair_current = {
    (0, 0): lv.i_apap,
    (0, 1): lv.i_ap_p,
    (1, 0): lv.i_ap_p,
    (1, 1): lv.i_pp,
}

print("a b | OR NOR AND NAND XOR")
for (a, b), current in pair_current.items():
    o_or = sense_bit(current, lv.i_ref_or)
    o_and = sense_bit(current, lv.i_ref_and)
    o_xor = o_or & (1 - o_and)  # above or-ref but below and-ref: exactly one 1
    print(f"{a} {b} |  {o_or}   {1 - o_or}   {o_and}    {1 - o_and}    {o_xor}")

print()
print("control words (left stack, right stack, output select):")
for op in CimOp:
    left, right, sel = CONTROL_TABLE[op]
    print(f"  {op.name:<5} left={left} right={right} sel={sel}")

# The reference stack holds cells programmed to REF/AP/P resistances;
# enabling subsets synthesizes i_ref_read (REF), i_ref_or (REF+AP) and
# i_ref_and (REF+P).  Inverted outputs just come from the complementary
# amplifier, which is why NAND/NOR need no extra array access.
