"""
Why in-array compute fails before plain reads do
================================================

Oxide thickness, junction area and transistor threshold all vary from cell
to cell.  A read only needs one current to stay on the right side of one
reference; a two-cell operation needs a *sum* to stay inside a window, so
its margin is roughly half.  Monte Carlo over the cell population makes
that asymmetry concrete, and it is the reason the error-handling flow in
the next script exists at all.
"""

from sttcim import DeviceParams, VariationSpec, monte_carlo_failures

params = DeviceParams()

print("decision-failure rates vs variation scale (200k samples each)")
print("scale   read rate    cim rate     ratio")
for scale in (0.25, 0.5, 1.0, 1.5):
    rep = monte_carlo_failures(params, VariationSpec().scaled(scale), 200_000, seed=42)
    ratio = rep.cim_decision_rate / rep.read_decision_rate if rep.read_decision_rate else float("inf")
    print(
        f"{scale:4.2f}   {rep.read_decision_rate:10.2e}  {rep.cim_decision_rate:10.2e}  {ratio:8.1f}"
    )

print()
rep = monte_carlo_failures(params, VariationSpec(), 1_000_000, seed=12345)
print(f"at the default corner ({rep.samples} samples):")
print(f"  margin below or-ref : {rep.margin_low * 1e6:.3f} uA")
print(f"  margin above and-ref: {rep.margin_high * 1e6:.3f} uA")

# Read disturb is the other failure axis: a too-large read current can
# flip the junction it reads.  During a two-row access the source-line
# resistance divides the current between cells, so each cell sees less
# than it would in a plain read.  The sampler tracks how often that holds.
print(f"  per-cell CiM current below the read current: {rep.cim_cell_below_read_rate:.6f}")
print(f"  mean read current {rep.mean_read_cell_current * 1e6:.3f} uA, "
      f"mean per-cell CiM current {rep.mean_cim_per_cell_current * 1e6:.3f} uA")
