"""Bit-cell electrical model and variation Monte Carlo for an STT-MRAM
compute-in-memory array.

A bit-cell is an access transistor in series with a magnetic tunnel junction
(MTJ).  Parallel magnetization stores logic 1 and gives the low resistance
``r_p``; anti-parallel stores logic 0 and gives ``r_ap = r_p * (1 + tmr)``.
A read compares the cell current against a reference current synthesized by
a stack of reference cells; enabling two wordlines on one column makes the
source-line current the sum of the two cell currents, and thresholding that
sum against two reference levels is what the logic modes sense.

Two deliberate simplifications, both load-bearing for the numbers this
module promises:

* Decision model: every enabled cell sees the full read bias, so two-cell
  source-line currents are exact sums of single-cell currents, and reference
  currents are sums over the enabled reference-stack cells.
* Disturb proxy: per-cell current is computed with a shared series
  resistance (``sl_resistance``) in the path.  Splitting the bias across two
  parallel cells then strictly lowers the per-cell current relative to a
  single-cell read.  Only the disturb statistics use this path; decision
  margins stay on the ideal model.

Process variation maps three normal draws per cell onto resistances:

    r_mtj_eff = r_mtj * exp(tox_sensitivity * eps_tox) / (1 + eps_area)
    r_t_eff   = access_resistance * (1 + vt_sensitivity * eps_vt)

with eps_* ~ N(0, sigma_*).  The oxide and area draws are shared between the
parallel and anti-parallel resistance of the same junction.  Draws are pure
functions of (seed, cell index) so chunked evaluation is order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .streams import unit_normals

__all__ = [
    "ConfigError",
    "DeviceParams",
    "VariationSpec",
    "CellSample",
    "CurrentLevels",
    "FailureReport",
    "cell_current",
    "current_levels",
    "sense_bit",
    "sample_cell",
    "cell_factors",
    "monte_carlo_failures",
    "load_device_config",
    "failure_report_csv",
]


class ConfigError(ValueError):
    """Raised for physically meaningless device configurations."""


@dataclass(frozen=True)
class DeviceParams:
    """Nominal electrical parameters of one bit-cell and its references.

    ra_product is the resistance-area product in ohm*um^2, mtj_area in um^2,
    resistances in ohm, read_voltage in volt.  ref_resistance defaults to the
    arithmetic midpoint of r_p and r_ap.  sl_resistance is the shared series
    resistance used only by the read-disturb proxy.
    """

    ra_product: float = 18.0
    tmr: float = 1.24
    mtj_area: float = 0.0016
    access_resistance: float = 3000.0
    read_voltage: float = 0.1
    ref_resistance: float | None = None
    sl_resistance: float = 1500.0

    def __post_init__(self):
        if self.ra_product <= 0 or self.mtj_area <= 0:
            raise ConfigError("ra_product and mtj_area must be positive")
        if self.tmr <= 0:
            raise ConfigError("tmr must be positive")
        if self.access_resistance <= 0 or self.read_voltage <= 0:
            raise ConfigError("access_resistance and read_voltage must be positive")
        if self.sl_resistance < 0:
            raise ConfigError("sl_resistance must be non-negative")
        if self.ref_resistance is not None and self.ref_resistance <= 0:
            raise ConfigError("ref_resistance must be positive")

    @property
    def r_p(self) -> float:
        return self.ra_product / self.mtj_area

    @property
    def r_ap(self) -> float:
        return self.r_p * (1.0 + self.tmr)

    @property
    def r_ref(self) -> float:
        if self.ref_resistance is not None:
            return self.ref_resistance
        return 0.5 * (self.r_p + self.r_ap)


@dataclass(frozen=True)
class VariationSpec:
    """Relative sigmas of the variation sources plus sensitivity knobs.

    tox_sensitivity maps relative oxide-thickness deviation onto
    log-resistance; vt_sensitivity scales the threshold-voltage effect on the
    access resistance.  Defaults are calibrated so CiM decision failures are
    well over an order of magnitude more likely than read failures.
    """

    sigma_tox: float = 0.02
    sigma_area: float = 0.05
    sigma_vt: float = 0.05
    tox_sensitivity: float = 2.0
    vt_sensitivity: float = 1.0

    def __post_init__(self):
        if min(self.sigma_tox, self.sigma_area, self.sigma_vt) < 0:
            raise ConfigError("sigmas must be non-negative")

    @classmethod
    def zero(cls) -> "VariationSpec":
        return cls(sigma_tox=0.0, sigma_area=0.0, sigma_vt=0.0)

    def scaled(self, factor: float) -> "VariationSpec":
        """All three sigmas scaled by one factor; sensitivities unchanged."""
        return replace(
            self,
            sigma_tox=self.sigma_tox * factor,
            sigma_area=self.sigma_area * factor,
            sigma_vt=self.sigma_vt * factor,
        )


@dataclass(frozen=True)
class CellSample:
    """Effective resistances of one varied bit-cell."""

    r_p_eff: float
    r_ap_eff: float
    r_t_eff: float


@dataclass(frozen=True)
class CurrentLevels:
    """Nominal single-cell, two-cell and reference currents (ampere)."""

    i_p: float
    i_ap: float
    i_pp: float
    i_ap_p: float
    i_apap: float
    i_ref_read: float
    i_ref_or: float
    i_ref_and: float


@dataclass(frozen=True)
class FailureReport:
    """Monte Carlo decision-failure statistics.

    Rates are per-sample probabilities of any wrong decision (over both
    stored states for reads, over all four state combinations for CiM).
    margin_low/margin_high are sample means of the mid-level source-line
    current's distance to the OR and AND references.  Currents in ampere.
    """

    samples: int
    read_decision_rate: float
    cim_decision_rate: float
    mean_cim_per_cell_current: float
    mean_read_cell_current: float
    margin_low: float
    margin_high: float
    cim_cell_below_read_rate: float


def cell_current(r_mtj: float, r_t: float, read_voltage: float) -> float:
    """Current through one enabled cell under the full read bias."""
    if r_mtj <= 0 or r_t <= 0:
        raise ConfigError("resistances must be positive")
    return read_voltage / (r_t + r_mtj)


def sense_bit(i_sl: float, i_ref: float) -> int:
    """Sense-amplifier decision: 1 iff the source-line current exceeds the
    reference.  Ties resolve to 0."""
    return 1 if i_sl > i_ref else 0


def current_levels(params: DeviceParams) -> CurrentLevels:
    """Nominal current levels, validated for sensibility.

    Raises ConfigError unless the single-cell ordering
    i_ap < i_ref_read < i_p and the two-cell ordering
    i_apap < i_ref_or < i_ap_p < i_ref_and < i_pp both hold; outside those
    orderings the logic modes cannot decode.
    """
    v = params.read_voltage
    r_t = params.access_resistance
    i_p = cell_current(params.r_p, r_t, v)
    i_ap = cell_current(params.r_ap, r_t, v)
    i_ref_read = cell_current(params.r_ref, r_t, v)
    levels = CurrentLevels(
        i_p=i_p,
        i_ap=i_ap,
        i_pp=2.0 * i_p,
        i_ap_p=i_p + i_ap,
        i_apap=2.0 * i_ap,
        i_ref_read=i_ref_read,
        i_ref_or=i_ref_read + i_ap,
        i_ref_and=i_ref_read + i_p,
    )
    if not (levels.i_ap < levels.i_ref_read < levels.i_p):
        raise ConfigError("read reference does not separate the stored states")
    if not (levels.i_apap < levels.i_ref_or < levels.i_ap_p < levels.i_ref_and < levels.i_pp):
        raise ConfigError("two-cell levels and references are not interleaved")
    return levels


# Stream layout: each cell consumes three normals (tox, area, vt) at word
# indices cell*3 + (0, 1, 2).  Retries for non-positive resistances rehash
# far away in index space.
_DRAWS_PER_CELL = 3
_RETRY_STRIDE = 1 << 62
_MAX_RETRIES = 8

# A Monte Carlo sample or a sensed column owns eight consecutive cell
# indices: two data cells, then the left reference stack (REF, AP, P), then
# the right stack (REF, AP, P).
CELLS_PER_SAMPLE = 8
_SLOT_A, _SLOT_B = 0, 1
_SLOT_LREF, _SLOT_LAP, _SLOT_LP = 2, 3, 4
_SLOT_RREF, _SLOT_RAP, _SLOT_RP = 5, 6, 7


def cell_factors(params, variation, seed, cell_indices):
    """Vectorized variation draws for the given cell indices.

    Returns (mtj_factor, r_t_eff) arrays shaped like cell_indices.  The MTJ
    factor multiplies any nominal junction resistance of that cell; the
    oxide and area draws are common to r_p and r_ap of the cell.
    """
    idx = np.asarray(cell_indices, dtype=np.uint64)
    base = idx * np.uint64(_DRAWS_PER_CELL)
    eps_tox = unit_normals(seed, base)
    eps_area = unit_normals(seed, base + np.uint64(1))
    eps_vt = unit_normals(seed, base + np.uint64(2))

    for retry in range(_MAX_RETRIES + 1):
        denom = 1.0 + variation.sigma_area * eps_area
        r_t = params.access_resistance * (1.0 + variation.vt_sensitivity * variation.sigma_vt * eps_vt)
        bad = (denom <= 0.0) | (r_t <= 0.0)
        if not bad.any():
            break
        if retry == _MAX_RETRIES:
            raise ConfigError("variation draws kept producing non-positive resistances")
        # Rehash only the offending cells at a distant index range.
        shift = np.uint64((retry + 1) * _RETRY_STRIDE & 0xFFFFFFFFFFFFFFFF)
        with np.errstate(over="ignore"):
            rebase = base[bad] + shift
        eps_tox[bad] = unit_normals(seed, rebase)
        eps_area[bad] = unit_normals(seed, rebase + np.uint64(1))
        eps_vt[bad] = unit_normals(seed, rebase + np.uint64(2))

    factor = np.exp(variation.tox_sensitivity * variation.sigma_tox * eps_tox) / denom
    return factor, r_t


def sample_cell(params: DeviceParams, variation: VariationSpec, seed: int, index: int) -> CellSample:
    """One varied bit-cell, pure in (seed, index)."""
    factor, r_t = cell_factors(params, variation, seed, np.array([index], dtype=np.uint64))
    return CellSample(
        r_p_eff=float(params.r_p * factor[0]),
        r_ap_eff=float(params.r_ap * factor[0]),
        r_t_eff=float(r_t[0]),
    )


def _disturb_per_cell(v, r_sl, r_self, r_other):
    """Per-cell current of a two-cell access with a shared series resistance.

    Current divider on the parallel pair: strictly below v/(r_sl + r_self),
    the matching single-cell read current, whenever r_sl > 0.
    """
    return v * r_other / (r_sl * (r_self + r_other) + r_self * r_other)


def monte_carlo_failures(
    params: DeviceParams,
    variation: VariationSpec,
    n: int,
    seed: int,
    chunk: int = 1 << 17,
) -> FailureReport:
    """Estimate read and CiM decision-failure rates over n samples.

    Each sample draws two data cells plus both reference stacks (references
    are real cells and vary too).  A read fails if either stored state lands
    on the wrong side of the sensed read reference; a CiM access fails if
    any of the four state combinations thresholds wrong against the sensed
    OR/AND references.  Counts are exact integers, so chunked accumulation
    is order-independent.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    v = params.read_voltage
    r_p, r_ap, r_ref = params.r_p, params.r_ap, params.r_ref
    r_sl = params.sl_resistance

    read_fails = 0
    cim_fails = 0
    below = 0
    sum_margin_low = 0.0
    sum_margin_high = 0.0
    sum_cim_cell = 0.0
    sum_read_cell = 0.0

    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        samples = np.arange(start, start + m, dtype=np.uint64)
        cells = samples[:, None] * np.uint64(CELLS_PER_SAMPLE) + np.arange(
            CELLS_PER_SAMPLE, dtype=np.uint64
        )
        factor, r_t = cell_factors(params, variation, seed, cells)

        # Data cells: both junction states share the cell's draws.
        ra_p = r_p * factor[:, _SLOT_A]
        ra_ap = r_ap * factor[:, _SLOT_A]
        rb_p = r_p * factor[:, _SLOT_B]
        rb_ap = r_ap * factor[:, _SLOT_B]
        rta = r_t[:, _SLOT_A]
        rtb = r_t[:, _SLOT_B]

        ia_p = v / (rta + ra_p)
        ia_ap = v / (rta + ra_ap)
        ib_p = v / (rtb + rb_p)
        ib_ap = v / (rtb + rb_ap)

        # Left stack supplies the read and OR references, right stack AND.
        i_ref_read = v / (r_t[:, _SLOT_LREF] + r_ref * factor[:, _SLOT_LREF])
        i_ref_or = i_ref_read + v / (r_t[:, _SLOT_LAP] + r_ap * factor[:, _SLOT_LAP])
        i_ref_and = (
            v / (r_t[:, _SLOT_RREF] + r_ref * factor[:, _SLOT_RREF])
            + v / (r_t[:, _SLOT_RP] + r_p * factor[:, _SLOT_RP])
        )

        read_bad = (ia_p <= i_ref_read) | (ia_ap > i_ref_read)
        read_fails += int(read_bad.sum())

        i_pp = ia_p + ib_p
        i_pap = ia_p + ib_ap
        i_app = ia_ap + ib_p
        i_apap = ia_ap + ib_ap
        ok_pp = (i_pp > i_ref_and) & (i_pp > i_ref_or)
        ok_pap = (i_pap > i_ref_or) & (i_pap <= i_ref_and)
        ok_app = (i_app > i_ref_or) & (i_app <= i_ref_and)
        ok_apap = (i_apap <= i_ref_or) & (i_apap <= i_ref_and)
        cim_bad = ~(ok_pp & ok_pap & ok_app & ok_apap)
        cim_fails += int(cim_bad.sum())

        sum_margin_low += float((0.5 * (i_pap + i_app) - i_ref_or).sum())
        sum_margin_high += float((i_ref_and - 0.5 * (i_pap + i_app)).sum())

        # Disturb proxy: shared series resistance enters here only.
        tot_a_p, tot_a_ap = rta + ra_p, rta + ra_ap
        tot_b_p, tot_b_ap = rtb + rb_p, rtb + rb_ap
        read_a_p = v / (r_sl + tot_a_p)
        read_a_ap = v / (r_sl + tot_a_ap)
        read_b_p = v / (r_sl + tot_b_p)
        read_b_ap = v / (r_sl + tot_b_ap)
        read_cell = 0.25 * (read_a_p + read_a_ap + read_b_p + read_b_ap)

        combos = (
            (tot_a_p, tot_b_p, read_a_p, read_b_p),
            (tot_a_p, tot_b_ap, read_a_p, read_b_ap),
            (tot_a_ap, tot_b_p, read_a_ap, read_b_p),
            (tot_a_ap, tot_b_ap, read_a_ap, read_b_ap),
        )
        cim_cell = np.zeros(m)
        all_below = np.ones(m, dtype=bool)
        for tot_a, tot_b, rd_a, rd_b in combos:
            cur_a = _disturb_per_cell(v, r_sl, tot_a, tot_b)
            cur_b = _disturb_per_cell(v, r_sl, tot_b, tot_a)
            cim_cell += cur_a + cur_b
            all_below &= (cur_a < rd_a) & (cur_b < rd_b)
        cim_cell /= 8.0
        below += int(all_below.sum())
        sum_cim_cell += float(cim_cell.sum())
        sum_read_cell += float(read_cell.sum())

    return FailureReport(
        samples=n,
        read_decision_rate=read_fails / n,
        cim_decision_rate=cim_fails / n,
        mean_cim_per_cell_current=sum_cim_cell / n,
        mean_read_cell_current=sum_read_cell / n,
        margin_low=sum_margin_low / n,
        margin_high=sum_margin_high / n,
        cim_cell_below_read_rate=below / n,
    )


def failure_report_csv(report: FailureReport) -> str:
    """Serialize the headline failure statistics (margins in microampere)."""
    return (
        "samples,read_decision_rate,cim_decision_rate,margin_low_uA,margin_high_uA\n"
        f"{report.samples},{report.read_decision_rate!r},{report.cim_decision_rate!r},"
        f"{report.margin_low * 1e6!r},{report.margin_high * 1e6!r}\n"
    )


# Key-value config file support.  Keys follow the datasheet-style naming
# used by the CLI; unknown keys are rejected so typos fail loudly.
_DEVICE_KEYS = {
    "ra_product_ohm_um2",
    "tmr_pct",
    "mtj_side_nm",
    "mtj_area_um2",
    "access_resistance_ohm",
    "read_voltage_v",
    "ref_resistance_ohm",
    "sl_resistance_ohm",
    "tox_sigma_pct",
    "area_sigma_pct",
    "vt_sigma_pct",
    "tox_sensitivity",
    "vt_sensitivity",
}


def load_device_config(path) -> tuple[DeviceParams, VariationSpec]:
    """Parse a key=value device config file.

    Unspecified keys keep their defaults.  mtj_side_nm is the square-junction
    edge length and is mutually exclusive with mtj_area_um2.
    """
    values: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in _DEVICE_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = float(val.strip())
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad number for {key!r}") from exc

    if "mtj_side_nm" in values and "mtj_area_um2" in values:
        raise ConfigError("give mtj_side_nm or mtj_area_um2, not both")
    area = values.get("mtj_area_um2")
    if "mtj_side_nm" in values:
        side_um = values["mtj_side_nm"] * 1e-3
        area = side_um * side_um

    params = DeviceParams(
        ra_product=values.get("ra_product_ohm_um2", DeviceParams.ra_product),
        tmr=values.get("tmr_pct", DeviceParams.tmr * 100.0) / 100.0,
        mtj_area=area if area is not None else DeviceParams.mtj_area,
        access_resistance=values.get("access_resistance_ohm", DeviceParams.access_resistance),
        read_voltage=values.get("read_voltage_v", DeviceParams.read_voltage),
        ref_resistance=values.get("ref_resistance_ohm"),
        sl_resistance=values.get("sl_resistance_ohm", DeviceParams.sl_resistance),
    )
    default_var = VariationSpec()
    variation = VariationSpec(
        sigma_tox=values.get("tox_sigma_pct", default_var.sigma_tox * 100.0) / 100.0,
        sigma_area=values.get("area_sigma_pct", default_var.sigma_area * 100.0) / 100.0,
        sigma_vt=values.get("vt_sigma_pct", default_var.sigma_vt * 100.0) / 100.0,
        tox_sensitivity=values.get("tox_sensitivity", default_var.tox_sensitivity),
        vt_sensitivity=values.get("vt_sensitivity", default_var.vt_sensitivity),
    )
    return params, variation
