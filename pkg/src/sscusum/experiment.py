"""The full comparison study: chart variants x design parameters x change
scenarios, with one calibration per in-control configuration.

Each (variant, k) group is calibrated once to the target in-control ARL;
the resulting decision limit is then shared by every (delta, tau) cell of
that group. Per-cell replication streams derive from (master_seed, a stable
content key of the cell, replication index), so enlarging the grid or the
replication count never perturbs estimates already computed.
"""

import hashlib
import multiprocessing
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .calibrate import CalibrationSpec, calibrate_h
from .charts import ChartConfig, NIGParams
from .errors import BracketError, EstimateError
from .metrics import estimate_ced
from .simulate import ScenarioSpec

VARIANTS = ("ssc", "prc_n", "prc_i")

DEFAULT_PRIORS = {
    "prc_n": NIGParams.reference(),
    "prc_i": NIGParams(0.0, 4.0, 2.0, 1.5),
}

TABLE_COLUMNS = (
    "variant",
    "prior",
    "k_prc",
    "k_ssc",
    "delta",
    "tau",
    "ced",
    "std_error",
    "reps",
    "early_alarms",
    "censored",
    "h",
    "master_seed",
)

FIGURE_COLUMNS = ("delta", "k_prc", "k_ssc", "variant", "tau", "ced")


@dataclass(frozen=True)
class GridSpec:
    """The study layout. Defaults reproduce the standard comparison grid:
    four shift sizes, ten change points, three (k_prc, k_ssc = k_prc/2)
    design pairs and three chart variants, 10,000 replications per cell."""

    deltas: Tuple[float, ...] = (0.5, 1.0, 1.5, 2.0)
    taus: Tuple[int, ...] = tuple(range(11, 102, 10))
    k_pairs: Tuple[Tuple[float, float], ...] = ((0.5, 0.25), (0.75, 0.375), (1.0, 0.5))
    variants: Tuple[str, ...] = VARIANTS
    priors: Tuple[Tuple[str, NIGParams], ...] = tuple(DEFAULT_PRIORS.items())
    reps: int = 10000
    target_arl: float = 370.0
    master_seed: int = 0
    cap: int = 10000
    tol_arl: float = 2.0
    calibration_bracket: Tuple[float, float] = (0.1, 20.0)
    crn_matched_cells: bool = False

    def __post_init__(self):
        if not self.deltas or not self.taus or not self.k_pairs or not self.variants:
            raise ValueError("deltas, taus, k_pairs and variants must be non-empty")
        for kp, ks in self.k_pairs:
            if not (kp > 0.0 and ks > 0.0):
                raise ValueError("every k must be positive")
        priors = dict(self.priors)
        for v in self.variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}; choose from {VARIANTS}")
            if v != "ssc" and v not in priors:
                raise ValueError(f"variant {v!r} listed but no prior configured for it")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    def prior_for(self, variant: str) -> Optional[NIGParams]:
        if variant == "ssc":
            return None
        return dict(self.priors)[variant]


@dataclass(frozen=True)
class GridRow:
    variant: str
    prior: str
    k_prc: float
    k_ssc: float
    delta: float
    tau: int
    ced: float
    std_error: float
    reps: int
    early_alarms: int
    censored: int
    h: float
    master_seed: int


@dataclass(frozen=True)
class GridResult:
    rows: Tuple[GridRow, ...]
    failures: Tuple[str, ...] = ()


def derive_seed(master_seed: int, *parts) -> int:
    """Stable substream root for a named piece of the study: hashing the
    content key (never a positional index) keeps existing cells unchanged
    when the grid grows."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    tag = int.from_bytes(digest[:8], "big")
    ss = np.random.SeedSequence([int(master_seed), tag])
    return int(ss.generate_state(1, np.uint64)[0])


def _prior_label(variant: str, prior: Optional[NIGParams]) -> str:
    if variant == "ssc" or prior is None:
        return "none"
    if prior == NIGParams.reference():
        return "reference"
    return f"NIG({prior.mu:g},{prior.lam:g},{prior.a:g},{prior.b:g})"


def _chart_config(spec: GridSpec, variant: str, k_pair) -> ChartConfig:
    k_prc, k_ssc = k_pair
    if variant == "ssc":
        return ChartConfig("ssc", k=k_ssc)
    return ChartConfig("prc", k=k_prc, prior=spec.prior_for(variant))


def _stream_tag(spec: GridSpec, variant: str, k_pair) -> str:
    # Matched-cell CRN shares uniforms across variants of the same design
    # pair; otherwise each variant draws its own streams.
    if spec.crn_matched_cells:
        return f"pair({k_pair[0]!r},{k_pair[1]!r})"
    return f"{variant}|pair({k_pair[0]!r},{k_pair[1]!r})"


def _calibrate_group(task):
    spec, variant, k_pair = task
    cfg = _chart_config(spec, variant, k_pair)
    seed = derive_seed(spec.master_seed, "cal", _stream_tag(spec, variant, k_pair))
    cal = CalibrationSpec(
        chart=cfg,
        target_arl=spec.target_arl,
        reps=spec.reps,
        master_seed=seed,
        bracket=spec.calibration_bracket,
        tol_arl=spec.tol_arl,
        cap=spec.cap,
    )
    try:
        return "ok", calibrate_h(cal)
    except (BracketError, EstimateError, ValueError) as exc:
        return "error", f"calibration {variant} k_pair={k_pair}: {exc}"


def _eval_cell(task):
    spec, variant, k_pair, delta, tau, h = task
    cfg = _chart_config(spec, variant, k_pair)
    seed = derive_seed(
        spec.master_seed,
        "ced",
        _stream_tag(spec, variant, k_pair),
        repr(float(delta)),
        repr(int(tau)),
    )
    scenario = ScenarioSpec(
        chart=cfg, delta=delta, tau=tau, reps=spec.reps, master_seed=seed, cap=spec.cap
    )
    try:
        est = estimate_ced(scenario, h)
    except EstimateError as exc:
        return "error", f"cell {variant} k_pair={k_pair} delta={delta} tau={tau}: {exc}"
    row = GridRow(
        variant=variant,
        prior=_prior_label(variant, cfg.prior),
        k_prc=k_pair[0],
        k_ssc=k_pair[1],
        delta=float(delta),
        tau=int(tau),
        ced=est.ced,
        std_error=est.std_error,
        reps=est.reps,
        early_alarms=est.early_alarms,
        censored=est.censored,
        h=h,
        master_seed=seed,
    )
    return "ok", row


def run_grid(spec: GridSpec, workers: int = 1, progress=None) -> GridResult:
    """Calibrate every (variant, k) group, then estimate CED for every
    (delta, tau) cell. Results are deterministic for a given spec
    regardless of the worker count; progress reporting is advisory only."""

    def say(msg):
        if progress is not None:
            progress(msg)

    groups = [(variant, kp) for variant in spec.variants for kp in spec.k_pairs]
    cal_tasks = [(spec, variant, kp) for variant, kp in groups]

    pool = None
    try:
        if workers > 1:
            pool = multiprocessing.Pool(processes=workers)
            mapper = pool.map
        else:
            mapper = lambda fn, tasks: [fn(t) for t in tasks]

        say(f"calibrating {len(groups)} chart configurations ...")
        cal_results = mapper(_calibrate_group, cal_tasks)

        failures = []
        cell_tasks = []
        for (variant, kp), (status, payload) in zip(groups, cal_results):
            if status == "error":
                failures.append(payload)
                continue
            say(
                f"  {variant} k_pair={kp}: h={payload.h:.6g} "
                f"(ARL {payload.achieved_arl.mean:.1f}, {payload.iterations} iters)"
            )
            for delta in spec.deltas:
                for tau in spec.taus:
                    cell_tasks.append((spec, variant, kp, delta, tau, payload.h))

        say(f"evaluating {len(cell_tasks)} cells ...")
        cell_results = mapper(_eval_cell, cell_tasks)
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    rows = []
    for status, payload in cell_results:
        if status == "error":
            failures.append(payload)
        else:
            rows.append(payload)
    return GridResult(tuple(rows), tuple(failures))


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def emit_table(result: GridResult, format: str = "csv") -> str:
    """Serialize the grid. csv: one row per cell in (variant, k, delta,
    tau) order. pretty: a pivot with change-point rows grouped by shift
    size and one column per (k pair, variant), mirroring the usual
    presentation of such studies."""
    if format == "csv":
        lines = [",".join(TABLE_COLUMNS)]
        for row in result.rows:
            lines.append(",".join(_fmt(getattr(row, col)) for col in TABLE_COLUMNS))
        return "\n".join(lines) + "\n"
    if format == "pretty":
        return _pretty_table(result)
    raise ValueError(f"unknown table format {format!r}")


def _pretty_table(result: GridResult) -> str:
    rows = result.rows
    if not rows:
        return "(empty grid)\n"
    pairs, variants, deltas, taus = [], [], [], []
    cells = {}
    for row in rows:
        pair = (row.k_prc, row.k_ssc)
        if pair not in pairs:
            pairs.append(pair)
        if row.variant not in variants:
            variants.append(row.variant)
        if row.delta not in deltas:
            deltas.append(row.delta)
        if row.tau not in taus:
            taus.append(row.tau)
        cells[(pair, row.variant, row.delta, row.tau)] = row.ced
    width = 12
    header1 = " " * 14 + "".join(
        f"k_prc={kp:<5g} k_ssc={ks:<5g}".center(width * len(variants)) + "  "
        for kp, ks in pairs
    )
    header2 = f"{'delta':>6} {'tau':>6} " + "".join(
        "".join(f"{v:>{width}}" for v in variants) + "  " for _ in pairs
    )
    lines = [header1.rstrip(), header2.rstrip(), "-" * len(header2)]
    for delta in deltas:
        for tau in taus:
            parts = [f"{delta:>6g} {tau:>6d} "]
            for pair in pairs:
                for v in variants:
                    ced = cells.get((pair, v, delta, tau))
                    parts.append(f"{ced:>{width}.3f}" if ced is not None else " " * (width - 1) + "-")
                parts.append("  ")
            lines.append("".join(parts).rstrip())
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def emit_figure_data(result: GridResult) -> str:
    """Long-format CSV keyed by (shift panel, k panel, variant series, tau):
    everything needed to redraw the delay-vs-change-point comparison with
    any plotting tool. Values are identical to emit_table's ced column."""
    lines = [",".join(FIGURE_COLUMNS)]
    for row in result.rows:
        lines.append(",".join(_fmt(getattr(row, col)) for col in FIGURE_COLUMNS))
    return "\n".join(lines) + "\n"


def grid_spec_to_mapping(spec: GridSpec) -> dict:
    """JSON-ready form of a GridSpec (used in manifests and config files)."""
    return {
        "deltas": list(spec.deltas),
        "taus": list(spec.taus),
        "k_pairs": [list(kp) for kp in spec.k_pairs],
        "variants": list(spec.variants),
        "priors": {name: [p.mu, p.lam, p.a, p.b] for name, p in spec.priors},
        "reps": spec.reps,
        "target_arl": spec.target_arl,
        "master_seed": spec.master_seed,
        "cap": spec.cap,
        "tol_arl": spec.tol_arl,
        "calibration_bracket": list(spec.calibration_bracket),
        "crn_matched_cells": spec.crn_matched_cells,
    }


def grid_spec_from_mapping(data: dict) -> GridSpec:
    """Parse a config mapping, accepting any subset of the GridSpec keys."""
    if not isinstance(data, dict):
        raise ValueError("grid config must be a JSON object")
    known = set(grid_spec_to_mapping(GridSpec()).keys())
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown grid config keys: {sorted(unknown)}")
    kwargs = {}
    if "deltas" in data:
        kwargs["deltas"] = tuple(float(d) for d in data["deltas"])
    if "taus" in data:
        kwargs["taus"] = tuple(int(t) for t in data["taus"])
    if "k_pairs" in data:
        kwargs["k_pairs"] = tuple((float(a), float(b)) for a, b in data["k_pairs"])
    if "variants" in data:
        kwargs["variants"] = tuple(str(v) for v in data["variants"])
    if "priors" in data:
        kwargs["priors"] = tuple(
            (str(name), NIGParams(*[float(x) for x in vals]))
            for name, vals in data["priors"].items()
        )
    for key in ("reps", "master_seed", "cap"):
        if key in data:
            kwargs[key] = int(data[key])
    for key in ("target_arl", "tol_arl"):
        if key in data:
            kwargs[key] = float(data[key])
    if "calibration_bracket" in data:
        lo, hi = data["calibration_bracket"]
        kwargs["calibration_bracket"] = (float(lo), float(hi))
    if "crn_matched_cells" in data:
        kwargs["crn_matched_cells"] = bool(data["crn_matched_cells"])
    return GridSpec(**kwargs)
