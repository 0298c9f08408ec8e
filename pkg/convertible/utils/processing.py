"""Parameter sweeps: build, plan, audit and verify every conversion in a grid.

Results land in a pandas DataFrame, one row per (n^I, k^I; n^F, k^F).
"""

import logging
from math import lcm

import pandas as pd

from convertible.config.loader import SETTINGS
from convertible.conversions import build_spec, plan_general
from convertible.errors import ConvertibleError
from convertible.framework import ConversionParams
from convertible.oracle import audit_access, verify_preservation

logger = logging.getLogger(__name__)


def sweep_parameters(max_k: int, max_r: int, max_m: int) -> list[ConversionParams]:
    """All k^I != k^F in 1..max_k, r in 1..max_r, with lcm(k^I, k^F) <= max_m."""
    grid = []
    for k_i in range(1, max_k + 1):
        for k_f in range(1, max_k + 1):
            if k_i == k_f or lcm(k_i, k_f) > max_m:
                continue
            for r_i in range(1, max_r + 1):
                for r_f in range(1, max_r + 1):
                    grid.append(ConversionParams(k_i + r_i, k_i, k_f + r_f, k_f))
    return grid


def audit_params(params: ConversionParams, trials: int, seed: int | None = None) -> dict:
    """One sweep row: costs, bound, default baseline and preservation outcome."""
    row = {
        "n_i": params.n_i,
        "k_i": params.k_i,
        "n_f": params.n_f,
        "k_f": params.k_f,
        "regime": params.regime,
    }
    try:
        spec = build_spec(params, seed=seed)
        _, plan = plan_general(spec)
        report = audit_access(spec, plan)
        preserved = verify_preservation(spec, plan, trials=trials, seed=seed).passed
    except ConvertibleError as exc:
        logger.error("sweep %s failed: %s", params, exc)
        return {**row, "error": str(exc), "optimal": False, "preserved": False}
    return {
        **row,
        "field_bits": spec.field.w,
        "reads": report.reads,
        "writes": report.writes,
        "total": report.total,
        "bound": report.bound,
        "bound_reads": report.bound_reads,
        "default_reads": report.default_reads,
        "default_total": report.default_total,
        "savings": round(report.savings, 4),
        "optimal": report.verdict == "optimal",
        "preserved": preserved,
        "error": "",
    }


def run_sweep(grid: list[ConversionParams], trials: int | None = None) -> pd.DataFrame:
    """Audit every parameter set of the grid."""
    trials = SETTINGS["sweep"]["trials"] if trials is None else trials
    rows = []
    for i, params in enumerate(grid, start=1):
        rows.append(audit_params(params, trials))
        if i % 100 == 0:
            logger.info("sweep: %d/%d parameter sets", i, len(grid))
    return pd.DataFrame(rows)


def summarize_sweep(df: pd.DataFrame) -> pd.DataFrame:
    """Per-regime counts, optimal share and mean read savings."""
    return (
        df.groupby("regime")
        .agg(
            count=("k_i", "size"),
            optimal=("optimal", "mean"),
            preserved=("preserved", "mean"),
            mean_savings=("savings", "mean"),
        )
        .round(3)
    )
