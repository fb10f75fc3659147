"""
Replication harness for the simulation scenarios.

Each (J, replication) job draws one dataset from a seed derived from
(seed, J, replication) and fits every requested method on it, so parallel
and serial runs give the same table.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from analytics.metrics import evaluate
from baselines.linear_fa import fit_linear_fa
from baselines.unconstrained import fit_unconstrained
from config import config
from estimator.iterative import fit_iterative
from estimator.joint_map import fit_joint_map
from estimator.settings import FitConfig
from model.errors import InputError, NSLFAError
from model.types import DesignMatrix
from registry.scenarios import ScenarioSpec
from simulation.generator import SimulatedData, gen_data

logger = logging.getLogger(__name__)

METHODS = ("nslfa-joint", "nslfa-iterative", "linear-fa", "unconstrained")

METHOD_ALIASES = {
    "nslfa": "nslfa-joint",
    "joint": "nslfa-joint",
    "iterative": "nslfa-iterative",
    "lfa": "linear-fa",
    "gplvm": "unconstrained",
}


def resolve_methods(names: Iterable[str]) -> list[str]:
    """
    Canonical method names, order preserved, duplicates dropped.

    Raises:
        InputError: an unknown method name
    """
    resolved: list[str] = []
    for raw in names:
        name = METHOD_ALIASES.get(raw.strip().lower(), raw.strip().lower())
        if name not in METHODS:
            raise InputError(f"unknown method '{raw}'; choose from {', '.join(METHODS)}")
        if name not in resolved:
            resolved.append(name)
    return resolved


def replication_seed(seed: int, J: int, rep: int) -> int:
    return int(np.random.SeedSequence([seed, J, rep]).generate_state(1)[0])


@dataclass
class HarnessResult:
    """Summary table plus the per-replication records it was built from."""

    table: pd.DataFrame
    records: list[dict] = field(default_factory=list)

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.records if r["status"] != "ok"]


# ── Single replication ──

def _fit_method(method: str, data: SimulatedData, q: DesignMatrix, cfg: FitConfig):
    """(x_hat, a_hat, f_hat) of one method on one dataset."""
    if method == "linear-fa":
        fit = fit_linear_fa(data.dataset, q)
        return fit.x_hat.x, fit.a_hat.a, fit.f_hat
    if method == "unconstrained":
        fit = fit_unconstrained(data.dataset, q.K, cfg)
    elif method == "nslfa-iterative":
        fit = fit_iterative(data.dataset, q, cfg.model_copy(update={"method": "iterative"}))
    else:
        fit = fit_joint_map(data.dataset, q, cfg.model_copy(update={"method": "joint-map"}))
    return fit.x_hat.x, fit.a_hat.a, fit.f_hat


def run_replication(
    spec: ScenarioSpec,
    J: int,
    rep: int,
    methods: Sequence[str],
    seed: int,
    cfg: FitConfig,
) -> list[dict]:
    """Fit every method on one generated dataset; failures are recorded, not raised."""
    q = spec.design(J)
    N = spec.n_for(J)
    rep_seed = replication_seed(seed, J, rep)
    base = {"scenario": spec.name, "J": J, "N": N, "rep": rep, "seed": rep_seed}

    try:
        data = gen_data(q, N, spec, rep_seed)
    except NSLFAError as exc:
        logger.warning(f"[Harness] draw failed J={J} rep={rep} error={exc}")
        return [{**base, "method": m, "status": "failed", "error": str(exc)} for m in methods]

    records = []
    fit_cfg = cfg.model_copy(update={"seed": rep_seed, "K": None})
    for method in methods:
        try:
            x_hat, a_hat, f_hat = _fit_method(method, data, q, fit_cfg)
            summary = evaluate(data.x_true, data.a_true, x_hat, a_hat, data.f_true, f_hat)
        except (NSLFAError, np.linalg.LinAlgError) as exc:
            logger.warning(f"[Harness] fit failed method={method} J={J} rep={rep} error={exc}")
            records.append({**base, "method": method, "status": "failed", "error": str(exc)})
            continue
        records.append({**base, "method": method, "status": "ok", **summary.as_row()})
    logger.info(f"[Harness] done scenario={spec.name} J={J} rep={rep}")
    return records


# ── Aggregation ──

def _metric_columns(K: int) -> list[str]:
    return (
        [f"corr_x{k + 1}" for k in range(K)]
        + [f"sin_x{k + 1}" for k in range(K)]
        + ["d_xa", "d_f"]
    )


def summarize(records: list[dict], K: int) -> pd.DataFrame:
    """
    One row per (J, method): mean and median of each metric over successful replications.
    """
    metrics = _metric_columns(K)
    columns = (
        ["J", "N", "method", "reps_ok", "reps_failed"]
        + metrics
        + [f"{m}_median" for m in metrics]
    )
    if not records:
        return pd.DataFrame(columns=columns)

    frame = pd.DataFrame.from_records(records)
    rows = []
    for (J, method), group in frame.groupby(["J", "method"], sort=False):
        ok = group[group["status"] == "ok"]
        row = {
            "J": int(J),
            "N": int(group["N"].iloc[0]),
            "method": method,
            "reps_ok": len(ok),
            "reps_failed": len(group) - len(ok),
        }
        for m in metrics:
            values = ok[m].astype(float) if m in ok else pd.Series(dtype=float)
            row[m] = float(values.mean()) if len(values) else math.nan
            row[f"{m}_median"] = float(values.median()) if len(values) else math.nan
        rows.append(row)
    return pd.DataFrame(rows, columns=columns)


def run_replications(
    spec: ScenarioSpec,
    methods: Sequence[str],
    j_values: Optional[Sequence[int]] = None,
    reps: Optional[int] = None,
    seed: Optional[int] = None,
    cfg: Optional[FitConfig] = None,
    n_jobs: Optional[int] = None,
) -> HarnessResult:
    """
    Run reps replications for each J and summarize per (J, method).

    Raises:
        InputError: unknown method name
        IndivisibleJ: a J value does not fit the scenario's block count
    """
    methods = resolve_methods(methods)
    j_values = list(j_values or spec.j_schedule)
    reps = spec.replications if reps is None else reps
    seed = spec.seed if seed is None else seed
    cfg = cfg or FitConfig()
    n_jobs = config.runtime.threads if n_jobs is None else n_jobs

    for J in j_values:
        spec.design(J)

    logger.info(
        f"[Harness] start scenario={spec.name} J={j_values} reps={reps} "
        f"methods={','.join(methods)} n_jobs={n_jobs}"
    )

    jobs = [(J, rep) for J in j_values for rep in range(reps)]
    if jobs:
        batches = Parallel(n_jobs=n_jobs)(
            delayed(run_replication)(spec, J, rep, methods, seed, cfg) for J, rep in jobs
        )
    else:
        batches = []
    records = [record for batch in batches for record in batch]

    table = summarize(records, spec.K)
    failed = sum(1 for r in records if r["status"] != "ok")
    logger.info(f"[Harness] finished rows={len(table)} fits={len(records)} failed={failed}")
    return HarnessResult(table=table, records=records)
