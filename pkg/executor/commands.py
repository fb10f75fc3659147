"""
Command implementations behind the CLI.

Each command reads its inputs, runs the library, writes its artifacts
through an ArtifactStore and returns a CommandResult carrying the exit
code and the formatted report. Argument parsing lives in cli.py.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from analytics.identifiability import identifiability_report
from analytics.metrics import nn_class_error
from baselines.linear_fa import fit_linear_fa
from baselines.varimax import derive_design, varimax
from config import config
from estimator import fit as run_fit
from estimator.links import fit_gram, link_curves
from estimator.settings import FitConfig
from executor.formatter import FormattedOutput, ReportFormatter
from gp.inference import marginal_loglik
from model.types import Dataset, DesignMatrix
from registry.scenarios import registry
from registry.schemas import FitDocument, ReplicationRecord, RunSettings
from simulation.harness import METHODS, run_replications
from storage.artifacts import ArtifactStore
from storage.csv_io import matrix_frame, read_dataset, read_design, write_design, write_frame

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_IDENTIFIABLE = 2

OIL_FEATURES = 12

_formatter = ReportFormatter()


@dataclass
class CommandResult:
    exit_code: int
    output: FormattedOutput
    paths: list[Path] = field(default_factory=list)


def _fit_config(settings: RunSettings, **overrides: Any) -> FitConfig:
    """Settings-file fit section with non-None CLI overrides applied on top."""
    merged = settings.fit.model_dump()
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return FitConfig.model_validate(merged)


# =============================================================================
# check-q
# =============================================================================

def cmd_check_q(design_path: str | Path) -> CommandResult:
    """Identifiability table for a design file; exit 2 when any factor fails."""
    q = read_design(design_path)
    report = identifiability_report(q)
    output = _formatter.format("identifiability", report)
    code = EXIT_OK if report.all_identifiable else EXIT_NOT_IDENTIFIABLE
    return CommandResult(exit_code=code, output=output)


# =============================================================================
# fit
# =============================================================================

def cmd_fit(
    data_path: str | Path,
    design_path: str | Path,
    out_dir: Optional[str | Path] = None,
    settings: Optional[RunSettings] = None,
    method: Optional[str] = None,
    K: Optional[int] = None,
    x_prior: Optional[str] = None,
    seed: Optional[int] = None,
    links: Optional[int] = None,
    argv: Optional[Sequence[str]] = None,
) -> CommandResult:
    """
    Fit NSLFA to a data file under a design file and write fit.json.

    With links, also writes links.csv: posterior link curves on an
    equispaced grid spanning each item's fitted indices widened by 10%.
    """
    settings = settings or RunSettings()
    cfg = _fit_config(settings, method=method, K=K, x_prior=x_prior, seed=seed)
    y = read_dataset(data_path)
    q = read_design(design_path)
    cfg.check_against(y, q)

    store = ArtifactStore(
        out_dir or config.runtime.output_dir, "fit", list(argv or []),
        {"fit": cfg.model_dump(mode="json"), "links": links}, cfg.seed,
    )
    store.record_input(data_path)
    store.record_input(design_path)

    fit = run_fit(y, q, cfg)
    loglik = marginal_loglik(fit.dataset.y, fit_gram(fit))

    paths = [store.write_json("fit.json", FitDocument.from_fit(fit, q.q, loglik, cfg))]
    paths.append(write_frame(matrix_frame(fit.x_hat.x, "x", y.labels), store.path("scores.csv")))
    if links:
        paths.append(write_frame(link_curves(fit, links), store.path("links.csv")))
    store.finish()

    output = _formatter.format("fit", fit, marginal_loglik=loglik, paths=[str(p) for p in paths])
    return CommandResult(exit_code=EXIT_OK, output=output, paths=paths)


# =============================================================================
# simulate
# =============================================================================

def cmd_simulate(
    scenario: str,
    out_dir: Optional[str | Path] = None,
    settings: Optional[RunSettings] = None,
    j_values: Optional[Sequence[int]] = None,
    reps: Optional[int] = None,
    full: bool = False,
    methods: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    argv: Optional[Sequence[str]] = None,
) -> CommandResult:
    """Run the replication harness for a registered scenario and write table.csv."""
    settings = settings or RunSettings()
    overrides = settings.simulate
    spec = registry.get(scenario)
    spec = spec.model_copy(update={
        k: v for k, v in overrides.model_dump(include={"n_per_item", "sigma2_true", "radius"}).items()
        if v is not None
    })

    if reps is None:
        reps = spec.full_replications if full else (overrides.reps if overrides.reps is not None else spec.replications)
    seed = seed if seed is not None else (overrides.seed if overrides.seed is not None else spec.seed)
    j_values = list(j_values or overrides.j_values or spec.j_schedule)
    methods = list(methods or overrides.methods or METHODS)
    cfg = _fit_config(settings)

    for J in j_values:
        verdicts = identifiability_report(spec.design(J)).per_factor
        if spec.expected and verdicts != spec.expected:
            logger.warning(f"[Simulate] verdicts {verdicts} differ from expected {spec.expected} at J={J}")

    store = ArtifactStore(
        out_dir or config.runtime.output_dir, "simulate", list(argv or []),
        {"scenario": spec.model_dump(mode="json"), "J": j_values, "reps": reps,
         "methods": methods, "fit": cfg.model_dump(mode="json")},
        seed,
    )
    result = run_replications(spec, methods, j_values=j_values, reps=reps, seed=seed, cfg=cfg)

    paths = [write_frame(result.table, store.path("table.csv"))]
    paths.append(store.write_jsonl(
        "replications.jsonl", (ReplicationRecord.from_record(r) for r in result.records)))
    output = _formatter.format("simulate", result.table, scenario=spec.name, failures=len(result.failures))
    report_path = store.path("report.txt")
    report_path.write_text(output.content + "\n")
    paths.append(report_path)
    store.finish()
    return CommandResult(exit_code=EXIT_OK, output=output, paths=paths)


# =============================================================================
# oil
# =============================================================================

def standardize(dataset: Dataset) -> Dataset:
    """Columns centered and scaled to unit sample variance; constant columns only centered."""
    centered = dataset.y - dataset.y.mean(axis=0)
    sd = dataset.y.std(axis=0, ddof=1)
    sd[sd == 0] = 1.0
    return Dataset(centered / sd, labels=dataset.labels, columns=dataset.columns)


def subsample_rows(dataset: Dataset, n: Optional[int], seed: int) -> Dataset:
    if n is None or n >= dataset.N:
        if n is not None:
            logger.warning(f"[Oil] subsample={n} >= N={dataset.N}, using all rows")
        return dataset
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(dataset.N, size=n, replace=False))
    return dataset.subset(rows)


def derive_oil_design(y: Dataset, K: int, threshold: float) -> DesignMatrix:
    """Unconstrained linear FA, varimax, then per-row thresholding."""
    unconstrained = fit_linear_fa(y, DesignMatrix.ones(y.J, K))
    rotated, _ = varimax(unconstrained.a_hat.a)
    return derive_design(rotated, threshold)


def cmd_oil(
    data_path: str | Path,
    out_dir: Optional[str | Path] = None,
    settings: Optional[RunSettings] = None,
    subsample: Optional[int] = None,
    threshold: Optional[float] = None,
    seed: Optional[int] = None,
    argv: Optional[Sequence[str]] = None,
) -> CommandResult:
    """
    Oil-flow pipeline: derive a design from varimax-rotated linear FA, refit
    constrained linear FA and NSLFA under it, and compare nearest-neighbour
    classification errors of the two 2-d embeddings.
    """
    settings = settings or RunSettings()
    oil = settings.oil
    seed = seed if seed is not None else settings.fit.seed
    subsample = subsample if subsample is not None else oil.subsample
    threshold = threshold if threshold is not None else oil.threshold
    cfg = _fit_config(settings, seed=seed, K=oil.K)

    raw = read_dataset(data_path, n_features=OIL_FEATURES, require_labels=True)
    y = standardize(subsample_rows(raw, subsample, seed))

    store = ArtifactStore(
        out_dir or config.runtime.output_dir, "oil", list(argv or []),
        {"subsample": subsample, "threshold": threshold, "fit": cfg.model_dump(mode="json")}, seed,
    )
    store.record_input(data_path)

    q = derive_oil_design(y, oil.K, threshold)
    lfa = fit_linear_fa(y, q)
    nslfa = run_fit(y, q, cfg)

    errors = {
        "linear-fa": nn_class_error(lfa.x_hat.x, y.labels),
        "nslfa": nn_class_error(nslfa.x_hat.x, y.labels),
    }
    logger.info(f"[Oil] N={y.N} errors={errors}")

    paths = [
        write_design(q, store.path("design.csv")),
        write_frame(matrix_frame(lfa.x_hat.x, "z", y.labels), store.path("lfa_embedding.csv")),
        write_frame(matrix_frame(nslfa.x_hat.x, "z", y.labels), store.path("nslfa_embedding.csv")),
        store.write_json("oil.json", {
            "N": y.N,
            "threshold": threshold,
            "design": q.q.astype(int).tolist(),
            "nn_errors": errors,
            "nslfa_theta": nslfa.theta_hat.as_dict(),
        }),
    ]
    store.finish()
    output = _formatter.format("oil", errors, n=y.N, design=q)
    return CommandResult(exit_code=EXIT_OK, output=output, paths=paths)
