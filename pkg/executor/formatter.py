"""
Text report formatter for command outputs.

Converts identifiability reports, fit results, replication tables and
embedding comparisons into plain-text reports for the terminal.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import pandas as pd

from analytics.identifiability import IdentifiabilityReport

logger = logging.getLogger(__name__)


@dataclass
class FormattedOutput:
    """Text ready for stdout plus a few machine-readable facts."""

    content: str
    content_type: str = "text"
    metadata: dict[str, Any] = field(default_factory=dict)


def _fmt_set(s) -> str:
    """1-based display of a 0-based factor set."""
    if s is None:
        return "-"
    return "{" + ", ".join(str(k + 1) for k in sorted(s)) + "}"


def _fmt_num(value: Any, digits: int = 4) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def text_table(rows: list[list[str]], header: list[str]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    line = "  ".join(h.ljust(w) for h, w in zip(header, widths))
    rule = "  ".join("-" * w for w in widths)
    body = ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join([line, rule, *body])


class ReportFormatter:
    """
    Formats command results into text reports.

    Usage:
        formatter = ReportFormatter()
        out = formatter.format("identifiability", report)
    """

    def __init__(self) -> None:
        self._formatters: dict[str, Callable[..., FormattedOutput]] = {
            "identifiability": self._format_identifiability,
            "fit": self._format_fit,
            "simulate": self._format_simulate,
            "oil": self._format_oil,
        }

    def format(self, kind: str, payload: Any, **extra: Any) -> FormattedOutput:
        formatter = self._formatters.get(kind)
        if formatter is None:
            raise KeyError(f"no formatter for '{kind}'")
        return formatter(payload, **extra)

    # =========================================================================
    # Identifiability
    # =========================================================================

    def _format_identifiability(self, report: IdentifiabilityReport) -> FormattedOutput:
        rows = [
            [
                str(v.factor + 1),
                "yes" if v.identifiable else "NO",
                _fmt_set(v.intersection),
                " ".join(_fmt_set(s) for s in v.certificate) or "-",
            ]
            for v in report.verdicts
        ]
        table = text_table(rows, ["factor", "identifiable", "intersection", "sets used"])

        sets = [
            [_fmt_set(s), str(len(items)), ", ".join(str(j + 1) for j in sorted(items))]
            for s, items in report.response_sets.items()
        ]
        sets_table = text_table(sets, ["S", "|R_Q(S)|", "items"])

        failing = [v.factor + 1 for v in report.verdicts if not v.identifiable]
        verdict = (
            "All factors are structurally identifiable."
            if not failing
            else f"Not identifiable: factor(s) {', '.join(map(str, failing))}."
        )
        return FormattedOutput(
            content=f"{table}\n\n{sets_table}\n\n{verdict}",
            content_type="identifiability",
            metadata={"all_identifiable": report.all_identifiable, "failing": failing},
        )

    # =========================================================================
    # Fit
    # =========================================================================

    def _format_fit(self, fit, marginal_loglik: float, paths: list[str] | None = None) -> FormattedOutput:
        h = fit.theta_hat
        bounds = fit.bounds_report()
        lines = [
            f"method            {fit.method}",
            f"N x J x K         {fit.x_hat.x.shape[0]} x {fit.a_hat.a.shape[0]} x {fit.a_hat.a.shape[1]}",
            f"converged         {fit.converged.value} after {fit.iterations} iterations",
            f"marginal loglik   {marginal_loglik:.6g}",
            f"theta             w={h.w:.4g} tau={h.tau:.4g} sigma2={h.sigma2:.4g}",
            f"max |x_i|         {bounds['max_x_norm']:.3f} (bound {bounds['x_bound']}, "
            f"{bounds['x_rows_over_bound']} over)",
            f"max |a_j|         {bounds['max_a_norm']:.3f} (bound {bounds['a_bound']}, "
            f"{bounds['a_rows_over_bound']} over)",
        ]
        if paths:
            lines.append("")
            lines.extend(f"wrote {p}" for p in paths)
        return FormattedOutput(content="\n".join(lines), content_type="fit")

    # =========================================================================
    # Simulation
    # =========================================================================

    def _format_simulate(self, table: pd.DataFrame, scenario: str, failures: int = 0) -> FormattedOutput:
        if table.empty:
            return FormattedOutput(
                content=f"{scenario}: no replications run.", content_type="simulate",
                metadata={"rows": 0},
            )
        metrics = [c for c in table.columns if c.startswith(("corr_", "sin_", "d_")) and not c.endswith("_median")]
        header = ["J", "method", "ok", *metrics]
        rows = [
            [str(r["J"]), str(r["method"]), f"{r['reps_ok']}/{r['reps_ok'] + r['reps_failed']}",
             *(_fmt_num(float(r[m]), 3) for m in metrics)]
            for _, r in table.iterrows()
        ]
        content = f"{scenario} (means over replications)\n\n{text_table(rows, header)}"
        if failures:
            content += f"\n\n{failures} fit(s) failed; see replications.jsonl."
        return FormattedOutput(content=content, content_type="simulate", metadata={"rows": len(table)})

    # =========================================================================
    # Oil
    # =========================================================================

    def _format_oil(self, errors: dict[str, int], n: int, design) -> FormattedOutput:
        rows = [[name, str(err), f"{err / n:.3f}"] for name, err in errors.items()]
        q_rows = ["  " + " ".join(str(int(v)) for v in row) for row in design.q]
        content = (
            f"nearest-neighbour classification on {n} points\n\n"
            f"{text_table(rows, ['method', 'errors', 'rate'])}\n\n"
            "derived design (rows = features):\n" + "\n".join(q_rows)
        )
        return FormattedOutput(content=content, content_type="oil", metadata=dict(errors))
