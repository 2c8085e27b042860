"""Delimited output and figure rendering for sweep results.

CSV values are printed with 17 significant digits so every double round-trips
exactly; given the same inputs the bytes are identical run to run. Figures are
rendered with matplotlib to SVG under a pinned hash salt and without a
creation timestamp, so regenerating a plot from the same rows reproduces the
same file.
"""

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .montecarlo import EmpiricalRisk
from .risk import SweepRow

CSV_HEADER = (
    "lambda,ridge_variance,ridge_bias,ridge_risk,"
    "pca_variance,pca_bias,pca_risk,ratio,max_term_ratio,bound_holds"
)
VERIFY_HEADER = (
    CSV_HEADER + ",empirical_ridge,empirical_ridge_se,empirical_pca,empirical_pca_se,agrees"
)

_SVG_HASHSALT = "ridgepca"


@dataclass(frozen=True)
class VerifiedRow:
    """A sweep row extended with Monte Carlo columns and the agreement verdict."""

    base: SweepRow
    empirical_ridge: EmpiricalRisk
    empirical_pca: EmpiricalRisk
    agrees: bool


def format_value(x: float) -> str:
    return f"{x:.17g}"


def _flag(value: bool) -> str:
    return "true" if value else "false"


def _row_fields(row: SweepRow) -> list[str]:
    return [
        format_value(row.lam),
        format_value(row.ridge_variance),
        format_value(row.ridge_bias),
        format_value(row.ridge_risk),
        format_value(row.pca_variance),
        format_value(row.pca_bias),
        format_value(row.pca_risk),
        format_value(row.ratio),
        format_value(row.max_term_ratio),
        _flag(row.bound_holds),
    ]


def sweep_csv(rows) -> str:
    lines = [CSV_HEADER]
    lines.extend(",".join(_row_fields(row)) for row in rows)
    return "\n".join(lines) + "\n"


def verify_csv(rows) -> str:
    lines = [VERIFY_HEADER]
    for row in rows:
        fields = _row_fields(row.base)
        fields.extend(
            [
                format_value(row.empirical_ridge.mean),
                format_value(row.empirical_ridge.std_error),
                format_value(row.empirical_pca.mean),
                format_value(row.empirical_pca.std_error),
                _flag(row.agrees),
            ]
        )
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def parse_sweep_csv(text: str) -> list[SweepRow]:
    """Read back the analytic columns of a sweep or verify CSV."""
    lines = text.strip().split("\n")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(
            SweepRow(
                lam=float(parts[0]),
                ridge_variance=float(parts[1]),
                ridge_bias=float(parts[2]),
                ridge_risk=float(parts[3]),
                pca_variance=float(parts[4]),
                pca_bias=float(parts[5]),
                pca_risk=float(parts[6]),
                ratio=float(parts[7]),
                max_term_ratio=float(parts[8]),
                bound_holds=parts[9] == "true",
            )
        )
    return rows


def render_risk_curves(rows, path: str) -> None:
    """Render the risk curves and the inflation ratio to an SVG file.

    The figure is a pure function of the rows: rendering the rows parsed back
    from a CSV yields a byte-identical file.
    """
    lams = [row.lam for row in rows]
    positive = [lam for lam in lams if lam > 0.0]

    with plt.rc_context({"svg.hashsalt": _SVG_HASHSALT}):
        fig, (ax_risk, ax_ratio) = plt.subplots(
            2, 1, figsize=(6.4, 6.4), sharex=True, constrained_layout=True
        )
        ax_risk.plot(lams, [row.ridge_risk for row in rows], label="ridge", color="tab:blue")
        ax_risk.plot(
            lams,
            [row.pca_risk for row in rows],
            label="pca-ols",
            color="tab:orange",
        )
        ax_risk.set_ylabel("risk")
        ax_risk.legend()

        ax_ratio.plot(lams, [row.ratio for row in rows], color="tab:red", label="ratio")
        ax_ratio.axhline(4.0, color="black", linestyle="--", linewidth=1.0, label="bound")
        ax_ratio.set_xlabel("lambda")
        ax_ratio.set_ylabel("pca risk / ridge risk")
        ax_ratio.legend()

        if positive and len(positive) < len(lams):
            ax_ratio.set_xscale("symlog", linthresh=min(positive))
        elif positive:
            ax_ratio.set_xscale("log")
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
