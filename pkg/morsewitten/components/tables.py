"""
Plain-text rendering of classification, prediction and verdict tables.
"""

from typing import List, Optional

import pandas as pd

from ..models.experiment import Report
from ..models.spectral import PredictionSet
from ..models.topology import BarannikovComplex


class SummaryTable:
    """Renders the tables of a run as aligned text."""

    def __init__(self, float_format: str = "%.6g"):
        self.float_format = float_format

    def _frame(self, frame: pd.DataFrame) -> str:
        if frame.empty:
            return "(none)"
        return frame.to_string(index=False, float_format=lambda v: self.float_format % v, na_rep="-")

    def classification(self, bc: BarannikovComplex) -> str:
        frame = pd.DataFrame(bc.table(), columns=["id", "index", "value", "class", "partner", "gap"])
        frame["partner"] = frame["partner"].astype("Int64")
        return self._frame(frame)

    def predictions(self, predictions: PredictionSet, h: Optional[float] = None) -> str:
        rows = []
        for pred in predictions.all():
            row = {
                "point": pred.point_id,
                "p": pred.degree,
                "kind": pred.kind.value,
                "coefficient": pred.coefficient,
                "activation": pred.activation,
                "partner": pred.partner_id,
            }
            if h is not None:
                row[f"eval(h={h:g})"] = pred.eval(h) if pred.is_zero or pred.coefficient is not None else None
            rows.append(row)
        frame = pd.DataFrame(rows)
        if not frame.empty:
            frame["partner"] = frame["partner"].astype("Int64")
        return self._frame(frame)

    def report(self, report: Report) -> str:
        """Verdict summary of a verification report."""
        lines: List[str] = [f"experiment: {report.name}", f"verdict: {'PASS' if report.passed else 'FAIL'}", ""]
        lines.append(f"hypotheses: excellent={report.hypotheses.excellent} distinct_gaps={report.hypotheses.distinct_gaps}")
        for violation in report.hypotheses.violations:
            lines.append(f"  violation {violation}")
        sections = [
            ("counts", report.counts, ["h", "degree", "expected", "measured", "kernel_expected", "kernel_measured", "passed"]),
            ("comparisons", report.comparisons, ["h", "degree", "predicted", "measured", "relative_error", "tolerance", "passed"]),
            ("supersymmetry", report.supersymmetry, ["h", "degree", "predicted", "measured", "relative_error", "tolerance", "passed"]),
        ]
        for title, items, columns in sections:
            if not items:
                continue
            frame = pd.DataFrame([item.model_dump() for item in items])[columns]
            lines += ["", f"{title}:", self._frame(frame)]
        if report.fits:
            frame = pd.DataFrame(
                [
                    {
                        "degree": fit.degree,
                        "points": " ".join(map(str, fit.point_ids)),
                        "slope": fit.fit.slope,
                        "corr": fit.fit.correction,
                        "activation": fit.predicted_activation,
                        "act_err": fit.activation_error,
                        "act_tol": fit.activation_tolerance,
                        "pref_err": fit.prefactor_error,
                        "pref_tol": fit.prefactor_tolerance,
                        "r2": fit.fit.r2,
                        "passed": fit.passed,
                    }
                    for fit in report.fits
                ]
            )
            lines += ["", "fits:", self._frame(frame)]
        if report.error_band_estimate is not None:
            lines += ["", f"error band estimate C_hat: {report.error_band_estimate:.4g}"]
        lines += ["", f"config hash: {report.provenance.config_hash}"]
        return "\n".join(lines) + "\n"
