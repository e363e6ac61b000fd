"""
Result files of an experiment run.

All tables are CSV written through pandas with floats at 17 significant
digits, so two runs of the same configuration produce byte-identical
files. Each experiment writes into its own directory.
"""

import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import structlog

from ..config import HarnessSettings, get_settings
from ..models.experiment import Report
from ..models.spectral import PredictionSet, Scheme, SolverKind, SweepRow, WittenOperator
from ..models.topology import BarannikovComplex, PersistencePairing, RelativeBasis
from ..utils.exceptions import ConfigurationError
from ..utils.helpers import ensure_dir, format_float

SWEEP_FILE = "sweep_p{degree}.csv"
CLASSIFICATION_FILE = "classification.csv"
PREDICTIONS_FILE = "predictions.csv"
PAIRING_FILE = "pairing.csv"
COUNTS_FILE = "counts.csv"
COMPARISONS_FILE = "comparisons.csv"
FITS_FILE = "fits.csv"
RELATIVE_BASIS_FILE = "relative_basis.csv"
REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.txt"


class ResultStore:
    """
    Writes and reads the tables of one experiment directory.

    Args:
        root: Output directory of the experiment
        settings: Harness settings (float format)
    """

    def __init__(self, root: Union[str, Path], settings: Optional[HarnessSettings] = None):
        self.settings = settings or get_settings().harness
        self.root = Path(root)
        self.logger = structlog.get_logger(self.__class__.__name__).bind(root=str(self.root))

    def path(self, name: str) -> Path:
        return self.root / name

    def _write(self, frame: pd.DataFrame, name: str) -> Path:
        ensure_dir(self.root)
        target = self.path(name)
        frame.to_csv(target, index=False, float_format=self.settings.float_format, lineterminator="\n")
        self.logger.debug("table_written", file=name, rows=len(frame))
        return target

    def read(self, name: str) -> pd.DataFrame:
        source = self.path(name)
        if not source.is_file():
            raise ConfigurationError(f"result table not found: {source}", config_key=name)
        return pd.read_csv(source, float_precision="round_trip")

    # Sweeps

    def write_sweep(self, rows: Sequence[SweepRow], degree: int) -> Path:
        """Columns h, p, lambda_1..lambda_k, count_below_h32, residual_max, scheme, solver, norm, floor."""
        k = max((len(row.eigenvalues) for row in rows), default=0)
        records = []
        for row in rows:
            record: Dict[str, Any] = {"h": row.h, "p": row.degree}
            for i in range(k):
                record[f"lambda_{i + 1}"] = row.eigenvalues[i] if i < len(row.eigenvalues) else math.nan
            record.update(
                count_below_h32=row.count_below_h32,
                residual_max=row.residual_max,
                scheme=row.scheme.value,
                solver=row.solver.value,
                norm=row.norm,
                floor=row.floor,
            )
            records.append(record)
        columns = ["h", "p"] + [f"lambda_{i + 1}" for i in range(k)]
        columns += ["count_below_h32", "residual_max", "scheme", "solver", "norm", "floor"]
        return self._write(pd.DataFrame.from_records(records, columns=columns), SWEEP_FILE.format(degree=degree))

    def read_sweep(self, degree: int) -> List[SweepRow]:
        frame = self.read(SWEEP_FILE.format(degree=degree))
        lambda_columns = [c for c in frame.columns if c.startswith("lambda_")]
        rows = []
        for record in frame.to_dict("records"):
            values = tuple(float(record[c]) for c in lambda_columns if not pd.isna(record[c]))
            rows.append(
                SweepRow(
                    h=float(record["h"]),
                    degree=int(record["p"]),
                    eigenvalues=values,
                    count_below_h32=int(record["count_below_h32"]),
                    residual_max=float(record["residual_max"]),
                    scheme=Scheme(record["scheme"]),
                    solver=SolverKind(record["solver"]),
                    norm=float(record["norm"]),
                    floor=float(record["floor"]),
                )
            )
        return rows

    def sweep_degrees(self) -> List[int]:
        return sorted(int(p.stem.split("_p")[-1]) for p in self.root.glob("sweep_p*.csv"))

    # Classification

    def write_classification(self, bc: BarannikovComplex) -> Path:
        records = []
        for pt in sorted(bc.points, key=lambda pt: pt.value):
            gap = abs(pt.value - bc.point(pt.partner).value) if pt.partner is not None else None
            records.append(
                {
                    "id": pt.id,
                    "index": pt.morse_index,
                    "value": pt.value,
                    "class": pt.point_class.value if pt.point_class else "",
                    "partner": pt.partner,
                    "gap": gap,
                    "position": " ".join(format_float(x) for x in pt.position) if pt.position is not None else "",
                    "hessian_eigs": " ".join(format_float(e) for e in pt.hessian_eigs) if pt.has_hessian else "",
                }
            )
        frame = pd.DataFrame.from_records(records)
        frame["partner"] = frame["partner"].astype("Int64")
        return self._write(frame, CLASSIFICATION_FILE)

    def write_predictions(self, predictions: PredictionSet) -> Path:
        h_min, h_max = predictions.h_validity
        records = [
            {
                "point_id": pred.point_id,
                "degree": pred.degree,
                "kind": pred.kind.value,
                "coefficient": pred.coefficient,
                "activation": pred.activation,
                "kappa": pred.kappa,
                "partner_id": pred.partner_id,
                "h_min": h_min,
                "h_max": h_max,
            }
            for pred in predictions.all()
        ]
        frame = pd.DataFrame.from_records(
            records,
            columns=["point_id", "degree", "kind", "coefficient", "activation", "kappa", "partner_id", "h_min", "h_max"],
        )
        frame["partner_id"] = frame["partner_id"].astype("Int64")
        return self._write(frame, PREDICTIONS_FILE)

    def write_pairing(self, pairing: PersistencePairing) -> Path:
        records = [
            {
                "kind": "pair",
                "degree": pair.degree,
                "birth": pair.birth,
                "death": pair.death,
                "birth_value": pair.birth_value,
                "death_value": pair.death_value,
                "persistence": pair.persistence,
            }
            for pair in pairing.pairs
        ]
        records += [
            {
                "kind": "essential",
                "degree": ess.degree,
                "birth": ess.cell,
                "death": None,
                "birth_value": ess.value,
                "death_value": math.inf,
                "persistence": math.inf,
            }
            for ess in pairing.essentials
        ]
        frame = pd.DataFrame.from_records(
            records, columns=["kind", "degree", "birth", "death", "birth_value", "death_value", "persistence"]
        )
        frame["death"] = frame["death"].astype("Int64")
        return self._write(frame, PAIRING_FILE)

    def write_relative_basis(self, basis: RelativeBasis) -> Path:
        frame = pd.DataFrame.from_records(
            [{"point_id": g.point_id, "degree": g.degree, "reason": g.reason.value} for g in basis.generators],
            columns=["point_id", "degree", "reason"],
        )
        return self._write(frame, RELATIVE_BASIS_FILE)

    # Verdict tables

    def write_models(self, items: Iterable[Any], name: str) -> Path:
        """Flatten a list of pydantic records into one table."""
        records = [item.model_dump(mode="json") for item in items]
        frame = pd.json_normalize(records) if records else pd.DataFrame()
        for column in frame.columns:
            if frame[column].map(lambda v: isinstance(v, (list, tuple))).any():
                frame[column] = frame[column].map(lambda v: " ".join(str(x) for x in v) if isinstance(v, (list, tuple)) else v)
        return self._write(frame, name)

    def write_report(self, report: Report) -> Path:
        ensure_dir(self.root)
        self.write_models(report.counts, COUNTS_FILE)
        self.write_models(report.comparisons, COMPARISONS_FILE)
        self.write_models(report.fits, FITS_FILE)
        target = self.path(REPORT_FILE)
        target.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        self.logger.info("report_written", passed=report.passed)
        return target

    def read_report(self) -> Report:
        source = self.path(REPORT_FILE)
        if not source.is_file():
            raise ConfigurationError(f"report not found: {source}", config_key="report")
        return Report.model_validate_json(source.read_text(encoding="utf-8"))

    def write_text(self, text: str, name: str = SUMMARY_FILE) -> Path:
        ensure_dir(self.root)
        target = self.path(name)
        target.write_text(text, encoding="utf-8")
        return target

    def dump_operator(self, op: WittenOperator, name: Optional[str] = None) -> Path:
        """Coordinate text format: one ``row col value`` line per stored entry."""
        ensure_dir(self.root)
        name = name or f"operator_p{op.degree}_h{format_float(op.h, '%.6g')}.txt"
        coo = op.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        fmt = self.settings.float_format
        target = self.path(name)
        with target.open("w", encoding="utf-8") as handle:
            handle.write(f"# {op.size} {op.size} {coo.nnz} p={op.degree} h={format_float(op.h, fmt)} scheme={op.scheme.value}\n")
            for i in order:
                handle.write(f"{coo.row[i]} {coo.col[i]} {format_float(coo.data[i], fmt)}\n")
        self.logger.debug("operator_dumped", file=name, nnz=int(coo.nnz))
        return target
