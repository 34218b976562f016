"""
Result files: per-trial CSV, summary JSON and whitespace-separated plot data.
"""
import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from app.domain.enums import Method
from app.domain.exceptions import ResultsIOError
from app.domain.models import ExperimentConfig, ExperimentSummary, TrialRecord

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "trial",
    "method",
    "snr_db",
    "t_achieved",
    "rate_bps_hz",
    "wall_time_s",
    "solve_count",
    "t_bound",
    "error",
]

RECORDS_FILE = "records.csv"
SUMMARY_FILE = "summary.json"
CONFIG_FILE = "config.json"
RATE_VS_SNR_FILE = "rate_vs_snr.dat"


def cdf_file_name(snr_db: float) -> str:
    return f"rate_cdf_snr{snr_db:g}dB.dat"


def _optional(value):
    if value is None:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


class ResultsService:
    """Writes and reads experiment results under one output directory"""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)

    def _ensure_dir(self) -> None:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ResultsIOError(path=str(self.out_dir), message=f"Could not create output directory: {e}")

    # ============= Records =============

    def write_records(self, records: Sequence[TrialRecord], path: Optional[Path] = None) -> Path:
        """
        One CSV row per record. An empty record list produces a header-only file.

        Floats are written with full repr precision so the file reads back exactly.
        """
        self._ensure_dir()
        path = Path(path) if path else self.out_dir / RECORDS_FILE
        df = pd.DataFrame([r.model_dump(mode="json") for r in records], columns=CSV_COLUMNS)
        try:
            df.to_csv(path, index=False)
        except OSError as e:
            raise ResultsIOError(path=str(path), message=f"Could not write records: {e}")
        logger.info(f"Wrote {len(records)} records to {path}")
        return path

    @staticmethod
    def read_records(path: Path) -> List[TrialRecord]:
        """Parse a records CSV back into TrialRecords"""
        try:
            df = pd.read_csv(path, float_precision="round_trip", dtype={"method": str, "error": object})
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ResultsIOError(path=str(path), message=f"Could not read records: {e}")

        missing = [c for c in CSV_COLUMNS if c not in df.columns]
        if missing:
            raise ResultsIOError(path=str(path), message=f"Records file is missing columns {missing}")

        records = []
        for row in df.to_dict(orient="records"):
            t_bound = _optional(row["t_bound"])
            records.append(TrialRecord(
                trial=int(row["trial"]),
                method=Method(row["method"]),
                snr_db=float(row["snr_db"]),
                t_achieved=float(row["t_achieved"]),
                rate_bps_hz=float(row["rate_bps_hz"]),
                wall_time_s=float(row["wall_time_s"]),
                solve_count=int(row["solve_count"]),
                t_bound=float(t_bound) if t_bound is not None else None,
                error=_optional(row["error"]),
            ))
        return records

    # ============= Summary =============

    def write_summary(self, summary: ExperimentSummary, path: Optional[Path] = None) -> Path:
        self._ensure_dir()
        path = Path(path) if path else self.out_dir / SUMMARY_FILE
        try:
            path.write_text(summary.model_dump_json(indent=2))
        except OSError as e:
            raise ResultsIOError(path=str(path), message=f"Could not write summary: {e}")
        logger.info(f"Wrote summary ({len(summary.rows)} rows) to {path}")
        return path

    @staticmethod
    def read_summary(path: Path) -> ExperimentSummary:
        try:
            return ExperimentSummary.model_validate_json(Path(path).read_text())
        except OSError as e:
            raise ResultsIOError(path=str(path), message=f"Could not read summary: {e}")

    def write_config(self, config: ExperimentConfig) -> Path:
        """Resolved configuration next to the results, so a run can be repeated"""
        self._ensure_dir()
        path = self.out_dir / CONFIG_FILE
        try:
            path.write_text(json.dumps(config.model_dump(mode="json", by_alias=True), indent=2))
        except OSError as e:
            raise ResultsIOError(path=str(path), message=f"Could not write config: {e}")
        return path

    # ============= Plot data =============

    def write_plot_data(self, summary: ExperimentSummary) -> List[Path]:
        """
        rate_vs_snr.dat: SNR column then one mean-rate column per method.
        rate_cdf_snr<X>dB.dat: rate grid column then one CDF column per method.

        Methods without successful trials at a point are written as nan.
        """
        self._ensure_dir()
        methods = summary.methods
        snrs = summary.snr_points
        header = " ".join(["snr_db"] + [m.value for m in methods])

        table = np.full((len(snrs), len(methods) + 1), np.nan)
        for i, snr in enumerate(snrs):
            table[i, 0] = snr
            for j, method in enumerate(methods):
                row = summary.row(method, snr)
                if row is not None and row.trials > 0:
                    table[i, j + 1] = row.mean_rate

        written = [self._savetxt(self.out_dir / RATE_VS_SNR_FILE, table, header)]

        grid = np.asarray(summary.rate_grid)
        cdf_header = " ".join(["rate_bps_hz"] + [m.value for m in methods])
        for snr in snrs:
            cdf_table = np.full((len(grid), len(methods) + 1), np.nan)
            cdf_table[:, 0] = grid
            for j, method in enumerate(methods):
                row = summary.row(method, snr)
                if row is not None and row.cdf:
                    cdf_table[:, j + 1] = [p.probability for p in row.cdf]
            written.append(self._savetxt(self.out_dir / cdf_file_name(snr), cdf_table, cdf_header))

        logger.info(f"Wrote {len(written)} plot data files to {self.out_dir}")
        return written

    @staticmethod
    def _savetxt(path: Path, table: np.ndarray, header: str) -> Path:
        try:
            np.savetxt(path, table, fmt="%.10g", header=header, comments="# ")
        except OSError as e:
            raise ResultsIOError(path=str(path), message=f"Could not write plot data: {e}")
        return path

    def emit(
        self,
        records: Sequence[TrialRecord],
        summary: ExperimentSummary,
        config: Optional[ExperimentConfig] = None
    ) -> Dict[str, Path]:
        """Write every result file and return their paths by name"""
        paths = {
            "records": self.write_records(records),
            "summary": self.write_summary(summary),
        }
        if config is not None:
            paths["config"] = self.write_config(config)
        for path in self.write_plot_data(summary):
            paths[path.name] = path
        return paths
