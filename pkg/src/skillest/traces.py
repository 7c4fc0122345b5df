"""Per-observation estimator trace rows and their CSV schema.

Both estimators emit the same schema so traces are directly comparable:

    obs_index, est_sigma_x, est_sigma_y, est_rho, est_lambda,
    neff, resampled_flag, jd_if_truth_known

Floats are written with repr (shortest round-trip form), which keeps
repeated runs byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

TRACE_COLUMNS = (
    "obs_index",
    "est_sigma_x",
    "est_sigma_y",
    "est_rho",
    "est_lambda",
    "neff",
    "resampled_flag",
    "jd_if_truth_known",
)


@dataclass(frozen=True)
class TraceRow:
    obs_index: int
    est_sigma_x: float
    est_sigma_y: float
    est_rho: float
    est_lambda: float
    neff: float
    resampled: bool
    jd: float | None = None


def write_trace_csv(path: str | Path, rows: list[TraceRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.obs_index,
                    repr(r.est_sigma_x),
                    repr(r.est_sigma_y),
                    repr(r.est_rho),
                    repr(r.est_lambda),
                    repr(r.neff),
                    int(r.resampled),
                    "" if r.jd is None else repr(r.jd),
                ]
            )


def read_trace_csv(path: str | Path) -> list[TraceRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                TraceRow(
                    obs_index=int(rec["obs_index"]),
                    est_sigma_x=float(rec["est_sigma_x"]),
                    est_sigma_y=float(rec["est_sigma_y"]),
                    est_rho=float(rec["est_rho"]),
                    est_lambda=float(rec["est_lambda"]),
                    neff=float(rec["neff"]),
                    resampled=bool(int(rec["resampled_flag"])),
                    jd=float(rec["jd_if_truth_known"]) if rec["jd_if_truth_known"] else None,
                )
            )
    return rows
