"""Flat run records and their CSV / JSON encodings.

Floats are written with ``repr`` (shortest round-trip decimal, '.' separator),
so parsing a record and emitting it again reproduces the same bytes.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields

from .search import GroverResult, SearchReport

COLUMNS = (
    "n", "N", "y", "w", "p_analytic", "p_sim", "overlap_sq", "postsel_prob",
    "end_to_end_prob", "weak_value_re", "weak_value_im", "oracle_queries",
    "grover_iters", "grover_p", "trials", "mc_postsel_successes",
    "mc_target_hits", "seed",
)


@dataclass(frozen=True)
class RunRecord:
    n: int
    N_db: int
    y: int
    w: int
    p_analytic: float
    p_sim: float
    overlap_sq: float
    postsel_prob: float
    end_to_end_prob: float
    weak_value_re: float
    weak_value_im: float
    oracle_queries: int
    grover_iters: int
    grover_p: float
    trials: int
    mc_postsel_successes: int
    mc_target_hits: int
    seed: int

    @classmethod
    def from_results(cls, report: SearchReport, grover: GroverResult) -> "RunRecord":
        cfg = report.config
        return cls(
            n=cfg.n,
            N_db=cfg.N_db,
            y=cfg.y,
            w=cfg.w,
            p_analytic=report.p_analytic,
            p_sim=report.p_sim,
            overlap_sq=report.overlap_sq,
            postsel_prob=report.postsel_prob,
            end_to_end_prob=report.end_to_end_prob,
            weak_value_re=float(report.weak_value.real),
            weak_value_im=float(report.weak_value.imag),
            oracle_queries=report.oracle_queries,
            grover_iters=grover.iterations,
            grover_p=grover.success_probability,
            trials=cfg.trials,
            mc_postsel_successes=report.mc_postsel_successes,
            mc_target_hits=report.mc_target_hits,
            seed=cfg.seed,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["N"] = d.pop("N_db")
        return {key: d[key] for key in COLUMNS}

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        kwargs = {}
        for f in fields(cls):
            raw = d["N" if f.name == "N_db" else f.name]
            kwargs[f.name] = float(raw) if f.type == "float" else int(raw)
        return cls(**kwargs)


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(int(value))


def to_csv(records: list[RunRecord]) -> str:
    lines = [",".join(COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(v) for v in rec.to_dict().values()))
    return "\n".join(lines) + "\n"


def from_csv(text: str) -> list[RunRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
    return [RunRecord.from_dict(row) for row in reader]


def to_json(records: RunRecord | list[RunRecord]) -> str:
    if isinstance(records, RunRecord):
        return json.dumps(records.to_dict()) + "\n"
    return json.dumps([r.to_dict() for r in records]) + "\n"


def from_json(text: str) -> RunRecord | list[RunRecord]:
    data = json.loads(text)
    if isinstance(data, list):
        return [RunRecord.from_dict(d) for d in data]
    return RunRecord.from_dict(data)
