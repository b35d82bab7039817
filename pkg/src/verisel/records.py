"""The record format and report emission.

One flat line-delimited format serves real data, synthetic data, and test
fixtures: one JSON object per candidate, grouped by problem_id (contiguous
or not). Ingestion canonicalizes answers, validates per-problem invariants,
and fails loudly with line numbers or problem ids; emission is byte-stable
so identical inputs produce identical files.
"""

from __future__ import annotations

import io
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

from .core import Candidate, IngestError, Problem, TokenStats, canonicalize_answer
from .costs import FlopsBreakdown
from .evaluate import BootstrapReport, BudgetPoint

log = logging.getLogger("verisel")

RECORD_FIELDS = (
    "problem_id",
    "candidate_id",
    "answer",
    "correct",
    "disc_score",
    "gen_scores",
    "prompt_tokens",
    "output_tokens",
    "solution_tokens",
    "reasoning_budget",
    "verification_out_tokens",
)

Source = Union[str, Path, IO[str]]


@dataclass(frozen=True)
class IngestStats:
    """What came in: sizes and how much of it is labeled."""

    problems: int
    candidates: int
    labeled_fraction: float

    def describe(self) -> str:
        return (
            f"ingested {self.problems} problems, {self.candidates} candidates, "
            f"{self.labeled_fraction:.1%} labeled"
        )


def _open_source(source: Source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        if str(source) == "-":
            return sys.stdin, False
        return open(source, "r", encoding="utf-8"), True
    return source, False


def _parse_line(lineno: int, line: str) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise IngestError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(record, dict):
        raise IngestError(f"line {lineno}: expected an object")
    for key in ("problem_id", "candidate_id"):
        if not isinstance(record.get(key), str) or not record[key]:
            raise IngestError(f"line {lineno}: missing field {key!r}")
    return record


def _candidate_of(lineno: int, record: dict, canon: str) -> Candidate:
    raw = record.get("answer", "") or ""
    gen = record.get("gen_scores")
    try:
        stats = TokenStats(
            prompt_tokens=record.get("prompt_tokens", 0),
            output_tokens=record.get("output_tokens", 0),
            solution_tokens=record.get("solution_tokens", 0),
            reasoning_budget=record.get("reasoning_budget"),
            verification_out_tokens=record.get("verification_out_tokens"),
        )
        return Candidate(
            candidate_id=record["candidate_id"],
            answer_raw=raw,
            answer_key=canonicalize_answer(raw, canon),
            correct=None if record.get("correct") is None
            else bool(record["correct"]),
            disc_score=None if record.get("disc_score") is None
            else float(record["disc_score"]),
            gen_scores=None if gen is None else tuple(float(g) for g in gen),
            token_stats=stats,
        )
    except (TypeError, ValueError) as exc:
        raise IngestError(f"line {lineno}: {exc}") from None


def _check_uniform(problem_id: str, candidates: Sequence[Candidate]) -> None:
    with_disc = sum(c.disc_score is not None for c in candidates)
    if 0 < with_disc < len(candidates):
        raise IngestError(
            f"problem {problem_id!r}: disc_score present on {with_disc} of "
            f"{len(candidates)} candidates (must be all or none)"
        )
    with_gen = sum(c.gen_scores is not None for c in candidates)
    if 0 < with_gen < len(candidates):
        raise IngestError(
            f"problem {problem_id!r}: gen_scores present on {with_gen} of "
            f"{len(candidates)} candidates (must be all or none)"
        )
    labels: dict[str, bool] = {}
    for c in candidates:
        if c.correct is None:
            continue
        if labels.setdefault(c.cluster_key, c.correct) != c.correct:
            raise IngestError(
                f"problem {problem_id!r}: answer {c.cluster_key!r} graded "
                "both correct and incorrect"
            )


def ingest(source: Source, canon: str = "exact") -> list[Problem]:
    """Read candidate records into validated Problems.

    Candidates sharing a problem_id are pooled whether or not their lines
    are contiguous; first-seen order of problems and candidates is kept.
    Unknown fields are ignored with one warning per field name.
    """
    stream, owned = _open_source(source)
    pools: dict[str, list[Candidate]] = {}
    warned: set[str] = set()
    try:
        for lineno, line in enumerate(stream, 1):
            if not line.strip():
                continue
            record = _parse_line(lineno, line)
            for key in record.keys() - set(RECORD_FIELDS):
                if key not in warned:
                    warned.add(key)
                    log.warning("ignoring unknown record field %r", key)
            pools.setdefault(record["problem_id"], []).append(
                _candidate_of(lineno, record, canon)
            )
    finally:
        if owned:
            stream.close()

    if not pools:
        raise IngestError("no problems")
    problems = []
    for problem_id, candidates in pools.items():
        _check_uniform(problem_id, candidates)
        problems.append(
            Problem(problem_id=problem_id, candidates=tuple(candidates))
        )
    return problems


def ingest_stats(problems: Sequence[Problem]) -> IngestStats:
    total = sum(len(p.candidates) for p in problems)
    labeled = sum(len(p.candidates) for p in problems if p.labeled)
    return IngestStats(
        problems=len(problems),
        candidates=total,
        labeled_fraction=labeled / total if total else 0.0,
    )


def record_of(problem_id: str, candidate: Candidate) -> dict:
    """One emission-ready record; defaults and absent fields are omitted."""
    st = candidate.token_stats
    record: dict = {
        "problem_id": problem_id,
        "candidate_id": candidate.candidate_id,
    }
    if candidate.answer_raw:
        record["answer"] = candidate.answer_raw
    if candidate.correct is not None:
        record["correct"] = candidate.correct
    if candidate.disc_score is not None:
        record["disc_score"] = candidate.disc_score
    if candidate.gen_scores is not None:
        record["gen_scores"] = list(candidate.gen_scores)
    for name in ("prompt_tokens", "output_tokens", "solution_tokens"):
        if getattr(st, name):
            record[name] = getattr(st, name)
    for name in ("reasoning_budget", "verification_out_tokens"):
        if getattr(st, name) is not None:
            record[name] = getattr(st, name)
    return record


def write_records(problems: Iterable[Problem], stream: IO[str]) -> None:
    """Emit problems in the ingestible line format, full float precision."""
    for problem in problems:
        for candidate in problem.candidates:
            json.dump(record_of(problem.problem_id, candidate), stream)
            stream.write("\n")


def records_text(problems: Iterable[Problem]) -> str:
    buf = io.StringIO()
    write_records(problems, buf)
    return buf.getvalue()


def _sig6(value: float) -> float:
    """Reports print floats at 6 significant digits."""
    return float(f"{value:.6g}")


def _bootstrap_dict(report: BootstrapReport) -> dict:
    doc = {
        "method": report.method,
        "n": report.n,
        "mean": _sig6(report.mean),
        "ci_low": _sig6(report.ci_low),
        "ci_high": _sig6(report.ci_high),
        "draws": report.draws,
        "seed": report.seed,
        "ci_level": _sig6(report.ci_level),
        "replacement": report.replacement,
        "transform": report.transform,
    }
    if report.alpha is not None:
        doc["alpha"] = _sig6(report.alpha)
    if report.m is not None:
        doc["m"] = report.m
    doc["per_problem"] = {pid: _sig6(acc) for pid, acc in report.per_problem}
    return doc


CURVE_HEADER = "method,N,M,budget,accuracy,ci_low,ci_high"


def _curve_rows(points: Sequence[BudgetPoint]) -> list[str]:
    return [
        f"{p.method},{p.n},{p.m},{p.budget:.6g},{p.accuracy:.6g},"
        f"{p.ci_low:.6g},{p.ci_high:.6g}"
        for p in points
    ]


def emit_report(
    report: Union[BootstrapReport, Sequence[BudgetPoint], FlopsBreakdown, dict],
    fmt: str = "json",
) -> str:
    """Render a report deterministically; floats at 6 significant digits.

    BootstrapReports render as a JSON object or a one-row CSV; curves as a
    JSON array or CSV with the documented header; breakdowns and plain
    dicts as JSON.
    """
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown report format: {fmt!r}")

    if isinstance(report, BootstrapReport):
        if fmt == "csv":
            return (
                "method,n,mean,ci_low,ci_high,draws,seed\n"
                f"{report.method},{report.n},{report.mean:.6g},"
                f"{report.ci_low:.6g},{report.ci_high:.6g},"
                f"{report.draws},{report.seed}\n"
            )
        return json.dumps(_bootstrap_dict(report), indent=2) + "\n"

    if isinstance(report, FlopsBreakdown):
        report = {k: float(v) for k, v in report.as_dict().items()}

    if isinstance(report, dict):
        if fmt == "csv":
            raise ValueError("csv format applies to curves and reports only")

        def clean(value):
            if isinstance(value, dict):
                return {k: clean(v) for k, v in value.items()}
            if isinstance(value, list):
                return [clean(v) for v in value]
            if isinstance(value, float):
                return _sig6(value)
            return value

        return json.dumps(clean(report), indent=2) + "\n"

    points = list(report)
    if fmt == "csv":
        return "\n".join([CURVE_HEADER, *_curve_rows(points)]) + "\n"
    return json.dumps(
        [
            {
                "method": p.method,
                "n": p.n,
                "m": p.m,
                "budget": _sig6(p.budget),
                "accuracy": _sig6(p.accuracy),
                "ci_low": _sig6(p.ci_low),
                "ci_high": _sig6(p.ci_high),
            }
            for p in points
        ],
        indent=2,
    ) + "\n"
