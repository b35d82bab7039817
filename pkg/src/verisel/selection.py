"""Answer-selection rules over a pool of scored candidates.

Five rules share one result shape:

* SC   picks the most frequent answer (plurality over clusters).
* BoN  picks the answer of the single highest-scoring candidate.
* WSC  picks the answer with the largest summed verifier score.
* PV   penalizes small clusters: argmax of mean(a) - alpha * ln(N)/(n_a+1).
* GPV  is PV over multi-pass generative scores, with the per-candidate mean
       r~_i over M passes and penalty ln(N*M)/(n_a*M+1).

All rules are pure functions. Ties break by the deterministic cluster order
(support descending, key ascending; lowest candidate_id for BoN) unless a
seeded generator is passed, in which case a tied winner is drawn uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import (
    NO_ANSWER_KEY,
    AnswerCluster,
    Candidate,
    EmptyPoolError,
    Problem,
    cluster_by_answer,
)

DEFAULT_PV_ALPHA = 0.5
DEFAULT_GPV_ALPHA = 0.1

METHODS = ("sc", "bon", "wsc", "pv", "gpv")


def sigmoid(x: float) -> float:
    """Numerically stable logistic transform."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


SCORE_TRANSFORMS = {
    "sigmoid": sigmoid,
    "raw": lambda x: x,
}


def candidate_scores(
    candidates: Sequence[Candidate], transform: str = "sigmoid"
) -> dict[str, float]:
    """Map candidate_id to transformed disc_score; error if any is missing."""
    fn = _transform_fn(transform)
    out = {}
    for c in candidates:
        if c.disc_score is None:
            raise ValueError("scores required")
        out[c.candidate_id] = fn(c.disc_score)
    return out


def candidate_gen_scores(
    candidates: Sequence[Candidate],
    transform: str = "sigmoid",
) -> dict[str, tuple[float, ...]]:
    """Map candidate_id to transformed gen_scores; error if any is missing."""
    fn = _transform_fn(transform)
    out = {}
    for c in candidates:
        if c.gen_scores is None:
            raise ValueError("scores required")
        out[c.candidate_id] = tuple(fn(s) for s in c.gen_scores)
    return out


def _transform_fn(transform: str):
    try:
        return SCORE_TRANSFORMS[transform]
    except KeyError:
        raise ValueError(f"unknown score transform: {transform!r}") from None


@dataclass(frozen=True)
class ClusterDiagnostic:
    """Per-cluster view of one selection run.

    penalty is the alpha-free term psi_a; objective is the value the rule
    maximized. Both are None for the unselectable no-answer cluster and for
    rules that have no such term.
    """

    answer_key: str
    n_a: int
    sum_score: Optional[float] = None
    mean_score: Optional[float] = None
    penalty: Optional[float] = None
    objective: Optional[float] = None


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one selection rule on one pool."""

    method: str
    chosen_answer: str
    chosen_candidate: Optional[str] = None
    cluster_diagnostics: tuple[ClusterDiagnostic, ...] = ()
    alpha: Optional[float] = None
    m: Optional[int] = None


def _pick(
    diagnostics: Sequence[ClusterDiagnostic],
    rng: Optional[np.random.Generator],
) -> ClusterDiagnostic:
    """Argmax of objective over selectable clusters, with tie handling."""
    best: list[ClusterDiagnostic] = []
    for diag in diagnostics:
        if diag.objective is None:
            continue
        if not best or diag.objective > best[0].objective:
            best = [diag]
        elif diag.objective == best[0].objective:
            best.append(diag)
    if not best:
        raise EmptyPoolError("no selectable answers in pool")
    if rng is None or len(best) == 1:
        return best[0]
    return best[int(rng.integers(len(best)))]


def _cluster_sums(
    clusters: Sequence[AnswerCluster],
    scores: Optional[Mapping[str, float]],
) -> list[tuple[AnswerCluster, float, float]]:
    """Resolve (cluster, sum, mean) from a score map or stored aggregates."""
    out = []
    for cl in clusters:
        if scores is not None:
            try:
                total = sum(scores[cid] for cid in cl.member_ids)
            except KeyError as exc:
                raise ValueError("scores required") from exc
        elif cl.sum_score is not None:
            total = cl.sum_score
        else:
            raise ValueError("scores required")
        out.append((cl, total, total / cl.n_a))
    return out


def _require_clusters(clusters: Sequence[AnswerCluster]) -> None:
    if not clusters:
        raise EmptyPoolError("empty pool")


def select_sc(
    clusters: Sequence[AnswerCluster],
    rng: Optional[np.random.Generator] = None,
) -> SelectionResult:
    """Self-consistency: plurality vote over answer clusters."""
    _require_clusters(clusters)
    diagnostics = tuple(
        ClusterDiagnostic(
            answer_key=cl.answer_key,
            n_a=cl.n_a,
            sum_score=cl.sum_score,
            mean_score=cl.mean_score,
            objective=float(cl.n_a) if cl.selectable else None,
        )
        for cl in clusters
    )
    winner = _pick(diagnostics, rng)
    return SelectionResult(
        method="sc", chosen_answer=winner.answer_key,
        cluster_diagnostics=diagnostics,
    )


def select_bon(
    candidates: Sequence[Candidate],
    scores: Optional[Mapping[str, float]] = None,
    rng: Optional[np.random.Generator] = None,
) -> SelectionResult:
    """Best-of-N: the answer of the highest-scoring candidate.

    Candidates without an extracted answer never win; ties go to the lowest
    candidate_id (or a seeded draw when rng is given).
    """
    if not candidates:
        raise EmptyPoolError("empty pool")
    if scores is None:
        scores = candidate_scores(candidates, transform="raw")
    else:
        missing = [c.candidate_id for c in candidates if c.candidate_id not in scores]
        if missing:
            raise ValueError("scores required")

    ranked = sorted(
        (c for c in candidates if c.cluster_key != NO_ANSWER_KEY),
        key=lambda c: (-scores[c.candidate_id], c.candidate_id),
    )
    if not ranked:
        raise EmptyPoolError("no selectable answers in pool")
    top_score = scores[ranked[0].candidate_id]
    tied = [c for c in ranked if scores[c.candidate_id] == top_score]
    winner = tied[0] if rng is None else tied[int(rng.integers(len(tied)))]

    clusters = cluster_by_answer(Problem(problem_id="", candidates=tuple(candidates)))
    diagnostics = []
    for cl in clusters:
        member_best = max(scores[cid] for cid in cl.member_ids)
        diagnostics.append(
            ClusterDiagnostic(
                answer_key=cl.answer_key,
                n_a=cl.n_a,
                sum_score=sum(scores[cid] for cid in cl.member_ids),
                mean_score=sum(scores[cid] for cid in cl.member_ids) / cl.n_a,
                objective=member_best if cl.selectable else None,
            )
        )
    return SelectionResult(
        method="bon",
        chosen_answer=winner.cluster_key,
        chosen_candidate=winner.candidate_id,
        cluster_diagnostics=tuple(diagnostics),
    )


def select_wsc(
    clusters: Sequence[AnswerCluster],
    scores: Optional[Mapping[str, float]] = None,
    rng: Optional[np.random.Generator] = None,
) -> SelectionResult:
    """Weighted self-consistency: argmax of summed cluster score."""
    _require_clusters(clusters)
    diagnostics = tuple(
        ClusterDiagnostic(
            answer_key=cl.answer_key,
            n_a=cl.n_a,
            sum_score=total,
            mean_score=mean,
            objective=total if cl.selectable else None,
        )
        for cl, total, mean in _cluster_sums(clusters, scores)
    )
    winner = _pick(diagnostics, rng)
    return SelectionResult(
        method="wsc", chosen_answer=winner.answer_key,
        cluster_diagnostics=diagnostics,
    )


def select_pv(
    clusters: Sequence[AnswerCluster],
    scores: Optional[Mapping[str, float]] = None,
    alpha: float = DEFAULT_PV_ALPHA,
    n_total: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> SelectionResult:
    """Pessimistic verification: mean cluster score minus a support penalty.

    Objective: mean_score(a) - alpha * ln(N) / (n_a + 1), N = pool size.
    """
    _require_clusters(clusters)
    if alpha < 0:
        raise ValueError("invalid alpha")
    if n_total is None:
        n_total = sum(cl.n_a for cl in clusters)
    if n_total < 1:
        raise ValueError(f"invalid pool size: {n_total}")
    log_n = math.log(n_total)

    diagnostics = []
    for cl, total, mean in _cluster_sums(clusters, scores):
        penalty = log_n / (cl.n_a + 1)
        diagnostics.append(
            ClusterDiagnostic(
                answer_key=cl.answer_key,
                n_a=cl.n_a,
                sum_score=total,
                mean_score=mean,
                penalty=penalty if cl.selectable else None,
                objective=mean - alpha * penalty if cl.selectable else None,
            )
        )
    winner = _pick(diagnostics, rng)
    return SelectionResult(
        method="pv", chosen_answer=winner.answer_key,
        cluster_diagnostics=tuple(diagnostics), alpha=alpha,
    )


def select_gpv(
    clusters: Sequence[AnswerCluster],
    gen_scores: Mapping[str, Sequence[float]],
    alpha: float = DEFAULT_GPV_ALPHA,
    n_total: Optional[int] = None,
    m_verifications: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> SelectionResult:
    """PV over M generative-verifier passes per candidate.

    Each candidate is scored by the mean of its M pass scores; the penalty
    sharpens to ln(N*M) / (n_a*M + 1). When candidates carry more than
    m_verifications scores only the first m_verifications are used, so one
    dataset can serve a sweep over M.
    """
    _require_clusters(clusters)
    if alpha < 0:
        raise ValueError("invalid alpha")
    lengths = {len(v) for v in gen_scores.values()}
    if m_verifications is None:
        if len(lengths) != 1:
            raise ValueError("inconsistent M")
        m_verifications = lengths.pop()
    if m_verifications < 1 or any(n < m_verifications for n in lengths):
        raise ValueError("inconsistent M")
    if n_total is None:
        n_total = sum(cl.n_a for cl in clusters)
    if n_total < 1:
        raise ValueError(f"invalid pool size: {n_total}")
    log_nm = math.log(n_total * m_verifications)

    diagnostics = []
    for cl in clusters:
        try:
            means = [
                sum(gen_scores[cid][:m_verifications]) / m_verifications
                for cid in cl.member_ids
            ]
        except KeyError as exc:
            raise ValueError("scores required") from exc
        total = sum(means)
        mean = total / cl.n_a
        penalty = log_nm / (cl.n_a * m_verifications + 1)
        diagnostics.append(
            ClusterDiagnostic(
                answer_key=cl.answer_key,
                n_a=cl.n_a,
                sum_score=total,
                mean_score=mean,
                penalty=penalty if cl.selectable else None,
                objective=mean - alpha * penalty if cl.selectable else None,
            )
        )
    winner = _pick(diagnostics, rng)
    return SelectionResult(
        method="gpv", chosen_answer=winner.answer_key,
        cluster_diagnostics=tuple(diagnostics),
        alpha=alpha, m=m_verifications,
    )


def select_answer(
    problem: Problem,
    method: str,
    alpha: Optional[float] = None,
    m_verifications: Optional[int] = None,
    transform: str = "sigmoid",
    rng: Optional[np.random.Generator] = None,
) -> SelectionResult:
    """Run one named rule on a problem, applying the score transform.

    BoN ranks raw scores directly: its argmax is invariant under any
    monotone transform, so there is nothing to configure.
    """
    if method not in METHODS:
        raise ValueError(f"unknown selection method: {method!r}")
    if method == "sc":
        return select_sc(cluster_by_answer(problem), rng=rng)
    if method == "bon":
        return select_bon(problem.candidates, rng=rng)

    clusters = cluster_by_answer(problem)
    if method == "wsc":
        scores = candidate_scores(problem.candidates, transform)
        return select_wsc(clusters, scores, rng=rng)
    if method == "pv":
        scores = candidate_scores(problem.candidates, transform)
        return select_pv(
            clusters, scores,
            alpha=DEFAULT_PV_ALPHA if alpha is None else alpha, rng=rng,
        )
    gen = candidate_gen_scores(problem.candidates, transform)
    return select_gpv(
        clusters, gen,
        alpha=DEFAULT_GPV_ALPHA if alpha is None else alpha,
        m_verifications=m_verifications, rng=rng,
    )
