"""Deterministic synthetic candidate pools for desk-scale evaluation.

Each problem has one correct answer shared by all correct candidates; wrong
candidates scatter over a configurable number of wrong answers. Verifier
scores are Beta-distributed conditioned on the label, so the gap between
the two distributions sets the verifier's quality: Beta(8,2) against
Beta(2,8) is a strong verifier, identical parameters an uninformative one.

Generation is keyed per (seed, problem index), so pools are reproducible
candidate-for-candidate regardless of how many problems are requested or in
what order they are materialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Candidate, Problem, TokenStats


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic dataset."""

    seed: int
    n_problems: int
    pool_size: int
    p_correct: float
    answer_space: int = 1
    correct_dist: tuple[float, float] = (8.0, 2.0)
    incorrect_dist: tuple[float, float] = (2.0, 8.0)
    gen_verifications: int = 0
    prompt_tokens: int = 64
    output_tokens: int = 512
    solution_tokens: int = 128
    verification_out_tokens: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_problems < 1 or self.pool_size < 1 or self.answer_space < 1:
            raise ValueError(
                "n_problems, pool_size, and answer_space must be positive"
            )
        if not 0.0 <= self.p_correct <= 1.0:
            raise ValueError(f"p_correct out of [0,1]: {self.p_correct}")
        for name in ("correct_dist", "incorrect_dist"):
            a, b = getattr(self, name)
            if a <= 0 or b <= 0:
                raise ValueError(f"{name} parameters must be positive: ({a}, {b})")
        if self.gen_verifications < 0:
            raise ValueError(
                f"invalid verification count: {self.gen_verifications}"
            )


def _problem_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def generate_pool(spec: SynthSpec) -> list[Problem]:
    """Materialize the dataset: fully labeled, fully scored problems.

    Per candidate: correct with probability p_correct; correct candidates
    answer "c", wrong ones draw uniformly from "w0".."w{answer_space-1}";
    disc_score and any gen_scores come from the label's Beta distribution.
    Token counts are the SynthSpec constants, identical on every candidate.
    """
    stats = TokenStats(
        prompt_tokens=spec.prompt_tokens,
        output_tokens=spec.output_tokens,
        solution_tokens=spec.solution_tokens,
        verification_out_tokens=spec.verification_out_tokens,
    )
    problems = []
    for p in range(spec.n_problems):
        rng = _problem_rng(spec.seed, p)
        correct = rng.random(spec.pool_size) < spec.p_correct
        wrong_pick = rng.integers(spec.answer_space, size=spec.pool_size)
        ca, cb = spec.correct_dist
        ia, ib = spec.incorrect_dist
        scores = np.where(
            correct,
            rng.beta(ca, cb, size=spec.pool_size),
            rng.beta(ia, ib, size=spec.pool_size),
        )
        gen_scores = None
        if spec.gen_verifications > 0:
            shape = (spec.pool_size, spec.gen_verifications)
            gen_scores = np.where(
                correct[:, None],
                rng.beta(ca, cb, size=shape),
                rng.beta(ia, ib, size=shape),
            )

        candidates = []
        for i in range(spec.pool_size):
            answer = "c" if correct[i] else f"w{wrong_pick[i]}"
            candidates.append(
                Candidate(
                    candidate_id=f"s{i:03d}",
                    answer_raw=answer,
                    answer_key=answer,
                    correct=bool(correct[i]),
                    disc_score=float(scores[i]),
                    gen_scores=None if gen_scores is None
                    else tuple(float(g) for g in gen_scores[i]),
                    token_stats=stats,
                )
            )
        problems.append(
            Problem(problem_id=f"syn-{p:04d}", candidates=tuple(candidates))
        )
    return problems
