"""Domain types, canonicalization, and clustering."""

import numpy as np
import pytest

from verisel import (
    Candidate,
    EmptyPoolError,
    IngestError,
    Problem,
    TokenStats,
    canonicalize_answer,
    cluster_by_answer,
)
from pools import random_problem


def make_problem(answers, scores=None, pid="q"):
    scores = scores or [None] * len(answers)
    return Problem(
        problem_id=pid,
        candidates=tuple(
            Candidate(
                candidate_id=f"c{i}",
                answer_raw=a,
                answer_key=a,
                disc_score=s,
            )
            for i, (a, s) in enumerate(zip(answers, scores))
        ),
    )


class TestCanonicalize:
    def test_exact_trims_and_collapses(self):
        assert canonicalize_answer("  x  +\t1 ") == "x + 1"
        assert canonicalize_answer("42") == "42"
        assert canonicalize_answer("") == ""

    def test_numeric_integer(self):
        assert canonicalize_answer(" 42 ", "numeric") == "42"
        assert canonicalize_answer("42.0", "numeric") == "42"
        assert canonicalize_answer("-7", "numeric") == "-7"

    def test_numeric_reduces_fractions(self):
        assert canonicalize_answer("3/6", "numeric") == "1/2"
        assert canonicalize_answer("0.5", "numeric") == "1/2"
        assert canonicalize_answer("-10/4", "numeric") == "-5/2"

    def test_numeric_falls_back_on_symbolic(self):
        assert canonicalize_answer("x+1", "numeric") == "x+1"
        assert canonicalize_answer("1/0", "numeric") == "1/0"

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            canonicalize_answer("1", "latex")

    def test_idempotent(self):
        """canonicalize(canonicalize(x)) = canonicalize(x), both modes."""
        rng = np.random.default_rng(11)
        pieces = ["42", "3/6", " x ", "0.50", "a  b", "-2/8", "1e3", "?!"]
        for _ in range(300):
            raw = " ".join(
                pieces[int(i)] for i in rng.integers(len(pieces), size=3)
            )
            for mode in ("exact", "numeric"):
                once = canonicalize_answer(raw, mode)
                assert canonicalize_answer(once, mode) == once


class TestTokenStats:
    def test_rejects_negative_counts(self):
        with pytest.raises(ValueError, match="invalid token count"):
            TokenStats(prompt_tokens=-1)

    def test_solution_cannot_exceed_output(self):
        with pytest.raises(ValueError, match="solution_tokens"):
            TokenStats(output_tokens=10, solution_tokens=11)
        TokenStats(output_tokens=10, solution_tokens=10)

    def test_optional_fields(self):
        st = TokenStats(reasoning_budget=100, verification_out_tokens=0)
        assert st.reasoning_budget == 100
        with pytest.raises(ValueError):
            TokenStats(reasoning_budget=-5)


class TestCandidate:
    def test_answer_key_required_with_raw(self):
        with pytest.raises(ValueError, match="answer_key"):
            Candidate(candidate_id="c", answer_raw="42", answer_key="")

    def test_unanswered_falls_into_sentinel_cluster(self):
        c = Candidate(candidate_id="c")
        assert c.cluster_key == "<none>"

    def test_gen_scores_must_be_nonempty(self):
        with pytest.raises(ValueError, match="non-empty"):
            Candidate(candidate_id="c", gen_scores=())
        c = Candidate(candidate_id="c", gen_scores=[0.1, 0.2])
        assert c.gen_scores == (0.1, 0.2)


class TestProblem:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(IngestError, match="duplicate"):
            Problem(
                problem_id="q",
                candidates=(
                    Candidate(candidate_id="c0", answer_raw="a", answer_key="a"),
                    Candidate(candidate_id="c0", answer_raw="b", answer_key="b"),
                ),
            )

    def test_mixed_labeling_rejected(self):
        with pytest.raises(IngestError, match="mixed labeling"):
            Problem(
                problem_id="q",
                candidates=(
                    Candidate(
                        candidate_id="c0", answer_raw="a", answer_key="a",
                        correct=True,
                    ),
                    Candidate(candidate_id="c1", answer_raw="a", answer_key="a"),
                ),
            )

    def test_ragged_gen_scores_rejected(self):
        with pytest.raises(IngestError, match="inconsistent M"):
            Problem(
                problem_id="q",
                candidates=(
                    Candidate(
                        candidate_id="c0", answer_raw="a", answer_key="a",
                        gen_scores=(0.1,),
                    ),
                    Candidate(
                        candidate_id="c1", answer_raw="a", answer_key="a",
                        gen_scores=(0.1, 0.2),
                    ),
                ),
            )

    def test_len_and_labeled(self):
        p = make_problem(["a", "b"])
        assert len(p) == 2 and not p.labeled


class TestClusterByAnswer:
    def test_counts(self):
        clusters = cluster_by_answer(make_problem(["A", "A", "B"]))
        assert [(c.answer_key, c.n_a) for c in clusters] == [("A", 2), ("B", 1)]

    def test_key_breaks_support_ties(self):
        clusters = cluster_by_answer(make_problem(["B", "A", "B", "A"]))
        assert [(c.answer_key, c.n_a) for c in clusters] == [("A", 2), ("B", 2)]

    def test_singleton_aggregates(self):
        (cluster,) = cluster_by_answer(make_problem(["A"], [0.7]))
        assert cluster.sum_score == cluster.mean_score == 0.7
        assert cluster.member_ids == ("c0",)

    def test_empty_pool(self):
        with pytest.raises(EmptyPoolError, match="empty pool"):
            cluster_by_answer(Problem(problem_id="q", candidates=()))

    def test_aggregates_none_without_full_scores(self):
        clusters = cluster_by_answer(make_problem(["A", "A"], [0.5, None]))
        assert clusters[0].sum_score is None and clusters[0].mean_score is None

    def test_partition_property(self):
        """Every candidate lands in exactly one cluster; counts add up."""
        rng = np.random.default_rng(3)
        for _ in range(200):
            problem = random_problem(rng, max_size=32)
            clusters = cluster_by_answer(problem)
            seen = [cid for cl in clusters for cid in cl.member_ids]
            assert sorted(seen) == sorted(
                c.candidate_id for c in problem.candidates
            )
            assert sum(cl.n_a for cl in clusters) == len(problem)
            for cl in clusters:
                assert cl.mean_score == pytest.approx(cl.sum_score / cl.n_a)

    def test_order_is_total_and_input_independent(self):
        """Shuffling candidates never changes the (key, n_a) sequence."""
        rng = np.random.default_rng(4)
        for _ in range(50):
            problem = random_problem(rng, min_size=2, max_size=24)
            base = [
                (c.answer_key, c.n_a) for c in cluster_by_answer(problem)
            ]
            perm = rng.permutation(len(problem))
            shuffled = Problem(
                problem_id=problem.problem_id,
                candidates=tuple(problem.candidates[int(i)] for i in perm),
            )
            assert [
                (c.answer_key, c.n_a) for c in cluster_by_answer(shuffled)
            ] == base
