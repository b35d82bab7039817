"""Slate-resampling evaluation, pass@N, and budget-equalized curves.

Accuracy of a selection method at slate size N is estimated by drawing many
N-candidate slates per problem, running the method on each slate, and
averaging. Every draw gets its own counter-based RNG stream keyed by
(seed, problem_id, draw index), and reduction order is fixed, so results
are bit-identical at any parallelism level.

The per-draw scoring here is a vectorized re-statement of the rules in
selection.py, arranged so both paths perform the same float operations in
the same order; the test suite holds them to exact agreement.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional, Sequence, Union

import numpy as np

from .core import NO_ANSWER_KEY, EmptyPoolError, IngestError, Problem
from .costs import LatencyTable, ModelConfig, latency_lookup, pipeline_flops
from .selection import DEFAULT_GPV_ALPHA, DEFAULT_PV_ALPHA, METHODS, sigmoid

_PIPELINE_MODE = {"sc": "sc", "bon": "disc", "wsc": "disc", "pv": "disc", "gpv": "gen"}


@dataclass(frozen=True)
class EvalConfig:
    """One evaluation run: slate size, method, draw count, and RNG seed."""

    n: int
    method: str = "sc"
    draws: int = 1000
    seed: int = 0
    ci_level: float = 0.95
    replacement: bool = False
    alpha: Optional[float] = None
    m_verifications: Optional[int] = None
    transform: str = "sigmoid"
    ci_method: str = "normal"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"invalid slate size: {self.n}")
        if self.draws < 1:
            raise ValueError(f"invalid draw count: {self.draws}")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError(f"ci_level out of (0,1): {self.ci_level}")
        if self.method not in METHODS:
            raise ValueError(f"unknown selection method: {self.method!r}")
        if self.ci_method not in ("normal", "percentile"):
            raise ValueError(f"unknown ci method: {self.ci_method!r}")

    @property
    def effective_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return DEFAULT_GPV_ALPHA if self.method == "gpv" else DEFAULT_PV_ALPHA


@dataclass(frozen=True)
class BootstrapReport:
    """Benchmark accuracy with its confidence interval and config echo."""

    method: str
    n: int
    mean: float
    ci_low: float
    ci_high: float
    draws: int
    seed: int
    ci_level: float
    replacement: bool
    transform: str
    alpha: Optional[float]
    m: Optional[int]
    per_problem: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        if not self.ci_low <= self.mean <= self.ci_high:
            raise ValueError(
                f"inconsistent interval: [{self.ci_low}, {self.ci_high}] "
                f"around {self.mean}"
            )


@dataclass(frozen=True)
class BudgetPoint:
    """One point of an accuracy-vs-budget curve."""

    method: str
    n: int
    m: int
    budget: float
    accuracy: float
    ci_low: float
    ci_high: float

    def __post_init__(self) -> None:
        if self.budget <= 0:
            raise ValueError(f"invalid budget: {self.budget}")


def _pid_hash(problem_id: str) -> int:
    digest = hashlib.sha256(problem_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def slate_rng(seed: int, problem_id: str, draw: int) -> np.random.Generator:
    """The draw's private stream; counter-based so construction is cheap."""
    bitgen = np.random.Philox(
        counter=[0, 0, 0, draw], key=[seed, _pid_hash(problem_id)]
    )
    return np.random.Generator(bitgen)


class _PoolArrays:
    """Per-problem candidate data flattened for per-draw scoring.

    Answer codes are assigned in ascending answer_key order, so a plain
    argmax over codes realizes the key-ascending half of the tie-break and
    a lexsort on (code, -count, -objective) realizes all of it.
    """

    def __init__(self, problem: Problem, cfg: EvalConfig):
        cands = problem.candidates
        self.k = len(cands)
        if self.k == 0:
            raise EmptyPoolError(f"problem {problem.problem_id!r}: empty pool")
        self.pid = problem.problem_id

        keys = sorted({c.cluster_key for c in cands})
        code_of = {key: i for i, key in enumerate(keys)}
        self.n_codes = len(keys)
        self.codes = np.array([code_of[c.cluster_key] for c in cands])
        self.none_code = code_of.get(NO_ANSWER_KEY, -1)

        correct = np.zeros(self.n_codes, dtype=bool)
        seen: dict[int, bool] = {}
        for c in cands:
            if c.correct is None:
                raise ValueError("labels required")
            code = code_of[c.cluster_key]
            if seen.setdefault(code, c.correct) != c.correct:
                raise IngestError(
                    f"problem {problem.problem_id!r}: answer "
                    f"{c.cluster_key!r} graded both correct and incorrect"
                )
            correct[code] = c.correct
        self.correct_code = correct.astype(float)

        transform = sigmoid if cfg.transform == "sigmoid" else float
        method = cfg.method
        if method == "bon":
            self.raw = np.array(
                [self._need_score(c.disc_score) for c in cands]
            )
            order = np.argsort(np.array([c.candidate_id for c in cands]))
            self.id_rank = np.empty(self.k, dtype=int)
            self.id_rank[order] = np.arange(self.k)
        elif method in ("wsc", "pv"):
            self.w = np.array(
                [transform(self._need_score(c.disc_score)) for c in cands]
            )
        elif method == "gpv":
            rows = []
            for c in cands:
                if c.gen_scores is None:
                    raise ValueError("scores required")
                rows.append([transform(s) for s in c.gen_scores])
            lengths = {len(r) for r in rows}
            if len(lengths) > 1:
                raise ValueError("inconsistent M")
            data_m = lengths.pop()
            self.m = data_m if cfg.m_verifications is None else cfg.m_verifications
            if not 1 <= self.m <= data_m:
                raise ValueError("inconsistent M")
            self.gmean = (
                np.asarray(rows)[:, : self.m].sum(axis=1) / self.m
            )

    @staticmethod
    def _need_score(score: Optional[float]) -> float:
        if score is None:
            raise ValueError("scores required")
        return score


def _slate_scorer(arrays: _PoolArrays, cfg: EvalConfig):
    """Bind a (slate indices) -> 0/1 scorer for one problem and method."""
    method = cfg.method
    codes = arrays.codes
    n_codes = arrays.n_codes
    none_code = arrays.none_code
    correct = arrays.correct_code

    if method == "sc":

        def score(idx: np.ndarray) -> float:
            counts = np.bincount(codes[idx], minlength=n_codes)
            if none_code >= 0:
                counts[none_code] = 0
            win = int(np.argmax(counts))
            return correct[win] if counts[win] > 0 else 0.0

    elif method == "bon":
        raw = arrays.raw
        id_rank = arrays.id_rank

        def score(idx: np.ndarray) -> float:
            if none_code >= 0:
                idx = idx[codes[idx] != none_code]
                if idx.size == 0:
                    return 0.0
            s = raw[idx]
            tied = idx[s == s.max()]
            winner = tied[np.argmin(id_rank[tied])]
            return correct[codes[winner]]

    else:
        alpha = cfg.effective_alpha
        if alpha < 0:
            raise ValueError("invalid alpha")
        if method == "gpv":
            weights, m = arrays.gmean, arrays.m
            log_pen = math.log(cfg.n * m)
        else:
            weights, m = arrays.w, 1
            log_pen = math.log(cfg.n)

        def score(idx: np.ndarray) -> float:
            counts = np.bincount(codes[idx], minlength=n_codes)
            if none_code >= 0:
                counts[none_code] = 0
            present = np.nonzero(counts)[0]
            if present.size == 0:
                return 0.0
            sums = np.bincount(codes[idx], weights=weights[idx],
                               minlength=n_codes)[present]
            n_a = counts[present]
            if method == "wsc":
                obj = sums
            else:
                obj = sums / n_a - alpha * (log_pen / (n_a * m + 1))
            win = present[np.lexsort((present, -n_a, -obj))[0]]
            return correct[win]

    return score


def _eval_problem(args: tuple[Problem, EvalConfig, bool]) -> np.ndarray:
    """Per-draw 0/1 accuracy vector for one problem."""
    problem, cfg, exhaustive = args
    arrays = _PoolArrays(problem, cfg)
    score = _slate_scorer(arrays, cfg)
    k = arrays.k

    if exhaustive:
        slates = itertools.combinations(range(k), cfg.n)
        return np.array([score(np.array(s)) for s in slates])

    if not cfg.replacement and cfg.n > k:
        raise ValueError(
            f"slate too large: n={cfg.n} > pool {k} for {problem.problem_id!r}"
        )
    out = np.empty(cfg.draws)
    for t in range(cfg.draws):
        rng = slate_rng(cfg.seed, problem.problem_id, t)
        idx = rng.choice(k, size=cfg.n, replace=cfg.replacement)
        out[t] = score(idx)
    return out


def bootstrap_accuracy(
    problems: Sequence[Problem],
    cfg: EvalConfig,
    jobs: int = 1,
    exhaustive: bool = False,
) -> BootstrapReport:
    """Estimate benchmark accuracy of cfg.method at slate size cfg.n.

    Per problem, cfg.draws slates are sampled (without replacement unless
    configured otherwise) and scored 1 when the chosen answer is the correct
    one. The benchmark mean averages per-problem accuracies; the interval is
    mean +/- z * s / sqrt(draws) over per-draw benchmark accuracies, or the
    matching percentile span when cfg.ci_method is "percentile".

    With exhaustive=True, draws and seed are ignored and every C(k, n) slate
    is scored once; pool sizes must then match across problems so draws
    stay aligned.
    """
    if not problems:
        raise ValueError("no problems")
    resolved_m = None
    if cfg.method == "gpv":
        resolved_m = cfg.m_verifications
        if resolved_m is None:
            first = problems[0].candidates[0].gen_scores
            if first is None:
                raise ValueError("scores required")
            resolved_m = len(first)
    if exhaustive:
        sizes = {len(p.candidates) for p in problems}
        if cfg.replacement:
            raise ValueError("exhaustive mode enumerates without replacement")
        if len(sizes) != 1:
            raise ValueError("exhaustive mode needs equal pool sizes")
        if cfg.n > sizes.pop():
            raise ValueError("slate too large")

    work = [(p, cfg, exhaustive) for p in problems]
    if jobs > 1 and len(problems) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, len(work) // (jobs * 4))
            rows = list(pool.map(_eval_problem, work, chunksize=chunk))
    else:
        rows = [_eval_problem(w) for w in work]

    matrix = np.vstack(rows)
    per_problem = matrix.mean(axis=1)
    per_draw = matrix.mean(axis=0)
    mean = float(per_problem.mean())
    draws = matrix.shape[1]

    if cfg.ci_method == "percentile":
        lo, hi = np.quantile(
            per_draw, [(1 - cfg.ci_level) / 2, (1 + cfg.ci_level) / 2]
        )
    else:
        z = NormalDist().inv_cdf((1 + cfg.ci_level) / 2)
        s = float(per_draw.std(ddof=1)) if draws > 1 else 0.0
        half = z * s / math.sqrt(draws)
        lo, hi = mean - half, mean + half
    ci_low = min(max(float(lo), 0.0), mean)
    ci_high = max(min(float(hi), 1.0), mean)

    return BootstrapReport(
        method=cfg.method,
        n=cfg.n,
        mean=mean,
        ci_low=ci_low,
        ci_high=ci_high,
        draws=draws,
        seed=cfg.seed,
        ci_level=cfg.ci_level,
        replacement=cfg.replacement,
        transform=cfg.transform,
        alpha=cfg.effective_alpha if cfg.method in ("pv", "gpv") else None,
        m=resolved_m,
        per_problem=tuple(
            (p.problem_id, float(acc)) for p, acc in zip(problems, per_problem)
        ),
    )


def pass_at_n(problem: Problem, n: int) -> float:
    """Chance a size-n slate (without replacement) contains a correct one.

    Unbiased over the pool: 1 - C(k-c, n) / C(k, n) for a pool of k with c
    correct.
    """
    if not problem.labeled:
        raise ValueError("labels required")
    k = len(problem.candidates)
    if not 1 <= n <= k:
        raise ValueError(f"slate too large: n={n} > pool {k}")
    c = sum(1 for cand in problem.candidates if cand.correct)
    return 1.0 - math.comb(k - c, n) / math.comb(k, n)


def budget_curve(
    problems: Sequence[Problem],
    methods: Sequence[str],
    n_grid: Sequence[int],
    m_grid: Sequence[int] = (2,),
    solver_cfg: Optional[ModelConfig] = None,
    verifier_cfg: Optional[ModelConfig] = None,
    budget_mode: str = "flops",
    latency_table: Optional[LatencyTable] = None,
    cfg: Optional[EvalConfig] = None,
    verification_out_tokens: Optional[int] = None,
    jobs: int = 1,
) -> list[BudgetPoint]:
    """Accuracy-vs-budget points for each method over a slate-size grid.

    The flops budget of a point is N times the mean per-candidate pipeline
    cost of its method (generation, plus scoring for verifier methods, plus
    M verification generations for gpv), averaged over problems. The
    latency budget is looked up from measured wall-clock data at (N, M)
    exactly; absent measurements are errors. gpv expands over m_grid; other
    methods report m=0.
    """
    if budget_mode not in ("flops", "latency"):
        raise ValueError(f"unknown budget mode: {budget_mode!r}")
    if budget_mode == "latency" and latency_table is None:
        raise ValueError("latency budget needs a latency table")
    if budget_mode == "flops" and solver_cfg is None:
        raise ValueError("flops budget needs a solver config")
    base = cfg if cfg is not None else EvalConfig(n=1)

    def point_budget(method: str, n: int, m: int) -> float:
        mode = _PIPELINE_MODE[method]
        if budget_mode == "latency":
            return latency_lookup(latency_table, mode, n, m)
        per_problem = []
        for p in problems:
            stats = [c.token_stats for c in p.candidates]
            total = pipeline_flops(
                solver_cfg, verifier_cfg, stats, mode,
                m_verifications=m,
                verification_out_tokens=verification_out_tokens,
            )
            per_problem.append(n * total / len(stats))
        return float(np.mean(per_problem))

    points = []
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown selection method: {method!r}")
        for m in m_grid if method == "gpv" else (0,):
            curve = []
            for n in sorted(n_grid):
                run = dataclasses.replace(
                    base, n=n, method=method,
                    m_verifications=m if method == "gpv" else None,
                )
                report = bootstrap_accuracy(problems, run, jobs=jobs)
                curve.append(
                    BudgetPoint(
                        method=method, n=n, m=m,
                        budget=point_budget(method, n, m),
                        accuracy=report.mean,
                        ci_low=report.ci_low,
                        ci_high=report.ci_high,
                    )
                )
            budgets = [pt.budget for pt in curve]
            if any(b1 <= b0 for b0, b1 in zip(budgets, budgets[1:])):
                raise ValueError(
                    f"budget not strictly increasing for {method!r}: {budgets}"
                )
            points.extend(curve)
    return points


CurvePoint = Union[BudgetPoint, tuple[float, float]]


def _as_xy(curve: Sequence[CurvePoint]) -> tuple[np.ndarray, np.ndarray]:
    xs, ys = [], []
    for pt in curve:
        if isinstance(pt, BudgetPoint):
            xs.append(pt.budget)
            ys.append(pt.accuracy)
        else:
            x, y = pt
            xs.append(float(x))
            ys.append(float(y))
    order = np.argsort(xs)
    return np.asarray(xs)[order], np.asarray(ys)[order]


def crossover_threshold(
    curve_a: Sequence[CurvePoint], curve_b: Sequence[CurvePoint]
) -> Optional[float]:
    """Smallest budget at which curve_b's accuracy meets or beats curve_a's.

    Both curves are interpolated piecewise-linearly over the union of their
    budgets within the shared range. Returns None when curve_b never
    catches up (or the ranges do not overlap).
    """
    if len(curve_a) < 2 or len(curve_b) < 2:
        raise ValueError("insufficient points")
    ax, ay = _as_xy(curve_a)
    bx, by = _as_xy(curve_b)
    lo = max(ax[0], bx[0])
    hi = min(ax[-1], bx[-1])
    if lo > hi:
        return None

    grid = np.unique(np.concatenate([[lo, hi], ax, bx]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    diff = np.interp(grid, bx, by) - np.interp(grid, ax, ay)

    for i, d in enumerate(diff):
        if d >= 0:
            if i == 0:
                return float(grid[0])
            d0, d1 = diff[i - 1], d
            t = d0 / (d0 - d1)
            return float(grid[i - 1] + t * (grid[i] - grid[i - 1]))
    return None
