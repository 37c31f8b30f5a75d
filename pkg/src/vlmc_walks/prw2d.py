"""Two-dimensional persistent random walk driven by a quadruple comb.

Moves are unit steps n, e, w, s on the integer lattice. The probability of
keeping the current direction depends on the time already spent in it and
on the previous direction, so the walk anatomy is carried by bends (the
ordered pairs of distinct letters at direction changes): the bend chain is
a finite Markov chain whose kernel is assembled from the same cascade
sums as the stationary theory, and the skeleton (the walk observed at
direction changes) supports a Monte-Carlo diagnostic for the
recurrence/transience dichotomy of its return-probability series.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cascades import DEFAULT_POLICY, SeriesPolicy
from .errors import Assumption2Violated, RunCapExceeded, VlmcError
from .process import CombModel, LetterTrace, simulate_letters
from .stationary import QMatrix, build_q_matrix, solve_left_fixed
from .streams import stream
from .tails import TailRule
from .trees import quadruple_comb

INIT_2D = "en"  # newest first: the walk starts mid e-run, after an n-run

LETTERS_2D = "news"
DIRS = np.array([[0, 1], [1, 0], [-1, 0], [0, -1]], dtype=np.int64)  # n e w s

PLATEAU_THRESHOLD = 1e-3  # partial-sum growth over the last decade of n
WILSON_Z = 1.96


def quad_comb_model(rules: dict[tuple[str, str], TailRule]) -> CombModel:
    return CombModel(quadruple_comb(), rules)


def drrw_model(make_rule) -> CombModel:
    """Directionally reinforced walk: uniform 1/3 switch weights everywhere.

    `make_rule(switch_weights)` must build the persistence rule; use e.g.
    `lambda w: tails.geometric(0.5, w)` for one shared rule.
    """
    rules = {}
    for a in LETTERS_2D:
        others = [x for x in LETTERS_2D if x != a]
        weights = {x: 1.0 / 3.0 for x in others}
        for b in others:
            rules[(a, b)] = make_rule(weights)
    return CombModel(quadruple_comb(), rules)


def bend_rule(model: CombModel, bend: str) -> TailRule:
    """Sojourn rule attached to a bend: the run of bend[1] entered after bend[0]."""
    return model.rule(bend[1], bend[0])


def check_assumption2(model: CombModel) -> None:
    for (a, b), rule in sorted(model.rules.items()):
        if rule.tail_limit() > 0.0:
            raise Assumption2Violated(
                f"runs of {a!r} after {b!r} are infinite with probability "
                f"{rule.tail_limit():.6g}"
            )


@dataclass
class BendKernel:
    states: list[str]        # the 12 bends, canonical order
    matrix: np.ndarray       # P[i, j]
    q: QMatrix               # the alpha-lis matrix the entries come from

    def loc(self, src: str, dst: str) -> float:
        return float(self.matrix[self.states.index(src), self.states.index(dst)])


def build_bend_kernel(model: CombModel, policy: SeriesPolicy = DEFAULT_POLICY) -> BendKernel:
    """Transition matrix of the bend chain.

    Entry (beta alpha -> alpha gamma) equals the alpha-lis matrix entry
    Q[alpha beta, gamma alpha]; the two are the same numbers read through
    word reversal, so this literally reindexes the Q matrix.
    """
    check_assumption2(model)
    qm = build_q_matrix(model, policy)
    states = qm.index  # bends in canonical order
    pos = {s: i for i, s in enumerate(states)}
    n = len(states)
    matrix = np.zeros((n, n))
    for i, src in enumerate(states):
        for j, dst in enumerate(states):
            matrix[i, j] = qm.matrix[pos[src[::-1]], pos[dst[::-1]]]
    return BendKernel(states=states, matrix=matrix, q=qm)


def bend_stationary(kernel: BendKernel) -> np.ndarray:
    """Invariant law of the bend chain, aligned with kernel.states."""
    return solve_left_fixed(kernel.matrix)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class Walk2DTrace:
    """Lattice trajectory with bends, breaking times and skeleton.

    positions[n] = S_n with S_0 = (0, 0); breaks[m] are the direction
    changes (breaks[0] = 0); bends[m] is the two-letter bend at the m-th
    change, bends[0] the initial one; skeleton[m] = S at breaks[m].
    """

    letters_trace: LetterTrace
    increments: np.ndarray     # (n, 2)
    positions: np.ndarray      # (n+1, 2)
    breaks: np.ndarray
    sojourns: np.ndarray       # T_0 = 0, T_1, ...
    bends: list[str]
    skeleton: np.ndarray       # (n_breaks + 1, 2)

    @property
    def n_steps(self) -> int:
        return len(self.increments)

    def bend_at(self, j: int) -> str:
        """The bend state at step j (constant between direction changes)."""
        m = int(np.searchsorted(self.breaks[1:], j, side="right"))
        return self.bends[m]

    def is_breaking(self) -> np.ndarray:
        flags = np.zeros(self.n_steps + 1, dtype=bool)
        flags[self.breaks[1:]] = True
        return flags


def walk2d_from_letters(trace: LetterTrace, run_cap: int | None = None) -> Walk2DTrace:
    alpha = trace.alphabet
    if alpha.letters != LETTERS_2D:
        raise VlmcError("two-dimensional walks use the alphabet 'news'")
    letters = trace.letters.astype(np.int64)
    increments = DIRS[letters]
    positions = np.concatenate([np.zeros((1, 2), dtype=np.int64), np.cumsum(increments, axis=0)])
    x0 = alpha.index(trace.init[0])
    full = np.concatenate([[x0], letters])
    changes = np.nonzero(full[1:] != full[:-1])[0] + 1
    breaks = np.concatenate([[0], changes])
    sojourns = np.concatenate([[0], np.diff(breaks)])
    if run_cap is not None and len(sojourns) > 1 and sojourns[1:].max() > run_cap:
        raise RunCapExceeded(f"a run exceeded the cap {run_cap}")
    prev = alpha.index(trace.init[1])
    bends = [alpha.letters[prev] + alpha.letters[x0]]
    for m in range(1, len(breaks)):
        bends.append(alpha.letters[full[breaks[m - 1]]] + alpha.letters[full[breaks[m]]])
    skeleton = positions[breaks]
    return Walk2DTrace(
        letters_trace=trace,
        increments=increments,
        positions=positions,
        breaks=breaks,
        sojourns=sojourns,
        bends=bends,
        skeleton=skeleton,
    )


def simulate_prw2(model: CombModel, n_steps: int, seed: int,
                  stream_index: int = 0, run_cap: int | None = None) -> Walk2DTrace:
    """Letter-by-letter walk of n_steps increments from the standard start."""
    trace = simulate_letters(model, INIT_2D, n_steps, seed, stream_index)
    return walk2d_from_letters(trace, run_cap=run_cap)


# ---------------------------------------------------------------------------
# return-probability diagnostic
# ---------------------------------------------------------------------------

@dataclass
class DichotomyReport:
    """Monte-Carlo estimates of P(skeleton at the origin) per jump index.

    A finite horizon can only suggest the behaviour of the full series;
    the trend label is a documented heuristic, never a proof. The trend is
    "plateauing" when the partial sums grow by less than 1e-3 over the
    last decade of jump indices, "growing" otherwise.
    """

    horizon: int
    trials: int
    p_hat: np.ndarray          # length horizon + 1, p_hat[0] = 1
    half_width: np.ndarray     # Wilson 95% half-widths
    partial_sums: np.ndarray
    trend: str
    min_norm_mean: float       # mean over trials of min_{1<=n<=N} |M_n|
    min_norm_median: float
    seed: int

    def rows(self):
        for n in range(self.horizon + 1):
            yield (n, float(self.p_hat[n]), float(self.half_width[n]),
                   float(self.partial_sums[n]))


def _bend_codes(model: CombModel):
    """Per bend code (4*prev + cur): sojourn rule, exit letters, exit cumsums."""
    alpha = model.alphabet
    rules = {}
    for code in range(16):
        prev, cur = code // 4, code % 4
        if prev == cur:
            continue
        a, b = alpha.letters[cur], alpha.letters[prev]
        rule = model.rule(a, b)
        others = np.array([i for i in range(4) if i != cur], dtype=np.int64)
        weights = np.array([rule.switch_weights[alpha.letters[i]] for i in others])
        rules[code] = (rule, others, np.cumsum(weights))
    return rules


def _dichotomy_chunk(model, horizon, n_trials, seed, chunk_index, bend_info):
    rng = stream(seed, chunk_index)
    start = 4 * 0 + 1  # bend ne: previous n (0), current e (1)
    cur = np.full(n_trials, start, dtype=np.int64)
    core = np.zeros((n_trials, 2))
    hits = np.zeros(horizon + 1, dtype=np.int64)
    hits[0] = n_trials  # the skeleton starts at the origin
    min_norm = np.full(n_trials, np.inf)
    e_dir = DIRS[1].astype(float)
    for n in range(1, horizon + 1):
        sojourn = np.empty(n_trials)
        nxt = np.empty(n_trials, dtype=np.int64)
        for code in np.unique(cur):
            rule, others, cumw = bend_info[int(code)]
            mask = cur == code
            m = int(mask.sum())
            sojourn[mask] = rule.sample_runs(rng, m)
            u = rng.random(m)
            pick = np.minimum(np.searchsorted(cumw, u, side="right"), 2)
            nxt[mask] = 4 * (code % 4) + others[pick]
        core += sojourn[:, None] * DIRS[cur % 4]
        skel = core - e_dir + DIRS[nxt % 4]
        hits[n] += int(np.sum((skel[:, 0] == 0) & (skel[:, 1] == 0)))
        min_norm = np.minimum(min_norm, np.hypot(skel[:, 0], skel[:, 1]))
        cur = nxt
    return hits, min_norm


def return_prob_diagnostic(model: CombModel, horizon: int, trials: int, seed: int,
                           threads: int | None = None,
                           chunk_size: int = 2048) -> DichotomyReport:
    """Estimate P(M_n = origin) for n <= horizon over independent trials.

    Trials are split into fixed chunks, one random stream per chunk, so
    the report is identical for any thread count.
    """
    check_assumption2(model)
    if horizon < 0 or trials < 1:
        raise VlmcError("horizon must be >= 0 and trials >= 1")
    bend_info = _bend_codes(model)
    chunks = []
    done = 0
    index = 0
    while done < trials:
        n = min(chunk_size, trials - done)
        chunks.append((n, index))
        done += n
        index += 1
    if threads is None or threads <= 1 or len(chunks) == 1:
        results = [
            _dichotomy_chunk(model, horizon, n, seed, i, bend_info) for n, i in chunks
        ]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda ci: _dichotomy_chunk(model, horizon, ci[0], seed, ci[1],
                                                     bend_info), chunks)
            )
    hits = np.zeros(horizon + 1, dtype=np.int64)
    min_norms = []
    for h, mn in results:
        hits += h
        min_norms.append(mn)
    min_norm = np.concatenate(min_norms) if min_norms else np.array([])
    p_hat = hits / trials
    z2 = WILSON_Z**2
    half_width = (
        WILSON_Z
        * np.sqrt(p_hat * (1 - p_hat) / trials + z2 / (4 * trials**2))
        / (1 + z2 / trials)
    )
    partial = np.cumsum(p_hat)
    lo = horizon // 10
    growth = float(partial[horizon] - partial[lo]) if horizon >= 1 else 0.0
    trend = "plateauing" if growth < PLATEAU_THRESHOLD else "growing"
    return DichotomyReport(
        horizon=horizon,
        trials=trials,
        p_hat=p_hat,
        half_width=half_width,
        partial_sums=partial,
        trend=trend,
        min_norm_mean=float(np.mean(min_norm)) if min_norm.size else math.nan,
        min_norm_median=float(np.median(min_norm)) if min_norm.size else math.nan,
        seed=seed,
    )


def skeleton_from_jumps(bends: list[str], sojourns: np.ndarray) -> np.ndarray:
    """Skeleton points from the jump-level data (bends[m], sojourns[m]).

    Reproduces S at the breaking times exactly: the walk sums whole runs,
    minus the initial step that belongs to the past, plus the first step
    of the following run.
    """
    n = len(bends) - 1
    out = np.zeros((n + 1, 2), dtype=np.int64)
    core = np.zeros(2, dtype=np.int64)
    letters = LETTERS_2D
    first_dir = DIRS[letters.index(bends[0][1])]
    for m in range(1, n + 1):
        run_dir = DIRS[letters.index(bends[m - 1][1])]
        core = core + int(sojourns[m]) * run_dir
        next_dir = DIRS[letters.index(bends[m][1])]
        out[m] = core - first_dir + next_dir
    return out
