"""Markov renewal chains, semi-Markov kernels, and the extraction maps
tying the letter process to the walks it drives.

A Markov renewal chain is a chain (J_n, T_n) whose transition law depends
only on J_n, with sojourns T >= 1. Three kernels are provided: the
one-dimensional direction kernel, the two-dimensional bend kernel, and
the alpha-lis kernel of a general stable model, each a sum of cascades of
the contexts realizing the jump. Extraction maps read the renewal
structure out of simulated traces; on combs, the letter-side and
walk-side extractions agree up to word reversal, jump for jump, and
checking that is `check_diagram`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cascades import (
    DEFAULT_POLICY,
    SeriesPolicy,
    cascade,
    contexts_with_alpha_lis,
    kappa,
)
from .errors import VlmcError
from .process import CombModel, LetterTrace, ProbabilizedTree
from .prw1d import Walk1DTrace
from .prw2d import DIRS, Walk2DTrace
from .streams import stream


def kernel_dim1(model: CombModel, alpha: str, beta: str, k: int) -> float:
    """P(next direction beta, after a run of exactly k alphas)."""
    if alpha == beta:
        raise VlmcError("directions must differ")
    if k < 1:
        raise VlmcError("k must be >= 1")
    rule = model.rule(alpha, beta)
    return rule.tail(k) * model.q_prob(alpha * k + beta, beta)


def kernel_dim2(model: CombModel, src_bend: str, dst_bend: str, k: int) -> float:
    """P(jump src_bend -> dst_bend with sojourn k); zero unless chained."""
    if k < 1:
        raise VlmcError("k must be >= 1")
    if src_bend[1] != dst_bend[0]:
        return 0.0
    beta, alpha, gamma = src_bend[0], src_bend[1], dst_bend[1]
    rule = model.rule(alpha, beta)
    return rule.tail(k) * model.q_prob(alpha * k + beta, gamma)


def kernel_alpha_lis(model: ProbabilizedTree, source: str, target: str, k: int,
                     policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Jump kernel of the alpha-lis chain of a stable model.

    Sums casc(beta c) over the finite contexts c that begin with target's
    lis, have alpha-lis `source`, and length |source| + k - 1 (beta is
    target's first letter): each such context is one growth path from
    `source` that renews into `target` after k steps.
    """
    stable, witness = model.tree.is_stable()
    if not stable:
        raise VlmcError(f"alpha-lis kernel needs a stable tree (witness {witness!r})")
    if k < 1:
        raise VlmcError("k must be >= 1")
    beta, t = target[0], target[1:]
    length = len(source) + k - 1
    total = 0.0
    for c in contexts_with_alpha_lis(model, source, prefix=t, max_length=length):
        if len(c) == length:
            total += cascade(model, beta + c)
    return total


def expected_sojourn(model: ProbabilizedTree, alpha_lis_word: str,
                     policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Mean time spent in an alpha-lis state per visit.

    Equals the cascade-series value kappa of that state: the growth phase
    from the state lasts one step per context extending it.
    """
    res = kappa(model, alpha_lis_word, policy)
    return res.value if res.converged else math.inf


# ---------------------------------------------------------------------------
# tabulated kernels and direct semi-Markov simulation
# ---------------------------------------------------------------------------

@dataclass
class MrcKernel:
    """Kernel p[a, b](k) tabulated for k <= k_max with a certified tail bucket."""

    states: list[str]
    k_max: int
    probs: dict[tuple[str, str], np.ndarray]   # length k_max, k = 1 .. k_max
    remainder: dict[str, float]                # mass beyond k_max per source

    def p(self, a: str, b: str, k: int) -> float:
        if k < 1:
            return 0.0
        if k > self.k_max:
            raise VlmcError(f"k = {k} beyond tabulation horizon {self.k_max}")
        return float(self.probs[(a, b)][k - 1])

    def row_total(self, a: str) -> float:
        return float(sum(self.probs[(a, b)].sum() for b in self.states))

    @classmethod
    def from_model(cls, model: ProbabilizedTree, k_max: int,
                   policy: SeriesPolicy = DEFAULT_POLICY) -> "MrcKernel":
        states = model.tree.alpha_lis_set()
        probs = {}
        for a in states:
            for b in states:
                probs[(a, b)] = np.array(
                    [kernel_alpha_lis(model, a, b, k, policy) for k in range(1, k_max + 1)]
                )
        remainder = {}
        for a in states:
            if isinstance(model, CombModel):
                rule = model.rule(a[0], a[1])
                remainder[a] = rule.tail(k_max + 1) - rule.tail_limit()
            else:
                remainder[a] = max(0.0, 1.0 - sum(
                    probs[(a, b)].sum() for b in states
                ))
        return cls(states=states, k_max=k_max, probs=probs, remainder=remainder)


@dataclass
class SemiMarkovPath:
    """A state path constant between jumps, with its renewal data."""

    states: list[str]
    z: np.ndarray           # state indices, one per time j in [0, B_n)
    jumps: list[str]        # J_0 .. J_n
    sojourns: np.ndarray    # T_0 = 0, T_1, ..., T_n
    times: np.ndarray       # B_0 = 0, ..., B_n

    def z_words(self) -> list[str]:
        return [self.states[i] for i in self.z]


def simulate_semi_markov(kernel: MrcKernel, n_jumps: int, seed: int,
                         initial: str | None = None,
                         stream_index: int = 0) -> SemiMarkovPath:
    """Draw (J, T) from a tabulated kernel and lay out the state path.

    The kernel must be essentially complete (remainder below 1e-9 per
    source); rows are renormalized over the tabulated support.
    """
    for a in kernel.states:
        if kernel.remainder[a] > 1e-9:
            raise VlmcError(
                f"kernel row {a!r} leaves mass {kernel.remainder[a]:.3g} beyond "
                f"k_max={kernel.k_max}; cannot sample an under-specified law"
            )
    rng = stream(seed, stream_index)
    idx = {s: i for i, s in enumerate(kernel.states)}
    flat = {}
    for a in kernel.states:
        targets = []
        weights = []
        for b in kernel.states:
            vec = kernel.probs[(a, b)]
            for k in range(1, kernel.k_max + 1):
                if vec[k - 1] > 0.0:
                    targets.append((b, k))
                    weights.append(vec[k - 1])
        w = np.array(weights)
        flat[a] = (targets, np.cumsum(w) / w.sum())
    j0 = initial if initial is not None else kernel.states[0]
    jumps = [j0]
    sojourns = [0]
    for _ in range(n_jumps):
        targets, cum = flat[jumps[-1]]
        u = rng.random()
        b, k = targets[int(np.searchsorted(cum, u, side="right"))]
        jumps.append(b)
        sojourns.append(k)
    sojourns = np.array(sojourns, dtype=np.int64)
    times = np.cumsum(sojourns)
    z = np.repeat([idx[s] for s in jumps[:-1]], sojourns[1:]) if n_jumps else np.array([], dtype=np.int64)
    return SemiMarkovPath(states=kernel.states, z=z, jumps=jumps,
                          sojourns=sojourns, times=times)


def extract_mrc_from_states(states_path) -> tuple[list, np.ndarray, np.ndarray]:
    """Run-length-encode a state path back into (J, T, B); T_0 = 0.

    Returns the complete jumps only: the path determines the sojourn of
    every run it contains in full.
    """
    seq = list(states_path)
    if not seq:
        raise VlmcError("empty path")
    jumps = [seq[0]]
    sojourns = [0]
    run = 1
    for prev, cur in zip(seq, seq[1:]):
        if cur == prev:
            run += 1
        else:
            jumps.append(cur)
            sojourns.append(run)
            run = 1
    sojourns = np.array(sojourns, dtype=np.int64)
    return jumps, sojourns, np.cumsum(sojourns)


# ---------------------------------------------------------------------------
# extraction maps from traces
# ---------------------------------------------------------------------------

@dataclass
class MrcPath:
    jumps: list[str]        # J_0, J_1, ...
    sojourns: np.ndarray    # T_0 = 0, T_1, ...
    times: np.ndarray       # B_0 = 0, B_1, ...


def extract_mrc_letters(trace: LetterTrace, model: ProbabilizedTree) -> MrcPath:
    """Renewal structure of the context sequence.

    Jump times are the steps whose context is itself an alpha-lis word
    (the context length stops growing there); J is the context at those
    times, starting from the alpha-lis of the initial context.
    """
    s_words = model.tree.alpha_lis_set()
    maxlen = max(len(w) for w in s_words)
    alpha = model.alphabet
    skeys = {tuple(alpha.index(ch) for ch in w): w for w in s_words}
    n = len(trace.letters)
    older = np.array([alpha.index(ch) for ch in trace.init], dtype=np.int8)
    fullrev = np.concatenate([trace.letters[::-1], older])  # X_n..X_1 + init
    c0 = trace.context(0)
    jumps = [model.tree.alpha_lis(c0).word]
    times = [0]
    lens = trace.context_len
    for k in range(1, n + 1):
        length = int(lens[k])
        if length <= maxlen:
            key = tuple(int(x) for x in fullrev[n - k : n - k + length])
            word = skeys.get(key)
            if word is not None:
                times.append(k)
                jumps.append(word)
    times = np.array(times, dtype=np.int64)
    sojourns = np.concatenate([[0], np.diff(times)])
    return MrcPath(jumps=jumps, sojourns=sojourns, times=times)


def extract_mrc_bends(walk: Walk1DTrace | Walk2DTrace) -> MrcPath:
    """Renewal structure of a walk: bends at the breaking times."""
    return MrcPath(jumps=list(walk.bends),
                   sojourns=walk.sojourns.copy(),
                   times=walk.breaks.copy())


@dataclass
class DiagramReport:
    ok: bool
    n_jumps: int
    first_mismatch: tuple[str, int, str] | None

    def __bool__(self):
        return self.ok


def check_diagram(letter_trace: LetterTrace, walk: Walk1DTrace | Walk2DTrace,
                  model: ProbabilizedTree) -> DiagramReport:
    """Verify the two extraction routes agree up to word reversal.

    Both traces must carry the same letters. Checks, jump for jump:
    the letter-side state is the reversed walk-side bend, the sojourn
    sequences coincide, and the per-step semi-Markov states are mutual
    reversals.
    """
    wtrace = walk.letters_trace
    if wtrace.init != letter_trace.init or not np.array_equal(
        wtrace.letters, letter_trace.letters
    ):
        return DiagramReport(False, 0, ("letters", 0, "traces differ at the source"))
    mrc_v = extract_mrc_letters(letter_trace, model)
    mrc_w = extract_mrc_bends(walk)
    n = min(len(mrc_v.jumps), len(mrc_w.jumps))
    for m in range(n):
        if mrc_v.jumps[m] != mrc_w.jumps[m][::-1]:
            return DiagramReport(
                False, n,
                ("jump_state", m, f"{mrc_v.jumps[m]} != reverse({mrc_w.jumps[m]})"),
            )
    if not np.array_equal(mrc_v.times[:n], mrc_w.times[:n]):
        m = int(np.nonzero(mrc_v.times[:n] != mrc_w.times[:n])[0][0])
        return DiagramReport(False, n, ("jump_time", m, "breaking times differ"))
    for j, ctx in enumerate(letter_trace.contexts()):
        z_v = model.tree.alpha_lis(ctx).word
        z_w = walk.bend_at(j)
        if z_v != z_w[::-1]:
            return DiagramReport(
                False, n, ("state", j, f"{z_v} != reverse({z_w})")
            )
    return DiagramReport(True, n, None)


def letters_from_increments(increments: np.ndarray, alphabet_letters: str) -> str:
    """Increments back to letters (the trivial inverse of walk-building)."""
    if alphabet_letters == "du":
        return "".join("u" if int(x) == 1 else "d" for x in np.asarray(increments))
    if alphabet_letters == "news":
        out = []
        for row in np.asarray(increments):
            hits = np.nonzero((DIRS == row).all(axis=1))[0]
            if not hits.size:
                raise VlmcError(f"{row} is not a unit step")
            out.append(alphabet_letters[hits[0]])
        return "".join(out)
    raise VlmcError(f"unsupported alphabet {alphabet_letters!r}")
