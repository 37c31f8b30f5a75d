"""Probabilized context trees and forward simulation of the letter process.

A model attaches a probability distribution over the alphabet to every
finite context. Simulation prepends one letter per step, drawn from the
distribution of the current context; on stable trees the context is
maintained incrementally (prepend the letter, re-resolve the context),
which is what makes unbounded-memory simulation affordable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InternalWord, InvalidModel, NoContextPrefix, VlmcError
from .streams import UniformBuffer, stream
from .tails import ZERO_EPS, TailRule
from .trees import Alphabet, CombTree, ContextTree, ExplicitTree

DEFAULT_HISTORY_CAP = 10**7

Pair = tuple[str, str]


class ProbabilizedTree:
    """Context tree plus one probability vector per finite context."""

    tree: ContextTree

    @property
    def alphabet(self) -> Alphabet:
        return self.tree.alphabet

    def q_vector(self, context: str) -> tuple[float, ...]:
        """Distribution of the next letter given the context, alphabet order."""
        raise NotImplementedError

    def q_prob(self, context: str, letter: str) -> float:
        return self.q_vector(context)[self.alphabet.index(letter)]


class ExplicitModel(ProbabilizedTree):
    def __init__(self, tree: ExplicitTree, q: dict[str, tuple[float, ...]]):
        self.tree = tree
        missing = set(tree.leaves) - set(q)
        if missing:
            raise InvalidModel(f"contexts without a distribution: {sorted(missing)[:5]}")
        extra = set(q) - set(tree.leaves)
        if extra:
            raise InvalidModel(f"distributions for non-contexts: {sorted(extra)[:5]}")
        self._q = {}
        for c, probs in q.items():
            probs = tuple(float(x) for x in probs)
            if len(probs) != len(tree.alphabet):
                raise InvalidModel(f"q[{c!r}] has {len(probs)} entries")
            if any(x < 0 for x in probs):
                raise InvalidModel(f"q[{c!r}] has negative entries")
            if abs(sum(probs) - 1.0) > 1e-12:
                raise InvalidModel(f"q[{c!r}] sums to {sum(probs)}, expected 1")
            self._q[c] = probs
        self._leaf_cache = tree.leaves

    def q_vector(self, context: str) -> tuple[float, ...]:
        return self._q[context]

    def __repr__(self):
        return f"ExplicitModel({self.tree!r})"


class CombModel(ProbabilizedTree):
    """Comb tree with one tail rule per ordered letter pair (a, b).

    The rule for (a, b) governs the contexts a^k b: persistence
    probability q_k for another `a`, switch weights for the exit letter.
    """

    def __init__(self, tree: CombTree, rules: dict[Pair, TailRule]):
        self.tree = tree
        letters = tree.alphabet.letters
        expected = {(a, b) for a in letters for b in letters if a != b}
        if set(rules) != expected:
            raise InvalidModel(
                f"comb model needs one rule per ordered pair, got {sorted(rules)}"
            )
        for (a, b), rule in rules.items():
            others = set(letters) - {a}
            if set(rule.switch_weights) != others:
                raise InvalidModel(
                    f"rule ({a},{b}): switch weights must cover exactly {sorted(others)}"
                )
        self.rules = dict(rules)

    def rule(self, a: str, b: str) -> TailRule:
        return self.rules[(a, b)]

    def q_vector(self, context: str) -> tuple[float, ...]:
        a, k, b = self._split(context)
        return self._q_from_state(a, k, b)

    def _split(self, context: str) -> tuple[str, int, str]:
        a, b = context[0], context[-1]
        k = len(context) - 1
        if context != a * k + b or a == b:
            raise InvalidModel(f"{context!r} is not a comb context")
        return a, k, b

    def _q_from_state(self, a: str, k: int, b: str) -> tuple[float, ...]:
        rule = self.rules[(a, b)]
        qk = rule.persist(k)
        out = []
        for letter in self.alphabet:
            if letter == a:
                out.append(qk)
            else:
                out.append(rule.switch_weights[letter] * (1.0 - qk))
        return tuple(out)

    def __repr__(self):
        return f"CombModel(alphabet={self.alphabet.letters!r})"


@dataclass
class NonNullReport:
    ok: bool
    witnesses: list[tuple[str, str]]

    def __bool__(self):
        return self.ok


def validate_non_null(model: ProbabilizedTree) -> NonNullReport:
    """List the (context, letter) pairs whose transition probability vanishes.

    Probabilities below 1e-15 count as exact zeros for this report but are
    used as-is by the samplers.
    """
    witnesses: list[tuple[str, str]] = []
    if isinstance(model, ExplicitModel):
        for c in model.tree.finite_contexts():
            probs = model.q_vector(c)
            for letter, p in zip(model.alphabet, probs):
                if p <= ZERO_EPS:
                    witnesses.append((c, letter))
    elif isinstance(model, CombModel):
        for (a, b), rule in sorted(model.rules.items()):
            family = f"{a}^k{b}"
            n_entries = len(getattr(rule, "entries", ()))
            for k, letter in rule.null_pairs():
                if k is None:
                    ctx = f"{family} (k >= 1)"
                elif k > n_entries:
                    ctx = f"{family} (k >= {k})"
                else:
                    ctx = a * k + b
                witnesses.append((ctx, letter))
    else:
        raise InvalidModel(f"unknown model type {type(model)!r}")
    return NonNullReport(ok=not witnesses, witnesses=witnesses)


class LetterTrace:
    """Letters emitted by a simulation plus the per-step context lengths.

    Contexts are recoverable because each context is a prefix of the
    current word: context(n) is the first context_len[n] letters of
    X_n ... X_1 followed by the initial word.
    """

    def __init__(self, alphabet: Alphabet, init: str, letters: np.ndarray,
                 context_len: np.ndarray):
        self.alphabet = alphabet
        self.init = init
        self.letters = letters            # int8 indices, X_1 .. X_n
        self.context_len = context_len    # int64, C_0 .. C_n
        # full letter pool, newest first, as indices: X_n ... X_1 + init
        self._older = np.array([alphabet.index(ch) for ch in init], dtype=np.int8)

    def __len__(self) -> int:
        return len(self.letters)

    def letter(self, n: int) -> str:
        """X_n as a character, n >= 1."""
        return self.alphabet.letters[self.letters[n - 1]]

    @property
    def _pool(self) -> str:
        # X_n X_(n-1) ... X_1 followed by the initial word; the state word
        # after step k is the suffix starting at position n - k
        cached = getattr(self, "_pool_cache", None)
        if cached is None:
            rev = [self.alphabet.letters[i] for i in self.letters[::-1]]
            rev.extend(self.init)
            cached = "".join(rev)
            self._pool_cache = cached
        return cached

    def word_at(self, n: int, length: int) -> str:
        """First `length` letters of the state word after step n."""
        start = len(self.letters) - n
        return self._pool[start : start + length]

    def context(self, n: int) -> str:
        """C_n, the resolved context after step n (n = 0 is the initial one)."""
        return self.word_at(n, int(self.context_len[n]))

    def contexts(self) -> Iterable[str]:
        pool = self._pool
        n = len(self.letters)
        for k in range(n + 1):
            start = n - k
            yield pool[start : start + int(self.context_len[k])]

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "letter", "context_length", "context"])
            w.writerow([0, "", int(self.context_len[0]), self.context(0)])
            for n in range(1, len(self.letters) + 1):
                w.writerow([n, self.letter(n), int(self.context_len[n]), self.context(n)])


class _ExplicitTracker:
    """Incremental context tracking on an explicit tree."""

    def __init__(self, model: ExplicitModel, init: str, history_cap: int):
        self.model = model
        tree = model.tree
        self.stable = tree.is_stable()[0]
        self.history = list(init)  # newest first
        self.cap = history_cap
        try:
            self.context = tree.pref(init)
        except InternalWord as exc:
            raise InternalWord(f"init word {init!r} is internal") from exc

    def q(self) -> tuple[float, ...]:
        return self.model.q_vector(self.context)

    def push(self, letter: str) -> str:
        self.history.insert(0, letter)
        if len(self.history) > self.cap:
            if not self.stable:
                raise VlmcError(
                    f"history cap {self.cap} reached on a non-stable tree"
                )
            del self.history[self.cap // 2 :]
        tree = self.model.tree
        if self.stable:
            # a context preceded by a letter is never internal, so the new
            # context is resolved inside letter + old context
            self.context = tree.pref(letter + self.context)
        else:
            word = "".join(self.history)
            try:
                self.context = tree.pref(word)
            except InternalWord as exc:
                raise NoContextPrefix(
                    f"available history {word!r} is internal; cannot resolve a context"
                ) from exc
        return self.context

    def context_length(self) -> int:
        return len(self.context)


class _CombTracker:
    """O(1) context tracking on a comb: the context is a^k b."""

    def __init__(self, model: CombModel, init: str):
        self.model = model
        ctx = model.tree.pref(init)  # raises InternalWord on bad init
        self.a = ctx[0]
        self.k = len(ctx) - 1
        self.b = ctx[-1]

    def q(self) -> tuple[float, ...]:
        return self.model._q_from_state(self.a, self.k, self.b)

    def push(self, letter: str) -> str:
        if letter == self.a:
            self.k += 1
        else:
            self.b = self.a
            self.a = letter
            self.k = 1
        return self.a * self.k + self.b

    @property
    def context(self) -> str:
        return self.a * self.k + self.b

    def context_length(self) -> int:
        return self.k + 1


def _make_tracker(model: ProbabilizedTree, init: str, history_cap: int):
    if isinstance(model, CombModel):
        return _CombTracker(model, init)
    return _ExplicitTracker(model, init, history_cap)


def _pick(u: float, probs: tuple[float, ...]) -> int:
    acc = 0.0
    last = len(probs) - 1
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    return last


def step(model: ProbabilizedTree, state, rng_or_buffer) -> tuple[object, str]:
    """One transition: draw a letter from the current context's distribution.

    `state` is a tracker created by `new_state`; returns (state, letter).
    Accepts a numpy Generator or a UniformBuffer; one uniform per step.
    """
    if isinstance(rng_or_buffer, UniformBuffer):
        u = rng_or_buffer.next()
    else:
        u = float(rng_or_buffer.random())
    probs = state.q()
    idx = _pick(u, probs)
    letter = model.alphabet.letters[idx]
    state.push(letter)
    return state, letter


def new_state(model: ProbabilizedTree, init: str, history_cap: int = DEFAULT_HISTORY_CAP):
    """Tracker for stepwise simulation; init must be non-internal."""
    return _make_tracker(model, init, history_cap)


def simulate_letters(
    model: ProbabilizedTree,
    init: str,
    n: int,
    seed: int,
    stream_index: int = 0,
    history_cap: int = DEFAULT_HISTORY_CAP,
) -> LetterTrace:
    """Simulate n letters starting from the non-internal word `init`.

    Deterministic in (model, init, n, seed, stream_index). The trace
    records X_1..X_n and the context sequence C_0..C_n.
    """
    if n < 0:
        raise VlmcError("n must be >= 0")
    model.alphabet.check_word(init)
    tracker = _make_tracker(model, init, history_cap)
    letters = np.empty(n, dtype=np.int8)
    clens = np.empty(n + 1, dtype=np.int64)
    clens[0] = tracker.context_length()
    if n > 0:
        buf = UniformBuffer(stream(seed, stream_index))
        alpha = model.alphabet.letters
        for i in range(n):
            probs = tracker.q()
            idx = _pick(buf.next(), probs)
            letters[i] = idx
            tracker.push(alpha[idx])
            clens[i + 1] = tracker.context_length()
    return LetterTrace(model.alphabet, init, letters, clens)
