"""Cascades and series of cascades.

The cascade of a word w = b_1 ... b_l a s (s its longest internal proper
suffix) is the product of the transition probabilities that rebuild w from
a s by prepending b_l, ..., b_1:

    casc(w) = q_pref(b_2...b_l a s)(b_1) * ... * q_pref(a s)(b_l),

an empty product (= 1) when l = 0. Summing cascades over all finite
contexts sharing an alpha-lis gives the series kappa; summing cascades of
alpha-extended contexts grouped by alpha-lis gives the entries of the
matrix Q whose left-fixed vector carries the stationary masses.

Convergence discipline: explicit trees have finite sums (exact); comb
families get closed-form values and certificates from their tail rules
(geometric series, p-series). A value is never reported as converged from
a bare numeric truncation.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

from .errors import VlmcError
from .process import CombModel, ProbabilizedTree
from .trees import CombTree


@dataclass(frozen=True)
class SeriesPolicy:
    max_terms: int = 10**6
    abs_tol: float = 1e-12
    divergence_threshold: float = 1e9

    def __post_init__(self):
        if self.max_terms < 1:
            raise VlmcError("max_terms must be >= 1")
        if self.abs_tol <= 0:
            raise VlmcError("abs_tol must be > 0")


DEFAULT_POLICY = SeriesPolicy()


class SeriesStatus(enum.Enum):
    CONVERGED = "converged"
    DIVERGES = "diverges"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CascadeSeriesResult:
    status: SeriesStatus
    value: float               # sum if converged, inf if diverges, partial otherwise
    terms_used: int
    last_term: float | None
    analytic: bool

    @property
    def converged(self) -> bool:
        return self.status is SeriesStatus.CONVERGED

    @property
    def diverges(self) -> bool:
        return self.status is SeriesStatus.DIVERGES

    @classmethod
    def exact(cls, value: float, terms_used: int = 0) -> "CascadeSeriesResult":
        return cls(SeriesStatus.CONVERGED, value, terms_used, None, analytic=True)

    @classmethod
    def divergent(cls) -> "CascadeSeriesResult":
        return cls(SeriesStatus.DIVERGES, math.inf, 0, None, analytic=True)

    @classmethod
    def inconclusive(cls, partial: float, terms: int, last: float) -> "CascadeSeriesResult":
        return cls(SeriesStatus.INCONCLUSIVE, partial, terms, last, analytic=False)


def cascade(model: ProbabilizedTree, w: str) -> float:
    """Product of transition probabilities rebuilding w from its alpha-lis."""
    dec = model.tree.alpha_lis(w)
    value = 1.0
    current = dec.word
    for i in range(len(dec.prefix) - 1, -1, -1):
        ctx = model.tree.pref(current)
        value *= model.q_prob(ctx, dec.prefix[i])
        current = dec.prefix[i] + current
    return value


# ---------------------------------------------------------------------------
# context enumeration (canonical order: by length, then letter indices)
# ---------------------------------------------------------------------------

def contexts_with_alpha_lis(model: ProbabilizedTree, alpha_lis_word: str,
                            prefix: str = "", max_length: int | None = None):
    """Finite contexts whose alpha-lis is the given word and which start
    with `prefix`, in canonical order. Infinite for combs unless capped."""
    tree = model.tree
    if isinstance(tree, CombTree):
        a, b = alpha_lis_word[0], alpha_lis_word[1]
        # a^k b starts with `prefix` iff prefix is all a's (then every
        # k >= len(prefix) matches) or prefix = a^(k) b exactly (one k).
        all_a = prefix == a * len(prefix)
        for k in itertools.count(1):
            c = a * k + b
            if max_length is not None and len(c) > max_length:
                return
            if c.startswith(prefix):
                yield c
            elif not all_a and k >= len(prefix):
                return
    else:
        for c in tree.finite_contexts():
            if max_length is not None and len(c) > max_length:
                continue
            if c.startswith(prefix) and tree.alpha_lis(c).word == alpha_lis_word:
                yield c


def kappa_terms(model: ProbabilizedTree, alpha_lis_word: str, max_terms: int):
    """First cascade terms of the kappa series, canonical order.

    On combs the k-th term is the run-length tail in closed form (the
    cascade of a^k b is the product of the first k-1 persistence
    probabilities), which keeps long streams O(1) per term.
    """
    if isinstance(model, CombModel):
        rule = model.rule(alpha_lis_word[0], alpha_lis_word[1])
        for k in range(1, max_terms + 1):
            yield rule.tail(k)
        return
    for c in itertools.islice(contexts_with_alpha_lis(model, alpha_lis_word), max_terms):
        yield cascade(model, c)


def q_entry_terms(model: ProbabilizedTree, row: str, col: str, max_terms: int):
    """First terms of the Q-entry series Q[row, col], canonical order."""
    alpha, s = col[0], col[1:]
    if isinstance(model, CombModel):
        a, b = row[0], row[1]
        if s != a or alpha == a:
            return
        rule = model.rule(a, b)
        weight = rule.switch_weights[alpha]
        for k in range(1, max_terms + 1):
            yield rule.tail(k) * weight * (1.0 - rule.persist(k))
        return
    gen = contexts_with_alpha_lis(model, row, prefix=s)
    for c in itertools.islice(gen, max_terms):
        yield cascade(model, alpha + c)


# ---------------------------------------------------------------------------
# series values
# ---------------------------------------------------------------------------

def _comb_bend(model: CombModel, word: str) -> tuple[str, str]:
    if len(word) != 2 or word[0] == word[1]:
        raise VlmcError(f"{word!r} is not a context alpha-lis of a comb")
    model.alphabet.check_word(word)
    return word[0], word[1]


def kappa(model: ProbabilizedTree, alpha_lis_word: str,
          policy: SeriesPolicy = DEFAULT_POLICY) -> CascadeSeriesResult:
    """Sum of cascades over all finite contexts with the given alpha-lis."""
    if isinstance(model, CombModel):
        a, b = _comb_bend(model, alpha_lis_word)
        rule = model.rule(a, b)
        value = rule.theta()  # sum_k tail(k): exact closed form
        if math.isinf(value):
            return CascadeSeriesResult.divergent()
        return CascadeSeriesResult.exact(value)
    total = 0.0
    count = 0
    for c in contexts_with_alpha_lis(model, alpha_lis_word):
        total += cascade(model, c)
        count += 1
    return CascadeSeriesResult.exact(total, terms_used=count)


def q_entry(model: ProbabilizedTree, row: str, col: str,
            policy: SeriesPolicy = DEFAULT_POLICY) -> CascadeSeriesResult:
    """Entry Q[row, col]: sum of casc(alpha c) over finite contexts c that
    start with col's lis and have alpha-lis equal to `row`."""
    alpha, s = col[0], col[1:]
    if isinstance(model, CombModel):
        a, b = _comb_bend(model, row)
        _comb_bend(model, col)
        # contexts a^k b starting with the single-letter lis s require s == a
        if s != a:
            return CascadeSeriesResult.exact(0.0)
        rule = model.rule(a, b)
        weight = rule.switch_weights[alpha]
        # sum_k tail(k) (1 - q_k) telescopes to 1 - lim tail
        value = weight * (1.0 - rule.tail_limit())
        return CascadeSeriesResult.exact(value)
    total = 0.0
    count = 0
    for c in contexts_with_alpha_lis(model, row, prefix=s):
        total += cascade(model, alpha + c)
        count += 1
    return CascadeSeriesResult.exact(total, terms_used=count)


def sum_terms_numeric(terms, policy: SeriesPolicy = DEFAULT_POLICY) -> CascadeSeriesResult:
    """Partial-sum a term stream without an analytic certificate.

    Returns Inconclusive unless the stream is exhausted within the policy
    budget (a genuinely finite sum). Kept for term streams that carry no
    closed form; never used for the built-in families.
    """
    total = 0.0
    last = None
    count = 0
    for t in terms:
        total += t
        last = t
        count += 1
        if count >= policy.max_terms:
            return CascadeSeriesResult.inconclusive(total, count, last)
    return CascadeSeriesResult.exact(total, terms_used=count)
