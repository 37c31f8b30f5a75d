"""Finite words and context trees.

Words are plain Python strings of single-character letters, written
newest-letter-first: the process grows by prepending, so both a word and
the memory it encodes are read left to right.

A context tree is a saturated, prefix-stable set of finite words; its
contexts are the leaves (finite memory states) and, for comb families,
one infinite branch per letter. Two kinds are supported:

* explicit trees, given by their finite leaf set;
* combs, whose contexts are a^k b for every ordered pair of distinct
  letters (a, b) and every k >= 1, answered in closed form without ever
  materializing the infinite branches a^infinity.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from .errors import (
    InternalWord,
    NoContextPrefix,
    NotAntichain,
    NotSaturated,
    VlmcError,
)

DEFAULT_LEAF_BUDGET = 10**6


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of distinct single-character letters, size >= 2."""

    letters: str

    def __post_init__(self):
        if len(self.letters) < 2:
            raise VlmcError("alphabet needs at least 2 letters")
        if len(set(self.letters)) != len(self.letters):
            raise VlmcError(f"duplicate letters in alphabet {self.letters!r}")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __contains__(self, letter: str) -> bool:
        return letter in self.letters

    def index(self, letter: str) -> int:
        return self.letters.index(letter)

    def check_word(self, w: str) -> None:
        for ch in w:
            if ch not in self.letters:
                raise VlmcError(f"letter {ch!r} of word {w!r} not in alphabet {self.letters!r}")

    def sort_key(self, w: str):
        """Canonical word order: by length, then letter indices."""
        return (len(w), tuple(self.letters.index(ch) for ch in w))


class NodeKind(enum.Enum):
    INTERNAL = "internal"
    LEAF = "leaf"
    EXTERNAL = "external"


@dataclass(frozen=True)
class AlphaLis:
    """Decomposition w = prefix + alpha + lis, lis the longest internal suffix."""

    alpha: str
    lis: str
    prefix: str

    @property
    def word(self) -> str:
        """The alpha-lis itself (alpha followed by the lis)."""
        return self.alpha + self.lis

    def original(self) -> str:
        return self.prefix + self.alpha + self.lis


class ContextTree:
    """Shared interface of explicit trees and combs."""

    alphabet: Alphabet

    # word classification -------------------------------------------------

    def classify(self, w: str) -> NodeKind:
        raise NotImplementedError

    def is_internal(self, w: str) -> bool:
        return self.classify(w) is NodeKind.INTERNAL

    def is_leaf(self, w: str) -> bool:
        return self.classify(w) is NodeKind.LEAF

    @property
    def is_comb(self) -> bool:
        return isinstance(self, CombTree)

    # contexts -------------------------------------------------------------

    def pref(self, w: str) -> str:
        """The unique context that is a prefix of w.

        Raises InternalWord when w is internal (the context would extend
        beyond w) and NoContextPrefix when no stored prefix is a leaf.
        """
        self.alphabet.check_word(w)
        if self.is_internal(w):
            raise InternalWord(f"pref undefined: {w!r} is internal")
        for j in range(1, len(w) + 1):
            if self.is_leaf(w[:j]):
                return w[:j]
        raise NoContextPrefix(f"no prefix of {w!r} is a context")

    def alpha_lis(self, w: str) -> AlphaLis:
        """Split a nonempty word at its longest internal proper suffix."""
        if not w:
            raise VlmcError("alpha_lis undefined on the empty word")
        self.alphabet.check_word(w)
        for i in range(1, len(w) + 1):
            if self.is_internal(w[i:]):
                return AlphaLis(alpha=w[i - 1], lis=w[i:], prefix=w[: i - 1])
        raise VlmcError("unreachable: the empty suffix is internal in every context tree")

    def finite_contexts(self):
        """Iterate finite contexts in canonical order; combs are infinite."""
        raise NotImplementedError

    def alpha_lis_set(self) -> list[str]:
        """The distinct alpha-lis of all finite contexts, canonically ordered."""
        raise NotImplementedError

    def is_stable(self) -> tuple[bool, str | None]:
        """Whether dropping the first letter of a tree word stays in the tree.

        Returns (True, None) or (False, witness) where the witness is a
        tree word aw with w outside the tree.
        """
        raise NotImplementedError

    @property
    def height(self) -> int | None:
        """Length of the longest finite context, None for combs."""
        raise NotImplementedError


class ExplicitTree(ContextTree):
    """Finite context tree described by its leaf set."""

    def __init__(self, alphabet: Alphabet, leaves: frozenset[str], internal: frozenset[str]):
        self.alphabet = alphabet
        self.leaves = leaves
        self.internal = internal
        self._sorted_leaves = sorted(leaves, key=alphabet.sort_key)

    def classify(self, w: str) -> NodeKind:
        self.alphabet.check_word(w)
        if w in self.internal:
            return NodeKind.INTERNAL
        if w in self.leaves:
            return NodeKind.LEAF
        return NodeKind.EXTERNAL

    def finite_contexts(self):
        return iter(self._sorted_leaves)

    def alpha_lis_set(self) -> list[str]:
        seen = {self.alpha_lis(c).word for c in self.leaves}
        return sorted(seen, key=self.alphabet.sort_key)

    def is_stable(self) -> tuple[bool, str | None]:
        members = self.internal | self.leaves
        witness = None
        for v in sorted(members, key=self.alphabet.sort_key):
            if len(v) >= 1 and v[1:] not in members:
                witness = v
                break
        stable_i = witness is None
        # Cross-check the equivalent formulation: a context preceded by any
        # letter must be non-internal.
        stable_ii = all(
            a + c not in self.internal for c in self.leaves for a in self.alphabet
        )
        if stable_i != stable_ii:
            raise VlmcError(
                "stability conditions disagree on this tree; invariant violated"
            )
        return stable_i, witness

    @property
    def height(self) -> int:
        return max(len(c) for c in self.leaves)

    def __repr__(self):
        return f"ExplicitTree({len(self.leaves)} leaves, height {self.height})"


class CombTree(ContextTree):
    """Comb on the full alphabet: contexts a^k b for all pairs a != b, k >= 1."""

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def classify(self, w: str) -> NodeKind:
        self.alphabet.check_word(w)
        if len(w) == 0 or len(set(w)) == 1:
            return NodeKind.INTERNAL
        body, last = w[:-1], w[-1]
        if len(set(body)) == 1 and last != body[0]:
            return NodeKind.LEAF
        return NodeKind.EXTERNAL

    def pref(self, w: str) -> str:
        self.alphabet.check_word(w)
        if len(w) == 0 or len(set(w)) == 1:
            raise InternalWord(f"pref undefined: {w!r} is internal")
        a = w[0]
        k = 1
        while w[k] == a:
            k += 1
        return w[: k + 1]

    def finite_contexts(self):
        for k in itertools.count(1):
            for a in self.alphabet:
                for b in self.alphabet:
                    if b != a:
                        yield a * k + b

    def alpha_lis_set(self) -> list[str]:
        pairs = [a + b for a in self.alphabet for b in self.alphabet if b != a]
        return sorted(pairs, key=self.alphabet.sort_key)

    def is_stable(self) -> tuple[bool, str | None]:
        # Dropping the head of a^k or a^k b stays in the comb.
        return True, None

    @property
    def height(self) -> int | None:
        return None

    def contexts_of_alpha_lis(self, bend: str, k: int) -> str:
        """The unique context of length k+1 whose alpha-lis is `bend`."""
        a, b = bend[0], bend[1]
        return a * k + b

    def __repr__(self):
        return f"CombTree(alphabet={self.alphabet.letters!r})"


def build_explicit_tree(
    alphabet: Alphabet,
    leaves,
    leaf_budget: int = DEFAULT_LEAF_BUDGET,
) -> ExplicitTree:
    """Validate a leaf set and assemble the finite context tree it spans.

    The leaves must be nonempty words forming an antichain under the
    prefix order, and the prefix closure must be saturated: every internal
    node has one child per letter.
    """
    leaves = frozenset(leaves)
    if not leaves:
        raise VlmcError("empty leaf set")
    if len(leaves) > leaf_budget:
        raise VlmcError(f"leaf set exceeds budget ({len(leaves)} > {leaf_budget})")
    for w in leaves:
        if w == "":
            raise VlmcError("the empty word cannot be a leaf (memoryless trees unsupported)")
        alphabet.check_word(w)
    ordered = sorted(leaves, key=len)
    for i, shorter in enumerate(ordered):
        for longer in ordered[i + 1 :]:
            if longer.startswith(shorter):
                raise NotAntichain(shorter, longer)
    internal = set()
    for w in leaves:
        for j in range(len(w)):
            internal.add(w[:j])
    members = internal | leaves
    for u in internal:
        for b in alphabet:
            if u + b not in members:
                raise NotSaturated(u, u + b)
    return ExplicitTree(alphabet, leaves, frozenset(internal))


def double_comb() -> CombTree:
    """Comb on {d, u}; drives the one-dimensional persistent walk."""
    return CombTree(Alphabet("du"))


def quadruple_comb() -> CombTree:
    """Comb on {n, e, w, s}; drives the two-dimensional persistent walk."""
    return CombTree(Alphabet("news"))


def truncate_comb(comb: CombTree, depth: int) -> ExplicitTree:
    """Finite tree agreeing with the comb on all words shorter than `depth`.

    Leaves are the comb contexts a^k b with k < depth plus one cut leaf
    a^depth per letter closing each infinite branch.
    """
    if depth < 2:
        raise VlmcError("truncation depth must be at least 2")
    leaves = []
    for a in comb.alphabet:
        leaves.append(a * depth)
        for k in range(1, depth):
            for b in comb.alphabet:
                if b != a:
                    leaves.append(a * k + b)
    return build_explicit_tree(comb.alphabet, leaves)
