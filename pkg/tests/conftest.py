"""Shared fixtures: reference trees, random model generators, and the
order-h Markov-chain oracle used to cross-check the stationary pipeline."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from vlmc_walks.process import CombModel, ExplicitModel
from vlmc_walks.tails import geometric, polynomial
from vlmc_walks.trees import Alphabet, build_explicit_tree, double_comb, quadruple_comb

# A stable binary tree with nine contexts and four context alpha-lis
# (10, 000, 111, 0011); small enough for exhaustive checks, rich enough
# that one alpha-lis (10) is shared by five contexts.
NINE_LEAVES = ("10", "010", "110", "0010", "0110", "000", "111", "0111", "0011")

BINARY = Alphabet("01")


@pytest.fixture(scope="session")
def nine_tree():
    return build_explicit_tree(BINARY, NINE_LEAVES)


@pytest.fixture(scope="session")
def nine_uniform_model(nine_tree):
    return ExplicitModel(nine_tree, {c: (0.5, 0.5) for c in NINE_LEAVES})


def random_row(rng: np.random.Generator, size: int) -> tuple[float, ...]:
    """Probability row bounded away from zero (non-null by construction)."""
    p = 0.9 * rng.dirichlet(np.ones(size)) + 0.1 / size
    p = p / p.sum()
    return tuple(float(x) for x in p)


def random_explicit_model(tree, rng: np.random.Generator) -> ExplicitModel:
    return ExplicitModel(tree, {c: random_row(rng, len(tree.alphabet)) for c in tree.leaves})


def random_saturated_leaves(rng: np.random.Generator, letters: str = "01",
                            max_height: int = 5, p_expand: float = 0.55) -> set[str]:
    leaves: set[str] = set()

    def grow(node: str):
        if node and (len(node) >= max_height or rng.random() > p_expand):
            leaves.add(node)
            return
        for b in letters:
            grow(node + b)

    grow("")
    return leaves


def stabilized_leaves(leaves, letters: str = "01") -> set[str]:
    """Close a saturated leaf set under head-letter removal, re-saturating.

    The result is a stable saturated tree of the same height bound.
    """
    members = set()
    for w in leaves:
        members.add(w)
        for j in range(len(w)):
            members.add(w[:j])
    changed = True
    while changed:
        changed = False
        for w in list(members):
            if w and w[1:] not in members:
                members.add(w[1:])
                changed = True
            for j in range(len(w)):
                if w[:j] not in members:
                    members.add(w[:j])
                    changed = True
        for w in list(members):
            if any(w + b in members for b in letters):
                for b in letters:
                    if w + b not in members:
                        members.add(w + b)
                        changed = True
    return {w for w in members if w and all(w + b not in members for b in letters)}


def random_stable_tree(rng: np.random.Generator, letters: str = "01", max_height: int = 5):
    leaves = stabilized_leaves(random_saturated_leaves(rng, letters, max_height), letters)
    return build_explicit_tree(Alphabet(letters), leaves)


# ---------------------------------------------------------------------------
# order-h Markov-chain oracle (independent route to the stationary measure)
# ---------------------------------------------------------------------------

def order_h_states(alphabet: Alphabet, h: int) -> list[str]:
    return ["".join(t) for t in itertools.product(alphabet.letters, repeat=h)]


def order_h_matrix(model, h: int) -> tuple[list[str], np.ndarray]:
    """Sliding-window chain on words of length h (newest letter first)."""
    states = order_h_states(model.alphabet, h)
    pos = {w: i for i, w in enumerate(states)}
    t = np.zeros((len(states), len(states)))
    for w in states:
        probs = model.q_vector(model.tree.pref(w))
        for letter, p in zip(model.alphabet.letters, probs):
            t[pos[w], pos[(letter + w)[:h]]] += p
    return states, t


def order_h_stationary(model, h: int) -> dict[str, float]:
    """Left eigenvector for eigenvalue 1, by plain eigendecomposition."""
    states, t = order_h_matrix(model, h)
    vals, vecs = np.linalg.eig(t.T)
    i = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(vecs[:, i])
    v = np.abs(v)
    v = v / v.sum()
    return dict(zip(states, v))


def oracle_cylinders(model, h: int) -> dict[str, float]:
    """pi(w R) for all words of length 1..h, aggregated from window masses."""
    rho = order_h_stationary(model, h)
    out: dict[str, float] = {}
    for length in range(1, h + 1):
        for t in itertools.product(model.alphabet.letters, repeat=length):
            w = "".join(t)
            out[w] = sum(mass for state, mass in rho.items() if state.startswith(w))
    return out


# ---------------------------------------------------------------------------
# comb model shorthands
# ---------------------------------------------------------------------------

def dc_geometric(p_up: float, p_down: float) -> CombModel:
    return CombModel(double_comb(), {
        ("u", "d"): geometric(p_up, {"d": 1.0}),
        ("d", "u"): geometric(p_down, {"u": 1.0}),
    })


def dc_polynomial(c_up: float, c_down: float) -> CombModel:
    return CombModel(double_comb(), {
        ("u", "d"): polynomial(c_up, {"d": 1.0}),
        ("d", "u"): polynomial(c_down, {"u": 1.0}),
    })


def qc_geometric_drrw(p: float) -> CombModel:
    rules = {}
    for a in "news":
        others = [x for x in "news" if x != a]
        w = {x: 1.0 / 3.0 for x in others}
        for b in others:
            rules[(a, b)] = geometric(p, w)
    return CombModel(quadruple_comb(), rules)
