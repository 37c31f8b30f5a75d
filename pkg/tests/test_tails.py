"""Tail rules: closed forms against brute-force products, and samplers
against their own tails."""

import math

import numpy as np
import pytest

from vlmc_walks.errors import VlmcError
from vlmc_walks.streams import stream
from vlmc_walks.tails import Geometric, Polynomial, Table, geometric, polynomial, table

W = {"d": 1.0}


def brute_tail(rule, n: int) -> float:
    out = 1.0
    for k in range(1, n):
        out *= rule.persist(k)
    return out


RULES = [
    geometric(0.3, W),
    geometric(0.8, W),
    polynomial(0.5, W),
    polynomial(2.0, W),
    table([0.9, 0.2, 0.7], geometric(0.4, W), W),
    table([0.6, 0.5], polynomial(1.5, W), W),
    table([0.6, 0.5], polynomial(0.7, W), W),
]


@pytest.mark.parametrize("rule", RULES, ids=[repr(r)[:40] for r in RULES])
def test_tail_matches_brute_product(rule):
    for n in range(1, 30):
        assert rule.tail(n) == pytest.approx(brute_tail(rule, n), rel=1e-12)


def remainder_bracket(rule, n0: int):
    """Bounds on sum_{n >= n0} tail(n) from the decay class of the tail.

    Geometric decay: the sum is exactly tail(n0)/(1-p). Polynomial decay
    with exponent c > 1: bracketed by the integral bounds of C x^(-c).
    """
    kind, par = rule.asymptotics()
    if kind == "geom":
        exact = rule.tail(n0) / (1.0 - par)
        return exact, exact
    c = par
    if c <= 1.0:
        return math.inf, math.inf
    scale = rule.tail(n0) * n0**c
    integral = scale * n0 ** (1.0 - c) / (c - 1.0)
    return integral, integral + rule.tail(n0)


@pytest.mark.parametrize("rule", RULES, ids=[repr(r)[:40] for r in RULES])
def test_theta_matches_partial_sums(rule):
    theta = rule.theta()
    n0 = 4000
    partial = sum(rule.tail(n) for n in range(1, n0))
    lower, upper = remainder_bracket(rule, n0)
    if math.isinf(theta):
        assert math.isinf(lower)
        # divergent p-series: partial sums keep growing without bound
        bigger = sum(rule.tail(n) for n in range(1, 10 * n0))
        assert bigger > partial + 1e-3
    else:
        assert partial + lower - 1e-9 <= theta <= partial + upper + 1e-9


@pytest.mark.parametrize("rule", RULES, ids=[repr(r)[:40] for r in RULES])
def test_tail_sum_from_consistency(rule):
    full = rule.theta()
    if math.isinf(full):
        assert math.isinf(rule.tail_sum_from(5))
        return
    head = sum(rule.tail(n) for n in range(1, 5))
    assert rule.tail_sum_from(5) == pytest.approx(full - head, abs=1e-10)


def test_tail_limits():
    assert geometric(0.5, W).tail_limit() == 0.0
    assert polynomial(0.1, W).tail_limit() == 0.0
    assert geometric(1.0, W, nullable=True).tail_limit() == 1.0
    frozen = table([0.5], geometric(1.0, W, nullable=True), W, nullable=True)
    assert frozen.tail_limit() == pytest.approx(0.5)
    assert math.isinf(frozen.theta())


@pytest.mark.parametrize("rule", RULES, ids=[repr(r)[:40] for r in RULES])
def test_sampler_matches_tail(rule):
    rng = stream(987654, 3)
    taus = rule.sample_runs(rng, 200_000)
    assert taus.min() >= 1.0
    for n in range(1, 21):
        t = rule.tail(n)
        emp = float(np.mean(taus >= n))
        se = math.sqrt(t * (1 - t) / len(taus))
        assert abs(emp - t) <= 4 * se + 1e-12, (n, emp, t)


def test_validation_errors():
    with pytest.raises(VlmcError):
        geometric(1.0, W)  # p = 1 needs an explicit nullable declaration
    with pytest.raises(VlmcError):
        geometric(0.0, W)
    with pytest.raises(VlmcError):
        polynomial(0.0, W)
    with pytest.raises(VlmcError):
        table([0.5], None, W)
    with pytest.raises(VlmcError):
        table([1.5], geometric(0.5, W), W)
    with pytest.raises(VlmcError):
        Geometric(switch_weights={"d": 0.5, "u": 0.4}, p=0.5)  # weights must sum to 1
    with pytest.raises(VlmcError):
        Geometric(switch_weights={"d": 1.0, "u": 0.0}, p=0.5)  # zero weight, not nullable
    with pytest.raises(VlmcError):
        Table(switch_weights=W, entries=(0.5,), fallback=table([0.5], geometric(0.5, W), W))


def test_asymptotics_descriptor():
    assert geometric(0.3, W).asymptotics() == ("geom", 0.3)
    assert polynomial(1.5, W).asymptotics() == ("poly", 1.5)
    assert table([0.5], polynomial(0.7, W), W).asymptotics() == ("poly", 0.7)
