"""Persistence-tail rules for comb models.

A rule governs one ordered letter pair (a, b): it gives the probability
q_k of emitting another `a` when the memory is a^k b, and how the
switching mass 1 - q_k splits over the other letters. The run length tau
of consecutive a's then has tail

    P(tau >= n) = prod_{k=1}^{n-1} q_k,

and everything downstream (cascade series, run-length sampling, drift
quantities) reduces to closed forms of that product:

* geometric(p):   q_k = p           tail(n) = p^(n-1)
* polynomial(c):  q_k = (k/(k+1))^c tail(n) = n^(-c)
* table:          finite list of q_k, then a geometric or polynomial
                  fallback continues the tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import VlmcError

# Probabilities below this are reported as exact zeros by non-nullness checks.
ZERO_EPS = 1e-15


@dataclass(frozen=True)
class TailRule:
    """Base class; concrete rules implement persist/tail/theta and sampling."""

    switch_weights: dict[str, float] = field(default_factory=dict)
    nullable: bool = False

    def __post_init__(self):
        if not self.switch_weights:
            raise VlmcError("switch_weights must name at least one letter")
        total = sum(self.switch_weights.values())
        if abs(total - 1.0) > 1e-12:
            raise VlmcError(f"switch_weights sum to {total}, expected 1")
        if not self.nullable:
            for letter, wgt in self.switch_weights.items():
                if wgt <= ZERO_EPS:
                    raise VlmcError(
                        f"switch weight for {letter!r} is zero; declare nullable to allow"
                    )

    # per-step persistence -------------------------------------------------

    def persist(self, k: int) -> float:
        """q_k: probability of persisting at run position k >= 1."""
        raise NotImplementedError

    def tail(self, n: int) -> float:
        """P(tau >= n) = prod_{k<n} q_k, n >= 1."""
        raise NotImplementedError

    def tail_limit(self) -> float:
        """lim_n P(tau >= n); zero exactly when runs are a.s. finite."""
        raise NotImplementedError

    def theta(self) -> float:
        """E[tau] = sum_n tail(n), possibly math.inf; always certified."""
        raise NotImplementedError

    def tail_sum_from(self, n0: int) -> float:
        """sum_{n>=n0} tail(n) in closed form (math.inf when divergent)."""
        raise NotImplementedError

    def asymptotics(self) -> tuple[str, float]:
        """("geom", p) or ("poly", c): the decay class of the tail."""
        raise NotImplementedError

    def sample_runs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Exact inverse-CDF sample of `size` run lengths, as float64.

        Values are exact integers up to 2**53; heavier draws lose integer
        precision but keep the correct magnitude.
        """
        raise NotImplementedError

    def null_pairs(self):
        """(k or None, letter) entries whose transition probability vanishes.

        k None means "for every k"; used by non-nullness reporting.
        """
        out = []
        for letter, wgt in self.switch_weights.items():
            if wgt <= ZERO_EPS:
                out.append((None, letter))
        return out


def _uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    # (0, 1] avoids log(0) and keeps inverse-CDF formulas exact at the edge.
    return 1.0 - rng.random(size)


@dataclass(frozen=True)
class Geometric(TailRule):
    p: float = 0.5

    def __post_init__(self):
        super().__post_init__()
        if not (0.0 < self.p < 1.0) and not (self.nullable and self.p == 1.0):
            raise VlmcError(f"geometric persistence needs 0 < p < 1, got {self.p}")

    def persist(self, k: int) -> float:
        return self.p

    def tail(self, n: int) -> float:
        return self.p ** (n - 1)

    def tail_limit(self) -> float:
        return 0.0 if self.p < 1.0 else 1.0

    def theta(self) -> float:
        return math.inf if self.p == 1.0 else 1.0 / (1.0 - self.p)

    def tail_sum_from(self, n0: int) -> float:
        if self.p == 1.0:
            return math.inf
        return self.p ** (n0 - 1) / (1.0 - self.p)

    def asymptotics(self) -> tuple[str, float]:
        return ("geom", self.p)

    def sample_runs(self, rng, size):
        if self.p == 1.0:
            return np.full(size, math.inf)
        u = _uniforms(rng, size)
        return 1.0 + np.floor(np.log(u) / math.log(self.p))


@dataclass(frozen=True)
class Polynomial(TailRule):
    c: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.c <= 0.0:
            raise VlmcError(f"polynomial persistence needs c > 0, got {self.c}")

    def persist(self, k: int) -> float:
        return (k / (k + 1.0)) ** self.c

    def tail(self, n: int) -> float:
        return float(n) ** (-self.c)

    def tail_limit(self) -> float:
        return 0.0

    def theta(self) -> float:
        return math.inf if self.c <= 1.0 else float(zeta(self.c, 1))

    def tail_sum_from(self, n0: int) -> float:
        if self.c <= 1.0:
            return math.inf
        return float(zeta(self.c, n0))

    def asymptotics(self) -> tuple[str, float]:
        return ("poly", self.c)

    def sample_runs(self, rng, size):
        u = _uniforms(rng, size)
        return np.maximum(1.0, np.floor(u ** (-1.0 / self.c)))


@dataclass(frozen=True)
class Table(TailRule):
    """Finite list of persistence probabilities with an analytic fallback."""

    entries: tuple[float, ...] = ()
    fallback: TailRule | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.fallback is None:
            raise VlmcError("table rule needs a geometric or polynomial fallback")
        if isinstance(self.fallback, Table):
            raise VlmcError("table fallback must be geometric or polynomial")
        for q in self.entries:
            ok = 0.0 < q < 1.0 or (self.nullable and q == 1.0)
            if not ok:
                raise VlmcError(f"table entry {q} outside (0,1)")
        object.__setattr__(self, "entries", tuple(float(q) for q in self.entries))
        # tail(n) for n = 1 .. m+1 where m = len(entries)
        tails = [1.0]
        for q in self.entries:
            tails.append(tails[-1] * q)
        object.__setattr__(self, "_prefix_tails", tuple(tails))

    @property
    def m(self) -> int:
        return len(self.entries)

    def persist(self, k: int) -> float:
        if k <= self.m:
            return self.entries[k - 1]
        return self.fallback.persist(k)

    def tail(self, n: int) -> float:
        if n <= self.m + 1:
            return self._prefix_tails[n - 1]
        edge = self._prefix_tails[self.m]
        fb = self.fallback
        if isinstance(fb, Geometric):
            return edge * fb.p ** (n - 1 - self.m)
        # polynomial continuation: prod_{k=m+1}^{n-1} (k/(k+1))^c
        return edge * ((self.m + 1) / n) ** fb.c

    def tail_limit(self) -> float:
        return self._prefix_tails[self.m] * self.fallback.tail_limit()

    def theta(self) -> float:
        return self.tail_sum_from(1)

    def tail_sum_from(self, n0: int) -> float:
        head = sum(self.tail(n) for n in range(n0, self.m + 1))
        start = max(n0, self.m + 1)
        edge = self._prefix_tails[self.m]
        fb = self.fallback
        if isinstance(fb, Geometric):
            if fb.p == 1.0:
                return math.inf
            return head + edge * fb.p ** (start - 1 - self.m) / (1.0 - fb.p)
        if fb.c <= 1.0:
            return math.inf
        return head + edge * (self.m + 1) ** fb.c * float(zeta(fb.c, start))

    def asymptotics(self) -> tuple[str, float]:
        return self.fallback.asymptotics()

    def sample_runs(self, rng, size):
        u = _uniforms(rng, size)
        # tau >= n iff u <= tail(n); walk the finite prefix by searchsorted
        # on the decreasing tails, then continue with the fallback law.
        tails = np.array(self._prefix_tails)  # tail(1..m+1)
        # position of u among tail(2..m+1): count of tails > u beyond tail(1)
        counts = np.searchsorted(-tails[1:], -u, side="right")
        tau = 1.0 + counts
        beyond = counts == self.m  # survived the whole prefix: tau >= m+1
        if np.any(beyond):
            edge = tails[self.m]
            v = u[beyond] / edge  # uniform on (0, 1] given survival
            fb = self.fallback
            if isinstance(fb, Geometric):
                if fb.p == 1.0:
                    extra = np.full(v.shape, math.inf)
                else:
                    extra = np.floor(np.log(v) / math.log(fb.p))
                tau[beyond] = self.m + 1.0 + extra
            else:
                n = np.floor((self.m + 1) * v ** (-1.0 / fb.c))
                tau[beyond] = np.maximum(self.m + 1.0, n)
        return tau

    def null_pairs(self):
        out = super().null_pairs()
        for idx, q in enumerate(self.entries):
            if q >= 1.0 - ZERO_EPS:
                for letter in self.switch_weights:
                    out.append((idx + 1, letter))
        if self.fallback.tail_limit() > 0.0:
            # fallback persists forever: switching mass vanishes beyond m
            for letter in self.switch_weights:
                out.append((self.m + 1, letter))
        return out


def geometric(p: float, switch_weights: dict[str, float], nullable: bool = False) -> Geometric:
    return Geometric(switch_weights=switch_weights, nullable=nullable, p=p)


def polynomial(c: float, switch_weights: dict[str, float], nullable: bool = False) -> Polynomial:
    return Polynomial(switch_weights=switch_weights, nullable=nullable, c=c)


def table(
    entries,
    fallback: TailRule,
    switch_weights: dict[str, float],
    nullable: bool = False,
) -> Table:
    return Table(
        switch_weights=switch_weights,
        nullable=nullable,
        entries=tuple(entries),
        fallback=fallback,
    )
