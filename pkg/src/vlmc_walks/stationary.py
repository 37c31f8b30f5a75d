"""Existence, uniqueness and construction of stationary measures.

For a stable, non-null model with finitely many context alpha-lis, the
stationary masses pi(a s R) on the alpha-lis set solve a finite linear
system: they form the left-fixed probability vector of the matrix Q of
cascade sums. The measure of any finite cylinder w R then follows from

    pi(w R) = casc(w) * pi(alpha-lis(w) R),

extended by a certified sum over contexts when the alpha-lis of w is not
itself a context alpha-lis. Total mass is fixed by requiring the
one-letter cylinders to sum to 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .cascades import (
    DEFAULT_POLICY,
    CascadeSeriesResult,
    SeriesPolicy,
    SeriesStatus,
    cascade,
    kappa,
    q_entry,
)
from .errors import (
    InconclusiveSeries,
    NoConvergence,
    NotStochastic,
    Reducible,
    UnsupportedModel,
    VlmcError,
)
from .process import CombModel, ProbabilizedTree, validate_non_null

STOCHASTIC_TOL = 1e-9
RESIDUAL_TOL = 1e-12
DIRECT_SOLVE_LIMIT = 64


@dataclass
class QMatrix:
    index: list[str]                 # alpha-lis words, canonical order
    matrix: np.ndarray               # entries Q[row, col]
    results: dict[tuple[str, str], CascadeSeriesResult]

    def loc(self, row: str, col: str) -> float:
        return float(self.matrix[self.index.index(row), self.index.index(col)])

    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)


def build_q_matrix(model: ProbabilizedTree,
                   policy: SeriesPolicy = DEFAULT_POLICY) -> QMatrix:
    """Assemble Q over the alpha-lis set; every entry carries a certificate."""
    stable, witness = model.tree.is_stable()
    if not stable:
        raise UnsupportedModel(f"tree is not stable (witness {witness!r})")
    index = model.tree.alpha_lis_set()
    n = len(index)
    matrix = np.zeros((n, n))
    results = {}
    for i, row in enumerate(index):
        for j, col in enumerate(index):
            res = q_entry(model, row, col, policy)
            results[(row, col)] = res
            if res.status is SeriesStatus.INCONCLUSIVE:
                raise InconclusiveSeries(f"Q entry ({row}, {col}) is inconclusive")
            if res.diverges:
                matrix[i, j] = math.inf
            else:
                matrix[i, j] = res.value
    return QMatrix(index=index, matrix=matrix, results=results)


def solve_left_fixed(q: QMatrix | np.ndarray) -> np.ndarray:
    """Unique probability vector v with v Q = v.

    Requires Q row-stochastic within 1e-9 and irreducible. Solved directly
    up to 64 states, by damped power iteration beyond; the returned vector
    satisfies max|vQ - v| <= 1e-12.
    """
    matrix = q.matrix if isinstance(q, QMatrix) else np.asarray(q, dtype=float)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise VlmcError("matrix must be square")
    if not np.all(np.isfinite(matrix)):
        raise NotStochastic("matrix has non-finite entries")
    sums = matrix.sum(axis=1)
    bad = np.abs(sums - 1.0) > STOCHASTIC_TOL
    if np.any(bad):
        i = int(np.argmax(np.abs(sums - 1.0)))
        raise NotStochastic(f"row {i} sums to {sums[i]:.12g}")
    support = csr_matrix(matrix > 0)
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    if n_comp != 1:
        blocks = [list(np.nonzero(labels == c)[0]) for c in range(n_comp)]
        raise Reducible(blocks)
    if n <= DIRECT_SOLVE_LIMIT:
        a = matrix.T - np.eye(n)
        a[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        v = np.linalg.solve(a, b)
    else:
        # damp to kill periodicity; fixed vectors are unchanged
        damped = 0.5 * (matrix + np.eye(n))
        v = np.full(n, 1.0 / n)
        for _ in range(200_000):
            nxt = v @ damped
            nxt /= nxt.sum()
            if np.max(np.abs(nxt @ matrix - nxt)) <= RESIDUAL_TOL:
                v = nxt
                break
            v = nxt
        else:
            raise NoConvergence("power iteration did not reach residual 1e-12")
    v = np.where(np.abs(v) < 1e-15, 0.0, v)
    if np.any(v < 0):
        raise NoConvergence("fixed vector has negative entries")
    v = v / v.sum()
    residual = float(np.max(np.abs(v @ matrix - v)))
    if residual > RESIDUAL_TOL:
        raise NoConvergence(f"residual {residual:.3e} exceeds 1e-12")
    return v


# ---------------------------------------------------------------------------
# cylinder evaluation
# ---------------------------------------------------------------------------

def _alpha_s_mass(model: ProbabilizedTree, alpha: str, s: str,
                  base: dict[str, float]) -> float:
    """pi(alpha s R) as a certified sum of casc(alpha c) * base[alpha-lis(c)]
    over the finite contexts c extending the internal word s."""
    if isinstance(model, CombModel):
        total = 0.0
        j = len(s)
        if j > 0 and len(set(s)) != 1:
            raise VlmcError(f"{s!r} is not internal in a comb")
        for (a, b), rule in model.rules.items():
            if j > 0 and s[0] != a:
                continue
            kmin = max(j, 1)
            mass = base[a + b]
            if alpha == a:
                # sum_{k >= kmin} tail(k+1)
                contrib = rule.tail_sum_from(kmin + 1)
            else:
                # sum_{k >= kmin} tail(k) (1-q_k) w_alpha telescopes
                contrib = rule.switch_weights[alpha] * (rule.tail(kmin) - rule.tail_limit())
            if math.isinf(contrib):
                raise InconclusiveSeries("cylinder sum diverges; no probability measure")
            total += contrib * mass
        return total
    total = 0.0
    for c in model.tree.finite_contexts():
        if c.startswith(s):
            lis_word = model.tree.alpha_lis(c).word
            total += cascade(model, alpha + c) * base[lis_word]
    return total


@dataclass
class StationaryMeasure:
    """Stationary masses on the alpha-lis set plus a cylinder evaluator."""

    model: ProbabilizedTree
    base: dict[str, float]          # word alpha s -> pi(alpha s R)
    fixed_residual: float           # max|vQ - v| before scaling
    scale_total: float              # pre-normalization one-letter mass

    def cylinder(self, w: str) -> float:
        """pi(w R) for a finite nonempty word w."""
        dec = self.model.tree.alpha_lis(w)
        if dec.word in self.base:
            head = self.base[dec.word]
        else:
            head = _alpha_s_mass(self.model, dec.alpha, dec.lis, self.base)
        return cascade(self.model, w) * head

    def letter_masses(self) -> dict[str, float]:
        return {a: self.cylinder(a) for a in self.model.alphabet}


class Stationarity(enum.Enum):
    UNIQUE_PROBABILITY = "unique probability measure"
    SIGMA_FINITE_ONLY = "sigma-finite invariant measure only"
    NO_INVARIANT_MEASURE = "no invariant measure"
    UNSUPPORTED = "unsupported"


@dataclass
class StationarityVerdict:
    outcome: Stationarity
    reason: str
    measure: StationaryMeasure | None = None
    kappas: dict[str, CascadeSeriesResult] = field(default_factory=dict)

    @property
    def unique(self) -> bool:
        return self.outcome is Stationarity.UNIQUE_PROBABILITY


def pi_cylinder(measure: StationaryMeasure, w: str) -> float:
    return measure.cylinder(w)


def build_measure(model: ProbabilizedTree,
                  policy: SeriesPolicy = DEFAULT_POLICY) -> StationaryMeasure:
    """Solve the alpha-lis system and normalize one-letter cylinders to 1."""
    qm = build_q_matrix(model, policy)
    v = solve_left_fixed(qm)
    residual = float(np.max(np.abs(v @ qm.matrix - v)))
    base = {word: float(x) for word, x in zip(qm.index, v)}
    total = sum(_alpha_s_mass(model, a, "", base) for a in model.alphabet)
    if not (total > 0 and math.isfinite(total)):
        raise VlmcError(f"normalization mass {total} is not a positive real")
    scaled = {word: x / total for word, x in base.items()}
    return StationaryMeasure(model=model, base=scaled,
                             fixed_residual=residual, scale_total=total)


def stationarity_verdict(model: ProbabilizedTree,
                         policy: SeriesPolicy = DEFAULT_POLICY) -> StationarityVerdict:
    """Total decision: unique probability / sigma-finite only / none / unsupported."""
    stable, witness = model.tree.is_stable()
    if not stable:
        return StationarityVerdict(
            Stationarity.UNSUPPORTED,
            f"tree is not stable (witness {witness!r}); the finite alpha-lis "
            "system does not describe the stationary measure",
        )
    if isinstance(model, CombModel):
        for (a, b), rule in sorted(model.rules.items()):
            if rule.tail_limit() > 0.0:
                return StationarityVerdict(
                    Stationarity.NO_INVARIANT_MEASURE,
                    f"cascade terms of pair ({a},{b}) do not vanish "
                    f"(limit {rule.tail_limit():.6g}); runs of {a!r} can be infinite",
                )
    nn = validate_non_null(model)
    if not nn.ok:
        return StationarityVerdict(
            Stationarity.UNSUPPORTED,
            f"model is null at {nn.witnesses[:3]}; uniqueness theory needs "
            "every transition probability positive",
        )
    try:
        index = model.tree.alpha_lis_set()
    except VlmcError as exc:
        return StationarityVerdict(Stationarity.UNSUPPORTED, str(exc))
    kappas = {word: kappa(model, word, policy) for word in index}
    if any(r.status is SeriesStatus.INCONCLUSIVE for r in kappas.values()):
        bad = [w for w, r in kappas.items() if r.status is SeriesStatus.INCONCLUSIVE]
        return StationarityVerdict(
            Stationarity.UNSUPPORTED,
            f"cascade series inconclusive for {bad}",
            kappas=kappas,
        )
    if all(r.converged for r in kappas.values()):
        measure = build_measure(model, policy)
        return StationarityVerdict(
            Stationarity.UNIQUE_PROBABILITY,
            "stable, non-null, finite alpha-lis set, all cascade series converge",
            measure=measure,
            kappas=kappas,
        )
    if isinstance(model, CombModel):
        bad = [w for w, r in kappas.items() if r.diverges]
        return StationarityVerdict(
            Stationarity.SIGMA_FINITE_ONLY,
            f"cascade terms vanish but the series of {bad} diverge; the "
            "invariant measure has infinite total mass",
            kappas=kappas,
        )
    return StationarityVerdict(
        Stationarity.UNSUPPORTED,
        "divergent cascade series outside the comb family",
        kappas=kappas,
    )
