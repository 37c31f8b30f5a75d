"""One-dimensional persistent random walk driven by a double comb.

The walk keeps its current direction (d = -1, u = +1) with a probability
depending on the run length so far. Runs alternate and their lengths are
independent, with tails given by the products of persistence
probabilities, so every asymptotic quantity (mean run lengths Theta,
drifts, the tail-comparison series deciding the infinite-mean regime) is
computable from the two tail rules in closed form. The classifier
dispatches on those certified values; simulation is for empirical checks
and for trajectories.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .cascades import DEFAULT_POLICY, CascadeSeriesResult, SeriesPolicy, SeriesStatus
from .errors import (
    Assumption1Violated,
    InternalConsistencyError,
    RunCapExceeded,
    VlmcError,
)
from .process import CombModel, LetterTrace, simulate_letters
from .streams import stream
from .tails import TailRule
from .trees import double_comb

INIT_1D = "du"  # newest first: the walk starts mid d-run, after a u-run


def double_comb_model(up_rule: TailRule, down_rule: TailRule) -> CombModel:
    """Double-comb model: up_rule governs runs of u, down_rule runs of d."""
    if set(up_rule.switch_weights) != {"d"} or set(down_rule.switch_weights) != {"u"}:
        raise VlmcError("1-d rules must switch to the single opposite letter")
    return CombModel(double_comb(), {("u", "d"): up_rule, ("d", "u"): down_rule})


def _rule(model: CombModel, direction: str) -> TailRule:
    other = "d" if direction == "u" else "u"
    return model.rule(direction, other)


def assumption1_report(model: CombModel) -> dict[str, float]:
    """Limit of the cascade terms per direction; all zero iff runs are a.s. finite."""
    return {a: _rule(model, a).tail_limit() for a in ("d", "u")}


def persistence_tail(model: CombModel, direction: str, n: int) -> float:
    """P(tau >= n) for a run in the given direction; 1 when n = 1."""
    if n < 1:
        raise VlmcError("n must be >= 1")
    return _rule(model, direction).tail(n)


def theta(model: CombModel, direction: str) -> float:
    """Expected run length in a direction, possibly inf; needs a.s. finite runs."""
    rule = _rule(model, direction)
    if rule.tail_limit() > 0.0:
        raise Assumption1Violated(
            f"runs of {direction!r} are infinite with probability "
            f"{rule.tail_limit():.6g}; the expectation is meaningless"
        )
    return rule.theta()


def erickson_series(model: CombModel, alpha: str, beta: str,
                    policy: SeriesPolicy = DEFAULT_POLICY) -> CascadeSeriesResult:
    """The tail-comparison series sum_n n P(tau_alpha = n) / sum_{k<=n} P(tau_beta >= k).

    Convergence is decided analytically from the decay classes of the two
    tails; the numeric value of a convergent series is a truncation at the
    policy budget (reported in terms_used).
    """
    ra, rb = _rule(model, alpha), _rule(model, beta)
    for r, name in ((ra, alpha), (rb, beta)):
        if r.tail_limit() > 0.0:
            raise Assumption1Violated(f"runs of {name!r} may be infinite")
    theta_b = rb.theta()
    kind_a, par_a = ra.asymptotics()
    kind_b, par_b = rb.asymptotics()
    if math.isfinite(theta_b):
        converges = math.isfinite(ra.theta())
    else:
        # denominator grows like n^(1-c_b) (log n at c_b = 1)
        if kind_a == "geom":
            converges = True
        else:
            converges = par_b < par_a
    if not converges:
        return CascadeSeriesResult.divergent()
    # certified convergent: accumulate a truncation for reporting
    total = 0.0
    denom = 0.0
    last = 0.0
    n = 0
    tail_a_n = ra.tail(1)
    while n < min(policy.max_terms, 100_000):
        n += 1
        denom += rb.tail(n)
        tail_next = ra.tail(n + 1)
        p_eq = tail_a_n - tail_next
        tail_a_n = tail_next
        last = n * p_eq / denom
        total += last
        if last < policy.abs_tol and tail_next < policy.abs_tol:
            break
    return CascadeSeriesResult(SeriesStatus.CONVERGED, total, n, last, analytic=True)


@dataclass
class DriftReport:
    theta_u: float
    theta_d: float
    d_m: float | None            # Theta_u - Theta_d, None when both infinite
    d_s: float | None            # normalized drift in [-1, 1], None when both infinite
    j_ud: CascadeSeriesResult
    j_du: CascadeSeriesResult
    warnings: list[str] = field(default_factory=list)


class Verdict1D(enum.Enum):
    RECURRENT = "recurrent"
    DRIFTING_PLUS = "drifting to +infinity"
    DRIFTING_MINUS = "drifting to -infinity"
    UNDECIDABLE = "undecidable"


@dataclass
class Classification1D:
    verdict: Verdict1D
    rule_fired: str
    report: DriftReport
    reason: str = ""


D_S_ZERO_TOL = 1e-12


def drift_report(model: CombModel, policy: SeriesPolicy = DEFAULT_POLICY) -> DriftReport:
    t_u, t_d = theta(model, "u"), theta(model, "d")
    warnings: list[str] = []
    if math.isinf(t_u) and math.isinf(t_d):
        d_m = None
        d_s = None
    elif math.isinf(t_u):
        d_m, d_s = math.inf, 1.0
    elif math.isinf(t_d):
        d_m, d_s = -math.inf, -1.0
    else:
        d_m = t_u - t_d
        d_s = (t_u - t_d) / (t_u + t_d)
    j_ud = erickson_series(model, "u", "d", policy)
    j_du = erickson_series(model, "d", "u", policy)
    return DriftReport(theta_u=t_u, theta_d=t_d, d_m=d_m, d_s=d_s,
                       j_ud=j_ud, j_du=j_du, warnings=warnings)


def classify(model: CombModel, policy: SeriesPolicy = DEFAULT_POLICY) -> Classification1D:
    """Recurrence/transience dispatch on the certified drift quantities."""
    report = drift_report(model, policy)
    t_u, t_d = report.theta_u, report.theta_d
    if math.isfinite(t_u) and math.isfinite(t_d):
        up, down = _rule(model, "u"), _rule(model, "d")
        exact_zero = (
            type(up).__name__ == "Geometric"
            and type(down).__name__ == "Geometric"
            and up.p == down.p
        )
        d_s = 0.0 if exact_zero else report.d_s
        if not exact_zero and d_s != 0.0 and abs(d_s) < D_S_ZERO_TOL:
            report.warnings.append(
                f"|d_S| = {abs(d_s):.3e} below {D_S_ZERO_TOL}; treated as exactly zero"
            )
            d_s = 0.0
        if not exact_zero and d_s == 0.0:
            report.warnings.append(
                "d_S = 0 decided in floating point, not on rationals"
            )
        if d_s == 0.0:
            return Classification1D(Verdict1D.RECURRENT, "both_theta_finite.ds_zero", report)
        if d_s > 0:
            return Classification1D(Verdict1D.DRIFTING_PLUS, "both_theta_finite.ds_positive", report)
        return Classification1D(Verdict1D.DRIFTING_MINUS, "both_theta_finite.ds_negative", report)
    if math.isinf(t_u) and math.isfinite(t_d):
        return Classification1D(Verdict1D.DRIFTING_PLUS, "theta_u_infinite_only", report)
    if math.isinf(t_d) and math.isfinite(t_u):
        return Classification1D(Verdict1D.DRIFTING_MINUS, "theta_d_infinite_only", report)
    # both mean run lengths infinite: tail comparison decides
    j_ud, j_du = report.j_ud, report.j_du
    if j_ud.status is SeriesStatus.INCONCLUSIVE or j_du.status is SeriesStatus.INCONCLUSIVE:
        return Classification1D(
            Verdict1D.UNDECIDABLE, "both_theta_infinite.j_inconclusive", report,
            reason="a tail-comparison series has no analytic certificate",
        )
    if j_ud.diverges and j_du.diverges:
        return Classification1D(Verdict1D.RECURRENT, "both_theta_infinite.both_j_infinite", report)
    if j_ud.diverges and j_du.converged:
        return Classification1D(Verdict1D.DRIFTING_PLUS, "both_theta_infinite.j_ud_infinite_only", report)
    if j_du.diverges and j_ud.converged:
        return Classification1D(Verdict1D.DRIFTING_MINUS, "both_theta_infinite.j_du_infinite_only", report)
    raise InternalConsistencyError(
        "both tail-comparison series finite while both mean run lengths are "
        "infinite; this regime is impossible"
    )


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

@dataclass
class Walk1DTrace:
    """Letter-level trajectory with its run anatomy.

    positions[n] = S_n (S_0 = 0); breaks[0] = 0 and breaks[m] is the m-th
    direction change; sojourns[m] = breaks[m] - breaks[m-1]; bends[m] is
    the two-letter word X_{B_(m-1)} X_(B_m) with the initial bend first.
    The trailing unfinished run is not part of the sojourn sequence.
    """

    letters_trace: LetterTrace
    increments: np.ndarray      # +1 / -1 per step
    positions: np.ndarray       # S_0 .. S_n
    breaks: np.ndarray          # B_0 = 0, B_1, ...
    sojourns: np.ndarray        # T_0 = 0, T_1, ...
    bends: list[str]            # J_0, J_1, ...
    tau_d: np.ndarray
    tau_u: np.ndarray
    skeleton: np.ndarray        # M_m = S at every second break

    @property
    def n_steps(self) -> int:
        return len(self.increments)

    def bend_at(self, j: int) -> str:
        """The bend state at step j (constant between direction changes)."""
        m = int(np.searchsorted(self.breaks[1:], j, side="right"))
        return self.bends[m]

    def is_breaking(self) -> np.ndarray:
        """Boolean per step n >= 1: is n a breaking time."""
        flags = np.zeros(self.n_steps + 1, dtype=bool)
        flags[self.breaks[1:]] = True
        return flags


def _runs_from_letters(init_letter_idx: int, letters: np.ndarray):
    """Break positions (including 0) of the sequence X_0, X_1, ..., X_n."""
    full = np.concatenate([[init_letter_idx], letters])
    changes = np.nonzero(full[1:] != full[:-1])[0] + 1
    return np.concatenate([[0], changes]), full


def walk1d_from_letters(trace: LetterTrace, run_cap: int | None = None) -> Walk1DTrace:
    alpha = trace.alphabet
    if alpha.letters != "du":
        raise VlmcError("one-dimensional walks use the alphabet 'du'")
    letters = trace.letters.astype(np.int64)
    increments = 2 * letters - 1  # d -> -1, u -> +1
    positions = np.concatenate([[0], np.cumsum(increments)])
    x0 = alpha.index(trace.init[0])
    breaks, full = _runs_from_letters(x0, letters)
    sojourns = np.concatenate([[0], np.diff(breaks)])
    if run_cap is not None and len(sojourns) > 1 and sojourns[1:].max() > run_cap:
        raise RunCapExceeded(f"a run exceeded the cap {run_cap}")
    prev = alpha.index(trace.init[1])  # the letter before X_0
    bends = [alpha.letters[prev] + alpha.letters[x0]]
    for m in range(1, len(breaks)):
        bends.append(alpha.letters[full[breaks[m - 1]]] + alpha.letters[full[breaks[m]]])
    # runs alternate starting with the direction of X_0 (= d for the
    # standard start), so odd sojourns are d-runs and even ones u-runs
    t = sojourns[1:]
    if alpha.letters[x0] == "d":
        tau_d, tau_u = t[0::2], t[1::2]
    else:
        tau_u, tau_d = t[0::2], t[1::2]
    n_cycles = (len(breaks) - 1) // 2
    skeleton = positions[breaks[: 2 * n_cycles + 1 : 2]]
    return Walk1DTrace(
        letters_trace=trace,
        increments=increments,
        positions=positions,
        breaks=breaks,
        sojourns=sojourns,
        bends=bends,
        tau_d=tau_d,
        tau_u=tau_u,
        skeleton=skeleton,
    )


def simulate_prw1(model: CombModel, n_steps: int, seed: int,
                  stream_index: int = 0, run_cap: int | None = None) -> Walk1DTrace:
    """Letter-by-letter walk of n_steps increments from the standard start."""
    trace = simulate_letters(model, INIT_1D, n_steps, seed, stream_index)
    return walk1d_from_letters(trace, run_cap=run_cap)


def final_position(model: CombModel, n_steps: int, seed: int,
                   stream_index: int = 0) -> int:
    """S at time n_steps, computed by sampling whole runs.

    Distributionally exact (runs are independent with the model's tails)
    and fast enough for long horizons; uses one stream per call.
    """
    rng = stream(seed, stream_index)
    rule_d, rule_u = _rule(model, "d"), _rule(model, "u")
    covered = 0.0
    pos = 0.0
    batch = 512
    first = True
    while True:
        tau_d = rule_d.sample_runs(rng, batch)
        tau_u = rule_u.sample_runs(rng, batch)
        inter = np.empty(2 * batch)
        inter[0::2], inter[1::2] = tau_d, tau_u
        signs = np.empty(2 * batch)
        signs[0::2], signs[1::2] = -1.0, 1.0  # runs start with d
        if first:
            inter[0] -= 1.0  # X_0 belongs to the past, not to S
            first = False
        cum = covered + np.cumsum(inter)
        if cum[-1] < n_steps:
            pos += float(np.dot(inter, signs))
            covered = float(cum[-1])
            continue
        idx = int(np.searchsorted(cum, n_steps))
        pos += float(np.dot(inter[:idx], signs[:idx]))
        before = covered + (float(np.sum(inter[:idx])) if idx else 0.0)
        pos += signs[idx] * (n_steps - before)
        return int(pos)


def drift_estimate(model: CombModel, n_steps: int, n_seeds: int, master_seed: int) -> float:
    """Mean of S_N / N over independent walks, one stream per walk."""
    total = 0.0
    for i in range(n_seeds):
        total += final_position(model, n_steps, master_seed, stream_index=i) / n_steps
    return total / n_seeds
