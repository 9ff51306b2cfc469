"""Estimation and closed-form reference values for the contextuality test.

The tested quantity is the sum of the six context correlators with a minus
sign on the Bell row: noncontextual value assignments cap it at 4, while
the quantum prediction is 6.  Under the two-point misalignment noise model
every correlator shrinks to +-(2p - 1), so the sum follows 12p - 6 and
crosses the classical bound at p = 5/6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import build_error_chain, build_perfect_chain
from .errors import DomainError, InsufficientData
from .experiment import DEFAULT_BURN_IN, ExperimentConfig, Trajectory, run, substream
from .operators import CONTEXT_SIGNS, N_CONTEXTS, SquareOperators

CLASSICAL_BOUND = 4.0
QUANTUM_VALUE = 6.0

# Coefficient of each context's correlator in the tested sum: the Bell row
# enters with a minus sign.
INEQUALITY_COEFFS = (1, 1, 1, 1, -1, 1)


@dataclass(frozen=True)
class CorrelatorEstimate:
    """Sample mean of the outcome product s1*s2*s3 for one context."""

    context: int
    estimate: float
    count: int
    std_error: float

    @property
    def missing(self) -> bool:
        return self.count == 0


@dataclass(frozen=True)
class CorrelatorSet:
    """The six per-context correlator estimates, indexed by context label."""

    estimates: tuple[CorrelatorEstimate, ...]

    def by_context(self, j: int) -> CorrelatorEstimate:
        return self.estimates[j - 1]

    def missing_contexts(self) -> tuple[int, ...]:
        return tuple(e.context for e in self.estimates if e.missing)


@dataclass(frozen=True)
class InequalityReport:
    """Value of the tested sum with uncertainty and decision flags."""

    value: float
    std_error: float
    correlators: CorrelatorSet
    classical_bound: float = CLASSICAL_BOUND
    quantum_value: float = QUANTUM_VALUE

    @property
    def violated(self) -> bool:
        # two-standard-error decision margin
        return self.value - 2.0 * self.std_error > self.classical_bound

    def to_json_dict(self) -> dict:
        return {
            "correlators": [e.estimate for e in self.correlators.estimates],
            "value": self.value,
            "std_error": self.std_error,
            "bound": self.classical_bound,
            "quantum": self.quantum_value,
            "violated": self.violated,
        }


def estimate_correlators(trajectory: Trajectory) -> CorrelatorSet:
    """Per-context means of the outcome product over post-burn-in rounds.

    Contexts with no post-burn-in records get an explicit missing marker
    (count 0, NaN estimate); a trajectory with no usable records at all
    raises InsufficientData.
    """
    sel = trajectory.post_burn_in()
    contexts = trajectory.contexts[sel]
    products = np.prod(trajectory.outcomes[sel], axis=1)
    estimates = []
    for j in range(1, N_CONTEXTS + 1):
        mask = contexts == j
        count = int(mask.sum())
        if count == 0:
            estimates.append(
                CorrelatorEstimate(context=j, estimate=math.nan, count=0, std_error=math.nan)
            )
            continue
        mean = float(products[mask].mean())
        std_error = math.sqrt(max(1.0 - mean * mean, 0.0) / count)
        estimates.append(
            CorrelatorEstimate(context=j, estimate=mean, count=count, std_error=std_error)
        )
    result = CorrelatorSet(estimates=tuple(estimates))
    if len(result.missing_contexts()) == N_CONTEXTS:
        raise InsufficientData(result.missing_contexts())
    return result


def evaluate_inequality(correlators: CorrelatorSet) -> InequalityReport:
    """Combine the six correlators into the tested sum.

    The standard error is the quadrature sum of the per-context errors.
    Raises InsufficientData listing any missing contexts.
    """
    missing = correlators.missing_contexts()
    if missing:
        raise InsufficientData(missing)
    value = 0.0
    variance = 0.0
    for coeff, est in zip(INEQUALITY_COEFFS, correlators.estimates):
        value += coeff * est.estimate
        variance += est.std_error**2
    return InequalityReport(
        value=value, std_error=math.sqrt(variance), correlators=correlators
    )


def noisy_inequality_value(p: float) -> float:
    """Closed-form value 12p - 6 of the tested sum at alignment ``p``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"alignment probability must be in [0, 1], got {p}")
    return 12.0 * p - 6.0


def coupon_expectation(n: int, p0: float) -> float:
    """Expected draws to collect ``n`` equally likely coupons when each draw
    is spoiled (an extra, uncollectable coupon) with probability ``p0``.

    This models independent draws with replacement.  Sequential recycling
    rounds are not independent, so chain trajectories complete the
    collection more slowly than this value; see the README.
    """
    if n < 1:
        raise DomainError(f"coupon count must be at least 1, got {n}")
    if not 0.0 <= p0 < 1.0:
        raise DomainError(f"spoil probability must be in [0, 1), got {p0}")
    harmonic = sum(1.0 / i for i in range(1, n + 1))
    return n / (1.0 - p0) * harmonic


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a noise sweep."""

    p: float
    report: InequalityReport
    analytic: float


def sweep_noise(
    square: SquareOperators,
    p_grid: list[float],
    rounds_per_point: int,
    seed: int,
    burn_in: int = DEFAULT_BURN_IN,
    mode: str = "chain",
) -> list[SweepPoint]:
    """Run the experiment across a grid of alignment probabilities.

    Each point uses an independent RNG substream derived from ``seed`` and
    the point index, so the sweep is reproducible and points could run in
    parallel.
    """
    for p in p_grid:
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"grid value {p} outside [0, 1]")
    perfect = build_perfect_chain(square)
    points = []
    for index, p in enumerate(p_grid):
        matrix = build_error_chain(perfect, p)
        # distinct substream per grid point, folded into a single seed int
        point_seed = int(substream(seed, index).integers(2**63))
        config = ExperimentConfig(
            rounds=rounds_per_point,
            burn_in=burn_in,
            alignment_p=p,
            seed=point_seed,
            mode=mode,
        )
        trajectory = run(config, square, matrix)
        report = evaluate_inequality(estimate_correlators(trajectory))
        points.append(SweepPoint(p=p, report=report, analytic=noisy_inequality_value(p)))
    return points


def sweep_to_csv_text(points: list[SweepPoint]) -> str:
    lines = ["p,empirical,analytic,std_error,violated"]
    for pt in points:
        lines.append(
            f"{pt.p:.17g},{pt.report.value:.17g},{pt.analytic:.17g},"
            f"{pt.report.std_error:.17g},{int(pt.report.violated)}"
        )
    return "\n".join(lines) + "\n"


def expected_correlator_sign(j: int) -> int:
    """Sign of context ``j``'s correlator for ideal measurements."""
    return CONTEXT_SIGNS[j - 1]
