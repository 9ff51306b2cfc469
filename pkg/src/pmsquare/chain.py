"""Markov chains induced by recycling the post-measurement state.

The perfect chain lives on the 24 triple states; its entries are
(1/6) * Tr(M_a M_b) with the 1/6 coming from the uniform random choice of
measurement context.  The noisy chain doubles the space with 24 error
states fed by misaligned measurement rounds.

Matrices are column-stochastic: ``entries[r, c]`` is the probability of
moving from state ``c`` to state ``r``, so one step is ``entries @ p``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError, NoConvergence
from .operators import N_STATES, SquareOperators, TripleState, all_triple_states

log = logging.getLogger(__name__)

# The exact entry set of the perfect chain, in units of 1/24.
PERFECT_ENTRY_NUMERATORS = (0, 1, 2, 4)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Column-stochastic transition matrix over 24 or 48 chain states."""

    n: int
    entries: np.ndarray

    def column(self, c: int) -> np.ndarray:
        """Outgoing distribution of state ``c``."""
        return self.entries[:, c]

    def to_json_dict(self) -> dict:
        return {"n": self.n, "entries": self.entries.tolist()}

    def __post_init__(self):
        if self.entries.shape != (self.n, self.n):
            raise DimensionMismatch(
                f"entries shape {self.entries.shape} does not match n={self.n}"
            )


def _validate_stochastic(entries: np.ndarray) -> None:
    if entries.min() < 0.0 or entries.max() > 1.0:
        raise DomainError("transition probabilities must lie in [0, 1]")
    col_sums = entries.sum(axis=0)
    if np.abs(col_sums - 1.0).max() > 1e-12:
        raise DomainError(f"columns must sum to 1; worst drift {np.abs(col_sums - 1).max()}")


def build_perfect_chain(square: SquareOperators | None = None) -> TransitionMatrix:
    """24-state chain of the perfect recycling protocol.

    Entries are pairwise projector overlaps divided by the number of
    contexts; the matrix is symmetric, hence doubly stochastic, and every
    entry is one of {0, 1/24, 1/12, 1/6} exactly.
    """
    states = all_triple_states(square)
    projectors = np.array([s.projector for s in states])
    overlaps = np.einsum("aij,bji->ab", projectors, projectors).real
    entries = overlaps / 6.0
    _validate_stochastic(entries)
    entries.flags.writeable = False
    return TransitionMatrix(n=N_STATES, entries=entries)


def build_error_chain(perfect: TransitionMatrix, p: float) -> TransitionMatrix:
    """48-state chain with misalignment probability ``1 - p``.

    States 0..23 are the triple states, 24..47 the error states.  The four
    blocks are p*T (triple to triple), a flat p/24 (out of an error state,
    the system is maximally mixed, so every triple state is equally likely),
    and flat (1-p)/24 into and between error states.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"alignment probability must be in [0, 1], got {p}")
    if perfect.n != N_STATES:
        raise DimensionMismatch(f"expected the 24-state chain, got n={perfect.n}")
    n = 2 * N_STATES
    flat = np.full((N_STATES, N_STATES), 1.0 / N_STATES)
    entries = np.block(
        [
            [p * perfect.entries, p * flat],
            [(1.0 - p) * flat, (1.0 - p) * flat],
        ]
    )
    _validate_stochastic(entries)
    entries.flags.writeable = False
    return TransitionMatrix(n=n, entries=entries)


def step(matrix: TransitionMatrix, distribution: np.ndarray) -> np.ndarray:
    """One chain step: the matrix-vector product, renormalized only if the
    accumulated drift from unit mass exceeds 1e-12."""
    distribution = np.asarray(distribution, dtype=float)
    if distribution.shape != (matrix.n,):
        raise DimensionMismatch(
            f"distribution has shape {distribution.shape}, matrix expects ({matrix.n},)"
        )
    out = matrix.entries @ distribution
    drift = abs(out.sum() - 1.0)
    if drift > 1e-12:
        log.warning("renormalizing distribution after drift %.3e", drift)
        out /= out.sum()
    return out


def tv_distance(mu: np.ndarray, nu: np.ndarray) -> float:
    """Total variation distance, half the L1 distance between the vectors."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise DimensionMismatch(f"shapes {mu.shape} and {nu.shape} differ")
    return 0.5 * float(np.abs(mu - nu).sum())


def stationary(
    matrix: TransitionMatrix, tol: float = 1e-14, max_iterations: int = 10**5
) -> np.ndarray:
    """Stationary distribution by power iteration from the uniform vector.

    Iterates until successive iterates are closer than ``tol`` in total
    variation, then checks the fixed-point identity to 1e-12.  Power
    iteration (rather than an eigensolver) guarantees the output is a
    probability vector with no sign or normalization ambiguity.
    """
    current = np.full(matrix.n, 1.0 / matrix.n)
    for _ in range(max_iterations):
        nxt = step(matrix, current)
        if tv_distance(nxt, current) < tol:
            residual = tv_distance(step(matrix, nxt), nxt)
            if residual > 1e-12:
                raise NoConvergence(f"fixed point residual {residual} exceeds 1e-12")
            nxt.flags.writeable = False
            return nxt
        current = nxt
    raise NoConvergence(f"no fixed point within {max_iterations} iterations")


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    """Eigenvalues of a transition matrix, sorted descending."""

    eigenvalues: np.ndarray
    grouping_tol: float = 1e-9

    @property
    def second_largest(self) -> float:
        return float(self.eigenvalues[1])

    def multiplicity(self, value: float) -> int:
        """Number of eigenvalues within ``grouping_tol`` of ``value``."""
        return int(np.sum(np.abs(self.eigenvalues - value) <= self.grouping_tol))

    def multiplicities(self) -> dict[float, int]:
        """Distinct eigenvalues (grouped at ``grouping_tol``) with counts."""
        out: dict[float, int] = {}
        for ev in self.eigenvalues:
            for rep in out:
                if abs(ev - rep) <= self.grouping_tol:
                    out[rep] += 1
                    break
            else:
                out[float(ev)] = 1
        return out


def spectrum(matrix: TransitionMatrix) -> SpectralSummary:
    """Eigenvalue summary; uses the symmetric solver when applicable.

    For non-symmetric matrices the eigenvalues are reported as real parts,
    with a warning if any imaginary part exceeds 1e-10.
    """
    entries = matrix.entries
    if np.abs(entries - entries.T).max() <= 1e-12:
        values = np.linalg.eigvalsh(entries)
    else:
        complex_values = np.linalg.eigvals(entries)
        worst = np.abs(complex_values.imag).max()
        if worst > 1e-10:
            warnings.warn(
                f"discarding imaginary eigenvalue parts up to {worst:.3e}",
                stacklevel=2,
            )
        values = complex_values.real
    values = np.sort(values)[::-1]
    values.flags.writeable = False
    return SpectralSummary(eigenvalues=values)


def worst_case_distance(matrix: TransitionMatrix, t: int) -> float:
    """Worst total variation distance from stationarity after ``t`` steps,
    maximized over point-mass initial distributions."""
    if t < 0:
        raise DomainError(f"step count must be nonnegative, got {t}")
    pi = stationary(matrix)
    powered = np.linalg.matrix_power(matrix.entries, t)
    # column c of matrix^t is the t-step distribution started from state c
    return float(0.5 * np.abs(powered - pi[:, None]).sum(axis=0).max())


def mixing_time_bound(epsilon: float) -> float:
    """Upper bound (3/2) * ln(24/eps) on the perfect chain's mixing time.

    This is the generic relaxation-time bound evaluated at the chain's
    spectral gap 2/3 and minimum stationary mass 1/24; natural log is the
    only base consistent with the quoted step counts 16, 23 and 40.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    return 1.5 * math.log(N_STATES / epsilon)


def mixing_time_bound_general(epsilon: float, pi_min: float, lambda_star: float) -> float:
    """Generic bound log(1/(eps*pi_min)) / (1 - lambda_star)."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must be in (0, 1), got {epsilon}")
    if not 0.0 < pi_min <= 1.0:
        raise DomainError(f"pi_min must be in (0, 1], got {pi_min}")
    if not 0.0 <= lambda_star < 1.0:
        raise DomainError(f"lambda_star must be in [0, 1), got {lambda_star}")
    return math.log(1.0 / (epsilon * pi_min)) / (1.0 - lambda_star)


def effective_state(pi: np.ndarray, states: list[TripleState]) -> np.ndarray:
    """Density matrix of the ensemble weighted by ``pi`` over the 24 triple
    states; the uniform distribution yields the maximally mixed state."""
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (N_STATES,) or len(states) != N_STATES:
        raise DimensionMismatch("expected a 24-vector over the 24 triple states")
    projectors = np.array([s.projector for s in states])
    return np.einsum("q,qij->ij", pi, projectors)


def matrix_to_csv_text(matrix: TransitionMatrix) -> str:
    """Row-major CSV with 17-significant-digit entries (lossless round trip)."""
    lines = [",".join(f"{x:.17g}" for x in row) for row in matrix.entries]
    return "\n".join(lines) + "\n"
