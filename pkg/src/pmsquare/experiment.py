"""Monte Carlo engine for the state-recycling protocol.

One trajectory is a sequence of measurement rounds on a single recycled
system: each round draws a context uniformly at random, and with
probability ``alignment_p`` performs a perfect projective measurement of
that context; otherwise it records one of the context's four wrong-sign
outcome triples (uniformly) and leaves the system maximally mixed.

Two modes are implemented on purpose.  ``chain`` mode samples the
conditional columns of a prebuilt transition matrix; ``quantum`` mode keeps
an explicit density matrix and applies the Born rule each round.  The two
must agree statistically, which is the package's core cross-check that the
transition matrix correctly summarizes Born-rule recycling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

from .chain import TransitionMatrix, mixing_time_bound
from .errors import ConfigError
from .operators import (
    CONTEXT_SIGNS,
    N_CONTEXTS,
    N_STATES,
    SquareOperators,
    all_triple_states,
    maximally_mixed,
)

# Rounds to discard before collecting statistics: the mixing-time bound at
# accuracy 1e-3, rounded up.
DEFAULT_BURN_IN = math.ceil(mixing_time_bound(1e-3))

MODES = ("chain", "quantum")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one simulated run.

    ``initial_state`` is a flat triple-state index in 0..23 or "uniform"
    for a uniformly random triple state.  Identical configs (including
    seed) produce identical trajectories within one build; equality of
    sample streams across the two modes is incidental and not promised.
    """

    rounds: int
    burn_in: int = DEFAULT_BURN_IN
    alignment_p: float = 1.0
    seed: int = 0
    initial_state: Union[int, str] = "uniform"
    mode: str = "chain"

    def validate(self) -> None:
        if self.rounds <= 0:
            raise ConfigError(f"rounds must be positive, got {self.rounds}")
        if not 0 <= self.burn_in < self.rounds:
            raise ConfigError(
                f"burn_in must satisfy 0 <= burn_in < rounds, got {self.burn_in}"
            )
        if not 0.0 <= self.alignment_p <= 1.0:
            raise ConfigError(f"alignment_p must be in [0, 1], got {self.alignment_p}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if isinstance(self.initial_state, str):
            if self.initial_state != "uniform":
                raise ConfigError(f"initial_state string must be 'uniform', got {self.initial_state!r}")
        elif not 0 <= self.initial_state < N_STATES:
            raise ConfigError(f"initial_state index must be in 0..23, got {self.initial_state}")

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "burn_in": self.burn_in,
            "alignment_p": self.alignment_p,
            "seed": self.seed,
            "initial_state": self.initial_state,
            "mode": self.mode,
        }


@dataclass(frozen=True)
class MeasurementRecord:
    round: int
    context: int
    outcomes: tuple[int, int, int]
    chain_state: int
    is_error: bool


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Columnar record of one run; one entry per measurement round."""

    config: ExperimentConfig
    contexts: np.ndarray      # (N,) uint8, values 1..6
    outcomes: np.ndarray      # (N, 3) int8, values +-1
    chain_states: np.ndarray  # (N,) uint8, 0..23 triple states, 24..47 error states
    is_error: np.ndarray      # (N,) bool

    def __len__(self) -> int:
        return len(self.chain_states)

    def record(self, i: int) -> MeasurementRecord:
        return MeasurementRecord(
            round=i,
            context=int(self.contexts[i]),
            outcomes=tuple(int(s) for s in self.outcomes[i]),
            chain_state=int(self.chain_states[i]),
            is_error=bool(self.is_error[i]),
        )

    def iter_records(self) -> Iterator[MeasurementRecord]:
        return (self.record(i) for i in range(len(self)))

    def post_burn_in(self) -> slice:
        """Index slice selecting the data-collection rounds."""
        return slice(self.config.burn_in, len(self))

    def to_csv_text(self) -> str:
        lines = ["round,context,s1,s2,s3,chain_state,is_error"]
        for i in range(len(self)):
            s1, s2, s3 = self.outcomes[i]
            lines.append(
                f"{i},{self.contexts[i]},{s1},{s2},{s3},"
                f"{self.chain_states[i]},{int(self.is_error[i])}"
            )
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_csv_text())


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for trial ``index`` of a run seeded by ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _conditional_cumulatives(matrix: TransitionMatrix) -> list[list[tuple]]:
    """Per-source cumulative slot distributions of an aligned measurement.

    Entry [s][j] holds the first three cumulative probabilities over the
    four slots of context j+1 given source state s; row 24 is the shared
    distribution of every maximally mixed source (all error states look
    identical going forward).  Stored as plain tuples for loop speed.
    """
    table: list[list[tuple]] = []
    for s in range(N_STATES):
        rows = []
        for j in range(N_CONTEXTS):
            block = matrix.entries[4 * j : 4 * j + 4, s]
            total = block.sum()
            if total > 0.0:
                c = np.cumsum(block / total)
            else:
                # unreachable branch (alignment probability 0); keep a
                # well-formed distribution anyway
                c = np.array([0.25, 0.5, 0.75, 1.0])
            rows.append((float(c[0]), float(c[1]), float(c[2])))
        table.append(rows)
    mixed = [(0.25, 0.5, 0.75)] * N_CONTEXTS
    table.append(mixed)
    return table


def _sample_chain(
    table: list[list[tuple]],
    start: int,
    context_idx: list,
    aligned: list,
    uniforms: list,
) -> list[int]:
    states = [0] * len(context_idx)
    s = start
    for t, (j, ok, u) in enumerate(zip(context_idx, aligned, uniforms)):
        c = table[s if s < N_STATES else N_STATES][j]
        slot = 0 if u <= c[0] else (1 if u <= c[1] else (2 if u <= c[2] else 3))
        s = 4 * j + slot if ok else N_STATES + 4 * j + slot
        states[t] = s
    return states


def _sample_quantum(
    square: SquareOperators,
    start: int,
    context_idx: list,
    aligned: list,
    uniforms: list,
) -> list[int]:
    vectors = [s.vector for s in all_triple_states(square)]
    projectors = [s.projector for s in all_triple_states(square)]
    mixed = maximally_mixed()
    rho = projectors[start]
    states = [0] * len(context_idx)
    for t, (j, ok, u) in enumerate(zip(context_idx, aligned, uniforms)):
        base = 4 * j
        if ok:
            # Born rule on the explicit density matrix
            probs = [
                float(np.real(vectors[base + i].conj() @ rho @ vectors[base + i]))
                for i in range(4)
            ]
            total = probs[0] + probs[1] + probs[2] + probs[3]
            acc = 0.0
            slot = 3
            for i in range(3):
                acc += probs[i] / total
                if u <= acc:
                    slot = i
                    break
            s = base + slot
            rho = projectors[s]
        else:
            slot = 0 if u <= 0.25 else (1 if u <= 0.5 else (2 if u <= 0.75 else 3))
            s = N_STATES + base + slot
            rho = mixed
        states[t] = s
    return states


def run(
    config: ExperimentConfig,
    square: SquareOperators,
    matrix: TransitionMatrix,
) -> Trajectory:
    """Simulate one trajectory of the recycling protocol.

    Parameters
    ----------
    config
        Run parameters; ``config.validate()`` is called first.
    square
        The observable square (used by quantum mode and for outcome signs).
    matrix
        Transition matrix to sample in chain mode.  Must be the 48-state
        chain whenever ``alignment_p < 1``; the 24-state chain is accepted
        only for perfectly aligned runs.
    """
    config.validate()
    if matrix.n not in (N_STATES, 2 * N_STATES):
        raise ConfigError(f"unsupported chain dimension {matrix.n}")
    if config.alignment_p < 1.0 and matrix.n != 2 * N_STATES:
        raise ConfigError("alignment_p < 1 requires the 48-state error chain")

    rng = substream(config.seed, 0)
    if config.initial_state == "uniform":
        start = int(rng.integers(N_STATES))
    else:
        start = int(config.initial_state)

    n = config.rounds
    context_idx = rng.integers(0, N_CONTEXTS, size=n)  # 0-based contexts
    if config.alignment_p >= 1.0:
        aligned_arr = np.ones(n, dtype=bool)
    else:
        aligned_arr = rng.random(n) < config.alignment_p
    uniforms = rng.random(n)

    if config.mode == "chain":
        table = _conditional_cumulatives(matrix)
        states = _sample_chain(
            table, start, context_idx.tolist(), aligned_arr.tolist(), uniforms.tolist()
        )
    else:
        states = _sample_quantum(
            square, start, context_idx.tolist(), aligned_arr.tolist(), uniforms.tolist()
        )

    chain_states = np.asarray(states, dtype=np.uint8)
    is_error = chain_states >= N_STATES
    triple = np.where(is_error, chain_states - N_STATES, chain_states)
    slot = triple % 4
    s1 = np.where(slot < 2, 1, -1).astype(np.int8)
    s2 = np.where(slot % 2 == 0, 1, -1).astype(np.int8)
    signs = np.asarray(CONTEXT_SIGNS, dtype=np.int8)[triple // 4]
    s3 = (signs * s1 * s2 * np.where(is_error, -1, 1)).astype(np.int8)
    outcomes = np.column_stack([s1, s2, s3])

    trajectory = Trajectory(
        config=config,
        contexts=(context_idx + 1).astype(np.uint8),
        outcomes=outcomes,
        chain_states=chain_states,
        is_error=is_error,
    )
    for arr in (trajectory.contexts, trajectory.outcomes, trajectory.chain_states, trajectory.is_error):
        arr.flags.writeable = False
    return trajectory


def recurrence_times(trajectory: Trajectory, state: int) -> np.ndarray:
    """Gaps between successive visits to ``state``; empty if visited < 2 times."""
    visits = np.flatnonzero(trajectory.chain_states == state)
    return np.diff(visits)


def coupon_time(trajectory: Trajectory) -> Optional[int]:
    """Rounds after burn-in until every triple state has been seen once.

    Returns the 1-based count of post-burn-in rounds consumed, or None if
    the trajectory ends before the collection completes.  Error states
    consume rounds without contributing to the collection.
    """
    seen = [False] * N_STATES
    remaining = N_STATES
    start = trajectory.config.burn_in
    states = trajectory.chain_states
    for t in range(start, len(states)):
        s = states[t]
        if s < N_STATES and not seen[s]:
            seen[s] = True
            remaining -= 1
            if remaining == 0:
                return t - start + 1
    return None


def state_occupancy(trajectory: Trajectory, n: int, include_burn_in: bool = False) -> np.ndarray:
    """Empirical distribution over ``n`` chain states (post burn-in by default)."""
    sel = slice(None) if include_burn_in else trajectory.post_burn_in()
    counts = np.bincount(trajectory.chain_states[sel], minlength=n).astype(float)
    return counts / counts.sum()
