"""Peres-Mermin observable square and its 24 joint eigenstates.

The nine two-qubit observables have entries in {0, +-1, +-i}, and every
rank-1 projector is assembled from products of (1 + s*A)/2 factors whose
entries stay dyadic rationals.  All of that is exact in float64, so the
algebraic identities checked here hold to rounding noise and the 1e-12
tolerances below are generous.

Eigenbases are built from projector products, never from a generic
eigensolver: each triple is only jointly nondegenerate, so numerical
eigensolvers would return arbitrary bases and unstable phases.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AlgebraViolation, InvalidState

# Tolerance for exact operator identities (products, commutators, eigenvalue
# relations).  Violations beyond this signal a bug, not noise.
ATOL = 1e-12

N_CONTEXTS = 6
N_STATES = 24

# Contexts of the square, as 1-based observable indices A1..A9:
# rows 1 and 2, columns 1 and 2 (these four have product-state eigenbases),
# then the Bell row and the rotated-Bell column.
CONTEXT_OBSERVABLES = (
    (1, 2, 3),
    (4, 5, 6),
    (1, 4, 7),
    (2, 5, 8),
    (7, 8, 9),
    (3, 6, 9),
)

# Sign of the operator product over each context; only the Bell row is -1.
CONTEXT_SIGNS = (1, 1, 1, 1, -1, 1)

# Slot order within a context: outcomes of the first two observables run
# (+,+), (+,-), (-,+), (-,-); the third outcome is forced by the sign.
SLOT_OUTCOME_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "identity": np.eye(2, dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` in {x, y, z, identity}."""
    try:
        m = _PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None
    return m.copy()


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two square matrices."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {b.shape}")
    return np.kron(a, b)


def flat_index(context: int, slot: int) -> int:
    """Map (context 1-6, slot 1-4) to the flat state index 0-23."""
    if not 1 <= context <= N_CONTEXTS:
        raise ValueError(f"context must be in 1..6, got {context}")
    if not 1 <= slot <= 4:
        raise ValueError(f"slot must be in 1..4, got {slot}")
    return 4 * (context - 1) + (slot - 1)


def context_and_slot(index: int) -> tuple[int, int]:
    """Inverse of :func:`flat_index`."""
    if not 0 <= index < N_STATES:
        raise ValueError(f"flat index must be in 0..23, got {index}")
    return index // 4 + 1, index % 4 + 1


@dataclass(frozen=True, eq=False)
class TripleState:
    """Joint eigenstate of one context's three observables.

    ``outcomes`` holds the three eigenvalues (s1, s2, s3); their product
    equals the context sign.  ``vector`` is phase-fixed so that its first
    nonzero component is real and positive, which makes state vectors
    directly comparable across runs.
    """

    context: int
    slot: int
    outcomes: tuple[int, int, int]
    vector: np.ndarray
    projector: np.ndarray

    @property
    def flat_index(self) -> int:
        return flat_index(self.context, self.slot)


@dataclass(frozen=True, eq=False)
class SquareOperators:
    """The nine observables of the square plus their six context groupings."""

    observables: tuple[np.ndarray, ...]
    contexts: tuple[tuple[int, int, int], ...] = CONTEXT_OBSERVABLES
    signs: tuple[int, ...] = CONTEXT_SIGNS

    def observable(self, k: int) -> np.ndarray:
        """Observable A_k, 1-based as laid out in the square."""
        return self.observables[k - 1]

    def context_observables(self, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The three observables of context ``j`` (1-based)."""
        a, b, c = self.contexts[j - 1]
        return self.observables[a - 1], self.observables[b - 1], self.observables[c - 1]

    def sign(self, j: int) -> int:
        """Sign of the product of context ``j``'s observables."""
        return self.signs[j - 1]

    def product(self, j: int) -> np.ndarray:
        """Ordered product of the three observables of context ``j``."""
        a, b, c = self.context_observables(j)
        return a @ b @ c

    def commutator(self, k: int, l: int) -> np.ndarray:
        """[A_k, A_l] for 1-based observable indices."""
        a, b = self.observable(k), self.observable(l)
        return a @ b - b @ a


def build_square() -> SquareOperators:
    """Construct the observable square and verify all algebraic identities.

    Raises:
        AlgebraViolation: if any commutation or product identity fails,
            which can only happen through an implementation bug.
    """
    sx, sy, sz, one = pauli("x"), pauli("y"), pauli("z"), pauli("identity")
    observables = (
        tensor(sx, one), tensor(one, sy), tensor(sx, sy),
        tensor(one, sx), tensor(sy, one), tensor(sy, sx),
        tensor(sx, sx), tensor(sy, sy), tensor(sz, sz),
    )
    square = SquareOperators(observables=observables)
    eye = np.eye(4)
    for k in range(1, 10):
        a = square.observable(k)
        if np.abs(a - a.conj().T).max() > ATOL:
            raise AlgebraViolation(f"A{k} is not Hermitian")
        if np.abs(a @ a - eye).max() > ATOL:
            raise AlgebraViolation(f"A{k} squared is not the identity")
    for j in range(1, N_CONTEXTS + 1):
        ka, kb, kc = square.contexts[j - 1]
        for p, q in ((ka, kb), (ka, kc), (kb, kc)):
            if np.abs(square.commutator(p, q)).max() > ATOL:
                raise AlgebraViolation(f"A{p} and A{q} do not commute in context {j}")
        if np.abs(square.product(j) - square.sign(j) * eye).max() > ATOL:
            raise AlgebraViolation(f"context {j} product is not {square.sign(j):+d}*identity")
    for arr in observables:
        arr.flags.writeable = False
    return square


def _vector_from_projector(projector: np.ndarray) -> np.ndarray:
    # Columns of a rank-1 projector |b><b| are multiples of |b|; take the
    # largest one and rotate the global phase so the first nonzero component
    # is real positive.
    col = int(np.argmax(np.linalg.norm(projector, axis=0)))
    v = projector[:, col].copy()
    v /= np.linalg.norm(v)
    first = int(np.flatnonzero(np.abs(v) > 1e-10)[0])
    v *= np.conj(v[first]) / np.abs(v[first])
    return v


def triple_eigenbasis(square: SquareOperators, j: int) -> list[TripleState]:
    """The four joint eigenstates of context ``j``, in canonical slot order.

    Each projector is the product over the context's observables of
    (1 + s_k A_k)/2 evaluated at an admissible outcome triple; the four
    projectors are mutually orthogonal and sum to the identity.
    """
    if not 1 <= j <= N_CONTEXTS:
        raise ValueError(f"context must be in 1..6, got {j}")
    a, b, c = square.context_observables(j)
    sign = square.sign(j)
    eye = np.eye(4, dtype=complex)
    states = []
    for slot, (s1, s2) in enumerate(SLOT_OUTCOME_PAIRS, start=1):
        s3 = sign * s1 * s2
        # ordered product of exact dyadic factors; entries remain exact
        projector = (eye + s1 * a) @ (eye + s2 * b) @ (eye + s3 * c) / 8.0
        trace = projector.trace().real
        if abs(trace - 1.0) > ATOL:
            raise AlgebraViolation(
                f"projector for context {j}, outcomes ({s1},{s2},{s3}) "
                f"has trace {trace}; outcome triple is inadmissible"
            )
        vector = _vector_from_projector(projector)
        projector.flags.writeable = False
        vector.flags.writeable = False
        states.append(
            TripleState(
                context=j,
                slot=slot,
                outcomes=(s1, s2, s3),
                vector=vector,
                projector=projector,
            )
        )
    completeness = sum(s.projector for s in states)
    if np.abs(completeness - eye).max() > ATOL:
        raise AlgebraViolation(f"projectors of context {j} do not sum to the identity")
    return states


@lru_cache(maxsize=1)
def _cached_states() -> tuple[TripleState, ...]:
    square = build_square()
    out = []
    for j in range(1, N_CONTEXTS + 1):
        out.extend(triple_eigenbasis(square, j))
    return tuple(out)


def all_triple_states(square: SquareOperators | None = None) -> list[TripleState]:
    """All 24 triple states in flat-index order."""
    if square is None:
        return list(_cached_states())
    out = []
    for j in range(1, N_CONTEXTS + 1):
        out.extend(triple_eigenbasis(square, j))
    return out


def born_probability(state: np.ndarray, target: TripleState) -> float:
    """Probability of projecting ``state`` onto ``target``'s eigenspace.

    ``state`` must be a density matrix with unit trace (to 1e-10).  Tiny
    negative round-off (magnitude below 1e-12) is clamped to [0, 1].
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (4, 4):
        raise InvalidState(f"expected a 4x4 density matrix, got shape {state.shape}")
    trace = state.trace().real
    if abs(trace - 1.0) > 1e-10:
        raise InvalidState(f"density matrix trace is {trace}, not 1")
    p = np.einsum("ij,ji->", state, target.projector).real
    if p < -1e-12 or p > 1.0 + 1e-12:
        raise InvalidState(f"Born probability {p} outside [0, 1] beyond round-off")
    return min(max(p, 0.0), 1.0)


def reduced_purity(vector: np.ndarray) -> float:
    """Purity of the first qubit's reduced state: 1 for product states,
    1/2 for maximally entangled ones."""
    m = np.asarray(vector, dtype=complex).reshape(2, 2)
    rho = m @ m.conj().T
    return float(np.einsum("ij,ji->", rho, rho).real)


def maximally_mixed() -> np.ndarray:
    """The 4x4 maximally mixed density matrix."""
    return np.eye(4, dtype=complex) / 4.0
