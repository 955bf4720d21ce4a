"""Fixed-N bosonic Fock sector for four modes.

States are occupation tuples ``(n1, n2, n3, n4)`` with ``n1 + n2 + n3 + n4 = N``,
ordered lexicographically descending, so ``|N,0,0,0>`` has index 0 and
``|0,0,0,N>`` is last.  Every operator is a dense matrix over one sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Callable, Iterator, Sequence

import numpy as np

N_MODES = 4

OccupationState = tuple[int, int, int, int]


def sector_dimension(total_n: int) -> int:
    return comb(total_n + N_MODES - 1, N_MODES - 1)


def _descending_occupations(total_n: int) -> Iterator[OccupationState]:
    for n1 in range(total_n, -1, -1):
        for n2 in range(total_n - n1, -1, -1):
            for n3 in range(total_n - n1 - n2, -1, -1):
                yield (n1, n2, n3, total_n - n1 - n2 - n3)


@dataclass(frozen=True, eq=False)
class FockBasis:
    total_n: int
    states: np.ndarray = field(repr=False)
    index: dict[OccupationState, int] = field(repr=False)
    # lookup[n1, n2, n3] -> position; n4 is implied by total_n
    _lookup: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return self.dim

    def __iter__(self) -> Iterator[OccupationState]:
        return iter(self.index)

    def state(self, i: int) -> OccupationState:
        return tuple(int(x) for x in self.states[i])  # type: ignore[return-value]

    def position(self, occ: Sequence[int]) -> int:
        occ = tuple(int(x) for x in occ)
        try:
            return self.index[occ]  # type: ignore[index]
        except KeyError:
            raise KeyError(f"{occ} is not in the N={self.total_n} sector") from None

    def positions(self, occupations: np.ndarray) -> np.ndarray:
        """Vectorised index lookup for an (m, 4) integer array."""
        occ = np.asarray(occupations)
        return self._lookup[occ[:, 0], occ[:, 1], occ[:, 2]]

    def occupation(self, mode: int) -> np.ndarray:
        """Occupations of ``mode`` (1-based) across the basis."""
        return self.states[:, mode - 1]


@lru_cache(maxsize=64)
def enumerate_basis(total_n: int) -> FockBasis:
    if total_n < 0:
        raise ValueError(f"total_n must be non-negative, got {total_n}")
    occs = list(_descending_occupations(total_n))
    states = np.array(occs, dtype=np.int64).reshape(-1, N_MODES)
    states.setflags(write=False)
    index = {occ: i for i, occ in enumerate(occs)}
    lookup = np.full((total_n + 1,) * 3, -1, dtype=np.int64)
    lookup[states[:, 0], states[:, 1], states[:, 2]] = np.arange(len(states))
    lookup.setflags(write=False)
    return FockBasis(total_n, states, index, lookup)


@dataclass(frozen=True, eq=False)
class SectorOperator:
    """Dense matrix acting inside one fixed-N sector."""

    basis: FockBasis
    matrix: np.ndarray = field(repr=False)
    hermitian: bool = False

    def __post_init__(self) -> None:
        shape = (self.basis.dim, self.basis.dim)
        if self.matrix.shape != shape:
            raise ValueError(f"matrix shape {self.matrix.shape} does not match basis {shape}")

    def _check(self, other: "SectorOperator") -> None:
        if other.basis is not self.basis:
            raise ValueError("operators act on different bases")

    def __add__(self, other: "SectorOperator") -> "SectorOperator":
        self._check(other)
        return SectorOperator(self.basis, self.matrix + other.matrix, self.hermitian and other.hermitian)

    def __sub__(self, other: "SectorOperator") -> "SectorOperator":
        self._check(other)
        return SectorOperator(self.basis, self.matrix - other.matrix, self.hermitian and other.hermitian)

    def __neg__(self) -> "SectorOperator":
        return SectorOperator(self.basis, -self.matrix, self.hermitian)

    def __mul__(self, scalar: complex) -> "SectorOperator":
        herm = self.hermitian and complex(scalar).imag == 0
        return SectorOperator(self.basis, scalar * self.matrix, herm)

    __rmul__ = __mul__

    def __matmul__(self, other: "SectorOperator") -> "SectorOperator":
        self._check(other)
        return SectorOperator(self.basis, self.matrix @ other.matrix)

    def dagger(self) -> "SectorOperator":
        return SectorOperator(self.basis, self.matrix.conj().T, self.hermitian)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix) or not np.any(self.matrix.imag)


@dataclass(frozen=True, eq=False)
class QuantumState:
    basis: FockBasis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError("amplitude vector length does not match basis")

    @classmethod
    def fock(cls, basis: FockBasis, occ: Sequence[int]) -> "QuantumState":
        amps = np.zeros(basis.dim, dtype=complex)
        amps[basis.position(occ)] = 1.0
        return cls(basis, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "QuantumState":
        return QuantumState(self.basis, self.amplitudes / self.norm())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "QuantumState") -> complex:
        if other.basis is not self.basis:
            raise ValueError("states live on different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "QuantumState") -> float:
        return abs(self.overlap(other)) ** 2


def build_one_body(basis: FockBasis, coeffs: np.ndarray) -> SectorOperator:
    """Matrix of ``sum_ij coeffs[i, j] a_i^dagger a_j`` in the sector."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (N_MODES, N_MODES):
        raise ValueError(f"coeffs must be {N_MODES}x{N_MODES}, got {coeffs.shape}")
    dtype = complex if np.iscomplexobj(coeffs) else float
    mat = np.zeros((basis.dim, basis.dim), dtype=dtype)
    states = basis.states
    cols = np.arange(basis.dim)
    for i in range(N_MODES):
        for j in range(N_MODES):
            c = coeffs[i, j]
            if c == 0:
                continue
            if i == j:
                mat[cols, cols] += c * states[:, i]
                continue
            src = np.nonzero(states[:, j] > 0)[0]
            targets = states[src].copy()
            # integer product first, one square root at the end
            weight = np.sqrt((targets[:, i] + 1) * targets[:, j])
            targets[:, j] -= 1
            targets[:, i] += 1
            mat[basis.positions(targets), src] += c * weight
    hermitian = bool(np.array_equal(coeffs, coeffs.conj().T))
    return SectorOperator(basis, mat, hermitian)


def build_diagonal(basis: FockBasis, f: Callable[[OccupationState], float]) -> SectorOperator:
    values = np.array([f(occ) for occ in basis], dtype=float)
    return SectorOperator(basis, np.diag(values), True)


def number_operator(basis: FockBasis, mode: int) -> SectorOperator:
    return SectorOperator(basis, np.diag(basis.occupation(mode).astype(float)), True)


def expectation_and_variance(op: SectorOperator, psi: QuantumState) -> tuple[float, float]:
    """Return ``(<O>, <O^2> - <O>^2)`` for a Hermitian operator."""
    if not op.hermitian:
        raise ValueError("expectation_and_variance needs a Hermitian operator")
    if op.basis is not psi.basis:
        raise ValueError("operator and state live on different bases")
    v = op.matrix @ psi.amplitudes
    mean = float(np.vdot(psi.amplitudes, v).real)
    second = float(np.vdot(v, v).real)
    var = second - mean * mean
    if -1e-10 < var < 0:
        var = 0.0
    return mean, var
