"""Four-well Hamiltonians, conserved charges and collective modes.

Energies are frequencies ``E/h`` in Hz throughout.  Site 4 is the apex well;
sites 1-3 are the outer wells.  The collective modes are

    b_k = (a_1 + nu^(k-1) a_2 + nu^(1-k) a_3) / sqrt(3),   nu = exp(2 pi i / 3).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import sqrt

import numpy as np

from .fock import (
    FockBasis,
    SectorOperator,
    build_diagonal,
    build_one_body,
    number_operator,
)

NU = complex(-0.5, sqrt(3.0) / 2.0)
# nu**0, nu**1, nu**2 == nu**-1, indexed by exponent mod 3
NU_POWERS = (complex(1.0, 0.0), NU, NU.conjugate())


def nu_power(k: int) -> complex:
    return NU_POWERS[k % 3]


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the reduced model, all as E/h in Hz."""

    u: float
    j: float
    zeta: float
    total_n: int

    def __post_init__(self) -> None:
        if self.total_n < 1:
            raise ValueError(f"total_n must be >= 1, got {self.total_n}")

    def with_zeta(self, zeta: float) -> "ModelParams":
        return replace(self, zeta=float(zeta))

    def with_n(self, total_n: int) -> "ModelParams":
        return replace(self, total_n=int(total_n))


@dataclass(frozen=True)
class ExtendedParams:
    u0: float
    u12: float
    u14: float
    hop: np.ndarray = field(repr=False)
    offsets: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        hop = np.asarray(self.hop, dtype=float)
        if hop.shape != (4, 4):
            raise ValueError("hop must be a 4x4 matrix")
        if np.any(np.diag(hop) != 0):
            raise ValueError("hop must have a zero diagonal")
        if not np.array_equal(hop, hop.T):
            raise ValueError("hop must be symmetric")
        if not np.all(np.isfinite(self.offsets)):
            raise ValueError("offsets must be finite")
        object.__setattr__(self, "hop", hop)


def apex_hopping(j: float) -> np.ndarray:
    """Hopping matrix with equal outer-apex tunnelling only."""
    hop = np.zeros((4, 4))
    hop[:3, 3] = hop[3, :3] = j
    return hop


def all_pairs_hopping(j: float) -> np.ndarray:
    hop = np.full((4, 4), float(j))
    np.fill_diagonal(hop, 0.0)
    return hop


def mode_transform() -> np.ndarray:
    """3x3 unitary T with b_k = sum_i T[k-1, i-1] a_i over the outer sites."""
    t = np.empty((3, 3), dtype=complex)
    for k in range(3):
        t[k] = (1.0, nu_power(k), nu_power(-k))
    return t / sqrt(3.0)


def _check_sector(p: ModelParams, basis: FockBasis) -> None:
    if basis.total_n != p.total_n:
        raise ValueError(f"basis has N={basis.total_n} but params have N={p.total_n}")


def imbalance_diagonal(basis: FockBasis) -> SectorOperator:
    s = basis.states
    diff = (s[:, 0] + s[:, 1] + s[:, 2] - s[:, 3]).astype(float)
    return SectorOperator(basis, np.diag(diff**2), True)


def tunnelling(basis: FockBasis, j: float = 1.0) -> SectorOperator:
    """a_4^dagger (a_1 + a_2 + a_3) + h.c., scaled by ``j``."""
    return build_one_body(basis, apex_hopping(j))


def current(basis: FockBasis) -> SectorOperator:
    """Circulation operator (i/sqrt3)[(a2^+a1 + a3^+a2 + a1^+a3) - h.c.]."""
    c = np.zeros((4, 4), dtype=complex)
    for target, source in ((1, 0), (2, 1), (0, 2)):
        c[target, source] = 1j / sqrt(3.0)
        c[source, target] = -1j / sqrt(3.0)
    return build_one_body(basis, c)


def collective_bilinear(j: int, k: int, basis: FockBasis) -> SectorOperator:
    """b_j^dagger b_k written in site operators."""
    if j not in (1, 2, 3) or k not in (1, 2, 3):
        raise ValueError(f"collective mode indices must be in 1..3, got ({j}, {k})")
    t = mode_transform()
    coeffs = np.zeros((4, 4), dtype=complex)
    coeffs[:3, :3] = np.outer(t[j - 1].conj(), t[k - 1])
    return build_one_body(basis, coeffs)


def charge(k: int, basis: FockBasis) -> SectorOperator:
    """Conserved charge Q_k = b_k^dagger b_k for k in {2, 3}."""
    if k not in (2, 3):
        raise ValueError(f"charge index must be 2 or 3, got {k}")
    return collective_bilinear(k, k, basis)


def reduced_hamiltonian(p: ModelParams, basis: FockBasis) -> SectorOperator:
    _check_sector(p, basis)
    h = p.u * imbalance_diagonal(basis) - tunnelling(basis, p.j)
    if p.zeta != 0:
        h = h - p.zeta * current(basis)
    return h


def extended_hamiltonian(p: ExtendedParams, basis: FockBasis) -> SectorOperator:
    """Extended Bose-Hubbard Hamiltonian with outer/apex inter-site couplings."""
    pair = np.zeros((4, 4))
    pair[:3, :3] = p.u12
    pair[:3, 3] = pair[3, :3] = p.u14
    np.fill_diagonal(pair, 0.0)
    nu_offsets = np.asarray(p.offsets, dtype=float)

    def interaction(occ) -> float:
        n = np.asarray(occ, dtype=float)
        onsite = 0.5 * p.u0 * float(np.sum(n * (n - 1)))
        intersite = 0.5 * float(n @ pair @ n)
        return onsite + intersite + float(nu_offsets @ n)

    return build_diagonal(basis, interaction) - build_one_body(basis, p.hop)


def commutator_norm(a: SectorOperator, b: SectorOperator) -> float:
    """Frobenius norm of AB - BA."""
    if a.basis is not b.basis:
        raise ValueError("operators act on different bases")
    comm = a.matrix @ b.matrix - b.matrix @ a.matrix
    return float(np.linalg.norm(comm))


def operator_norm(a: SectorOperator) -> float:
    return float(np.linalg.norm(a.matrix))


__all__ = [
    "NU",
    "ExtendedParams",
    "ModelParams",
    "all_pairs_hopping",
    "apex_hopping",
    "charge",
    "collective_bilinear",
    "commutator_norm",
    "current",
    "extended_hamiltonian",
    "imbalance_diagonal",
    "mode_transform",
    "number_operator",
    "nu_power",
    "operator_norm",
    "reduced_hamiltonian",
    "tunnelling",
]
