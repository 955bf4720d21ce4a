"""Closed-form Bethe-ansatz consequences in the resonant (small/large root) limit.

Only the explicit amplitudes, normalisations and energies are implemented;
the Bethe roots themselves are never solved for.

Overlap tensors relate the outer-well Fock states |n-r-s, r, s> to the
collective-mode states |a, b, c> (occupations of b_1, b_2, b_3).  Integer
combinatorics stay exact: sums over powers of nu are accumulated as three
integer buckets (nu^0, nu^1, nu^2) and converted to complex only at the end.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt

import numpy as np

from . import analytic
from .fock import FockBasis, QuantumState, SectorOperator
from .model import NU_POWERS, ModelParams, charge

TWO_PI = 2.0 * np.pi


def multinomial(n: int, p: int, q: int) -> int:
    """n! / (p! q! (n-p-q)!), zero outside 0 <= p, q and p + q <= n."""
    if p < 0 or q < 0 or p + q > n or n < 0:
        return 0
    return factorial(n) // (factorial(p) * factorial(q) * factorial(n - p - q))


def _buckets_to_complex(buckets) -> complex:
    return sum(int(c) * w for c, w in zip(buckets, NU_POWERS))


def overlap_A_buckets(r: int, s: int, a: int, b: int, c: int) -> tuple[int, int, int]:
    """Integer coefficients of nu^0, nu^1, nu^2 in A_{r,s}^{a,b,c} (quadruple sum)."""
    out = [0, 0, 0]
    for p in range(a + 1):
        for q in range(a - p + 1):
            cpq = multinomial(a, p, q)
            for i in range(b + 1):
                for j in range(b - i + 1):
                    cc = multinomial(c, r - p - i, s - q - j)
                    if cc == 0:
                        continue
                    out[(p + 2 * i - q - 2 * j - r + s) % 3] += cpq * multinomial(b, i, j) * cc
    return out[0], out[1], out[2]


def overlap_A(r: int, s: int, a: int, b: int, c: int) -> complex:
    return _buckets_to_complex(overlap_A_buckets(r, s, a, b, c))


def _b_scale(r: int, s: int, a: int, b: int, c: int) -> float:
    n = a + b + c
    den = multinomial(n, r, s)
    if den == 0:
        raise ValueError(f"(r, s) = ({r}, {s}) is outside the n={n} sector")
    return sqrt(Fraction(multinomial(n, a, b), den * 3**n))


def overlap_B(r: int, s: int, a: int, b: int, c: int) -> complex:
    return _b_scale(r, s, a, b, c) * overlap_A(r, s, a, b, c)


def pair_labels(n: int) -> list[tuple[int, int]]:
    """(x, y) with x + y <= n, in a fixed order shared by rows and columns."""
    return [(x, y) for x in range(n + 1) for y in range(n + 1 - x)]


def _multiply_linear(poly: np.ndarray, ex: int, ey: int) -> np.ndarray:
    """poly * (1 + nu^ex x + nu^ey y); poly[e, r, s] holds the nu^e coefficient of x^r y^s."""
    out = poly.copy()
    out[:, 1:, :] += np.roll(poly[:, :-1, :], ex, axis=0)
    out[:, :, 1:] += np.roll(poly[:, :, :-1], ey, axis=0)
    return out


@lru_cache(maxsize=32)
def overlap_matrix(n: int) -> np.ndarray:
    """B[(r, s), (l, m)] = B_{r,s}^{n-l-m, l, m} over ``pair_labels(n)``.

    Built from the generating function
    (1 + x + y)^a (1 + nu x + nu^-1 y)^b (1 + nu^-1 x + nu y)^c,
    whose x^r y^s coefficient is A_{r,s}^{a,b,c}.
    """
    labels = pair_labels(n)
    k = len(labels)
    # powers of the three linear factors, exact integers
    unit = np.zeros((3, n + 1, n + 1), dtype=object)
    unit[:] = 0
    unit[0, 0, 0] = 1
    powers = {}
    for name, (ex, ey) in {"a": (0, 0), "b": (1, 2), "c": (2, 1)}.items():
        seq = [unit]
        for _ in range(n):
            seq.append(_multiply_linear(seq[-1], ex, ey))
        powers[name] = seq
    out = np.empty((k, k), dtype=complex)
    for col, (l, m) in enumerate(labels):
        a = n - l - m
        poly = _poly_product(_poly_product(powers["a"][a], powers["b"][l], n), powers["c"][m], n)
        for row, (r, s) in enumerate(labels):
            out[row, col] = _b_scale(r, s, a, l, m) * _buckets_to_complex(poly[:, r, s])
    out.setflags(write=False)
    return out


def _poly_product(p1: np.ndarray, p2: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros_like(p1)
    out[:] = 0
    nz = [(e, r, s) for e in range(3) for r in range(n + 1) for s in range(n + 1 - r) if p2[e, r, s] != 0]
    for e, r, s in nz:
        shifted = np.roll(p1, e, axis=0)
        out[:, r:, s:] += p2[e, r, s] * shifted[:, : n + 1 - r, : n + 1 - s]
    return out


@dataclass(frozen=True)
class BetheLevel:
    n4: int
    l: int
    m: int
    energy: float  # Hz
    norm_sq: float
    a_factor: float


def _a_factor(n4: int, l: int, m: int, total_n: int) -> float:
    den = total_n + 1 - 2 * n4
    if den == 0:
        raise ZeroDivisionError
    return sqrt(3.0) / 4.0 * sqrt(n4 * (total_n + 1 - l - m - n4)) / den


def bethe_level(n4: int, l: int, m: int, p: ModelParams) -> BetheLevel:
    n = p.total_n
    if min(n4, l, m) < 0 or n4 + l + m > n:
        raise ValueError(f"(n4, l, m) = ({n4}, {l}, {m}) outside the N={n} sector")
    d_plus, d_minus = n + 1 - 2 * n4, n - 1 - 2 * n4
    if d_plus == 0 or d_minus == 0:
        raise ValueError(f"singular perturbative level (n4, l, m) = ({n4}, {l}, {m}) at N={n}")
    a_here = _a_factor(n4, l, m, n)
    a_next = _a_factor(n4 + 1, l, m, n)
    norm_sq = 1.0 + (p.j / p.u) ** 2 * (a_here**2 + a_next**2)
    k = n - l - m - n4
    shift = n4 * (k + 1) / d_plus - k * (1 + n4) / d_minus
    energy = p.u * (n - 2 * n4) ** 2 + p.zeta * (l - m) - 3.0 * p.j**2 / (4.0 * p.u) * shift
    return BetheLevel(n4, l, m, energy, norm_sq, a_here)


@dataclass(frozen=True)
class BetheResult:
    state: QuantumState
    raw_norm: float

    @property
    def norm_deficit(self) -> float:
        return 1.0 - self.raw_norm**2


def bethe_state(p: ModelParams, t: float, initial, basis: FockBasis) -> BetheResult:
    """Resonant-limit evolution of a Fock initial state via the Bethe amplitudes.

    The returned state is renormalised; ``raw_norm`` keeps the norm of the
    truncated expansion before that step.
    """
    n = p.total_n
    if basis.total_n != n:
        raise ValueError("basis and params disagree on N")
    n1, n2, n3, n4 = (int(x) for x in initial)
    if n1 + n2 + n3 + n4 != n or min(n1, n2, n3, n4) < 0:
        raise ValueError(f"initial state {tuple(initial)} not in the N={n} sector")
    ratio = analytic.resonant_constants(p).resonance_ratio if n >= 2 else 0.0
    if ratio < analytic.RESONANCE_THRESHOLD:
        warnings.warn(f"resonance ratio {ratio:.3g} is outside the perturbative regime", stacklevel=2)
    outer = n - n4
    labels = pair_labels(outer)
    if n + 1 - 2 * n4 == 0 or n - 1 - 2 * n4 == 0:
        bad = [(n4, l, m) for l, m in labels]
        raise ValueError(f"singular perturbative levels {bad[:6]}{'...' if len(bad) > 6 else ''}")
    levels = [bethe_level(n4, l, m, p) for l, m in labels]
    energies = np.array([lv.energy for lv in levels])
    norm_sq = np.array([lv.norm_sq for lv in levels])
    bmat = overlap_matrix(outer)
    col = bmat[labels.index((n2, n3))]
    weights = np.exp(-1j * TWO_PI * energies * t) / norm_sq * col
    coeffs = bmat.conj() @ weights
    amps = np.zeros(basis.dim, dtype=complex)
    occ = np.array([(outer - r - s, r, s, n4) for r, s in labels])
    amps[basis.positions(occ)] = coeffs
    raw = float(np.linalg.norm(amps))
    return BetheResult(QuantumState(basis, amps / raw), raw)


def effective_hamiltonian(p: ModelParams, basis: FockBasis) -> SectorOperator:
    """-(xi - zeta) Q_2 - (xi + zeta) Q_3."""
    xi = analytic.resonant_constants(p).xi
    return -(xi - p.zeta) * charge(2, basis) - (xi + p.zeta) * charge(3, basis)
