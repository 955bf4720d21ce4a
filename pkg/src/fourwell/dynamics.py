"""Exact time evolution inside a fixed-N sector.

The Hamiltonian is diagonalised once; ``psi(t) = V exp(-2 pi i D t) V^+ psi0``
with D in Hz and t in seconds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import sqrt

import numpy as np
import scipy.linalg

from . import analytic
from .fock import FockBasis, QuantumState, SectorOperator, enumerate_basis
from .model import ModelParams, charge, current, reduced_hamiltonian

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class EvolutionPlan:
    hamiltonian: SectorOperator = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def basis(self) -> FockBasis:
        return self.hamiltonian.basis

    def reconstruction_error(self) -> float:
        v, d = self.eigenvectors, self.eigenvalues
        return float(np.max(np.abs((v * d) @ v.conj().T - self.hamiltonian.matrix)))

    def unitarity_error(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(len(v)))))


def make_plan(h: SectorOperator) -> EvolutionPlan:
    if not h.hermitian:
        raise ValueError("evolution needs a Hermitian Hamiltonian")
    mat = h.matrix
    if h.is_real():
        # real symmetric problems are several times cheaper
        mat = np.ascontiguousarray(mat.real)
    w, v = scipy.linalg.eigh(mat, driver="evr")
    return EvolutionPlan(h, w, v)


def plan_for(p: ModelParams) -> EvolutionPlan:
    basis = enumerate_basis(p.total_n)
    return make_plan(reduced_hamiltonian(p, basis))


def evolve(plan: EvolutionPlan, psi0: QuantumState, t: float) -> QuantumState:
    if psi0.basis is not plan.basis:
        raise ValueError("state and plan live on different bases")
    if t == 0:
        return QuantumState(psi0.basis, psi0.amplitudes.astype(complex, copy=True))
    v = plan.eigenvectors
    coeff = v.conj().T @ psi0.amplitudes
    amps = v @ (np.exp(-1j * TWO_PI * plan.eigenvalues * t) * coeff)
    return QuantumState(psi0.basis, amps)


def evolve_many(plan: EvolutionPlan, psi0: QuantumState, times) -> np.ndarray:
    """Amplitudes at each time, shape (len(times), dim)."""
    if psi0.basis is not plan.basis:
        raise ValueError("state and plan live on different bases")
    times = np.asarray(times, dtype=float)
    v = plan.eigenvectors
    coeff = v.conj().T @ psi0.amplitudes
    phases = np.exp(-1j * TWO_PI * np.outer(times, plan.eigenvalues))
    return (phases * coeff) @ v.T


def initial_state(basis: FockBasis) -> QuantumState:
    return QuantumState.fock(basis, (basis.total_n, 0, 0, 0))


@dataclass(frozen=True)
class ReducedDensity:
    """Diagonal reduced density matrix of well 3 (index s = n_3)."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = self.weights
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("reduced density weights are not a probability vector")

    def matrix(self) -> np.ndarray:
        return np.diag(self.weights)


def reduced_density_mode3(psi: QuantumState) -> ReducedDensity:
    """Trace out wells 1, 2, 4.

    Two basis states with the same (n1, n2, n4) share n3 because N is fixed,
    so only diagonal entries can appear.
    """
    n3 = psi.basis.occupation(3)
    weights = np.bincount(n3, weights=psi.probabilities(), minlength=psi.basis.total_n + 1)
    return ReducedDensity(weights)


def partial_trace_dense(psi: QuantumState, keep: int = 3) -> np.ndarray:
    """Brute-force partial trace on the truncated 4-mode tensor product.

    Embeds the sector into (N+1)^4 and contracts every mode except ``keep``.
    Meant as an independent check for small N.
    """
    n = psi.basis.total_n
    full = np.zeros((n + 1,) * 4, dtype=complex)
    s = psi.basis.states
    full[s[:, 0], s[:, 1], s[:, 2], s[:, 3]] = psi.amplitudes
    axis = keep - 1
    moved = np.moveaxis(full, axis, 0).reshape(n + 1, -1)
    return moved @ moved.conj().T


def von_neumann_entropy(rho: ReducedDensity) -> float:
    w = rho.weights[rho.weights > 0]
    # a pure state can come out at -1e-16 from round-off
    return max(float(-np.sum(w * np.log(w))), 0.0)


@dataclass(frozen=True)
class TrajectoryTable:
    times: np.ndarray
    populations: np.ndarray  # (T, 4)
    imbalance_mean: np.ndarray
    imbalance_var: np.ndarray
    entropy: np.ndarray
    q2: np.ndarray
    q3: np.ndarray
    current: np.ndarray
    energy: np.ndarray

    @property
    def total_n(self) -> int:
        return int(round(self.populations[0].sum()))

    def fractions(self) -> np.ndarray:
        return self.populations / self.populations.sum(axis=1, keepdims=True)


def _expect(op: np.ndarray, amps: np.ndarray) -> np.ndarray:
    return np.einsum("ti,ti->t", amps.conj(), amps @ op.T).real


def trajectory(p: ModelParams, times, psi0: QuantumState | None = None, plan: EvolutionPlan | None = None) -> TrajectoryTable:
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("times must be non-empty")
    basis = enumerate_basis(p.total_n)
    plan = plan or plan_for(p)
    psi0 = psi0 or initial_state(basis)
    amps = evolve_many(plan, psi0, times)
    probs = np.abs(amps) ** 2
    occ = basis.states.astype(float)
    pops = probs @ occ
    diff = occ[:, 1] - occ[:, 2]
    imb_mean = probs @ diff
    imb_var = np.maximum(probs @ diff**2 - imb_mean**2, 0.0)
    n3 = basis.occupation(3)
    entropy = np.empty(len(times))
    for i, row in enumerate(probs):
        w = np.bincount(n3, weights=row, minlength=basis.total_n + 1)
        w = w[w > 0]
        entropy[i] = max(-np.sum(w * np.log(w)), 0.0)
    return TrajectoryTable(
        times=times,
        populations=pops,
        imbalance_mean=imb_mean,
        imbalance_var=imb_var,
        entropy=entropy,
        q2=_expect(charge(2, basis).matrix, amps),
        q3=_expect(charge(3, basis).matrix, amps),
        current=_expect(current(basis).matrix, amps),
        energy=_expect(plan.hamiltonian.matrix, amps),
    )


def imbalance_exact(p: ModelParams, t: float, plan: EvolutionPlan | None = None) -> tuple[float, float]:
    """(<N2 - N3>, Var(N2 - N3)) from exact evolution of |N,0,0,0>."""
    plan = plan or plan_for(p)
    basis = plan.basis
    psi = evolve(plan, initial_state(basis), t)
    probs = psi.probabilities()
    diff = (basis.occupation(2) - basis.occupation(3)).astype(float)
    mean = float(probs @ diff)
    var = float(probs @ diff**2 - mean**2)
    return mean, max(var, 0.0)


def delta_alpha_numeric(p: ModelParams, at_zeta: float = 0.0, fd_step: float | None = None) -> float:
    """std(N2-N3) / |d<N2-N3>/d alpha| at t = tau from exact evolution, alpha = zeta/J.

    The derivative is a central difference in zeta; tau is held at its
    zeta-independent resonant value.
    """
    consts = analytic.resonant_constants(p)
    if not 0.0 <= at_zeta <= consts.zeta_max * (1 + 1e-12):
        raise ValueError(f"at_zeta={at_zeta} outside [0, zeta_max={consts.zeta_max}]")
    h = consts.xi / 100.0 if fd_step is None else fd_step
    tau = consts.tau
    _, var = imbalance_exact(p.with_zeta(at_zeta), tau)
    plus, _ = imbalance_exact(p.with_zeta(at_zeta + h), tau)
    minus, _ = imbalance_exact(p.with_zeta(at_zeta - h), tau)
    slope = p.j * (plus - minus) / (2.0 * h)
    if abs(slope) < 1e-14:
        raise ArithmeticError(f"imbalance response vanishes at zeta={at_zeta}; alpha not identifiable")
    return sqrt(var) / abs(slope)


@dataclass(frozen=True)
class ScalingFit:
    n_values: np.ndarray
    delta_alpha: np.ndarray
    slope: float
    intercept: float
    resonant: bool
    warnings: tuple[str, ...] = ()


def scaling_exponent(p_template: ModelParams, n_list, method: str = "numeric", at_zeta: float = 0.0) -> ScalingFit:
    """Least-squares slope of log(delta alpha) against log N."""
    ns = np.asarray(sorted(int(n) for n in n_list))
    if len(ns) < 2:
        raise ValueError("need at least two particle numbers")
    notes = []
    values = []
    for n in ns:
        p = p_template.with_n(n)
        ratio = analytic.resonant_constants(p).resonance_ratio
        if ratio < analytic.RESONANCE_THRESHOLD:
            notes.append(f"N={n}: resonance ratio {ratio:.3g} below {analytic.RESONANCE_THRESHOLD:g}")
        if method == "numeric":
            values.append(delta_alpha_numeric(p, at_zeta))
        elif method == "analytic":
            values.append(analytic.delta_alpha_analytic(p, at_zeta))
        else:
            raise ValueError(f"unknown method {method!r}")
    for note in notes:
        warnings.warn(note, stacklevel=2)
    slope, intercept = np.polyfit(np.log(ns), np.log(values), 1)
    return ScalingFit(ns, np.array(values), float(slope), float(intercept), not notes, tuple(notes))
