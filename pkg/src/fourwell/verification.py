"""Invariant suites grouped for the ``verify`` subcommand.

Each group returns a GroupResult carrying named metrics and their limits, so
a failure report can list exactly which invariant broke.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from . import analytic, bethe, dynamics
from .fock import FockBasis, SectorOperator, build_one_body, enumerate_basis
from .model import (
    ExtendedParams,
    ModelParams,
    apex_hopping,
    charge,
    collective_bilinear,
    commutator_norm,
    current,
    extended_hamiltonian,
    imbalance_diagonal,
    operator_norm,
    reduced_hamiltonian,
    tunnelling,
)

TOL = 1e-10


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    kind: str = "max"  # "max": value <= limit, "min": value >= limit

    @property
    def ok(self) -> bool:
        if not np.isfinite(self.value):
            return False
        return self.value <= self.limit if self.kind == "max" else self.value >= self.limit


@dataclass(frozen=True)
class GroupResult:
    group: str
    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failing(self) -> list[str]:
        return [f"{self.group}.{c.name}" for c in self.checks if not c.ok]

    def as_dict(self) -> dict:
        return {
            "pass": self.ok,
            "checks": {c.name: {"value": c.value, "limit": c.limit, "kind": c.kind, "pass": c.ok} for c in self.checks},
        }


def flipped_current(basis: FockBasis) -> SectorOperator:
    """Current with the 1 -> 3 bond sign reversed; a deliberate mutation for self-tests."""
    c = np.zeros((4, 4), dtype=complex)
    for target, source, sign in ((1, 0, 1), (2, 1, 1), (0, 2, -1)):
        c[target, source] = sign * 1j / sqrt(3.0)
        c[source, target] = -sign * 1j / sqrt(3.0)
    return build_one_body(basis, c)


def _hamiltonian(p: ModelParams, basis: FockBasis, mutate: bool) -> tuple[SectorOperator, SectorOperator]:
    cur = flipped_current(basis) if mutate else current(basis)
    h = p.u * imbalance_diagonal(basis) - tunnelling(basis, p.j) - p.zeta * cur
    return h, cur


def check_charges(p: ModelParams, mutate: bool = False) -> GroupResult:
    basis = enumerate_basis(p.total_n)
    zeta = p.zeta if p.zeta != 0 else analytic.resonant_constants(p).zeta_max / 2
    h, cur = _hamiltonian(p.with_zeta(zeta), basis, mutate)
    q2, q3 = charge(2, basis), charge(3, basis)
    return GroupResult(
        "charges",
        (
            Check("H_Q2", commutator_norm(h, q2), TOL),
            Check("H_Q3", commutator_norm(h, q3), TOL),
            Check("H_current", commutator_norm(h, cur), TOL),
            Check("Q2_Q3", commutator_norm(q2, q3), TOL),
            Check("current_is_Q3_minus_Q2", operator_norm(cur - (q3 - q2)), TOL),
        ),
    )


def check_superintegrability(p: ModelParams, mutate: bool = False) -> GroupResult:
    basis = enumerate_basis(p.total_n)
    h0, _ = _hamiltonian(p.with_zeta(0.0), basis, mutate)
    checks = [
        Check(f"H0_b{j}b{k}", commutator_norm(h0, collective_bilinear(j, k, basis)), TOL)
        for j in (2, 3)
        for k in (2, 3)
    ]
    hz, _ = _hamiltonian(p.with_zeta(p.j / 10.0), basis, mutate)
    broken = commutator_norm(hz, collective_bilinear(2, 3, basis)) / operator_norm(hz)
    checks.append(Check("rotation_breaks_b2b3", broken, 1e-3, "min"))
    return GroupResult("superintegrability", tuple(checks))


def check_unitarity(p: ModelParams, plan: dynamics.EvolutionPlan | None = None) -> GroupResult:
    plan = plan or dynamics.plan_for(p)
    tau = analytic.resonant_constants(p).tau
    times = np.linspace(0.0, 10.0 * tau, 41)
    psi0 = dynamics.initial_state(plan.basis)
    amps = dynamics.evolve_many(plan, psi0, times)
    drift = float(np.max(np.abs(np.linalg.norm(amps, axis=1) - 1.0)))
    table = dynamics.trajectory(p, times, psi0=psi0, plan=plan)
    closure = float(np.max(np.abs(table.populations.sum(axis=1) - p.total_n)))
    return GroupResult(
        "unitarity",
        (
            Check("norm_drift_10tau", drift, TOL),
            Check("population_closure", closure, 1e-8),
            Check("eigenbasis_unitary", plan.unitarity_error(), TOL),
        ),
    )


def _reduction_offset(n: int, u0: float = 24.04, j: float = 8.16, offset: float = 0.37) -> float:
    """Spread of diag(H_ext - H_red); zero means a multiple of identity."""
    basis = enumerate_basis(n)
    ext = ExtendedParams(u0=u0, u12=u0, u14=0.0, hop=apex_hopping(j), offsets=(offset,) * 4)
    diff = (extended_hamiltonian(ext, basis) - reduced_hamiltonian(ModelParams(u0 / 4.0, j, 0.0, n), basis)).matrix
    off_diag = np.max(np.abs(diff - np.diag(np.diag(diff))))
    diag = np.diag(diff).real
    return float(max(off_diag, np.ptp(diag)))


def check_oracles(p: ModelParams) -> GroupResult:
    checks = []
    # generating-function overlap matrix against the literal quadruple sum
    worst = 0.0
    for n in range(5):
        labels = bethe.pair_labels(n)
        mat = bethe.overlap_matrix(n)
        for row, (r, s) in enumerate(labels):
            for col, (l, m) in enumerate(labels):
                worst = max(worst, abs(mat[row, col] - bethe.overlap_B(r, s, n - l - m, l, m)))
    checks.append(Check("overlap_generating_vs_sum", worst, TOL))
    # reduced density from bincount against the dense partial trace
    n_small = min(p.total_n, 6)
    ps = p.with_n(n_small)
    plan = dynamics.plan_for(ps)
    tau = analytic.resonant_constants(ps).tau
    psi = dynamics.evolve(plan, dynamics.initial_state(plan.basis), 0.7 * tau)
    dense = dynamics.partial_trace_dense(psi, keep=3)
    fast = dynamics.reduced_density_mode3(psi).matrix()
    checks.append(Check("reduced_density_vs_dense", float(np.max(np.abs(dense - fast))), 1e-12))
    # analytic mode-3 weights: direct double sum against binomial
    t = 0.4 * analytic.resonant_constants(p).tau
    gap = np.max(np.abs(analytic.mode3_weights_direct(p, t) - analytic.mode3_weights_binomial(p, t)))
    checks.append(Check("entropy_weights_direct_vs_binomial", float(gap), TOL))
    # ten-term variance factor against the closed form at tau
    consts = analytic.resonant_constants(p)
    gaps = []
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        q = p.with_zeta(frac * consts.zeta_max)
        gaps.append(abs(analytic.imbalance_variance_factor(q, consts.tau) - analytic.variance_factor_at_tau(q)))
    checks.append(Check("variance_ten_term_vs_closed", float(max(gaps)), TOL))
    checks.append(Check("extended_reduces_to_reduced", _reduction_offset(min(p.total_n, 8)), TOL))
    return GroupResult("oracle_equivalence", tuple(checks))


def check_overlap_unitarity(max_n: int = 10) -> GroupResult:
    worst = 0.0
    for n in range(max_n + 1):
        b = bethe.overlap_matrix(n)
        worst = max(worst, float(np.max(np.abs(b.conj().T @ b - np.eye(len(b))))))
    return GroupResult("b_tensor_unitarity", (Check("max_deviation", worst, TOL),))


def exact_entropy_at_tau(p: ModelParams) -> float:
    tau = analytic.resonant_constants(p).tau
    psi = dynamics.evolve(dynamics.plan_for(p), dynamics.initial_state(enumerate_basis(p.total_n)), tau)
    return dynamics.von_neumann_entropy(dynamics.reduced_density_mode3(psi))


def check_entropy_monotone(p: ModelParams) -> GroupResult:
    zmax = analytic.resonant_constants(p).zeta_max
    s = [exact_entropy_at_tau(p.with_zeta(f * zmax)) for f in (0.0, 0.5, 1.0)]
    return GroupResult(
        "entropy_monotonicity",
        (Check("S0_minus_Shalf", s[0] - s[1], 0.0, "min"), Check("Shalf_minus_Smax", s[1] - s[2], 0.0, "min")),
    )


GROUPS = (
    "charges",
    "superintegrability",
    "unitarity",
    "oracle_equivalence",
    "b_tensor_unitarity",
    "entropy_monotonicity",
)


def run_all(p: ModelParams, mutate_current: bool = False) -> list[GroupResult]:
    return [
        check_charges(p, mutate_current),
        check_superintegrability(p, mutate_current),
        check_unitarity(p),
        check_oracles(p),
        check_overlap_unitarity(),
        check_entropy_monotone(p),
    ]
