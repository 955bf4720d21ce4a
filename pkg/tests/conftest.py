from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from fourwell import dynamics
from fourwell.model import ModelParams

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

PAPER_U = 6.01
PAPER_J = 8.16

# criterion -> list of (part, passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}
ACCEPTANCE_TITLES = {
    1: "charge algebra",
    2: "reduction identity",
    3: "population dynamics",
    4: "imbalance formula",
    5: "variance oracle",
    6: "sensitivity scaling",
    7: "entanglement entropy",
    8: "Bethe oracle",
    9: "164Dy parameter table",
    10: "structural invariants",
}


@pytest.fixture(scope="session")
def reference16() -> ModelParams:
    return ModelParams(u=PAPER_U, j=PAPER_J, zeta=0.0, total_n=16)


class PlanCache:
    """Session-wide memo of diagonalised Hamiltonians keyed by (N, zeta)."""

    def __init__(self) -> None:
        self._plans: dict[tuple, dynamics.EvolutionPlan] = {}

    def __call__(self, p: ModelParams) -> dynamics.EvolutionPlan:
        key = (p.u, p.j, p.zeta, p.total_n)
        if key not in self._plans:
            self._plans[key] = dynamics.plan_for(p)
        return self._plans[key]


@pytest.fixture(scope="session")
def plans() -> PlanCache:
    return PlanCache()


@pytest.fixture
def record():
    def _record(criterion: int, part: str, passed: bool, detail: str) -> None:
        ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_TITLES):
        parts = ACCEPTANCE.get(k)
        if not parts:
            terminalreporter.write_line(f"criterion {k:2d} ({ACCEPTANCE_TITLES[k]}): NOT RUN")
            continue
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        details = "; ".join(f"{name} {'ok' if ok else 'FAILED'} [{d}]" for name, ok, d in parts)
        terminalreporter.write_line(f"criterion {k:2d} ({ACCEPTANCE_TITLES[k]}): {verdict} | {details}")


SCALING_NS = (8, 12, 16, 20, 24)


@pytest.fixture(scope="session")
def numeric_scaling(reference16):
    """Exact-evolution delta alpha at zeta -> 0 over the N sweep (the expensive part of the suite)."""
    return dynamics.scaling_exponent(reference16, SCALING_NS, method="numeric")
