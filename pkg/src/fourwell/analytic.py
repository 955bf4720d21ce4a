"""Closed-form resonant-regime solution for the initial state |N,0,0,0>.

Couplings are E/h in Hz and times are in seconds, so every phase is
``2*pi*(E/h)*t``.  Inside formulas that involve only the ratio ``zeta/xi``
the 2*pi cancels and no conversion happens.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, pi, sqrt

import numpy as np

from .fock import FockBasis, QuantumState
from .model import ModelParams

TWO_PI = 2.0 * pi
RESONANCE_THRESHOLD = 10.0
_PHASE_OFFSETS = TWO_PI * np.arange(3) / 3.0


@dataclass(frozen=True)
class ResonantConstants:
    xi: float  # effective outer-well tunnelling rate, Hz
    tau: float  # readout time, s
    period: float
    zeta_max: float
    resonance_ratio: float  # 2U(N-1)/J

    @property
    def resonant(self) -> bool:
        return self.resonance_ratio >= RESONANCE_THRESHOLD


def resonant_constants(p: ModelParams) -> ResonantConstants:
    if p.total_n < 2:
        raise ValueError("resonant constants need N >= 2")
    if p.u <= 0:
        raise ValueError("resonant constants need U > 0")
    xi = 3.0 * p.j**2 / (4.0 * p.u * (p.total_n - 1))
    tau = pi / (TWO_PI * xi)
    return ResonantConstants(
        xi=xi,
        tau=tau,
        period=2.0 * tau,
        zeta_max=xi / 3.0,
        resonance_ratio=2.0 * p.u * (p.total_n - 1) / p.j,
    )


@dataclass(frozen=True)
class CoherentAmplitudes:
    sigma: np.ndarray  # (..., 3) complex
    theta: np.ndarray  # (..., 3) real


def coherent_amplitudes(p: ModelParams, t) -> CoherentAmplitudes:
    """sigma_k(t) = 1 + 2 exp(+i xi t) cos(theta_k), theta_k = zeta t + 2 pi (k-1)/3.

    The sign of the xi phase is the one generated by exp(-i H_eff t); populations
    only see |sigma_k|^2 and are insensitive to it.
    """
    xi = resonant_constants(p).xi
    t = np.asarray(t, dtype=float)[..., None]
    theta = TWO_PI * p.zeta * t + _PHASE_OFFSETS
    sigma = 1.0 + 2.0 * np.exp(1j * TWO_PI * xi * t) * np.cos(theta)
    return CoherentAmplitudes(sigma=sigma, theta=theta)


def _multinomial_roots(total_n: int, n1: np.ndarray, n2: np.ndarray, n3: np.ndarray) -> np.ndarray:
    f = factorial(total_n)
    return np.array([sqrt(f // (factorial(a) * factorial(b) * factorial(c))) for a, b, c in zip(n1, n2, n3)])


def coherent_state(p: ModelParams, t: float, basis: FockBasis) -> QuantumState:
    """Resonant-limit state [sum_k sigma_k a_k^+]^N |0> / (3^N sqrt(N!))."""
    if basis.total_n != p.total_n:
        raise ValueError("basis and params disagree on N")
    sigma = coherent_amplitudes(p, t).sigma
    amps = np.zeros(basis.dim, dtype=complex)
    outer = np.nonzero(basis.occupation(4) == 0)[0]
    n1, n2, n3 = (basis.states[outer, k] for k in range(3))
    weights = _multinomial_roots(p.total_n, n1, n2, n3)
    amps[outer] = weights * (sigma[0] / 3) ** n1 * (sigma[1] / 3) ** n2 * (sigma[2] / 3) ** n3
    return QuantumState(basis, amps).normalized()


def populations_analytic(p: ModelParams, t) -> np.ndarray:
    """<N_k>(t) for k = 1..3, shape (..., 3)."""
    xi = resonant_constants(p).xi
    t = np.asarray(t, dtype=float)[..., None]
    c = np.cos(TWO_PI * p.zeta * t + _PHASE_OFFSETS)
    return p.total_n / 9.0 * (1.0 + 4.0 * c * (np.cos(TWO_PI * xi * t) + c))


def imbalance_at_tau(p: ModelParams) -> float:
    x = pi * p.zeta / resonant_constants(p).xi
    return 2.0 * p.total_n / (3.0 * sqrt(3.0)) * (np.sin(2.0 * x) + 2.0 * np.sin(x))


def imbalance_mean_factor(p: ModelParams, t):
    """I(t), with <N_2 - N_3> = I(t) N."""
    xi = resonant_constants(p).xi
    z = TWO_PI * p.zeta * np.asarray(t, dtype=float)
    return 2.0 / (3.0 * sqrt(3.0)) * (np.sin(2 * z) - 2 * np.sin(z) * np.cos(TWO_PI * xi * np.asarray(t, dtype=float)))


def imbalance_variance_factor(p: ModelParams, t):
    """G(t), with Var(N_2 - N_3) = G(t) N, as the ten-term cosine sum."""
    xi = TWO_PI * resonant_constants(p).xi
    z = TWO_PI * p.zeta
    t = np.asarray(t, dtype=float)
    terms = (
        np.cos(2 * t * (z - xi))
        - np.cos(t * (z - xi))
        - 2 * np.cos(t * (3 * z - xi))
        - np.cos(t * (z + xi))
        + np.cos(2 * t * (z + xi))
        - 2 * np.cos(t * (3 * z + xi))
        - np.cos(2 * z * t)
        + np.cos(4 * z * t)
        - 2 * np.cos(2 * xi * t)
        + 6
    )
    return 2.0 / 27.0 * terms


def variance_factor_at_tau(p: ModelParams) -> float:
    x = pi * p.zeta / resonant_constants(p).xi
    return 8.0 / 27.0 * (np.cos(x) + 2.0) * np.cos(1.5 * x) ** 2


def imbalance_moments(p: ModelParams, t) -> tuple[float, float]:
    """(mean, standard deviation) of N_2 - N_3 at time t."""
    mean = imbalance_mean_factor(p, t) * p.total_n
    g = np.maximum(imbalance_variance_factor(p, t), 0.0)
    return mean, np.sqrt(g * p.total_n)


def sensitivity_factor(p: ModelParams, zeta: float) -> float:
    """f(zeta) = sqrt(2 + cos(pi zeta/xi)) sec(pi zeta / 2 xi)."""
    x = pi * zeta / resonant_constants(p).xi
    return sqrt(2.0 + np.cos(x)) / np.cos(x / 2.0)


def _check_operating_range(p: ModelParams, zeta: float) -> None:
    zmax = resonant_constants(p).zeta_max
    if not 0.0 <= zeta <= zmax * (1 + 1e-12):
        raise ValueError(f"zeta={zeta} outside the operating interval [0, {zmax}]")


def delta_alpha_analytic(p: ModelParams, zeta: float | None = None) -> float:
    """Rotation uncertainty xi f(zeta) / (2 pi sqrt(2N) J) in units of alpha = zeta/J."""
    zeta = p.zeta if zeta is None else zeta
    _check_operating_range(p, zeta)
    xi = resonant_constants(p).xi
    return xi * sensitivity_factor(p, zeta) / (TWO_PI * sqrt(2.0 * p.total_n) * p.j)


def delta_alpha_explicit(p: ModelParams, zeta: float | None = None) -> float:
    """Same quantity written with the N dependence spelled out."""
    zeta = p.zeta if zeta is None else zeta
    _check_operating_range(p, zeta)
    n = p.total_n
    return 3.0 * p.j * sensitivity_factor(p, zeta) / (8.0 * pi * p.u * sqrt(2.0 * n) * (n - 1))


def mode3_weights_direct(p: ModelParams, t: float) -> np.ndarray:
    """gamma_s summed directly from the coherent-state Fock amplitudes."""
    n = p.total_n
    s1, s2, s3 = coherent_amplitudes(p, t).sigma
    gamma = np.zeros(n + 1)
    for l in range(n + 1):
        for m in range(n + 1 - l):
            amp = sqrt(comb(n, l) * comb(n - l, m)) * (s1 / 3) ** (n - l - m) * (s2 / 3) ** l * (s3 / 3) ** m
            gamma[m] += abs(amp) ** 2
    return gamma


def mode3_weights_binomial(p: ModelParams, t: float) -> np.ndarray:
    n = p.total_n
    prob = abs(coherent_amplitudes(p, t).sigma[2]) ** 2 / 9.0
    s = np.arange(n + 1)
    coeff = np.array([comb(n, k) for k in s], dtype=float)
    return coeff * prob**s * (1.0 - prob) ** (n - s)


def shannon_entropy(weights: np.ndarray) -> float:
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    return max(float(-np.sum(w * np.log(w))), 0.0)


def entropy_analytic(p: ModelParams, t: float, method: str = "binomial") -> float:
    """Entanglement entropy (nats) of well 3 in the resonant-limit state."""
    if method == "binomial":
        return shannon_entropy(mode3_weights_binomial(p, t))
    if method == "direct":
        return shannon_entropy(mode3_weights_direct(p, t))
    raise ValueError(f"unknown method {method!r}")


def binomial_entropy(n: int, prob: float) -> float:
    s = np.arange(n + 1)
    w = np.array([comb(n, k) for k in s], dtype=float) * prob**s * (1 - prob) ** (n - s)
    return shannon_entropy(w)


@dataclass(frozen=True)
class SensitivityCurve:
    zeta: np.ndarray
    imbalance_mean: np.ndarray
    imbalance_std: np.ndarray
    f: np.ndarray
    delta_alpha: np.ndarray


def sensitivity_curve(p: ModelParams, zetas) -> SensitivityCurve:
    zetas = np.asarray(zetas, dtype=float)
    tau = resonant_constants(p).tau
    mean, std, f, da = [], [], [], []
    for z in zetas:
        q = p.with_zeta(z)
        m, s = imbalance_moments(q, tau)
        mean.append(float(m))
        std.append(float(s))
        f.append(sensitivity_factor(q, z))
        da.append(delta_alpha_analytic(q, z))
    return SensitivityCurve(zetas, np.array(mean), np.array(std), np.array(f), np.array(da))


def log_log_slope(n_values, values) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(n_values, dtype=float)), np.log(np.asarray(values, dtype=float)), 1)
    return float(slope)

