"""Lattice geometry, Gaussian-orbital integrals and the 164Dy parameter table.

SI units internally; energies handed to the model are converted to E/h in Hz.
Each orbital integral has a closed form and an independent tensor-product
Gauss-Legendre quadrature.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from math import erf, exp, pi, sqrt

import numpy as np
from scipy import constants as sc

from . import analytic
from .model import ModelParams

H = sc.h
HBAR = sc.hbar
AMU = sc.physical_constants["atomic mass constant"][0]
BOHR = sc.physical_constants["Bohr radius"][0]

DY164_MASS_U = 163.9291748


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class AtomSpec:
    name: str
    mass: float  # kg
    a_dd: float  # m

    def __post_init__(self) -> None:
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.a_dd < 0:
            raise ValueError("dipolar length must be non-negative")


DY164 = AtomSpec("164Dy", DY164_MASS_U * AMU, 131.97 * BOHR)

_S2, _S3, _S6 = sqrt(2.0), sqrt(3.0), sqrt(6.0)
UNIT_VECTORS = np.array(
    [
        [1 / _S2, 1 / _S6, 1 / _S3],
        [-1 / _S2, 1 / _S6, 1 / _S3],
        [0.0, -sqrt(2.0 / 3.0), 1 / _S3],
    ]
)
PHASES = np.array([pi / 6, pi / 6, 7 * pi / 6])


@dataclass(frozen=True)
class LatticeGeometry:
    wavelength: float  # m
    v0: float  # lattice depth, J
    v1: float = 0.0  # harmonic confinement strength, J/m^2

    @property
    def l(self) -> float:
        return self.wavelength / 2.0

    @property
    def k(self) -> float:
        return 2.0 * pi / self.wavelength

    @cached_property
    def site_positions(self) -> np.ndarray:
        l = self.l
        return np.array(
            [
                [-l / _S2, -l / _S6, 0.0],
                [l / _S2, -l / _S6, 0.0],
                [0.0, l * sqrt(2.0 / 3.0), 0.0],
                [0.0, 0.0, l / _S3],
            ]
        )

    def lattice_potential(self, r: np.ndarray) -> np.ndarray:
        """V0 sum_i cos^2(k r.u_i + phi_i) for points r of shape (..., 3)."""
        arg = self.k * (r @ UNIT_VECTORS.T) + PHASES
        return self.v0 * np.sum(np.cos(arg) ** 2, axis=-1)

    def harmonic_potential(self, r: np.ndarray) -> np.ndarray:
        return self.v1 * (r[..., 0] ** 2 + r[..., 1] ** 2 + 2.0 * r[..., 2] ** 2)

    def distance(self, i: int, j: int) -> float:
        return float(np.linalg.norm(self.site_positions[i - 1] - self.site_positions[j - 1]))

    def bond_cosine(self, i: int, j: int) -> float:
        """cos of the angle between the z polarisation axis and bond i-j."""
        d = self.site_positions[j - 1] - self.site_positions[i - 1]
        return float(abs(d[2]) / np.linalg.norm(d))


def recoil_energy(atom: AtomSpec, wavelength: float) -> float:
    return H**2 / (2.0 * atom.mass * wavelength**2)


def lattice_for(atom: AtomSpec, wavelength: float, depth_recoil: float, v1: float = 0.0) -> LatticeGeometry:
    return LatticeGeometry(wavelength, depth_recoil * recoil_energy(atom, wavelength), v1)


def beta(q: float) -> float:
    """Inter-site dipolar integral for Gaussian orbitals at reduced separation q."""
    if q <= 0:
        raise ValueError("q must be positive")
    return 3.0 * sqrt(pi) / (4.0 * q**3) * erf(q) - exp(-q * q) * (2.0 * q * q + 3.0) / (2.0 * q * q)


def integrable_scattering_length(atom: AtomSpec, q: float) -> float:
    """Scattering length that makes the outer-well coupling equal the on-site one."""
    return atom.a_dd * beta(q)


@dataclass(frozen=True)
class TrapConstants:
    omega: float  # rad/s
    eta: float  # 1/m^2
    q: float
    recoil: float  # J


def trap_constants(geom: LatticeGeometry, atom: AtomSpec) -> TrapConstants:
    if geom.v0 <= 0:
        raise ValueError("lattice depth must be positive")
    omega = pi / geom.l * sqrt(2.0 * geom.v0 / atom.mass)
    eta = atom.mass * omega / (2.0 * HBAR)
    return TrapConstants(omega, eta, geom.l * sqrt(2.0 * eta), recoil_energy(atom, geom.wavelength))


def depth_for_q(q: float, atom: AtomSpec, wavelength: float) -> float:
    """Lattice depth V0 that produces reduced separation q (inverse of trap_constants)."""
    l = wavelength / 2.0
    eta = q**2 / (2.0 * l**2)
    omega = 2.0 * HBAR * eta / atom.mass
    return atom.mass * (omega * l / pi) ** 2 / 2.0


def contact_coupling(atom: AtomSpec, a: float) -> float:
    return 4.0 * pi * HBAR**2 * a / atom.mass


def _eta(d) -> float:
    """Accept anything carrying ``eta`` (TrapConstants, DerivedParams) or a bare number."""
    eta = float(getattr(d, "eta", d))
    if eta <= 0:
        raise ValueError("eta must be positive")
    return eta


def onsite_energy(atom: AtomSpec, a: float, d) -> float:
    """U0/h in Hz, g (eta/pi)^(3/2) for a Gaussian orbital."""
    return contact_coupling(atom, a) * (_eta(d) / pi) ** 1.5 / H


# --- orbitals and quadrature -------------------------------------------------


def gaussian_orbital(r: np.ndarray, center: np.ndarray, eta: float) -> np.ndarray:
    d2 = np.sum((r - center) ** 2, axis=-1)
    return (2.0 * eta / pi) ** 0.75 * np.exp(-eta * d2)


def _gauss_grid(center: np.ndarray, half_width: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x = x * half_width
    w = w * half_width
    axes = [c + x for c in center]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    weights = w[:, None, None] * w[None, :, None] * w[None, None, :]
    return grid, weights


def tensor_quadrature(integrand, center, half_width: float, rtol: float = 1e-8, start: int = 24, max_nodes: int = 192) -> float:
    """Integrate over a cube by Gauss-Legendre, doubling the node count until stable."""
    center = np.asarray(center, dtype=float)
    n = start
    prev = None
    while n <= max_nodes:
        grid, weights = _gauss_grid(center, half_width, n)
        val = float(np.sum(weights * integrand(grid)))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        prev = val
        n *= 2
    raise QuadratureError(f"quadrature did not converge to rtol={rtol} with {max_nodes} nodes")


def _box(eta: float) -> float:
    return 4.0 / sqrt(eta)


@dataclass(frozen=True)
class IntegralCheck:
    closed_form: float
    quadrature: float

    @property
    def value(self) -> float:
        return self.closed_form

    @property
    def rel_diff(self) -> float:
        return abs(self.quadrature - self.closed_form) / abs(self.closed_form)


def hopping_closed_form(geom: LatticeGeometry, atom: AtomSpec, eta: float, i: int = 1, j: int = 4) -> float:
    """J/h in Hz from Gaussian product identities.

    For orbitals a distance d apart the overlap is exp(-eta d^2 / 2); the kinetic
    part is (hbar^2 eta / 2m)(3 - eta d^2) times the overlap, and each cosine of
    the lattice is averaged over the product Gaussian (width exponent 2 eta).
    """
    ri, rj = geom.site_positions[i - 1], geom.site_positions[j - 1]
    d2 = float(np.sum((ri - rj) ** 2))
    overlap = exp(-eta * d2 / 2.0)
    kinetic = HBAR**2 * eta / (2.0 * atom.mass) * (3.0 - eta * d2) * overlap
    mid = (ri + rj) / 2.0
    damping = exp(-geom.k**2 / (2.0 * eta))
    cos_terms = np.cos(2.0 * geom.k * (UNIT_VECTORS @ mid) + 2.0 * PHASES)
    potential = geom.v0 * overlap * float(np.sum(0.5 + 0.5 * damping * cos_terms))
    return -(kinetic + potential) / H


def hopping_quadrature(geom: LatticeGeometry, atom: AtomSpec, eta: float, i: int = 1, j: int = 4) -> float:
    ri, rj = geom.site_positions[i - 1], geom.site_positions[j - 1]

    def integrand(r):
        phi_i = gaussian_orbital(r, ri, eta)
        phi_j = gaussian_orbital(r, rj, eta)
        lap_j = (4.0 * eta**2 * np.sum((r - rj) ** 2, axis=-1) - 6.0 * eta) * phi_j
        return phi_i * (-(HBAR**2) / (2.0 * atom.mass) * lap_j + geom.lattice_potential(r) * phi_j)

    return -tensor_quadrature(integrand, (ri + rj) / 2.0, _box(eta)) / H


METHOD_AGREEMENT = 1e-6


def _cross_checked(check: IntegralCheck, what: str) -> IntegralCheck:
    if check.rel_diff > METHOD_AGREEMENT:
        raise ArithmeticError(f"{what}: closed form and quadrature disagree (rel {check.rel_diff:.3g})")
    return check


def hopping_integral(geom: LatticeGeometry, atom: AtomSpec, d) -> IntegralCheck:
    """Outer-apex tunnelling J/h (Hz) by both methods."""
    eta = _eta(d)
    check = IntegralCheck(hopping_closed_form(geom, atom, eta), hopping_quadrature(geom, atom, eta))
    return _cross_checked(check, "hopping integral")


def rotation_coupling_closed_form(q: float) -> float:
    """W = eta l^2 exp(-eta l^2) = (q^2/2) exp(-q^2/2)."""
    x = q * q / 2.0
    return x * exp(-x)


def rotation_coupling(geom: LatticeGeometry, d) -> IntegralCheck:
    """Dimensionless W with zeta = hbar W Omega, by both methods."""
    eta = _eta(d)
    q = geom.l * sqrt(2.0 * eta)
    check = IntegralCheck(rotation_coupling_closed_form(q), rotation_coupling_quadrature(geom, eta))
    return _cross_checked(check, "rotation coupling")


def rotation_coupling_quadrature(geom: LatticeGeometry, eta: float, i: int = 2, j: int = 1) -> float:
    """-sqrt(3) * integral of phi_i (x d_y - y d_x) phi_j for adjacent outer sites i, j."""
    ri, rj = geom.site_positions[i - 1], geom.site_positions[j - 1]

    def integrand(r):
        phi_j = gaussian_orbital(r, rj, eta)
        # (x d_y - y d_x) acting on a Gaussian centred at rj
        lz = 2.0 * eta * (r[..., 0] * rj[1] - r[..., 1] * rj[0]) * phi_j
        return gaussian_orbital(r, ri, eta) * lz

    return -sqrt(3.0) * tensor_quadrature(integrand, (ri + rj) / 2.0, _box(eta))


def harmonic_offsets_closed_form(geom: LatticeGeometry, d) -> np.ndarray:
    """Energy shift nu_i of each orbital in the harmonic confinement (J)."""
    eta = _eta(d)
    r = geom.site_positions
    spread = 1.0 / (4.0 * eta)
    return geom.v1 * (r[:, 0] ** 2 + r[:, 1] ** 2 + 2.0 * r[:, 2] ** 2 + 4.0 * spread)


def harmonic_offsets_quadrature(geom: LatticeGeometry, d) -> np.ndarray:
    eta = _eta(d)
    out = []
    for center in geom.site_positions:
        out.append(
            tensor_quadrature(
                lambda r, c=center: gaussian_orbital(r, c, eta) ** 2 * geom.harmonic_potential(r),
                center,
                _box(eta),
            )
        )
    return np.array(out)


def zeta_from_omega(omega: float, w: float) -> float:
    """Rotation coupling zeta/h in Hz for angular velocity omega (rad/s)."""
    return HBAR * w * omega / H


def omega_from_zeta(zeta_hz: float, w: float) -> float:
    return zeta_hz * H / (HBAR * w)


# --- derived parameter set ---------------------------------------------------


@dataclass(frozen=True)
class DerivedParams:
    q: float
    eta: float
    omega: float
    recoil: float
    a: float
    g: float
    u0: float  # Hz
    u: float  # Hz
    j: float  # Hz, Gaussian-orbital estimate
    j_model: float  # Hz, hopping fed to the reduced model
    j_quadrature: float
    w: float
    w_quadrature: float
    total_n: int
    xi: float
    tau: float
    omega_max: float  # rad/s

    def model_params(self, zeta: float = 0.0) -> ModelParams:
        return ModelParams(u=self.u, j=self.j_model, zeta=zeta, total_n=self.total_n)


def derive_params(atom: AtomSpec, geom: LatticeGeometry, total_n: int = 16, model_hopping: float | None = None) -> DerivedParams:
    """Run the full chain V0 -> omega -> eta -> q -> a -> U0 -> (J, W) -> Omega_max.

    ``model_hopping`` (Hz) overrides the hopping used for xi, tau and
    Omega_max; by default the Gaussian-orbital estimate is used.
    """
    trap = trap_constants(geom, atom)
    a = integrable_scattering_length(atom, trap.q)
    u0 = onsite_energy(atom, a, trap)
    hop = hopping_integral(geom, atom, trap)
    rot = rotation_coupling(geom, trap)
    j_model = hop.closed_form if model_hopping is None else model_hopping
    consts = analytic.resonant_constants(ModelParams(u=u0 / 4.0, j=j_model, zeta=0.0, total_n=total_n))
    return DerivedParams(
        q=trap.q,
        eta=trap.eta,
        omega=trap.omega,
        recoil=trap.recoil,
        a=a,
        g=contact_coupling(atom, a),
        u0=u0,
        u=u0 / 4.0,
        j=hop.closed_form,
        j_quadrature=hop.quadrature,
        j_model=j_model,
        w=rot.closed_form,
        w_quadrature=rot.quadrature,
        total_n=total_n,
        xi=consts.xi,
        tau=consts.tau,
        omega_max=omega_from_zeta(consts.zeta_max, rot.closed_form),
    )


# --- reference table ---------------------------------------------------------

DY164_WAVELENGTH = 532e-9
DY164_DEPTH_RECOIL = 0.72
DY164_Q = 2.89
DY164_TABLE_HOPPING = 8.19  # Hz
DY164_FIGURE_HOPPING = 8.16  # Hz


@dataclass(frozen=True)
class TableRow:
    name: str
    symbol: str
    computed: float
    reference: float
    unit: str
    tolerance: float | None = None  # relative; None means echoed input

    @property
    def rel_dev(self) -> float:
        return abs(self.computed - self.reference) / abs(self.reference)

    @property
    def ok(self) -> bool:
        return self.tolerance is None or self.rel_dev <= self.tolerance


@dataclass(frozen=True)
class ParameterTable:
    atom: AtomSpec
    geometry: LatticeGeometry
    derived: DerivedParams
    rows: list[TableRow] = field(default_factory=list)

    def breaches(self) -> list[TableRow]:
        return [r for r in self.rows if not r.ok]

    def row(self, name: str) -> TableRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def preset_dy164(model_hopping: float = DY164_TABLE_HOPPING, total_n: int = 16) -> ParameterTable:
    """Parameter table for 164Dy at 532 nm and V0 = 0.72 E_r.

    The reduced-model quantities (xi, Omega_max) use the tabulated hopping,
    because the Gaussian-orbital estimate of J does not reproduce it; the
    estimate is still reported in its own row.
    """
    atom = DY164
    geom = lattice_for(atom, DY164_WAVELENGTH, DY164_DEPTH_RECOIL)
    d = derive_params(atom, geom, total_n=total_n, model_hopping=model_hopping)
    rows = [
        TableRow("Scattering length", "a", d.a / BOHR, 7.23, "a0", 0.005),
        TableRow("Wave length", "lambda", geom.wavelength * 1e9, 532.0, "nm"),
        TableRow("Dipolar length", "a_dd", atom.a_dd / BOHR, 131.97, "a0"),
        TableRow("Potential depth", "V0/h", geom.v0 / d.recoil, 0.72, "E_r"),
        TableRow("Reduced separation", "q", d.q, DY164_Q, "1", 0.005),
        TableRow("Interaction energy", "U/h", d.u, 6.01, "Hz", 0.01),
        TableRow("On-site energy", "U0/h", d.u0, 24.04, "Hz", 0.01),
        TableRow("Hopping rate", "J/h", d.j, DY164_TABLE_HOPPING, "Hz", 0.10),
        TableRow("Trap frequency", "omega/2pi", d.omega / (2 * pi) / 1e3, 7.25, "kHz", 0.01),
        TableRow("Angular frequency", "Omega_max/2pi", d.omega_max / (2 * pi), 2.87, "Hz", 0.03),
    ]
    return ParameterTable(atom, geom, d, rows)


TABLE_HEADER = ("name", "symbol", "computed", "reference", "unit", "rel_dev")


def table_csv(table: ParameterTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for r in table.rows:
        writer.writerow([r.name, r.symbol, f"{r.computed:.12g}", f"{r.reference:.12g}", r.unit, f"{r.rel_dev:.12g}"])
    return buf.getvalue()


def table_text(table: ParameterTable) -> str:
    d = table.derived
    lines = [f"[{table.atom.name}]"]
    for r in table.rows:
        flag = "" if r.ok else "  # outside tolerance"
        lines.append(f"{r.symbol} = {r.computed:.12g} {r.unit}  (reference {r.reference:.12g}, rel_dev {r.rel_dev:.3g}){flag}")
    lines += [
        "",
        "[derived]",
        f"eta = {d.eta:.12g} 1/m^2",
        f"W = {d.w:.12g}",
        f"J_quadrature/h = {d.j_quadrature:.12g} Hz",
        f"J_model/h = {d.j_model:.12g} Hz",
        f"xi/h = {d.xi:.12g} Hz",
        f"tau = {d.tau:.12g} s",
        f"N = {d.total_n}",
    ]
    return "\n".join(lines) + "\n"
