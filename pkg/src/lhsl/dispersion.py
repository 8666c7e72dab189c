"""Dispersion relations and band structure of the two line types.

The superlattice phase per supercell is written ``theta = k * dz``.  Both
branches come from the quadratic in ``x = (omega_sl / omega)**2``

    x**2 - (1 + eps)**2 x + 4 eps**2 sin(theta/2)**2 = 0

whose larger root is the lower (right-curving) band and whose smaller root
is the upper, left-handed band.  The small root is taken from the product of
roots so it keeps full relative precision near ``theta = 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .circuit import RightHandedSpec, SuperlatticeSpec, supercell_trace
from .errors import DomainError


class Branch(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


class _Unbounded:
    """Marker for the pole of the upper branch at k = 0."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class BandEdges:
    omega_1minus: float
    omega_1plus: float
    omega_2: float

    @property
    def gap_width(self) -> float:
        return self.omega_2 - self.omega_1plus

    @property
    def band1_width(self) -> float:
        return self.omega_1plus - self.omega_1minus

    def as_dict(self) -> dict:
        return {
            "omega_1minus_rad_s": self.omega_1minus,
            "omega_1plus_rad_s": self.omega_1plus,
            "omega_2_rad_s": self.omega_2,
            "gap_width_rad_s": self.gap_width,
            "band1_width_rad_s": self.band1_width,
        }


# --- right-handed line -------------------------------------------------------

def rh_dispersion_discrete(spec: RightHandedSpec, k: float) -> float:
    if not (0.0 <= k <= spec.k_max):
        raise DomainError(f"k={k!r} outside [0, {spec.k_max}]")
    return 2.0 * spec.omega_r * math.sin(k * spec.length / (2.0 * spec.n_cells))


def rh_dispersion_continuum(spec: RightHandedSpec, k):
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise DomainError("k must be non-negative")
    out = k / math.sqrt(spec.capacitance_per_length * spec.inductance_per_length)
    return float(out) if out.ndim == 0 else out


def rh_wavenumber(spec: RightHandedSpec, omega):
    """Inverse of the continuum RH dispersion."""
    return np.asarray(omega, dtype=float) * math.sqrt(
        spec.capacitance_per_length * spec.inductance_per_length)


# --- superlattice -------------------------------------------------------------

def _x_lower(eps, theta):
    a = 0.5 * (1.0 + eps) ** 2
    s = np.sin(0.5 * theta)
    # a - 2 eps s written as a sum of non-negative terms
    radicand = (0.5 * (1.0 - eps) ** 2 + 2.0 * eps * (1.0 - s)) * (a + 2.0 * eps * s)
    return a + np.sqrt(radicand)


def _x_upper(eps, theta):
    s = np.sin(0.5 * theta)
    return 4.0 * eps**2 * s**2 / _x_lower(eps, theta)


def sl_omega_of_phase(spec: SuperlatticeSpec, theta, branch: Branch):
    """Vectorised dispersion in terms of the supercell phase ``theta``.

    The upper branch returns ``inf`` where ``theta == 0``.
    """
    theta = np.asarray(theta, dtype=float)
    if branch is Branch.LOWER:
        x = _x_lower(spec.eps, theta)
    else:
        x = _x_upper(spec.eps, theta)
    with np.errstate(divide="ignore"):
        return spec.omega_sl / np.sqrt(x)


def sl_dispersion(spec: SuperlatticeSpec, k: float, branch: Branch):
    """Frequency of the Bloch wave with wave number ``k`` on ``branch``.

    Returns ``UNBOUNDED`` for the upper branch at ``k == 0``.
    """
    theta = k * spec.dz
    if not (0.0 <= theta <= math.pi):
        raise DomainError(f"k*dz={theta!r} outside [0, pi]")
    if branch is Branch.UPPER and theta == 0.0:
        return UNBOUNDED
    return float(sl_omega_of_phase(spec, theta, branch))


def band_edges(spec: SuperlatticeSpec) -> BandEdges:
    e = spec.eps
    a = 0.5 * (1.0 + e) ** 2
    root = abs(1.0 - e) / math.sqrt(2.0) * math.sqrt(a + 2.0 * e)
    w = spec.omega_sl
    return BandEdges(
        omega_1minus=w / (1.0 + e),
        omega_1plus=w / math.sqrt(a + root),
        omega_2=w / math.sqrt(4.0 * e**2 / (a + root)),
    )


def bandwidth_curve(omega_sl: float, eps_values) -> list[tuple[float, float]]:
    """Width of the lower band, (eps, omega_1plus - omega_1minus), per eps."""
    out = []
    for e in eps_values:
        spec = SuperlatticeSpec(1.0 / omega_sl, 1.0 / omega_sl, float(e), 1, 1.0)
        out.append((float(e), band_edges(spec).band1_width))
    return out


def sl_phase(spec: SuperlatticeSpec, omega):
    """Supercell phase ``theta`` in [0, pi] from ``cos(theta) = trace / 2``.

    Frequencies without a real solution give ``nan``.
    """
    half = 0.5 * supercell_trace(spec, omega)
    with np.errstate(invalid="ignore"):
        theta = np.arccos(half)
    return theta


def sl_wavenumber(spec: SuperlatticeSpec, omega: float) -> float:
    """Real wave number in [0, pi/dz] at ``omega``; raises inside the gap."""
    if not (omega > 0):
        raise DomainError(f"omega must be positive, got {omega!r}")
    half = 0.5 * float(supercell_trace(spec, omega))
    if abs(half) > 1.0 + 1e-12:
        raise DomainError(f"omega={omega!r} is outside both superlattice bands")
    return math.acos(min(1.0, max(-1.0, half))) / spec.dz


def sl_dk_domega(spec: SuperlatticeSpec, omega):
    """|dk/domega| of the superlattice from the closed-form derivative."""
    omega = np.asarray(omega, dtype=float)
    e = spec.eps
    r2 = (spec.omega_sl / omega) ** 2
    num = r2 / omega * (1.0 + 1.0 / e) ** 2 - r2**2 / omega * 2.0 / e**2
    inner = 2.0 + r2**2 / e**2 - r2 * (1.0 + 1.0 / e) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        den = spec.dz * np.sqrt(1.0 - 0.25 * inner**2)
        return np.abs(num / den)


# --- Euler-Lagrange oracle ---------------------------------------------------

def _el_eigenvalues(spec: SuperlatticeSpec, theta: float, dps: int = 40):
    """Eigenvalues 1/omega**2 of the Bloch-reduced node equations.

    The two node fluxes of a supercell obey ``omega**2 M v = K v`` with the
    capacitive mass matrix ``M`` and the diagonal inductive stiffness ``K``.
    """
    with mpmath.workdps(dps):
        C = mpmath.mpf(spec.capacitance)
        L = mpmath.mpf(spec.inductance)
        e = mpmath.mpf(spec.eps)
        phase = mpmath.expj(mpmath.mpf(theta))
        m11 = C * (1 + e)
        m12 = -C * (1 + e * phase)
        k_even = 1 / (e * L)
        k_odd = 1 / L
        # K^(-1/2) M K^(-1/2)
        a = mpmath.matrix(2, 2)
        a[0, 0] = m11 / k_even
        a[1, 1] = m11 / k_odd
        a[0, 1] = m12 / mpmath.sqrt(k_even * k_odd)
        a[1, 0] = mpmath.conj(a[0, 1])
        lam = mpmath.eighe(a, eigvals_only=True)
        return sorted([lam[0], lam[1]])


def el_oracle_dispersion(spec: SuperlatticeSpec, k: float, branch: Branch) -> float:
    """Dispersion from the Euler-Lagrange node equations, solved independently."""
    theta = k * spec.dz
    if not (0.0 < theta <= math.pi):
        raise DomainError(f"k*dz={theta!r} outside (0, pi]")
    small, large = _el_eigenvalues(spec, theta)
    lam = large if branch is Branch.LOWER else small
    if not lam > 0:
        raise DomainError(f"no real frequency on {branch.value} branch at k*dz={theta!r}")
    with mpmath.workdps(40):
        return float(1 / mpmath.sqrt(lam))


def even_site_residual(spec: SuperlatticeSpec, k: float, omega: float) -> float:
    """Residual of the even-site flux equation under a plane wave on even sites,
    divided by ``C`` so it is dimensionless times ``C``."""
    C, L, e = spec.capacitance, spec.inductance, spec.eps
    theta = k * spec.dz
    den = C + e * C - 1.0 / (omega**2 * L)
    p = np.exp(1j * theta)
    val = (C**2 * (1.0 + e / p) / den + e * C**2 * (p + e) / den
           - (C + e * C - 1.0 / (omega**2 * e * L)))
    return abs(val) / C
