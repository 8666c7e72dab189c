"""Eigenmodes of the finite superlattice + right-handed hybrid line.

The superlattice occupies ``0 <= z <= d_sl`` and the right-handed line
``d_sl <= z <= d``.  Currents vanish at both open ends; voltage and current
are continuous at the junction.  With ``I0 = 1`` the current condition fixes
every amplitude and the voltage condition becomes a scalar equation in
``omega`` whose zeros are the eigenfrequencies.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .circuit import RightHandedSpec, SuperlatticeSpec, single_cell_abcd
from .dispersion import (
    Branch,
    band_edges,
    rh_wavenumber,
    sl_omega_of_phase,
    sl_phase,
)
from .errors import DomainError

DEFAULT_POINTS_PER_MODE = 20


class ScanDensityWarning(UserWarning):
    """The sign-change scan may have merged neighbouring roots."""


class Band(enum.Enum):
    BAND1 = "band1"
    BAND2 = "band2"


@dataclass(frozen=True)
class HybridLineSpec:
    sl: SuperlatticeSpec
    rh: RightHandedSpec

    @property
    def length(self) -> float:
        return self.sl.length + self.rh.length


@dataclass(frozen=True)
class ModeSolution:
    index: int
    omega: float
    k_sl: float
    k_r: float
    alpha: float
    beta: complex
    z_sl: complex
    band: Band


@dataclass(frozen=True)
class ModeProfile:
    positions: np.ndarray
    voltage: np.ndarray
    current: np.ndarray
    segment: np.ndarray

    def rows(self):
        for z, v, i, s in zip(self.positions, self.voltage, self.current, self.segment):
            yield (float(z), v.real, v.imag, i.real, i.imag, str(s))


def _line_terms(spec: HybridLineSpec, omega):
    """Vectorised building blocks of the junction conditions.

    Returns the superlattice phase, both wave numbers, the wave impedance
    ``Z_sl``, the reflection ``beta`` and the superlattice voltage at the
    junction (per unit ``I0``).
    """
    sl, rh = spec.sl, spec.rh
    omega = np.asarray(omega, dtype=float)
    theta = sl_phase(sl, omega)
    x = (sl.omega_sl / omega) ** 2
    e = sl.eps
    b22 = 1.0 - x / e
    b21 = (1.0 + 1.0 / e - x / e**2) / (1j * omega * sl.inductance)
    fwd = np.exp(1j * theta)
    z_sl = (fwd - b22) / b21
    beta = -(np.conj(fwd) - b22) / (fwd - b22)
    phi = sl.n_cells * theta
    v_sl = z_sl * (np.exp(1j * phi) + beta * np.exp(-1j * phi))
    k_r = rh_wavenumber(rh, omega)
    return theta, phi, k_r * rh.length, z_sl, beta, v_sl


def _cleared_residual(spec: HybridLineSpec, omega):
    """Residual multiplied by sin(k_r d_r); free of the poles of ``alpha``."""
    _, phi, krd, _, _, v_sl = _line_terms(spec, omega)
    return (-2.0 * spec.rh.impedance * np.sin(phi) * np.cos(krd)
            - np.sin(krd) * v_sl.real)


def _check_in_band(spec: HybridLineSpec, omega: float) -> float:
    theta = float(sl_phase(spec.sl, omega))
    if not (0.0 < theta < math.pi):
        raise DomainError(f"omega={omega!r} has no propagating superlattice wave")
    return theta


def self_consistency_residual(spec: HybridLineSpec, omega: float) -> float:
    """Voltage mismatch V_r(d_sl) - V_sl(d_sl) in ohms (per ampere of I0)."""
    _check_in_band(spec, omega)
    _, phi, krd, _, _, v_sl = _line_terms(spec, omega)
    alpha = -math.sin(phi) / math.sin(krd)
    res = 2.0 * spec.rh.impedance * alpha * math.cos(krd) - complex(v_sl)
    return res.real


def residual_scale(spec: HybridLineSpec, omega: float) -> float:
    """Largest magnitude either side of the voltage condition can reach."""
    _, phi, krd, z_sl, _, _ = _line_terms(spec, omega)
    alpha = math.sin(phi) / math.sin(krd)
    return 2.0 * abs(complex(z_sl)) + 2.0 * spec.rh.impedance * abs(alpha)


def band_interval(spec: HybridLineSpec, band: Band) -> tuple[float, float]:
    edges = band_edges(spec.sl)
    if band is Band.BAND1:
        return edges.omega_1minus, edges.omega_1plus
    return edges.omega_2, math.inf


def _scan_grid(spec: HybridLineSpec, band: Band, points_per_mode: int, omega_max):
    sl = spec.sl
    n = sl.n_cells
    step = math.pi / (points_per_mode * n)
    if band is Band.BAND1:
        theta = np.arange(0.5 * step, math.pi - 0.5 * step, step)
        branch = Branch.LOWER
    else:
        theta_lo = 0.5 * math.pi / n
        theta = np.arange(math.pi - 0.5 * step, theta_lo, -step)
        branch = Branch.UPPER
    omega = sl_omega_of_phase(sl, theta, branch)
    if omega_max is not None:
        omega = omega[omega <= omega_max]
    lo, hi = float(omega.min()), float(omega.max())
    # right-handed standing waves are evenly spaced in omega
    rh_spacing = math.pi / float(rh_wavenumber(spec.rh, 1.0) * spec.rh.length)
    rh_grid = np.arange(lo, hi, rh_spacing / points_per_mode)
    return np.unique(np.concatenate([omega, rh_grid])), theta


def expected_mode_count(spec: HybridLineSpec, lo: float, hi: float) -> float:
    """Phase-counting estimate of the number of modes in [lo, hi]."""
    sl = spec.sl
    dtheta = abs(float(sl_phase(sl, hi)) - float(sl_phase(sl, lo)))
    dkr = float(rh_wavenumber(spec.rh, hi) - rh_wavenumber(spec.rh, lo)) * spec.rh.length
    return (sl.n_cells * dtheta + dkr) / math.pi


def _bisect_all(spec: HybridLineSpec, lo, hi, rtol: float, max_iter: int = 200):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    f_lo = _cleared_residual(spec, lo)
    for _ in range(max_iter):
        if np.all(hi - lo <= rtol * hi):
            break
        mid = 0.5 * (lo + hi)
        f_mid = _cleared_residual(spec, mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def find_modes(spec: HybridLineSpec, band: Band, scan_points: int | None = None,
               rtol: float = 1e-15, omega_max: float | None = None) -> list[ModeSolution]:
    """Eigenfrequencies inside ``band``, ascending.

    ``scan_points`` is the number of superlattice-phase samples across the
    band (default 20 per supercell); a matching density of samples per
    right-handed mode spacing is merged in.  Roots are bracketed by sign
    changes and bisected down to ``rtol``.  Band 2 extends up to the
    frequency of the longest superlattice standing wave unless ``omega_max``
    is given.
    """
    n = spec.sl.n_cells
    if scan_points is None:
        scan_points = DEFAULT_POINTS_PER_MODE * n
    if scan_points < 10 * n:
        raise ValueError(f"scan_points={scan_points} is below 10 per expected mode ({10 * n})")
    points_per_mode = max(1, scan_points // n)
    grid, _ = _scan_grid(spec, band, points_per_mode, omega_max)
    f = _cleared_residual(spec, grid)
    flips = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    roots = _bisect_all(spec, grid[flips], grid[flips + 1], rtol) if len(flips) else np.array([])

    expected = expected_mode_count(spec, grid[0], grid[-1])
    if abs(len(roots) - expected) > 2:
        local = np.diff(grid).min() / grid.mean()
        warnings.warn(
            f"{band.value}: found {len(roots)} roots, phase count suggests {expected:.1f}; "
            f"finest relative scan step {local:.2e}, increase scan_points",
            ScanDensityWarning, stacklevel=2)

    modes = []
    for i, w in enumerate(np.sort(roots)):
        theta, phi, krd, z_sl, beta, _ = _line_terms(spec, w)
        modes.append(ModeSolution(
            index=i,
            omega=float(w),
            k_sl=float(theta) / spec.sl.dz,
            k_r=float(krd) / spec.rh.length,
            alpha=-math.sin(float(phi)) / math.sin(float(krd)),
            beta=complex(beta),
            z_sl=complex(z_sl),
            band=band,
        ))
    return modes


def find_all_modes(spec: HybridLineSpec, scan_points: int | None = None,
                   omega_max: float | None = None) -> list[ModeSolution]:
    """Modes of both bands, re-indexed in ascending frequency."""
    modes = (find_modes(spec, Band.BAND1, scan_points)
             + find_modes(spec, Band.BAND2, scan_points, omega_max=omega_max))
    return [ModeSolution(i, m.omega, m.k_sl, m.k_r, m.alpha, m.beta, m.z_sl, m.band)
            for i, m in enumerate(modes)]


def mode_profile(spec: HybridLineSpec, mode: ModeSolution, rh_points: int = 400,
                 check_tol: float = 1e-6) -> ModeProfile:
    """Voltage and current along the line for ``mode`` with ``I0 = 1`` A.

    Superlattice values are given only at circuit nodes (every half
    supercell); the interior node of each supercell is obtained by passing
    the state at its left edge through cell B.
    """
    sl, rh = spec.sl, spec.rh
    if band_of(spec, mode.omega) is not mode.band:
        raise ValueError("mode does not belong to this line specification")
    scale = residual_scale(spec, mode.omega)
    if abs(self_consistency_residual(spec, mode.omega)) > check_tol * scale:
        raise ValueError("mode frequency is not an eigenfrequency of this line")

    k = mode.k_sl
    z_nodes = np.arange(sl.n_cells + 1) * sl.dz
    i_sl = np.exp(1j * k * z_nodes) - np.exp(-1j * k * z_nodes)
    v_sl = mode.z_sl * (np.exp(1j * k * z_nodes) + mode.beta * np.exp(-1j * k * z_nodes))
    cell_b = single_cell_abcd(sl, "B", mode.omega)
    v_mid, i_mid = cell_b.apply(v_sl[:-1], i_sl[:-1])

    pos_sl = np.empty(2 * sl.n_cells + 1)
    pos_sl[0::2] = z_nodes
    pos_sl[1::2] = z_nodes[:-1] + 0.5 * sl.dz
    v = np.empty(2 * sl.n_cells + 1, dtype=complex)
    i = np.empty_like(v)
    v[0::2], v[1::2] = v_sl, v_mid
    i[0::2], i[1::2] = i_sl, i_mid

    d = spec.length
    z_r = np.linspace(sl.length, d, rh_points)
    kr = mode.k_r
    a = mode.alpha
    i_r = a * (np.exp(-1j * kr * d) * np.exp(1j * kr * z_r) - np.exp(1j * kr * d) * np.exp(-1j * kr * z_r))
    v_r = rh.impedance * a * (np.exp(-1j * kr * d) * np.exp(1j * kr * z_r)
                              + np.exp(1j * kr * d) * np.exp(-1j * kr * z_r))

    return ModeProfile(
        positions=np.concatenate([pos_sl, z_r]),
        voltage=np.concatenate([v, v_r]),
        current=np.concatenate([i, i_r]),
        segment=np.array(["sl"] * len(pos_sl) + ["rh"] * rh_points),
    )


def band_of(spec: HybridLineSpec, omega: float) -> Band | None:
    edges = band_edges(spec.sl)
    if edges.omega_1minus <= omega <= edges.omega_1plus:
        return Band.BAND1
    if omega >= edges.omega_2:
        return Band.BAND2
    return None


def rh_overlap(a: ModeProfile, b: ModeProfile, segment: str = "rh") -> float:
    """Normalised overlap of |V| restricted to one segment."""
    va = np.abs(a.voltage[a.segment == segment])
    vb = np.abs(b.voltage[b.segment == segment])
    return float(np.dot(va, vb) / math.sqrt(np.dot(va, va) * np.dot(vb, vb)))
