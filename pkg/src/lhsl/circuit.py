"""Lumped-element line segments and their ABCD two-port matrices.

All quantities are SI: henries, farads, metres, rad/s.  The superlattice
cell pair is (A, B) where B carries ``eps`` times the inductance *and* the
capacitance of A, so both cells share the same characteristic impedance.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError

# Element split implied by L*C = 1.2e-22 s^2 (superlattice), 1.875e-22 s^2
# (right-handed) and Z = sqrt(3000) ohm for both.
PAPER_L_SL = 6e-10
PAPER_C_SL = 2e-13
PAPER_L_R = 7.5e-10
PAPER_C_R = 2.5e-13
PAPER_DZ = 5e-5
PAPER_D_R = 0.01
PAPER_N_R = 10


@dataclass(frozen=True)
class SuperlatticeSpec:
    """Two-cell left-handed superlattice (series C, shunt L in every cell)."""

    inductance: float
    capacitance: float
    eps: float
    n_cells: int
    dz: float

    def __post_init__(self):
        for name in ("inductance", "capacitance", "eps", "dz"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise DomainError(f"n_cells must be a positive integer, got {self.n_cells!r}")

    @property
    def omega_sl(self) -> float:
        return 1.0 / math.sqrt(self.inductance * self.capacitance)

    @property
    def length(self) -> float:
        return self.n_cells * self.dz

    @property
    def impedance(self) -> float:
        return math.sqrt(self.inductance / self.capacitance)

    @property
    def second_cell(self) -> tuple[float, float]:
        """(L', C') of cell B."""
        return self.eps * self.inductance, self.eps * self.capacitance


@dataclass(frozen=True)
class RightHandedSpec:
    """Right-handed line of ``n_cells`` series-L / shunt-C cells over ``length``."""

    cell_inductance: float
    cell_capacitance: float
    n_cells: int
    length: float

    def __post_init__(self):
        for name in ("cell_inductance", "cell_capacitance", "length"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise DomainError(f"n_cells must be a positive integer, got {self.n_cells!r}")

    @property
    def inductance_per_length(self) -> float:
        return self.n_cells * self.cell_inductance / self.length

    @property
    def capacitance_per_length(self) -> float:
        return self.n_cells * self.cell_capacitance / self.length

    @property
    def omega_r(self) -> float:
        return 1.0 / math.sqrt(self.cell_inductance * self.cell_capacitance)

    @property
    def impedance(self) -> float:
        return math.sqrt(self.cell_inductance / self.cell_capacitance)

    @property
    def k_max(self) -> float:
        return math.pi * self.n_cells / self.length

    @property
    def cutoff(self) -> float:
        """Upper band limit of the discrete line, 2*omega_r."""
        return 2.0 * self.omega_r


@dataclass(frozen=True)
class TwoPortMatrix:
    """ABCD matrix mapping (V_in, I_in) to (V_out, I_out).

    With ``dps`` set, the entries are mpmath complex numbers and products
    and the determinant are evaluated at that many decimal digits.  This
    matters far below omega_sl, where the entries grow like (omega_sl/omega)**2
    per cell and a float64 determinant loses every digit to cancellation.
    """

    b11: complex
    b12: complex
    b21: complex
    b22: complex
    dps: int | None = None

    @classmethod
    def from_array(cls, m) -> "TwoPortMatrix":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    def to_array(self) -> np.ndarray:
        return np.array([[complex(self.b11), complex(self.b12)],
                         [complex(self.b21), complex(self.b22)]], dtype=complex)

    def _precision(self, other=None):
        digits = [d for d in (self.dps, getattr(other, "dps", None)) if d]
        return mpmath.workdps(max(digits)) if digits else contextlib.nullcontext()

    def __matmul__(self, other: "TwoPortMatrix") -> "TwoPortMatrix":
        with self._precision(other):
            return TwoPortMatrix(
                self.b11 * other.b11 + self.b12 * other.b21,
                self.b11 * other.b12 + self.b12 * other.b22,
                self.b21 * other.b11 + self.b22 * other.b21,
                self.b21 * other.b12 + self.b22 * other.b22,
                max(self.dps or 0, other.dps or 0) or None,
            )

    def apply(self, voltage, current):
        if self.dps:
            return self.as_float().apply(voltage, current)
        return (self.b11 * voltage + self.b12 * current,
                self.b21 * voltage + self.b22 * current)

    def as_float(self) -> "TwoPortMatrix":
        return TwoPortMatrix(complex(self.b11), complex(self.b12), complex(self.b21), complex(self.b22))

    @property
    def det(self) -> complex:
        with self._precision():
            return complex(self.b11 * self.b22 - self.b12 * self.b21)

    @property
    def trace(self) -> complex:
        with self._precision():
            return complex(self.b11 + self.b22)


def _check_omega(omega):
    if not (omega > 0 and math.isfinite(omega)):
        raise DomainError(f"omega must be positive and finite, got {omega!r}")


def single_cell_abcd(spec: SuperlatticeSpec, cell: str, omega: float,
                     dps: int | None = None) -> TwoPortMatrix:
    """ABCD matrix of cell ``"A"`` or ``"B"`` at angular frequency ``omega``.

    ``dps`` switches to mpmath arithmetic at that many digits.
    """
    _check_omega(omega)
    if cell not in ("A", "B"):
        raise ValueError(f"cell must be 'A' or 'B', got {cell!r}")
    scale = 1.0 if cell == "A" else spec.eps
    if dps is None:
        x = (spec.omega_sl / omega) ** 2
        return TwoPortMatrix(
            complex(1.0 - x / scale**2),
            1.0 / (1j * omega * scale * spec.capacitance),
            1.0 / (1j * omega * scale * spec.inductance),
            complex(1.0),
        )
    with mpmath.workdps(dps):
        w, c, ell, s = (mpmath.mpf(v) for v in (omega, spec.capacitance, spec.inductance, scale))
        x = 1 / (w * w * c * ell)
        j = mpmath.mpc(0, 1)
        return TwoPortMatrix(mpmath.mpc(1 - x / s**2), 1 / (j * w * s * c), 1 / (j * w * s * ell),
                             mpmath.mpc(1), dps)


def supercell_abcd(spec: SuperlatticeSpec, omega: float, dps: int | None = None) -> TwoPortMatrix:
    """Product b_A . b_B of the two cells forming one supercell."""
    return single_cell_abcd(spec, "A", omega, dps) @ single_cell_abcd(spec, "B", omega, dps)


def supercell_abcd_closed_form(spec: SuperlatticeSpec, omega: float) -> TwoPortMatrix:
    """Entrywise closed form of the supercell matrix."""
    _check_omega(omega)
    e = spec.eps
    x = (spec.omega_sl / omega) ** 2
    return TwoPortMatrix(
        complex(1.0 - x * (1.0 + 1.0 / e + 1.0 / e**2 - x / e**2)),
        (1.0 + 1.0 / e - x / e) / (1j * omega * spec.capacitance),
        (1.0 + 1.0 / e - x / e**2) / (1j * omega * spec.inductance),
        complex(1.0 - x / e),
    )


def supercell_trace(spec: SuperlatticeSpec, omega):
    """Real trace b11 + b22 of the supercell matrix; accepts arrays."""
    omega = np.asarray(omega, dtype=float)
    e = spec.eps
    x = (spec.omega_sl / omega) ** 2
    return 2.0 - x * (1.0 + 1.0 / e) ** 2 + x**2 / e**2


def paper_superlattice(eps: float = 2.0, n_cells: int = 200, dz: float = PAPER_DZ) -> SuperlatticeSpec:
    return SuperlatticeSpec(PAPER_L_SL, PAPER_C_SL, eps, n_cells, dz)


def paper_right_handed(n_cells: int = PAPER_N_R, length: float = PAPER_D_R) -> RightHandedSpec:
    return RightHandedSpec(PAPER_L_R, PAPER_C_R, n_cells, length)
