"""Adiabatic renormalization of a qubit coupled uniformly to the line modes.

Modes faster than the current tunnelling element are integrated out, each
round shrinking it to

    Delta_n = Delta_0 * exp(-2 * sum_{omega_k > Delta_{n-1}} g**2 / omega_k**2)

until nothing changes.  The continuum version replaces the sum with the
integral of J(omega) / omega**2 above Delta.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .dispersion import BandEdges, band_edges
from .dom import DomCurve, DomMethod
from .errors import DomainError
from .modes import HybridLineSpec, find_all_modes

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
DEFAULT_FLOOR_RATIO = 1e-8
DEFAULT_JUMP_THRESHOLD = 0.05


class PhaseLabel(enum.Enum):
    DELOCALIZED = "delocalized"
    PARTIALLY_LOCALIZED_GAP = "partially_localized_gap"
    PARTIALLY_LOCALIZED_BAND1 = "partially_localized_band1"
    QUASI_LOCALIZED = "quasi_localized"


@dataclass(frozen=True)
class QubitSpec:
    delta0: float
    g: float

    def __post_init__(self):
        if not self.delta0 > 0:
            raise DomainError(f"delta0 must be positive, got {self.delta0!r}")
        if not self.g >= 0:
            raise DomainError(f"g must be non-negative, got {self.g!r}")


@dataclass(frozen=True)
class RenormalizationResult:
    """Outcome of the fixed-point iteration.

    ``log_ratio`` is ln(delta_eff / delta0); it stays finite when
    ``delta_eff`` itself underflows to 0.0 at very strong coupling.
    """

    delta_eff: float
    log_ratio: float
    iterations: int
    converged: bool
    trace: list = field(repr=False)
    eliminated_mode_count: int
    phase: PhaseLabel | None


def classify_phase(delta_eff: float, edges: BandEdges, floor: float) -> PhaseLabel:
    if not floor > 0:
        raise ValueError("floor must be positive")
    if delta_eff >= edges.omega_2:
        return PhaseLabel.DELOCALIZED
    if delta_eff > edges.omega_1plus:
        return PhaseLabel.PARTIALLY_LOCALIZED_GAP
    if delta_eff >= edges.omega_1minus and delta_eff >= floor:
        return PhaseLabel.PARTIALLY_LOCALIZED_BAND1
    return PhaseLabel.QUASI_LOCALIZED


def _suffix_sums(freqs, g):
    """suffix[i] = sum of g^2/w^2 over freqs[i:], accumulated from the top."""
    terms = g * g / (freqs * freqs)
    out = np.zeros(len(freqs) + 1)
    out[:-1] = np.cumsum(terms[::-1])[::-1]
    return out


def renormalize_discrete(mode_freqs, qubit: QubitSpec, tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER, edges: BandEdges | None = None,
                         floor_ratio: float = DEFAULT_FLOOR_RATIO,
                         _prepared=None) -> RenormalizationResult:
    """Iterate the discrete recursion starting from ``qubit.delta0``.

    Modes exactly at the current tunnelling element are not eliminated.
    ``edges`` is only needed to attach a phase label; ``floor_ratio`` only
    moves the QuasiLocalized boundary of that label, never the iteration.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if _prepared is None:
        freqs = np.asarray(mode_freqs, dtype=float)
        if len(freqs) and (np.any(freqs <= 0) or np.any(np.diff(freqs) < 0)):
            raise ValueError("mode_freqs must be positive and sorted ascending")
        suffix = _suffix_sums(freqs, qubit.g)
        freq_list = freqs.tolist()
    else:
        freq_list, suffix = _prepared

    d0 = qubit.delta0
    floor = floor_ratio * d0
    prev = d0
    trace = [d0]
    log_ratio = 0.0
    converged = False
    idx = len(freq_list)
    iterations = 0
    while iterations < max_iter:
        idx = bisect_right(freq_list, prev)
        log_ratio = -2.0 * float(suffix[idx])
        delta = d0 * math.exp(log_ratio)
        trace.append(delta)
        iterations += 1
        if abs(delta - prev) <= tol * d0:
            converged = True
            prev = delta
            break
        prev = delta

    phase = classify_phase(prev, edges, floor) if edges is not None else None
    return RenormalizationResult(prev, log_ratio, iterations, converged, trace,
                                 len(freq_list) - idx, phase)


# --- continuum ---------------------------------------------------------------

def band2_tail_integral(lower: float, omega2: float) -> float:
    """Closed form of the integral of 1/(w^2 sqrt(w - omega2)) over [lower, inf)."""
    lower = max(lower, omega2)
    c = math.sqrt(omega2)
    u = math.sqrt(lower - omega2)
    return math.pi / (2 * c**3) - u / (c**2 * lower) - math.atan(u / c) / c**3


def _band1_integral(lower: float, dom: DomCurve) -> float:
    e = dom.edges
    a, b = e.omega_1minus, e.omega_1plus
    if lower >= b:
        return 0.0
    if lower <= a:
        val, _ = quad(lambda w: 1.0 / (w * w), a, b, weight="alg", wvar=(-0.5, -0.25))
    else:
        val, _ = quad(lambda w: 1.0 / (w * w * math.sqrt(w - a)), lower, b,
                      weight="alg", wvar=(0.0, -0.25))
    return dom.alpha1 * val


def _sampled_integral(lower: float, dom: DomCurve) -> float:
    total = 0.0
    seen = []
    for band in dom.bands:
        if band in seen:
            continue
        seen.append(band)
        w, d = dom.band_samples(band)
        order = np.argsort(w)
        w, d = w[order], d[order]
        keep = w > lower
        if not np.any(keep):
            continue
        if 0 < np.argmax(keep):
            d_lo = float(np.interp(lower, w, d))
            w = np.concatenate([[lower], w[keep]])
            d = np.concatenate([[d_lo], d[keep]])
        else:
            w, d = w[keep], d[keep]
        if len(w) > 1:
            total += float(np.trapezoid(d / w**2, w))
    return total


def inverse_square_moment(dom: DomCurve, lower: float) -> float:
    """Integral of D(w)/w^2 over [lower, inf)."""
    if dom.method is DomMethod.PIECEWISE_FIT:
        tail = dom.alpha2 * band2_tail_integral(lower, dom.edges.omega_2) if dom.alpha2 else 0.0
        body = _band1_integral(lower, dom) if dom.alpha1 else 0.0
        return body + tail
    return _sampled_integral(lower, dom)


def renormalize_continuum(dom: DomCurve, qubit: QubitSpec, tol: float = DEFAULT_TOL,
                          max_iter: int = DEFAULT_MAX_ITER,
                          floor_ratio: float = DEFAULT_FLOOR_RATIO) -> RenormalizationResult:
    """Fixed point of Delta = Delta0 exp(-2 g^2 int_Delta^inf D/w^2) from above.

    The sequence is monotone, so it stops at the largest fixed point below
    ``delta0``.
    """
    d0 = qubit.delta0
    g2 = qubit.g**2
    floor = floor_ratio * d0
    prev = d0
    trace = [d0]
    log_ratio = 0.0
    converged = False
    iterations = 0
    while iterations < max_iter:
        log_ratio = -2.0 * g2 * inverse_square_moment(dom, prev) if g2 else 0.0
        delta = d0 * math.exp(log_ratio)
        # quadrature noise must not break monotonicity
        delta = min(delta, prev)
        trace.append(delta)
        iterations += 1
        if abs(delta - prev) <= tol * d0:
            converged = True
            prev = delta
            break
        prev = delta
    edges = dom.edges
    phase = classify_phase(prev, edges, floor) if edges is not None else None
    return RenormalizationResult(prev, log_ratio, iterations, converged, trace, 0, phase)


# --- analytic inversions --------------------------------------------------------

def _check_inversion_args(delta_eff, delta0, alpha2, omega2):
    if not (delta_eff > 0 and delta0 > 0 and omega2 > 0):
        raise DomainError("frequencies must be positive")
    if not alpha2 > 0:
        raise DomainError("alpha2 must be positive")
    if delta_eff > delta0:
        raise DomainError(f"delta_eff={delta_eff!r} exceeds delta0={delta0!r}")


def invert_g_gap(delta_eff: float, delta0: float, alpha2: float, omega2: float) -> float:
    """Coupling that pins the tunnelling element at ``delta_eff`` in the gap,
    where the whole upper-band tail has been eliminated."""
    _check_inversion_args(delta_eff, delta0, alpha2, omega2)
    if delta_eff > omega2 * (1 + 1e-12):
        raise DomainError(f"delta_eff={delta_eff!r} is above the upper band edge {omega2!r}")
    radicand = omega2**1.5 * math.log(delta_eff / delta0) / (-math.pi * alpha2)
    return math.sqrt(max(radicand, 0.0))


def invert_g_band2(delta_eff: float, delta0: float, alpha2: float, omega2: float) -> float:
    """Coupling for ``delta_eff`` inside the upper band (partial tail)."""
    _check_inversion_args(delta_eff, delta0, alpha2, omega2)
    if delta_eff < omega2:
        raise DomainError(f"delta_eff={delta_eff!r} is below the upper band edge {omega2!r}")
    s = math.sqrt(delta_eff / omega2 - 1.0)
    bracket = (omega2 / delta_eff) * s + math.atan(s) - math.pi / 2
    if bracket == 0.0:
        return 0.0
    radicand = omega2**1.5 * math.log(delta_eff / delta0) / (2 * alpha2 * bracket)
    return math.sqrt(max(radicand, 0.0))


def invert_g(delta_eff: float, delta0: float, fit: DomCurve) -> float:
    """Coupling whose continuum fixed-point equation is solved by ``delta_eff``.

    Uses the closed forms above the lower band and falls back to the
    numerical integral inside it.
    """
    e = fit.edges
    if delta_eff >= e.omega_2:
        return invert_g_band2(delta_eff, delta0, fit.alpha2, e.omega_2)
    if delta_eff > e.omega_1plus:
        return invert_g_gap(delta_eff, delta0, fit.alpha2, e.omega_2)
    if delta_eff > delta0:
        raise DomainError(f"delta_eff={delta_eff!r} exceeds delta0={delta0!r}")
    moment = inverse_square_moment(fit, delta_eff)
    return math.sqrt(math.log(delta0 / delta_eff) / (2.0 * moment))


# --- phase diagram ----------------------------------------------------------------

@dataclass(frozen=True)
class Jump:
    delta0: float
    g_before: float
    g_after: float
    delta_before: float
    delta_after: float

    @property
    def size(self) -> float:
        return (self.delta_before - self.delta_after) / self.delta0


@dataclass(frozen=True)
class PhaseDiagram:
    delta0: np.ndarray
    g: np.ndarray
    delta_eff: np.ndarray
    log_ratio: np.ndarray
    converged: np.ndarray
    phases: list
    jumps: list
    edges: BandEdges
    mode_count: int

    def rows(self):
        for i, d0 in enumerate(self.delta0):
            for j, g in enumerate(self.g):
                yield d0, g, self.delta_eff[i, j], self.phases[i][j], bool(self.converged[i, j])


def detect_jumps(delta0_grid, g_grid, delta_eff, threshold: float) -> list[Jump]:
    jumps = []
    for i, d0 in enumerate(delta0_grid):
        row = delta_eff[i]
        for j in range(len(g_grid) - 1):
            if abs(row[j + 1] - row[j]) > threshold * d0:
                jumps.append(Jump(float(d0), float(g_grid[j]), float(g_grid[j + 1]),
                                  float(row[j]), float(row[j + 1])))
    return jumps


def phase_diagram(spec: HybridLineSpec, delta0_grid, g_grid, modes=None,
                  jump_threshold: float = DEFAULT_JUMP_THRESHOLD, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER,
                  floor_ratio: float = DEFAULT_FLOOR_RATIO) -> PhaseDiagram:
    """Discrete renormalization over a (delta0, g) grid, rows of constant delta0."""
    delta0_grid = np.asarray(delta0_grid, dtype=float)
    g_grid = np.asarray(g_grid, dtype=float)
    for name, grid in (("delta0_grid", delta0_grid), ("g_grid", g_grid)):
        if np.any(np.diff(grid) < 0):
            raise ValueError(f"{name} must be sorted ascending")
    if modes is None:
        modes = find_all_modes(spec)
    freqs = np.sort(np.array([m if isinstance(m, float) else m.omega for m in modes], dtype=float))
    freq_list = freqs.tolist()
    edges = band_edges(spec.sl)

    shape = (len(delta0_grid), len(g_grid))
    delta_eff = np.zeros(shape)
    log_ratio = np.zeros(shape)
    converged = np.zeros(shape, dtype=bool)
    phases = [[None] * len(g_grid) for _ in delta0_grid]
    for j, g in enumerate(g_grid):
        prepared = (freq_list, _suffix_sums(freqs, float(g)))
        for i, d0 in enumerate(delta0_grid):
            res = renormalize_discrete(None, QubitSpec(float(d0), float(g)), tol=tol,
                                       max_iter=max_iter, edges=edges,
                                       floor_ratio=floor_ratio, _prepared=prepared)
            delta_eff[i, j] = res.delta_eff
            log_ratio[i, j] = res.log_ratio
            converged[i, j] = res.converged
            phases[i][j] = res.phase
    jumps = detect_jumps(delta0_grid, g_grid, delta_eff, jump_threshold)
    return PhaseDiagram(delta0_grid, g_grid, delta_eff, log_ratio, converged, phases,
                        jumps, edges, len(freqs))
