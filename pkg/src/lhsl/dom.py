"""Density of modes of the hybrid line and the spectral density built from it.

Three representations share the ``DomCurve`` type: the finite-difference
estimate from solved eigenfrequencies, the sum of the decoupled line
densities, and the two-parameter piecewise model with Van Hove edges.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dispersion import BandEdges, band_edges, sl_dk_domega, sl_phase
from .modes import Band, HybridLineSpec, ModeSolution

DEFAULT_EDGE_MARGIN = 5


class DomMethod(enum.Enum):
    NUMERICAL = "numerical"
    ANALYTICAL = "analytical"
    PIECEWISE_FIT = "piecewise_fit"


@dataclass(frozen=True)
class DomCurve:
    """Tabulated or modelled density of modes D(omega) in s/rad.

    Sampled curves keep a band label per sample and are interpolated
    linearly inside each band's sample range.  A piecewise-fit curve is
    evaluated from ``alpha1``, ``alpha2`` and ``edges``.
    """

    omega: np.ndarray
    density: np.ndarray
    method: DomMethod
    bands: np.ndarray = field(default_factory=lambda: np.array([], dtype=object))
    alpha1: float | None = None
    alpha2: float | None = None
    edges: BandEdges | None = None
    residual_norm: float | None = None

    def evaluate(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.method is DomMethod.PIECEWISE_FIT:
            return piecewise_dom(omega, self.alpha1, self.alpha2, self.edges)
        out = np.zeros_like(omega)
        for band in _unique(self.bands):
            sel = self.bands == band
            w, d = self.omega[sel], self.density[sel]
            if len(w) == 0:
                continue
            inside = (omega >= w[0]) & (omega <= w[-1])
            out[inside] = np.interp(omega[inside], w, d)
        return out

    def band_samples(self, band):
        sel = self.bands == band
        return self.omega[sel], self.density[sel]

    def rows(self):
        for w, d in zip(self.omega, self.density):
            yield float(w), float(d), self.method.value


def _unique(labels):
    seen = []
    for lab in labels:
        if lab not in seen:
            seen.append(lab)
    return seen


def dom_numerical(frequencies, bands=None) -> DomCurve:
    """D(omega_i) = 2 / (omega_{i+1} - omega_{i-1}) for interior modes of each band.

    ``bands`` labels each frequency; without it the list is one band.  The
    first and last mode of every band get no sample.
    """
    freqs = np.asarray(frequencies, dtype=float)
    labels = np.array([None] * len(freqs), dtype=object) if bands is None else np.asarray(bands, dtype=object)
    if len(labels) != len(freqs):
        raise ValueError("bands must match frequencies in length")
    omegas, dens, labs = [], [], []
    for band in _unique(labels):
        w = np.sort(freqs[labels == band])
        if len(w) < 3:
            warnings.warn(f"band {band!r} has {len(w)} modes; at least 3 are needed", stacklevel=2)
            continue
        omegas.append(w[1:-1])
        dens.append(2.0 / (w[2:] - w[:-2]))
        labs.extend([band] * (len(w) - 2))
    if not omegas:
        return DomCurve(np.array([]), np.array([]), DomMethod.NUMERICAL, np.array([], dtype=object))
    return DomCurve(np.concatenate(omegas), np.concatenate(dens), DomMethod.NUMERICAL,
                    np.array(labs, dtype=object))


def dom_from_modes(modes: list[ModeSolution]) -> DomCurve:
    return dom_numerical([m.omega for m in modes], [m.band for m in modes])


def rh_density(spec: HybridLineSpec) -> float:
    """Constant density (d_r / pi) dk_r/domega of the right-handed line."""
    rh = spec.rh
    return rh.length * math.sqrt(rh.capacitance_per_length * rh.inductance_per_length) / math.pi


def dom_analytical(spec: HybridLineSpec, omega):
    """Decoupled-line estimate D_r + D_sl; the superlattice term is zero in the gap."""
    omega = np.asarray(omega, dtype=float)
    theta = sl_phase(spec.sl, omega)
    in_band = np.isfinite(theta) & (theta > 0) & (theta < math.pi)
    d_sl = np.zeros_like(omega)
    d_sl[in_band] = spec.sl.length / math.pi * sl_dk_domega(spec.sl, omega[in_band])
    out = rh_density(spec) + d_sl
    return float(out) if out.ndim == 0 else out


def dom_analytical_curve(spec: HybridLineSpec, omega, bands=None) -> DomCurve:
    omega = np.asarray(omega, dtype=float)
    if bands is None:
        edges = band_edges(spec.sl)
        bands = np.where(omega <= edges.omega_1plus, Band.BAND1, Band.BAND2)
    return DomCurve(omega, dom_analytical(spec, omega), DomMethod.ANALYTICAL,
                    np.asarray(bands, dtype=object))


def _band1_shape(omega, edges: BandEdges):
    return 1.0 / (np.sqrt(omega - edges.omega_1minus) * (edges.omega_1plus - omega) ** 0.25)


def _band2_shape(omega, edges: BandEdges):
    return 1.0 / np.sqrt(omega - edges.omega_2)


def piecewise_dom(omega, alpha1, alpha2, edges: BandEdges):
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    b1 = (omega > edges.omega_1minus) & (omega < edges.omega_1plus)
    b2 = omega > edges.omega_2
    out[b1] = alpha1 * _band1_shape(omega[b1], edges)
    out[b2] = alpha2 * _band2_shape(omega[b2], edges)
    return out


def _trim(w, d, margin):
    order = np.argsort(w)
    w, d = w[order], d[order]
    if margin:
        w, d = w[margin:-margin], d[margin:-margin]
    return w, d


def fit_piecewise_dom(numerical: DomCurve, edges: BandEdges,
                      edge_margin: int = DEFAULT_EDGE_MARGIN) -> DomCurve:
    """Least-squares amplitudes of the two band shapes.

    Each band has one multiplicative parameter, so the fit is the closed-form
    ratio sum(D f) / sum(f f) over the samples that remain after dropping
    ``edge_margin`` samples at both ends of the band.
    """
    alphas = []
    resid_sq = 0.0
    for band, shape in ((Band.BAND1, _band1_shape), (Band.BAND2, _band2_shape)):
        w, d = _trim(*numerical.band_samples(band), edge_margin)
        if len(w) < 5:
            raise ValueError(f"{band.value}: {len(w)} samples after trimming, need at least 5")
        f = shape(w, edges)
        alpha = float(np.dot(d, f) / np.dot(f, f))
        if not alpha > 0:
            raise ValueError(f"{band.value}: non-positive fit amplitude {alpha}")
        alphas.append(alpha)
        resid_sq += float(np.sum((d - alpha * f) ** 2))
    return DomCurve(numerical.omega, numerical.density, DomMethod.PIECEWISE_FIT,
                    numerical.bands, alpha1=alphas[0], alpha2=alphas[1], edges=edges,
                    residual_norm=math.sqrt(resid_sq))


def spectral_density(g: float, dom: DomCurve, omega):
    """J(omega) = g**2 D(omega)."""
    if g < 0:
        raise ValueError("g must be non-negative")
    return g**2 * dom.evaluate(omega)
