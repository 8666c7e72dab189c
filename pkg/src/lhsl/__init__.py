"""Spectral toolkit for left-handed superlattice / right-handed hybrid lines
and the spin-boson renormalization of a qubit embedded in them."""

from .circuit import (
    SuperlatticeSpec,
    RightHandedSpec,
    TwoPortMatrix,
    single_cell_abcd,
    supercell_abcd,
    paper_superlattice,
    paper_right_handed,
)
from .dispersion import (
    Branch,
    BandEdges,
    UNBOUNDED,
    band_edges,
    bandwidth_curve,
    rh_dispersion_discrete,
    rh_dispersion_continuum,
    sl_dispersion,
    sl_wavenumber,
    el_oracle_dispersion,
)
from .modes import (
    Band,
    HybridLineSpec,
    ModeSolution,
    ModeProfile,
    self_consistency_residual,
    find_modes,
    mode_profile,
)
from .dom import (
    DomCurve,
    DomMethod,
    dom_numerical,
    dom_analytical,
    fit_piecewise_dom,
    spectral_density,
)
from .spinboson import (
    PhaseLabel,
    QubitSpec,
    RenormalizationResult,
    PhaseDiagram,
    renormalize_discrete,
    renormalize_continuum,
    invert_g_gap,
    invert_g_band2,
    invert_g,
    classify_phase,
    phase_diagram,
)

__version__ = "0.1.0"
