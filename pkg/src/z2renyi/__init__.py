"""Normalized Renyi entropies of the Z2 lattice gauge PEPS from transfer operators."""

__version__ = "0.1.0"

from .core import (
    GaugeSymmetryError,
    PepsParams,
    SpectralForm,
    build_site_tensor,
    check_gauge_symmetry,
    spectral_decompose,
    tau0_explicit,
    transfer_from_tensor,
)
from .entropy import (
    EntropyResult,
    LatticeGeometry,
    contraction_consistency,
    kappa_fit,
    mps_purity_demo,
    purity_finite,
    renyi_finite,
    renyi_thermodynamic,
)
from .rows import (
    BoundaryOperator,
    RowOperator,
    SpectrumReport,
    assemble_corner_row,
    assemble_row,
    boundary_row,
    boundary_site_operator,
    spectrum,
)

__all__ = [
    "GaugeSymmetryError", "PepsParams", "SpectralForm", "build_site_tensor", "check_gauge_symmetry",
    "spectral_decompose", "tau0_explicit", "transfer_from_tensor", "EntropyResult", "LatticeGeometry",
    "contraction_consistency", "kappa_fit", "mps_purity_demo", "purity_finite", "renyi_finite",
    "renyi_thermodynamic", "BoundaryOperator", "RowOperator", "SpectrumReport", "assemble_corner_row",
    "assemble_row", "boundary_row", "boundary_site_operator", "spectrum",
]
