"""Band structure of 1D periodic and semi-infinite lattices via quantum wave impedance."""

from .bands import BandDiagram, Interval, build_diagram, find_band_edges
from .dispersion import delta_delta_prime_rhs, dirac_rhs, kronig_penney_rhs
from .impedance import impedance_rhs
from .lattice import ConfigError, LatticeConfig, PointInteraction, PotentialSegment, SemiInfiniteLattice, UnitCell
from .surface import SurfaceState, finite_lattice_oracle, solve_clean_edge, solve_deformed_edge
from .transfer import cell_transfer_matrix, trace_rhs
from .wavefunction import BlochWave, dirac_bloch_wave

__all__ = [
    "BandDiagram", "BlochWave", "ConfigError", "Interval", "LatticeConfig", "PointInteraction",
    "PotentialSegment", "SemiInfiniteLattice", "SurfaceState", "UnitCell", "build_diagram",
    "cell_transfer_matrix", "delta_delta_prime_rhs", "dirac_bloch_wave", "dirac_rhs",
    "find_band_edges", "finite_lattice_oracle", "impedance_rhs", "kronig_penney_rhs",
    "solve_clean_edge", "solve_deformed_edge", "trace_rhs",
]
