"""wavetree: wave-packet branching simulation and analysis.

Evolves wave functions on discretized 1D/2D configuration spaces, scores how
close a decomposition of a state is to a family of non-overlapping channels,
tracks the branching tree such channels form over time, and provides damped
oscillator / qubit-register decoherence models plus scenario drivers that
contrast decoherence with permanent spatial separation.
"""

from .decomposition import (
    Decomposition,
    OverlapReport,
    Tolerances,
    finer_map,
    minimize_overlap,
    pair_overlap,
    partition_overlap,
    singleton_overlap,
)
from .errors import (
    ConfigError,
    GridMismatchError,
    InvalidDecompositionError,
    NumericsError,
    ResolvabilityError,
    WavetreeError,
)
from .evolution import EvolutionEngine, evolve, harmonic_potential, square_barrier
from .grid import Grid, Partition, Region
from .tree import (
    TreeStructure,
    build_tree,
    check_partition_permanence,
    detect_channels,
    permanence,
    verify_tree,
)
from .wavefunction import WaveFunction, decompose_by_partition, gaussian_packet, inner, project

__version__ = "0.1.0"

__all__ = [
    "Grid", "Region", "Partition", "WaveFunction",
    "inner", "project", "decompose_by_partition", "gaussian_packet",
    "EvolutionEngine", "evolve", "square_barrier", "harmonic_potential",
    "Decomposition", "Tolerances", "OverlapReport",
    "pair_overlap", "partition_overlap", "singleton_overlap",
    "minimize_overlap", "finer_map",
    "TreeStructure", "detect_channels", "build_tree", "verify_tree",
    "permanence", "check_partition_permanence",
    "WavetreeError", "GridMismatchError", "ConfigError", "ResolvabilityError",
    "NumericsError", "InvalidDecompositionError",
    "__version__",
]
