"""Discrete-time quantum walks of a single photon through a network of atom-cavity nodes."""

from .bloch import (
    BlochData,
    PhaseLabel,
    bloch_operator,
    gap,
    phase_diagram,
    quasienergy_and_vector,
    winding_pair,
)
from .errors import (
    CavityWalkError,
    LatticeOverflowError,
    NumericError,
    UndefinedInvariantError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .model import (
    CavityScattering,
    CoinProfile,
    DensityProfile,
    NoiseModel,
    SpinorField,
    WalkConfig,
    make_initial_state,
    photon_density,
)
from .moments import (
    moment_closed_form,
    moment_infinite_limit,
    moment_scan,
    second_moment,
    second_moment_momentum,
)
from .spectral import build_dense_operator, detect_boundary_modes, eigenphases
from .walk import apply_coin, apply_translation, ensemble_average, evolve, walk_step

__version__ = "0.1.0"
