"""Facilitated exclusion on a ring: simulation, exact measures, and checks."""

__version__ = "0.1.0"

from .lattice import (  # noqa: F401
    CanonicalEnsemble,
    ClassLabel,
    ExclusionConfig,
    adjacency_graph,
    classify,
    count_hole_isolated,
    count_with_window,
    enumerate_ergodic,
)
from .dynamics import (  # noqa: F401
    Frozen,
    Trajectory,
    current_field,
    generator_drift,
    hitting_time_ergodic,
    jump_rate,
    simulate,
)
from .measures import (  # noqa: F401
    ConditionedWindow,
    PeriodicGcm,
    canonical_sample,
    gcm_window_prob,
    sample_profile,
    two_point,
)
from .zrmap import (  # noqa: F401
    ZrConfig,
    classify_zr,
    coupled_fzr_irw,
    coupled_szr_fzr,
    ex_to_zr,
    is_regular,
    simulate_aux,
)
from .pde import DensityProfile, fde_step, solve_fde  # noqa: F401
from .estimators import (  # noqa: F401
    block_profile,
    empirical_pairing,
    ensembles_gap,
    hydro_compare,
    replacement_scan,
    transience_scan,
)
from .runner import ExperimentConfig, run, validate_config  # noqa: F401
