"""Two-particle beam-splitter interferometry with which-way detection.

Exact sparse simulation of identical bosons or fermions traversing
50:50 splitter networks, absorptionless path detectors, post-selected
spin entanglement, quantum-statistics identification, and the
entanglement-distinguishability trade-off.
"""

from .errors import (
    ImpossiblePostselectionError,
    NetworkError,
    NotUnitaryError,
    OccupancyError,
    PauliExclusionError,
    StatisticsMismatchError,
    TwinbeamError,
)
from .fock import (
    FockState,
    Mode,
    SingleParticleUnitary,
    Spin,
    Statistics,
    apply_spin_rotation,
    apply_unitary,
    inner_product,
    make_product_state,
    vacuum,
)
from .interferometer import (
    BeamSplitter,
    Branch,
    BranchSet,
    ExcitationPattern,
    FeedbackRound,
    Network,
    apply_correction,
    build_tree,
    coincidence,
    correction_for_branch,
    correction_phase,
    detect,
    entangled_yield,
    feedback_run,
    fig1_network,
    fig2_network,
    opposite_spin_input,
    postselect,
    run_network,
    sample_clicks,
)
from .metrics import (
    PSI_MINUS,
    PSI_PLUS,
    ChshSettings,
    TwoQubitDM,
    chsh_expectation,
    classify_bell,
    coincidence_spin_dm,
    complementarity_check,
    concurrence,
    default_chsh_settings,
    distinguishability,
    dual_relabel,
    gaussian_overlap,
    infer_concurrence_from_chsh,
    reduce_to_spin_dm,
    tagged_opposite_spin_input,
)
from .oracle import FirstQuantizedState, cross_check, oracle_detect, oracle_evolve
from .reporting import Scalar, ScenarioReport
from .scenarios import (
    DEFAULT_SEED,
    Ensemble,
    list_scenarios,
    scenario_complementarity,
    scenario_dual,
    scenario_feedback,
    scenario_fig1,
    scenario_fig2,
    scenario_gaussian,
    scenario_mixed_input,
    scenario_statistics_test,
    scenario_tree,
    unpolarized_pair,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
