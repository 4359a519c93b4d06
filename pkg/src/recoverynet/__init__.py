"""recoverynet: business dependency networks from visitation flows.

Builds directed weighted dependency networks from origin-destination visit
counts, simulates post-disaster recovery as a fractional-threshold cascade,
calibrates per-business recovery thresholds against observed recovery panels
with a genetic algorithm, and selects fixed-budget recovery-multiplier seed
sets that maximize network-wide recovery.
"""

__version__ = "0.1.0"

from recoverynet.analysis import (
    income_analysis,
    multiplier_by_income,
    multiplier_composition,
    threshold_by_sector,
)
from recoverynet.calibration import (
    CalibrationResult,
    calibrate_thresholds,
    derive_seeds,
    mae,
    random_baseline,
    threshold_report,
)
from recoverynet.diffusion import (
    DiffusionTrace,
    final_active_count,
    simulate,
    step,
)
from recoverynet.errors import ConfigError, DatasetError, IngestError, InputError
from recoverynet.ga_core import (
    EvolutionHistory,
    GaOperators,
    GaParams,
    GaProblem,
    evolve,
    real_vector_operators,
    subset_operators,
)
from recoverynet.ingest import (
    FlowRecord,
    PoiRecord,
    PoiTable,
    RecoveryPanel,
    StudyConfig,
    load_config,
    load_flows,
    load_pois,
    load_recovery,
    validate_dataset,
)
from recoverynet.kernels import BACKEND as KERNEL_BACKEND
from recoverynet.multiplier import (
    MultiplierScenario,
    OverlapReport,
    budget_size,
    exhaustive_optimum,
    multiplier_objective,
    optimize_multipliers,
    overlap,
)
from recoverynet.network import (
    DependencyNetwork,
    DegreeProfile,
    GraphSummary,
    build_network,
    degree_profile,
    filter_subnetwork,
    graph_summary,
)
from recoverynet.synth import Scenario, SynthParams, generate_scenario, write_scenario
