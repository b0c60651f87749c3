"""Gold-sand game engine: values, strategies, oracles, on-line coloring."""

from .core import (
    BUILTIN_KINDS,
    DEAD,
    KIND_CUSTOM,
    KIND_LIST,
    KIND_PANCHROMATIC,
    KIND_PROPER,
    KIND_PROPERTY_B,
    ONE_PARAM_KINDS,
    SIMPLEX_KINDS,
    Arrangement,
    Cell,
    ConfigurationError,
    EmptyArrangementError,
    GoldSandError,
    InconclusiveError,
    InvalidMoveError,
    MoveOutcome,
    MoveSplit,
    PathSystem,
    PreconditionError,
    StreamError,
    UnsupportedKindError,
    apply_move,
    arrangement_from_dict,
    arrangement_from_json,
    arrangement_to_dict,
    arrangement_to_json,
    build_path_system,
    canonical_cells,
    make_arrangement,
    make_split,
    norms,
    validate_split,
)
from .weights import (
    ParamPoint,
    h,
    potential,
    scalar_param,
    shifted_potential,
    uniform_param,
    validate_param,
    weight,
)
from .solver import (
    Constants,
    Degeneracy,
    ValueResult,
    classify_degeneracy,
    constants,
    distance_to_degenerate,
    is_eps_degenerate,
    nearest_degenerate,
    solve_value,
)
from .strategies import (
    DEFAULT_CONFIG,
    AllRunPusher,
    FixedLabelRemover,
    GreedyHarvestPusher,
    OptimalPusher,
    OptimalRemover,
    PusherPolicy,
    RandomSplitPusher,
    RemoverPolicy,
    RoundRecord,
    StrategyConfig,
    Trace,
    UniformRandomRemover,
    play,
    pusher_direction,
    pusher_move_degenerate,
    pusher_move_regular,
    pusher_respond,
    remover_respond,
    resolve_pusher_policy,
    resolve_remover_policy,
    split_from_dict,
    split_to_dict,
)
from .oracles import (
    FiniteDiffReport,
    MinimaxResult,
    best_remover_line,
    discrete_state,
    finite_difference_check,
    minimax_discrete,
    panchromatic_fail_probability,
)
from .coloring import (
    AdversaryReport,
    IncompleteColoringError,
    PainterState,
    StreamHeader,
    StreamRun,
    VertexEvent,
    format_stream,
    painter_new,
    painter_on_vertex,
    parse_stream,
    presenter_adversary,
    random_stream,
    run_stream,
    verify_coloring,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
