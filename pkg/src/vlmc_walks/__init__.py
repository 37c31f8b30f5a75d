"""Variable-length Markov chains and the persistent walks they drive."""

from .cascades import (
    CascadeSeriesResult,
    SeriesPolicy,
    SeriesStatus,
    cascade,
    kappa,
    q_entry,
)
from .config import ModelConfig, emit_model_config, load_model_config, parse_model_config
from .process import (
    CombModel,
    ExplicitModel,
    LetterTrace,
    ProbabilizedTree,
    simulate_letters,
    validate_non_null,
)
from .stationary import (
    StationaryMeasure,
    Stationarity,
    StationarityVerdict,
    build_measure,
    build_q_matrix,
    pi_cylinder,
    solve_left_fixed,
    stationarity_verdict,
)
from .tails import Geometric, Polynomial, Table, TailRule, geometric, polynomial, table
from .trees import (
    Alphabet,
    AlphaLis,
    CombTree,
    ContextTree,
    ExplicitTree,
    NodeKind,
    build_explicit_tree,
    double_comb,
    quadruple_comb,
    truncate_comb,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
