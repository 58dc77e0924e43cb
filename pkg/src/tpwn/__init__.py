"""Exact expected execution time of timed probabilistic workflow nets."""

from .chain import (
    Analysis,
    LinearSystem,
    SchedulerChain,
    analyze,
    assemble_system,
    build_chain,
    chain_to_dot,
    expected_time,
    residuals,
    solve_exact,
)
from .errors import (
    Deadlock,
    FormatError,
    InvalidPert,
    NetDefinitionError,
    NoEnabledTransition,
    NonDyadic,
    NonTermination,
    NotConfusionFree,
    NotEnabled,
    NotFirable,
    Singular,
    StateExplosion,
    TooManyEdges,
    TPWNError,
    Unsafe1,
    UnsafeFiring,
)
from .generate import break_net, generate_random_net
from .io import dump_net, dump_pert, load_net, load_pert, parse_net, parse_pert
from .net import (
    Transition,
    WorkflowNet,
    build_net,
    conflict_set,
    conflict_sets,
    enabled_transitions,
    fire,
    independent,
)
from .oracle import enumerate_expected_time, mazurkiewicz_swaps, simulate
from .pert import (
    PertEdge,
    PertNetwork,
    binary_expansion,
    expected_project_duration,
    random_pert,
    reduce_rational,
    reduce_unit_weights,
    validate_pert,
)
from .structural import StructuralReport, analyze_structure, explore
from .timing import (
    BOTTOM,
    abstract_update,
    earliest_first_choice,
    mu,
    nu,
    nu_folded,
    ominus,
    reward,
    start_time,
    time_of,
    upd,
)

__version__ = "0.1.0"
