"""Situation coverage grids, empirical DTMC synthesis and PCTL checking.

The pipeline: enumerate a situation space from its axes, ingest
situation-labelled test logs, estimate per-situation transition
probabilities into an augmented coverage grid, synthesize a discrete-time
Markov chain with absorbing failure states, and verify probabilistic
safety requirements against it, ranking situations by risk.
"""

__version__ = "0.1.0"

from .errors import (
    CheckError,
    EstimationError,
    GridError,
    LogError,
    ModelError,
    PctlError,
    PctlSyntaxError,
    ReportError,
    SitgridError,
    SpaceError,
)
from .space import (
    Axis,
    Situation,
    SituationSpace,
    build_space,
    decode,
    encode,
    enumerate_situations,
    load_axes,
)
from .logs import (
    CoverageReport,
    ObservationLog,
    RunRecord,
    ValidatedLog,
    coverage_summary,
    format_log,
    parse_log,
    validate_log,
)
from .estimate import (
    AugmentedGrid,
    EstimatorMeta,
    TransitionCounts,
    count_transitions,
    estimate_bayes,
    estimate_mle,
    failure_probability,
    read_grid_csv,
    sample_log,
)
from .markov import Dtmc, reachable, synthesize, validate
from .pctl import (
    And,
    Atom,
    Bound,
    BoundedUntil,
    Next,
    Not,
    ProbQuery,
    Query,
    SafetyRequirement,
    Until,
    bounded_eventually,
    disjunction,
    eventually,
    format_path,
    format_query,
    load_requirements,
    parse,
    validate_formula,
)
from .checker import (
    CheckResult,
    ProbVector,
    RankReport,
    check,
    prob01,
    prob_bounded_until,
    prob_next,
    prob_until,
    rank_situations,
    sat,
)
from .report import (
    ReportDocument,
    RequirementVerdict,
    build_report,
    export_grid_csv,
    export_prism,
    read_prism,
    render_report,
)
