"""Block-wise circumcentered-reflection method for projecting onto an
intersection of affine subspaces."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BwcrmError,
    DegeneracyError,
    DegenerateHyperplaneError,
    DimensionError,
    InconsistentSystemError,
    InsufficientDataError,
    MatrixMarketError,
    NonFiniteError,
    NumericalRankError,
)
from .geometry import (  # noqa: E402
    AffineSubspace,
    Hyperplane,
    contains,
    oracle_intersection_projection,
    project,
    reflect,
)
from .circumcenter import (  # noqa: E402
    Block,
    ReflectionChain,
    circumcenter_block,
    circumcenter_points,
    reflection_chain,
)
from .solver import (  # noqa: E402
    BlockPartition,
    IterationTrace,
    SolverConfig,
    bwcrm_step,
    crm_solve,
    fit_empirical_rate,
    map_solve,
    rep_replace,
    rep_shift,
    solve,
)
from .analysis import (  # noqa: E402
    RateReport,
    composed_rate_bound,
    friedrichs_cosine,
    map_rate_bound,
    verify_bam,
)
from .io import (  # noqa: E402
    BenchmarkRow,
    Problem,
    partition_by_size,
    problem_from_rows,
    read_matrix_market,
    synth_consistent_system,
    write_benchmark_table,
)
