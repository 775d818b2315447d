"""Bayesian optimization with triangulation-based acquisition candidates.

Candidates are placed at the barycenters of a Delaunay triangulation of the
current design (interior) and just outside its convex hull toward the box
boundary (fringe), then targeted-subsampled around the incumbent best point.
The package bundles the candidate generator with a GP surrogate, EI/TS
acquisition, a BO loop, synthetic benchmarks, and an experiment harness.
"""

from .acquisition import (
    AcqResult,
    EvalTally,
    argmax_ei_candidates,
    ei,
    hybrid_ei,
    multistart_local_ei,
    ts_candidates,
)
from .benchfn import Benchmark, get_benchmark, list_benchmarks
from .candidates import (
    CandidateSet,
    SubsampleConfig,
    adjacent_candidates,
    fringe_candidates,
    interior_candidates,
    lhs_candidates,
    tricands,
)
from .geometry import (
    HullFacet,
    PointSet,
    Triangulation,
    circumsphere_contains,
    convex_hull,
    delaunay,
)
from .harness import (
    ExperimentConfig,
    SummaryTable,
    measure_candidates,
    parse_config,
    run_experiment,
    summarize,
)
from .optimizer import (
    RunRecord,
    Strategy,
    init_design,
    run_bo,
    run_raw_neldermead,
)
from .surrogate import DesignState, FitConfig, GpFit, fit_gp, predict, sample_paths

__version__ = "0.1.0"

__all__ = [
    "AcqResult",
    "Benchmark",
    "CandidateSet",
    "DesignState",
    "EvalTally",
    "ExperimentConfig",
    "FitConfig",
    "GpFit",
    "HullFacet",
    "PointSet",
    "RunRecord",
    "Strategy",
    "SubsampleConfig",
    "SummaryTable",
    "Triangulation",
    "adjacent_candidates",
    "argmax_ei_candidates",
    "circumsphere_contains",
    "convex_hull",
    "delaunay",
    "ei",
    "fit_gp",
    "fringe_candidates",
    "get_benchmark",
    "hybrid_ei",
    "init_design",
    "interior_candidates",
    "lhs_candidates",
    "list_benchmarks",
    "measure_candidates",
    "multistart_local_ei",
    "parse_config",
    "predict",
    "run_bo",
    "run_experiment",
    "run_raw_neldermead",
    "sample_paths",
    "summarize",
    "tricands",
    "ts_candidates",
]
