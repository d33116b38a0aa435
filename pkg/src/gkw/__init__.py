"""Generalized Kazdan-Warner equations for linear torus actions on flat tori."""
from .energy import (
    ExponentOverflow,
    Problem,
    check_solvability,
    coercivity_diagnostics,
    energy,
    hessian_apply,
    residual,
)
from .gitmm import (
    Level,
    OrbitDatum,
    Stability,
    classify_orbit,
    cross_check_quotient,
    kempf_ness_value,
    minimize_kempf_ness,
    moment_map,
)
from .grid import TorusGrid, field_generator, integrate, laplacian_apply, make_grid, read_field, write_field
from .models import classical_kw, cyclic_higgs_A, toda
from .report import report_schema_version
from .solver import MaxIterations, NotSolvable, SolverOptions, SolveReport, solve, uniqueness_gap, verify
from .torus import (
    ConeClass,
    WeightSystem,
    cone_classify,
    span_projectors,
    weight_system_from_matrix,
    weight_system_from_subalgebra,
)

__version__ = "0.1.0"
