"""qhdkit: Quantum Hamiltonian Descent for box-constrained nonconvex optimization.

Typical use::

    from qhdkit import builtin, run_instance, PipelineConfig
    report = run_instance(builtin("nonlinear-1"), PipelineConfig(backend="embedded"))
"""

from .bench import (
    PipelineConfig,
    RunReport,
    run_baseline,
    run_instance,
    success_probability,
    tts,
    warmstart_comparison,
)
from .discretize import (
    CapExceeded,
    DiscretizedHamiltonian,
    Grid,
    assemble_discretized,
    materialize,
    materialize_sparse,
)
from .embedding import (
    CodewordMap,
    HamiltonianIR,
    OneHotNotAnnealable,
    PauliTerm,
    assemble_embedding,
    decode,
    encode,
    export_annealer,
    restrict_to_codewords,
)
from .evolve import EvolveConfig, NormDrift, StateVector, convergence_check, evolve, sample
from .expr import (
    DomainError,
    Expr,
    NotSeparable,
    ParseError,
    SeparableObjective,
    differentiate,
    evaluate,
    extract_separable,
    parse,
)
from .instances import (
    BUILTIN_IDS,
    InstanceSpec,
    builtin,
    generate_exp_instance,
    generate_qp_instance,
)
from .problem import (
    BoxBounds,
    Problem,
    QPData,
    from_expr,
    from_qp,
    load_problem,
    normalize_to_unit_box,
)
from .refine import RefineConfig, RefinementResult, hessian_vector, refine, refine_many
from .schedule import ConstantSchedule, PiecewiseLinear, Schedule, SmoothLog

__version__ = "0.1.0"
