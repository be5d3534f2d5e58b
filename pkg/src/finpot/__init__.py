"""Potential theory on finite spaces: capacities, balayage and kernel principles."""

from .capacity import (
    CapacityReport,
    capacitary_measure,
    capacity,
    check_duality,
    dual_capacity,
    g_capacity,
    g_capacity_measure,
    set_capacity,
)
from .errors import FinpotError, SolverError, ValidationError
from .kernelspace import (
    CellSelfEnergy,
    Constant,
    KernelMatrix,
    Space,
    as_index_set,
    as_kernel,
    build_kernel_from_matrix,
    build_riesz_kernel,
    energy,
    energy_norm,
    fibonacci_sphere,
    indicator,
    mutual_energy,
    potential,
    restrict_field,
    support,
)
from .principles import (
    Method,
    Principle,
    PrincipleReport,
    check_domination_pair,
    check_positive_definite,
    dilation_constant,
    energy_principle,
    search_domination,
)
from .simplex import LPResult, LPStatus, solve_lp
from .study import SphereScenario, emit_convergence_study
from .sweep import (
    IteratedSweep,
    LowerEnvelope,
    SweepReport,
    balayage,
    equilibrium,
    iterated_sweep_check,
    lower_envelope,
)
from .variational import (
    KKTReport,
    SolveReport,
    Status,
    brute_force_capacitary,
    gauss_maximize,
    gauss_value,
    min_norm_dual,
    verify_kkt,
)

__version__ = "0.1.0"
