"""SLOCC entanglement family classification via momentum-map gradient flow."""

__version__ = "0.1.0"

from .canonical import (
    AcinForm,
    SchmidtForm,
    acin_form,
    antisym_canonical,
    four_qubit_family,
    gabcd,
    gabcd_span_distance,
    schmidt,
    takagi,
)
from .critical import (
    CriticalRecord,
    EigenspaceReport,
    Stability,
    alpha_star_eigenspaces,
    classify,
    classify_with_trace,
    is_critical,
    orbit_dimension,
    self_consistent_critical,
    stability_class,
)
from .flow import (
    FlowConfig,
    FlowTrace,
    flow_step,
    flow_to_critical,
    gradient_norm,
    one_param_limit,
    slocc_distance,
    stratum_label,
)
from .momentum import (
    MomentumPoint,
    SpectrumPoint,
    casimir_constant,
    casimir_vee_expectation,
    momentum,
    mu_norm_sq,
    mu_star_apply,
    polygonal_check,
    psi,
    reduced_density,
    total_variance,
)
from .morse import (
    TangentFrame,
    hessian_fd_oracle,
    morse_index,
    orbit_tangent_frame,
)
from .statespace import (
    LocalOperator,
    PureState,
    Sector,
    apply_local,
    bosonic,
    dicke,
    distinguishable,
    fermionic,
    hodge_dual,
    inner,
    normalize,
    random_state,
    state_from_json,
)

__all__ = [name for name in dir() if not name.startswith("_")]
