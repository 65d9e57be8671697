"""Entanglement-gauge holonomies of two photons in a four-mode interferometer."""

__version__ = "0.1.0"

from .decompose import (  # noqa: E402
    CartanFactors,
    Closing,
    CompiledSubgroup,
    CSDFactors,
    cartan_kpk,
    classify_closing,
    compile_one_param,
    cs_decompose,
    is_local,
)
from .fockspace import (  # noqa: E402
    FockState,
    GeneratorCombo,
    GeneratorLabel,
    TwoQubitState,
    basis_h2,
    generator_fundamental,
    generator_two_photon,
    lift,
    project_h11,
)
from .holonomy import (  # noqa: E402
    Holonomy,
    Path,
    PathSegment,
    apply_cycle,
    build_triangle_path,
    cumulative,
    example_path,
    gauge_potential,
    nagp_example_closed_form,
    solve_closure,
    total_transformation,
    wilson_loop,
)
from .lie import EulerParamsLO, euler_to_unitary, expm, maurer_cartan, p0, unitary_to_euler  # noqa: E402
