"""Delta robot vibration-aware iterative learning control."""

from ._core import (  # noqa: F401
    DeltaError,
    RobotParams,
    ShaperSpec,
    butterfly,
    default_config,
    dynamics_terms,
    fls_basis,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    make_shaper,
    natural_frequencies,
    pick_and_place,
    residual_percentage,
    run_command,
    shaper_objective,
    square,
)

__version__ = "0.1.0"
