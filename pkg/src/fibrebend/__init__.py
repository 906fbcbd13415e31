"""fibrebend: design, winding and reduced-order simulation of miniature
fibre-reinforced soft pneumatic bending actuators.

Units are millimetres, newtons and MPa internally; pressures cross the API
boundary in kPa.
"""

__version__ = "0.1.0"

from .geometry import (
    GeometryAParams,
    GeometryBParams,
    ActuatorSpec,
    ChamberMetrics,
    build_geometry_a,
    build_geometry_b,
    chamber_metrics,
)
from .fiberpath import WindingSpec, FiberPath, generate_helix, mirror_path, crossing_count
from .materials import MaterialLibrary, default_library, uniaxial_stress, tangent_modulus, strain_energy
from .mechanics import (
    ModelConstants,
    SegmentModel,
    SolveResult,
    DeviceSpec,
    UnstableSolveError,
    solve_quasi_static,
    radial_expansion_model,
    twist_estimate,
    compose_device,
    calibrate,
    workspace,
)
from .postprocess import (
    PressureSchedule,
    NodeHistory,
    bending_angle,
    select_radial_pairs,
    radial_expansion,
    hysteresis_ratio,
)
from .femdeck import FemDeck, smooth_amplitude, build_deck, serialize_deck, parse_deck

__all__ = [name for name in dir() if not name.startswith("_")]
