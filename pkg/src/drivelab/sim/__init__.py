"""2D kinematic driving world: types, dynamics, scenarios, incidents."""

from drivelab.sim.dynamics import predicted_plan_states, step_dynamics, track_trajectory
from drivelab.sim.generate import GenParams, generate_scenarios, synthesize_expert, validate_scenario
from drivelab.sim.incidents import detect_incident
from drivelab.sim.observe import make_observation
from drivelab.sim.scenario_io import load_scenario, load_scenarios, save_scenario, save_scenarios
from drivelab.sim.types import (
    EGO_LENGTH,
    EGO_WIDTH,
    AgentState,
    AgentTrack,
    DeltaXY,
    DiscreteToken,
    IncidentReport,
    MapGeometry,
    Observation,
    Scenario,
    SimulatorConfig,
    TrajectoryPlan,
    footprint_corners,
    rect_params,
    states_to_array,
    wrap_angle,
    wrap_angle_array,
)

__all__ = [
    "AgentState",
    "AgentTrack",
    "DeltaXY",
    "DiscreteToken",
    "EGO_LENGTH",
    "EGO_WIDTH",
    "GenParams",
    "IncidentReport",
    "MapGeometry",
    "Observation",
    "Scenario",
    "SimulatorConfig",
    "TrajectoryPlan",
    "detect_incident",
    "footprint_corners",
    "generate_scenarios",
    "load_scenario",
    "load_scenarios",
    "make_observation",
    "predicted_plan_states",
    "rect_params",
    "save_scenario",
    "save_scenarios",
    "states_to_array",
    "step_dynamics",
    "synthesize_expert",
    "track_trajectory",
    "validate_scenario",
    "wrap_angle",
    "wrap_angle_array",
]
