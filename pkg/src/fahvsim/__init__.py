"""Closed-loop simulation of a flexible air-breathing hypersonic vehicle's
longitudinal dynamics under an appointed-time fault-tolerant tracking
controller with reconstructed states and adaptive disturbance observers."""

from .controller import (ChannelPpc, CommandFilterState, ControllerDiagnostics,
                         GainSet, StepInputs, VirtualCommandLimits,
                         command_filter_rhs, controller_step, elevator_control,
                         gain_floor_audit, velocity_control, virtual_gamma,
                         virtual_q, virtual_theta)
from .engine import (AcceptanceParams, ChannelMetrics, InitialConditions,
                     NnChannelConfig, NnConfig, ObserverBank, ReferenceConfig,
                     ReferenceSample, RunMetrics, ScenarioConfig,
                     TrackerConfig, TrajectoryLog, UncertaintyConfig,
                     build_observer_bank, compute_metrics, reference_at,
                     rk4_step, run_scenario)
from .errors import (ArcsinDomain, BoundBreach, DimensionMismatch, Divergence,
                     EmptyLog, EnvelopeViolation, FahvsimError,
                     NonFiniteDerivative, ParameterDomain, ParseError,
                     SingularControlGain, ValidationError)
from .observers import (FtNnObserver, SigTrackerState, fixed_time_bound,
                        ftnn_observer_rhs, make_observer, rbf_eval,
                        reconstruct_angles, residual_set_bound, sig,
                        sig_tracker_rhs, spow)
from .ppc import (ErrorTransformConfig, PerformanceFunction, TransformedError,
                  beta_for_initial_error, epsilon_of, phi, phi_dot,
                  phi_is_monotone, phi_max_rate, rho, rho_dot,
                  xi_from_epsilon)
from .vehicle import (ActuatorLimits, AeroModel, AeroCoeffs, ControlCommand,
                      DisturbanceChannel, DisturbanceProfile, FaultConfig,
                      FlightEnvelope, SinusoidTerm, VehicleState, apply_fault,
                      disturbance_at, dynamics_rhs, envelope_min_gain,
                      eval_aero, trim_inputs, trim_state)

__version__ = "0.1.0"
