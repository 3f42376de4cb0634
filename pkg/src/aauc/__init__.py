"""Secure multicast beamforming via angle-aware user cooperation."""

from .channel import (AngularMatrix, ChannelSet, Geometry, SystemParams,
                      angular_matrix, default_params, make_rng,
                      sample_eav_channel, sample_rician_channel,
                      steering_vector)
from .harness import SweepConfig, SweepRow, generate_scenario, run_sweep
from .numerics import (NumericalError, SaddleProblem, SaddleSolution,
                       dominant_eigvec, integrate_1d, inv_sqrt,
                       mirror_simplex_step, null_space_basis, project_ball,
                       saddle_solve)
from .secrecy import (MCEstimate, TrainingSample, angular_secrecy,
                      fit_lambda, mc_average_secrecy, multicast_rate,
                      objective_p2)
from .solvers import (BeamformingSolution, EvalMetrics, SaddleSettings,
                      SolveReport, bfom_solve, closed_form_large_n,
                      direct_transmission, evaluate_solution,
                      large_nk_power_split, sco_solve, surrogate_oracles)

__version__ = "0.1.0"
