"""Trajectory generation and numerical verification of certificates."""

from .falsify import Counterexample, falsify_linear_l2_bilinear, horizon_test
from .integrator import BatchTrajectory, Trajectory, integrate, integrate_batch, time_grid
from .models import SystemModel, cascade, feedback, get_model, linear1d, model_from_dict, model_names
from .signals import InputSignal, constant, piecewise_constant, signal_from_dict, waveform, zero
from .verify import (
    EstimateReport, MonteCarloReport, SamplerSpec, closed_form_ex1, convergence_check, integral_of,
    monte_carlo_verify, truncated_l2_sq, verify_certificate,
)
