"""gbmsim: numerical laboratory for a tumor/necrosis/vasculature model.

Simulates the diffusion-coupled system on zero-flux rectangles, integrates the
pointwise dynamics, computes the stability-gating first eigenvalue of
-Lap + b(x), and checks every provable bound: pointwise boxes, necrosis
monotonicity, and exponential decay envelopes for tumor and vasculature.
"""

__version__ = "0.1.0"

from .analysis import (CheckVerdict, DecayEnvelope, EnvelopePair, RunReport,
                       Violation, check_envelope,
                       envelopes_destruction_dominant,
                       envelopes_eigenvalue_gated, envelopes_near_capacity,
                       necrosis_bound, phi_vanishing_check, reaction_dt_cap)
from .backend import BACKEND
from .config import Bump, ScenarioConfig, bundled_scenarios, load_scenario, parse_config
from .errors import (ConfigError, EigenFailureError, GbmsimError,
                     IntegrationFailureError, InvalidInitialDataError,
                     SolverFailureError)
from .grid import Grid, GridState, ScalarField, read_snapshot, write_snapshot
from .kinetics import (Params, StateTriple, b_func, d_func, f1, f2, f3,
                       f_truncated, rates, rates_truncated, sum_rhs,
                       vascular_fraction)
from .ode import (EquilibriumClass, EquilibriumTag, OdeSolution,
                  OmegaLimitResult, classify_equilibrium, euler_step,
                  integrate, omega_limit_estimate, rk4_step)
from .pde import (HelmholtzOperator, SpectralHelmholtzSolver, cg_solve,
                  imex_step, laplacian_neumann, run_simulation)
from .runner import evaluate_checks, initial_state, run_scenario
from .spectral import EigenResult, RhoConditionResult, check_rho_condition, lambda1
