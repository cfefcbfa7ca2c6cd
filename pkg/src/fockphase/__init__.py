"""Bayesian phase reconstruction in a Mach-Zehnder interferometer fed with
imperfectly prepared balanced Fock states."""

__version__ = "0.1.0"

from .angular import (RotationKernel, bessel_approx_cond_prob, matrix_exponential_oracle,
                      pure_cond_prob, rotation_kernel)
from .state import MixtureWeights, StatePrep, build_mixture, marginal_m_std
from .condprob import (CondProbTable, PhiGrid, cond_prob_table, delta_j_sensitivity, table_for,
                       tail_envelope)
from .bayes import (LikelihoodSpec, PhaseDistribution, asymptotic_likelihood, bayes_update,
                    phase_std, raise_to_n, uniform_prior)
from .montecarlo import ReconstructionRun, ensemble_std, run_reconstruction, sample_outcome
from .analysis import (AlphaFit, SweepRow, delta_phi_infinity, fit_alpha, modality_scan,
                       universal_sweep)
from .errors import ModelContradictionError, NumericalContractError
