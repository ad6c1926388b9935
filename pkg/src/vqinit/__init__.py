"""Statevector simulation and training for variational quantum circuits,
with depth-scaled Gaussian initialization and gradient-bound verification."""

__version__ = "0.1.0"

from .states import (StateVector, apply_1q, apply_2q, basis_state,
                     inner_product, zero_state)
from .observables import (Hamiltonian, PauliString, builtin_hamiltonian,
                          exact_ground_energy, expectation_hamiltonian,
                          expectation_pauli, heisenberg, load_hamiltonian,
                          max_locality, parse_hamiltonian, spectral_norm)
from .circuits import (Circuit, GateSpec, apply_circuit, circuit_from_dict,
                       circuit_to_dict, electron_conserving_ansatz, fixed_gate,
                       givens_2q, hardware_efficient, hf_state, load_circuit,
                       ring_pairs, rotation_gate, save_circuit, xy_block_ansatz)
from .gradients import (LossProblem, grad_finite_diff, grad_norm_sq,
                        grad_parameter_shift, loss)
from .initializers import (InitStrategy, adaptive_noise_variance,
                           gaussian_init, sample, uniform_init,
                           variance_global, variance_local,
                           variance_shared_simple, zero_init)
from .optimize import (NoiseModel, OptimizerConfig, TrainTrace,
                       perturb_gradient, train, write_trace_csv)
from .bounds import (McEstimate, check_component_bound, check_grad_norm_bound,
                     check_single_gate_forms, expected_grad_sq_single_gate,
                     expected_loss_sq_single_gate, grad_norm_lower_bound,
                     mc_expected_component_sq, mc_expected_grad_norm_sq,
                     mc_expected_loss_sq)
from .experiments import (ExperimentConfig, get_preset, run_experiment,
                          run_grad_check, run_sweep)
