"""
Variational driver for the one-magnon trial states
"""

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import optimize

import analysis
import config
from quantum_core import estimate_energy_sampled, expectation, wrap_angle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Settings for minimize_scalar

    Parameters:
    initial_p (float): starting parameter
    max_evaluations (int): objective-evaluation budget, at least 1
    tolerance (float): target spread on p for the final bracketing phase
    initial_step (float): width of the starting simplex, or COBYLA's initial trust radius
    seed (int): seed for sampled backends built without one
    method (str): 'hybrid' (Nelder-Mead then bounded Brent) or 'cobyla'
    """

    initial_p: float = config.DEFAULT_INITIAL_P
    max_evaluations: int = config.DEFAULT_BUDGET
    tolerance: float = config.DEFAULT_TOLERANCE
    initial_step: float = config.DEFAULT_INITIAL_STEP
    seed: int = config.DEFAULT_SEED
    method: str = config.DEFAULT_OPTIMIZER

    def __post_init__(self):
        if self.method not in config.OPTIMIZERS:
            raise ValueError(f"method must be one of {config.OPTIMIZERS}, got '{self.method}'")
        if self.max_evaluations < 1:
            raise ValueError(f"max_evaluations must be >= 1, got {self.max_evaluations}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.initial_step == 0:
            raise ValueError("initial_step must be nonzero")


class ScalarMinimum(NamedTuple):
    p: float
    value: float
    converged: bool
    trace: tuple


class _BudgetExhausted(Exception):
    pass


class _EvaluationRecorder:
    """Wraps an objective, records (p, f) pairs and enforces the budget"""

    def __init__(self, objective, budget):
        self.objective = objective
        self.budget = budget
        self.trace = []

    def __call__(self, p):
        p = float(np.ravel(p)[0])
        if len(self.trace) >= self.budget:
            raise _BudgetExhausted
        value = float(self.objective(p))
        self.trace.append((p, value))
        logger.debug("evaluation %d: p=%.10f f=%.10f", len(self.trace), p, value)
        return value

    @property
    def remaining(self):
        return self.budget - len(self.trace)

    def best(self):
        return min(self.trace, key=lambda pair: pair[1])


def minimize_scalar(objective, settings=None):
    """
    Minimize a function of one real parameter without derivatives

    A Nelder-Mead simplex gets SIMPLEX_SHARE of the budget and stops once it
    brackets the minimum to SIMPLEX_XATOL; a bounded Brent search around the
    simplex result then refines p to the configured tolerance. With
    method='cobyla' a single COBYLA run spends the whole budget as maxiter.

    Parameters:
    objective (callable): real function of p
    settings (OptimizerConfig): method, budget, start and tolerance

    Returns:
    ScalarMinimum: best p and value seen, convergence flag and evaluation trace
    """
    settings = settings or OptimizerConfig()
    recorder = _EvaluationRecorder(objective, settings.max_evaluations)
    if settings.method == 'cobyla':
        return _minimize_cobyla(recorder, settings)
    p0 = settings.initial_p
    simplex_budget = max(1, int(settings.max_evaluations * config.SIMPLEX_SHARE))
    converged = False
    try:
        simplex = optimize.minimize(
            recorder,
            x0=[p0],
            method='Nelder-Mead',
            options={
                'initial_simplex': [[p0], [p0 + settings.initial_step]],
                'xatol': config.SIMPLEX_XATOL,
                'fatol': np.inf,
                'maxfev': simplex_budget,
            },
        )
        vertices = simplex.final_simplex[0][:, 0]
        spread = float(np.ptp(vertices))
        center = recorder.best()[0]
        width = max(2 * spread, 10 * settings.tolerance)
        refined = optimize.minimize_scalar(
            recorder,
            bounds=(center - width, center + width),
            method='bounded',
            options={'xatol': settings.tolerance, 'maxiter': max(1, recorder.remaining)},
        )
        converged = bool(simplex.success and refined.success)
    except _BudgetExhausted:
        logger.warning("evaluation budget of %d exhausted; returning best-so-far",
                       settings.max_evaluations)
    p_best, f_best = recorder.best()
    return ScalarMinimum(p_best, f_best, converged, tuple(recorder.trace))


def _minimize_cobyla(recorder, settings):
    converged = False
    try:
        result = optimize.minimize(
            recorder,
            x0=[settings.initial_p],
            method='COBYLA',
            options={
                'rhobeg': abs(settings.initial_step),
                'tol': settings.tolerance,
                'maxiter': settings.max_evaluations,
            },
        )
        converged = bool(result.success)
    except _BudgetExhausted:
        pass
    if not converged:
        logger.warning("COBYLA stopped after %d of %d evaluations without converging",
                       len(recorder.trace), settings.max_evaluations)
    p_best, f_best = recorder.best()
    return ScalarMinimum(p_best, f_best, converged, tuple(recorder.trace))


@dataclass(frozen=True)
class ExactBackend:
    """Statevector expectation values"""

    name: str = field(default='exact', init=False)
    shots: int = field(default=None, init=False)
    seed: int = field(default=None, init=False)

    def energy(self, state, hamiltonian):
        return expectation(state, hamiltonian)

    def describe(self):
        return 'statevector simulator'


@dataclass(frozen=True)
class SampledBackend:
    """
    Shot-sampled estimates

    Every evaluation of a run reuses the run's seed (common random numbers).
    """

    shots: int
    seed: int = None
    name: str = field(default='shots', init=False)

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")

    def with_seed(self, seed):
        return SampledBackend(self.shots, seed)

    def energy(self, state, hamiltonian):
        return estimate_energy_sampled(state, hamiltonian, self.shots, self.seed)

    def describe(self):
        return f'sampled simulator ({self.shots} shots, seed {self.seed})'


@dataclass(frozen=True)
class VqeResult:
    """
    Outcome of one VQE run

    trace holds (p, objective) pairs; for the 'second' target the objective
    is the expectation of -H and energy is its absolute value.
    """

    num_sites: int
    target: str
    energy: float
    p: float
    trace: tuple
    backend: str
    shots: int
    seed: int
    evaluations: int
    converged: bool

    def best_so_far(self):
        return np.minimum.accumulate([value for _, value in self.trace])

    def to_dict(self, eta=None):
        return {
            'N': self.num_sites,
            'eta': eta,
            'target': self.target,
            'backend': self.backend,
            'shots': self.shots,
            'seed': self.seed,
            'energy': self.energy,
            'p': self.p,
            'evaluations': self.evaluations,
            'converged': self.converged,
            'trace': [[p, value] for p, value in self.trace],
        }


def _check_widths(ansatz, hamiltonian):
    if hamiltonian.num_qubits != ansatz.num_sites:
        raise ValueError(
            f"ansatz has {ansatz.num_sites} sites but the Hamiltonian acts on {hamiltonian.num_qubits}"
        )


def vqe_run(ansatz, hamiltonian, backend=None, settings=None):
    """
    Minimize the backend energy of the ansatz state over p

    Parameters:
    ansatz (AnsatzSpec): trial-state family and target
    hamiltonian (PauliSum): H on ansatz.num_sites qubits
    backend (ExactBackend or SampledBackend): energy evaluator
    settings (OptimizerConfig): optimizer settings

    Returns:
    VqeResult: best energy, wrapped optimal p and evaluation trace
    """
    _check_widths(ansatz, hamiltonian)
    settings = settings or OptimizerConfig()
    backend = backend or ExactBackend()
    if isinstance(backend, SampledBackend) and backend.seed is None:
        backend = backend.with_seed(settings.seed)
    sign = -1.0 if ansatz.target == 'second' else 1.0

    def objective(p):
        return sign * backend.energy(ansatz.state(p), hamiltonian)

    outcome = minimize_scalar(objective, settings)
    energy = abs(outcome.value) if ansatz.target == 'second' else outcome.value
    logger.info("VQE N=%d target=%s on %s: E=%.10f at p=%.6f after %d evaluations",
                ansatz.num_sites, ansatz.target, backend.describe(), energy,
                wrap_angle(outcome.p), len(outcome.trace))
    return VqeResult(
        num_sites=ansatz.num_sites,
        target=ansatz.target,
        energy=float(energy),
        p=wrap_angle(outcome.p),
        trace=outcome.trace,
        backend=backend.name,
        shots=backend.shots,
        seed=backend.seed,
        evaluations=len(outcome.trace),
        converged=outcome.converged,
    )


def energy_landscape(ansatz, hamiltonian, p_grid):
    """
    Exact-backend energy of the ansatz state over a grid of p

    Returns:
    pandas.DataFrame: columns p and energy
    """
    _check_widths(ansatz, hamiltonian)
    grid = np.atleast_1d(np.asarray(p_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("p grid must be nonempty")
    energies = [expectation(ansatz.state(p), hamiltonian) for p in grid]
    return pd.DataFrame({'p': grid, 'energy': energies})


def repeat_sampled_vqe(ansatz, hamiltonian, shots, seeds, settings=None, exact=None):
    """
    Independent sampled-backend runs, one per seed

    Returns:
    tuple: (list of VqeResult, summary dict from analysis.summarize_energy_estimates)
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    results = [vqe_run(ansatz, hamiltonian, SampledBackend(shots, seed), settings) for seed in seeds]
    summary = analysis.summarize_energy_estimates([r.energy for r in results], exact=exact)
    return results, summary
