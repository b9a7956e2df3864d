"""
Algebraic Bethe ansatz for the periodic XXZ chain

R-matrix, monodromy and transfer matrices, Bethe states and a real-root
solver for the Bethe equations.

Chain sites are numbered 1..N from left to right. Site k hosts qubit N-k,
so site 1 is the leftmost Kronecker factor, the same factor that carries
the most significant bit of a basis index. Matrices built site by site
therefore already use the statevector's qubit ordering and no amplitude
permutation is needed.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

import config
from quantum_core import CapacityError, SWAP_MATRIX, Statevector, check_qubit_cap
from xxz_model import reference_state

logger = logging.getLogger(__name__)


class BetheDomainError(ValueError):
    """Raised for singular rapidities, colliding roots or a vanishing Bethe vector"""


class BetheConvergenceError(RuntimeError):
    """Raised when the root solver gives up; carries the final residuals"""

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = np.asarray(residuals)


def site_to_qubit(site, num_sites):
    """Qubit hosting chain site `site` (1-based, left to right)"""
    if not 1 <= site <= num_sites:
        raise ValueError(f"site must lie in 1..{num_sites}, got {site}")
    return num_sites - site


@dataclass(frozen=True)
class RMatrix:
    v: complex
    eta: float
    matrix: np.ndarray

    @property
    def tensor(self):
        """Indices (aux_out, site_out, aux_in, site_in)"""
        return self.matrix.reshape(2, 2, 2, 2)


def r_matrix(v, eta):
    """
    Shifted R-matrix on V (x) V

    Parameters:
    v (complex): spectral parameter
    eta (float): anisotropy

    Returns:
    RMatrix: diagonal sin(v + i eta/2), inner block sin(v - i eta/2) with
    i sinh(eta) off the diagonal
    """
    a = np.sin(v + 0.5j * eta)
    b = np.sin(v - 0.5j * eta)
    c = 1j * np.sinh(eta)
    mat = np.array([
        [a, 0, 0, 0],
        [0, b, c, 0],
        [0, c, b, 0],
        [0, 0, 0, a],
    ], dtype=np.complex128)
    return RMatrix(complex(v), float(eta), mat)


def check_yang_baxter(v1, v2, eta):
    """
    Max-norm of R12(v1-v2+i eta/2) R13(v1) R23(v2) - R23(v2) R13(v1) R12(v1-v2+i eta/2)
    """
    eye = np.eye(2)
    swap_23 = np.kron(eye, SWAP_MATRIX)

    def r12(v):
        return np.kron(r_matrix(v, eta).matrix, eye)

    def r23(v):
        return np.kron(eye, r_matrix(v, eta).matrix)

    def r13(v):
        return swap_23 @ r12(v) @ swap_23

    shifted = v1 - v2 + 0.5j * eta
    lhs = r12(shifted) @ r13(v1) @ r23(v2)
    rhs = r23(v2) @ r13(v1) @ r12(shifted)
    return float(np.max(np.abs(lhs - rhs)))


def _sweep_sites(v, eta, tensor, num_sites):
    """Apply R_0N(v) ... R_01(v) to a tensor whose axis 0 is auxiliary and axes 1..N are sites"""
    r4 = r_matrix(v, eta).tensor
    for site in range(1, num_sites + 1):
        tensor = np.tensordot(r4, tensor, axes=([2, 3], [0, site]))
        tensor = np.moveaxis(tensor, 1, site)
    return tensor


def apply_monodromy_entry(v, eta, amplitudes, row, col):
    """
    Apply one auxiliary-space entry T_{row,col}(v) of the monodromy matrix

    The state is lifted to the auxiliary-extended space as e_col (x) psi and
    contracted with one R-matrix per site, so the cost stays linear in 2**N.

    Parameters:
    v (complex): spectral parameter
    eta (float): anisotropy
    amplitudes (numpy.ndarray): state of length 2**N, or a (2**N, k) batch of columns
    row (int), col (int): auxiliary indices, 0 or 1

    Returns:
    numpy.ndarray: T_{row,col}(v) applied to the input, same shape as the input
    """
    amps = np.asarray(amplitudes, dtype=np.complex128)
    num_sites = int(amps.shape[0]).bit_length() - 1
    if amps.shape[0] != 2 ** num_sites or num_sites < 1:
        raise ValueError(f"state length must be a power of two, got {amps.shape[0]}")
    check_qubit_cap(num_sites)
    batch = amps.shape[1:]
    lifted = np.zeros((2,) + amps.shape, dtype=np.complex128)
    lifted[col] = amps
    tensor = lifted.reshape((2,) * (num_sites + 1) + batch)
    tensor = _sweep_sites(v, eta, tensor, num_sites)
    return tensor[row].reshape(amps.shape)


def apply_b(v, eta, amplitudes):
    return apply_monodromy_entry(v, eta, amplitudes, 0, 1)


def apply_transfer(v, eta, amplitudes):
    """t(v) = A(v) + D(v) applied to a state"""
    return (apply_monodromy_entry(v, eta, amplitudes, 0, 0)
            + apply_monodromy_entry(v, eta, amplitudes, 1, 1))


def _check_monodromy_cap(num_sites):
    if num_sites < 1:
        raise ValueError(f"num_sites must be >= 1, got {num_sites}")
    if num_sites > config.MAX_MONODROMY_SITES:
        raise CapacityError(
            f"dense monodromy limited to {config.MAX_MONODROMY_SITES} sites, got {num_sites}"
        )


@dataclass(frozen=True)
class MonodromyBlocks:
    """Dense blocks of T(v) = [[A, B], [C, D]] in the auxiliary space"""

    v: complex
    eta: float
    num_sites: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def transfer(self):
        return self.a + self.d


def monodromy(v, eta, num_sites):
    """Dense monodromy blocks, built column-wise from the matrix-free sweep"""
    _check_monodromy_cap(num_sites)
    dim = 2 ** num_sites
    identity = np.eye(dim, dtype=np.complex128)
    blocks = {}
    for col in (0, 1):
        lifted = np.zeros((2, dim, dim), dtype=np.complex128)
        lifted[col] = identity
        tensor = _sweep_sites(v, eta, lifted.reshape((2,) * (num_sites + 1) + (dim,)), num_sites)
        for row in (0, 1):
            blocks[row, col] = tensor[row].reshape(dim, dim)
    return MonodromyBlocks(complex(v), float(eta), num_sites,
                           blocks[0, 0], blocks[0, 1], blocks[1, 0], blocks[1, 1])


def transfer_matrix(v, eta, num_sites):
    return monodromy(v, eta, num_sites).transfer


def hamiltonian_from_transfer(num_sites, eta, dv=config.DEFAULT_DV):
    """
    H = -(i/2) sinh(eta) d/dv log t(v) at v = i eta/2, plus N cosh(eta)/2

    The logarithmic derivative is taken as t(v0)^-1 t'(v0) with a central
    difference for t'.

    Parameters:
    num_sites (int): chain length
    eta (float): anisotropy
    dv (float): finite-difference step in [DV_MIN, DV_MAX]

    Returns:
    numpy.ndarray: dense complex matrix
    """
    if not config.DV_MIN <= dv <= config.DV_MAX:
        raise ValueError(f"dv must lie in [{config.DV_MIN}, {config.DV_MAX}], got {dv}")
    v0 = 0.5j * eta
    t0 = transfer_matrix(v0, eta, num_sites)
    slope = (transfer_matrix(v0 + dv, eta, num_sites)
             - transfer_matrix(v0 - dv, eta, num_sites)) / (2 * dv)
    if np.linalg.cond(t0) > 1.0 / config.SINGULAR_TOLERANCE:
        raise BetheDomainError("transfer matrix is singular at v = i*eta/2")
    log_derivative = linalg.solve(t0, slope)
    dim = 2 ** num_sites
    return (-0.5j * np.sinh(eta) * log_derivative
            + 0.5 * num_sites * np.cosh(eta) * np.eye(dim))


# Change of variables sin(v + i eta/2) / sin(v - i eta/2) = exp(-i p)

def p_to_v(p, eta):
    """Rapidity for a real momentum; p = pi maps to v = 0 and p = 0 to v = -pi/2"""
    reduced = np.mod(p, 2 * np.pi)
    return complex(np.arctan2(-np.tanh(eta / 2) * np.cos(reduced / 2), np.sin(reduced / 2)))


def v_to_p(v, eta):
    """Momentum of a rapidity; real rapidities give p in [-pi, pi)"""
    ratio = np.sin(v + 0.5j * eta) / np.sin(v - 0.5j * eta)
    p = 1j * np.log(ratio)
    return complex(p.real, p.imag)


def _pairwise_separation(values):
    values = np.asarray(values)
    if len(values) < 2:
        return np.inf
    diff = np.abs(values[:, None] - values[None, :])
    return float(np.min(diff[~np.eye(len(values), dtype=bool)]))


@dataclass(frozen=True)
class BetheRoots:
    """
    M rapidities of an N-site chain; momenta follow from the change of variables

    Build with from_rapidities or from_momenta.
    """

    num_sites: int
    eta: float
    rapidities: np.ndarray
    momenta: np.ndarray
    quantum_numbers: tuple = None

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.rapidities, dtype=np.complex128))
        p = np.atleast_1d(np.asarray(self.momenta, dtype=np.complex128))
        if len(v) != len(p):
            raise ValueError("rapidities and momenta differ in length")
        if len(v) > self.num_sites // 2:
            raise ValueError(
                f"M={len(v)} magnons exceed floor(N/2)={self.num_sites // 2} for N={self.num_sites}"
            )
        if _pairwise_separation(v) <= config.ROOT_SEPARATION:
            raise BetheDomainError("Bethe roots are not pairwise distinct")
        for vj, pj in zip(v, p):
            ratio = np.sin(vj + 0.5j * self.eta) / np.sin(vj - 0.5j * self.eta)
            if abs(ratio - np.exp(-1j * pj)) > 1e-10 * max(1.0, abs(ratio)):
                raise ValueError(f"momentum {pj} is inconsistent with rapidity {vj}")
        v.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, 'rapidities', v)
        object.__setattr__(self, 'momenta', p)

    @property
    def num_magnons(self):
        return len(self.rapidities)

    @classmethod
    def from_rapidities(cls, num_sites, eta, rapidities, quantum_numbers=None):
        v = np.atleast_1d(np.asarray(rapidities, dtype=np.complex128))
        p = np.array([v_to_p(vj, eta) for vj in v], dtype=np.complex128)
        return cls(num_sites, eta, v, p, quantum_numbers)

    @classmethod
    def from_momenta(cls, num_sites, eta, momenta):
        p = np.atleast_1d(np.asarray(momenta, dtype=float))
        v = np.array([p_to_v(pj, eta) for pj in p], dtype=np.complex128)
        return cls(num_sites, eta, v, p.astype(np.complex128))


def bethe_state(roots):
    """
    Normalized B(v_1) ... B(v_M) |Psi_0>

    Raises BetheDomainError when the vector vanishes against the scale
    |sinh(eta)| max(|sin(v + i eta/2)|, |sin(v - i eta/2)|)**(N-1) of each
    B(v) factor, i.e. against the size of a single amplitude it creates.
    """
    n = roots.num_sites
    check_qubit_cap(n)
    amps = reference_state(n).amplitudes.copy()
    scale = 1.0
    for v in reversed(roots.rapidities):
        amps = apply_b(v, roots.eta, amps)
        r = r_matrix(v, roots.eta).matrix
        scale *= abs(r[1, 2]) * max(abs(r[0, 0]), abs(r[1, 1])) ** (n - 1)
    nrm = np.linalg.norm(amps)
    if nrm <= config.SINGULAR_TOLERANCE * scale:
        raise BetheDomainError(
            f"Bethe vector vanishes (norm {nrm:.3g} against scale {scale:.3g}); roots are invalid"
        )
    return Statevector(n, amps / nrm)


def bethe_residuals(roots):
    """|LHS_j - RHS_j| of the Bethe equations, one entry per root"""
    v = roots.rapidities
    n, eta = roots.num_sites, roots.eta
    out = np.empty(len(v))
    for j, vj in enumerate(v):
        lhs = (np.sin(vj + 0.5j * eta) / np.sin(vj - 0.5j * eta)) ** n
        others = np.delete(v, j)
        rhs = np.prod(np.sin(vj - others + 1j * eta) / np.sin(vj - others - 1j * eta))
        out[j] = abs(lhs - rhs)
    return out


def bethe_energy(roots):
    """
    E = sinh(eta)^2 / 2 * sum_j 1 / (sin(v_j + i eta/2) sin(v_j - i eta/2))

    Equivalent to sum_j (cosh(eta) - cos(p_j)).
    """
    eta = roots.eta
    total = 0.0 + 0.0j
    for v in roots.rapidities:
        denom = np.sin(v + 0.5j * eta) * np.sin(v - 0.5j * eta)
        if abs(denom) < config.SINGULAR_TOLERANCE:
            raise BetheDomainError(f"rapidity {v} is singular")
        total += 1.0 / denom
    energy = 0.5 * np.sinh(eta) ** 2 * total
    if abs(energy.imag) > 1e-9 * max(1.0, abs(energy)):
        logger.warning("complex Bethe energy %s, reporting its real part", energy)
    return float(energy.real)


# Logarithmic Bethe equations
#   N theta_1(v_j) - sum_{k != j} theta_2(v_j - v_k) = 2 pi J_j
# with theta_n(x) = 2 atan(coth(n eta/2) tan x) + 2 pi floor(x/pi + 1/2),
# continuous and increasing on the real line.

def _theta(x, n, eta):
    return (2 * np.arctan(np.tan(x) / np.tanh(n * eta / 2))
            + 2 * np.pi * np.floor(x / np.pi + 0.5))


def _theta_prime(x, n, eta):
    return 2 * np.sinh(n * eta) / (np.cosh(n * eta) - np.cos(2 * x))


def _theta_inverse(y, n, eta):
    winding = np.floor((y + np.pi) / (2 * np.pi))
    return np.arctan(np.tanh(n * eta / 2) * np.tan((y - 2 * np.pi * winding) / 2)) + np.pi * winding


def _log_residuals(v, num_sites, eta, quantum_numbers):
    scattering = _theta(v[:, None] - v[None, :], 2, eta).sum(axis=1)
    return num_sites * _theta(v, 1, eta) - scattering - 2 * np.pi * quantum_numbers


def _log_jacobian(v, num_sites, eta):
    kernel = _theta_prime(v[:, None] - v[None, :], 2, eta)
    np.fill_diagonal(kernel, 0.0)
    jac = kernel.copy()
    jac[np.diag_indices_from(jac)] = num_sites * _theta_prime(v, 1, eta) - kernel.sum(axis=1)
    return jac


def _fixed_point_sweep(v, num_sites, eta, quantum_numbers):
    scattering = _theta(v[:, None] - v[None, :], 2, eta).sum(axis=1)
    return _theta_inverse((2 * np.pi * quantum_numbers + scattering) / num_sites, 1, eta)


def ground_state_quantum_numbers(num_sites, num_magnons):
    """
    Symmetric set J_j = j - (M-1)/2, the ground state of -H (top of the spectrum of H)

    Requires N - M + 1 and M - 1 to share parity, i.e. N even.
    """
    if num_sites % 2:
        raise ValueError(
            f"the symmetric quantum numbers need an even chain, got N={num_sites}; "
            f"pass explicit quantum numbers"
        )
    return tuple(j - (num_magnons - 1) / 2 for j in range(num_magnons))


def validate_quantum_numbers(num_sites, num_magnons, quantum_numbers):
    """
    Check quantum numbers for a sector

    Returns:
    str: error message, or None when valid
    """
    if len(quantum_numbers) != num_magnons:
        return f"expected {num_magnons} quantum numbers, got {len(quantum_numbers)}"
    if len(set(quantum_numbers)) != len(quantum_numbers):
        return "quantum numbers must be distinct"
    offset = num_sites - num_magnons + 1
    for j in quantum_numbers:
        twice = 2 * j
        if abs(twice - round(twice)) > 1e-12 or (round(twice) - offset) % 2:
            kind = 'integers' if offset % 2 == 0 else 'half-odd integers'
            return f"quantum number {j} invalid: N={num_sites}, M={num_magnons} needs {kind}"
    return None


def solve_bethe_real(num_sites, num_magnons, eta, quantum_numbers=None):
    """
    Real rapidities solving the Bethe equations in logarithmic form

    Damped Newton iteration: a step that does not lower the residual is
    halved (factor NEWTON_DAMPING) up to NEWTON_MAX_HALVINGS times; if it
    still fails, one fixed-point sweep replaces the step.

    Parameters:
    num_sites (int): chain length N
    num_magnons (int): M <= floor(N/2)
    eta (float): anisotropy
    quantum_numbers (sequence): J_j; integers when N-M+1 is even, half-odd
        integers otherwise. Defaults to the symmetric set.

    Returns:
    BetheRoots: solved roots, quantum numbers attached
    """
    if num_sites < 2:
        raise ValueError(f"num_sites must be >= 2, got {num_sites}")
    if not 0 <= num_magnons <= num_sites // 2:
        raise ValueError(f"M must lie in 0..{num_sites // 2}, got {num_magnons}")
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    if quantum_numbers is None:
        quantum_numbers = ground_state_quantum_numbers(num_sites, num_magnons)
    error = validate_quantum_numbers(num_sites, num_magnons, quantum_numbers)
    if error:
        raise ValueError(error)
    qn = np.asarray(quantum_numbers, dtype=float)
    if num_magnons == 0:
        return BetheRoots.from_rapidities(num_sites, eta, [], ())

    v = np.arctan(np.tanh(eta / 2) * np.tan(np.pi * qn / num_sites))
    residual = _log_residuals(v, num_sites, eta, qn)
    worst = np.max(np.abs(residual))
    for iteration in range(config.SOLVER_MAX_ITER):
        if worst < config.SOLVER_TOLERANCE:
            break
        try:
            step = linalg.solve(_log_jacobian(v, num_sites, eta), -residual)
        except linalg.LinAlgError:
            step = None
        scale = 1.0
        accepted = False
        if step is not None:
            for _ in range(config.NEWTON_MAX_HALVINGS):
                trial = v + scale * step
                trial_residual = _log_residuals(trial, num_sites, eta, qn)
                if np.max(np.abs(trial_residual)) < worst:
                    accepted = True
                    break
                scale *= config.NEWTON_DAMPING
        if not accepted:
            logger.debug("Newton stalled at iteration %d, taking a fixed-point sweep", iteration)
            trial = _fixed_point_sweep(v, num_sites, eta, qn)
            trial_residual = _log_residuals(trial, num_sites, eta, qn)
        v, residual = trial, trial_residual
        worst = np.max(np.abs(residual))
        logger.debug("iteration %d: max residual %.3e (step scale %g)", iteration, worst, scale)
    else:
        if worst >= config.SOLVER_TOLERANCE:
            raise BetheConvergenceError(
                f"Bethe solver did not converge in {config.SOLVER_MAX_ITER} iterations "
                f"(max residual {worst:.3e})",
                np.abs(residual),
            )

    if _pairwise_separation(v) <= config.ROOT_SEPARATION:
        raise BetheDomainError("solver converged to colliding roots")
    logger.info("Bethe roots for N=%d, M=%d converged (max residual %.2e)",
                num_sites, num_magnons, worst)
    return BetheRoots.from_rapidities(num_sites, eta, v, tuple(float(j) for j in qn))


def roots_to_dict(roots, residuals=None, energy=None):
    """Root-set export: N, M, eta, p, v_re, v_im, residuals, energy"""
    if residuals is None:
        residuals = bethe_residuals(roots)
    if energy is None:
        energy = bethe_energy(roots)
    return {
        'N': roots.num_sites,
        'M': roots.num_magnons,
        'eta': roots.eta,
        'p': [float(p.real) for p in roots.momenta],
        'v_re': [float(v.real) for v in roots.rapidities],
        'v_im': [float(v.imag) for v in roots.rapidities],
        'residuals': [float(r) for r in residuals],
        'energy': float(energy),
    }


@dataclass(frozen=True)
class TwoMagnonAmplitudes:
    xi: complex
    zeta: complex
    p1: float
    p2: float
    eta: float
    vector: np.ndarray = field(repr=False, default=None)


def two_magnon_components(p1, p2, eta):
    """
    Closed-form N=4 two-magnon state, collinear with B(p1) B(p2) |Psi_0>

    Returns:
    tuple: (TwoMagnonAmplitudes, 16-component numpy.ndarray)
    """
    total = p1 + p2
    denom = 1 + np.exp(1j * total)
    if abs(denom) < config.SINGULAR_TOLERANCE:
        raise BetheDomainError(f"p1 + p2 = {total} lies on the singular manifold pi mod 2pi")
    ch = np.cosh(eta)
    xi = (2 * np.cos(p1) + 2 * np.cos(p2) - 2 * ch) / (1 + np.exp(-1j * total))
    zeta = (1 + np.exp(2j * p1) + np.exp(2j * p2) + np.exp(1j * (p1 - p2))
            + np.exp(1j * (p2 - p1)) + np.exp(1j * total)
            - 2 * ch * (np.exp(1j * p1) + np.exp(1j * p2))) / denom
    vec = np.zeros(16, dtype=np.complex128)
    vec[3] = np.exp(1j * total)
    vec[5] = xi
    vec[6] = 1.0
    vec[9] = zeta
    vec[10] = np.conj(xi)
    vec[12] = np.exp(-1j * total)
    vec.setflags(write=False)
    amplitudes = TwoMagnonAmplitudes(complex(xi), complex(zeta), float(p1), float(p2), float(eta), vec)
    return amplitudes, vec
