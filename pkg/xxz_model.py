"""
XXZ chain Hamiltonian, symmetry operators and the exact-diagonalization oracle

Site k of the chain (1-based, left to right) is qubit N-k, which is also
character k-1 of a Pauli label.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import linalg

import config
from quantum_core import CapacityError, PauliSum, Statevector, parity_signs, pauli_masks

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class XxzParams:
    """
    Periodic XXZ chain

    Parameters:
    num_sites (int): chain length N >= 2
    eta (float): anisotropy, strictly positive
    """

    num_sites: int
    eta: float

    def __post_init__(self):
        if int(self.num_sites) != self.num_sites or self.num_sites < 2:
            raise ValueError(f"num_sites must be an integer >= 2, got {self.num_sites}")
        if not np.isfinite(self.eta) or self.eta <= 0:
            raise ValueError(f"eta must be finite and > 0, got {self.eta}")
        object.__setattr__(self, 'num_sites', int(self.num_sites))
        object.__setattr__(self, 'eta', float(self.eta))


def _site_label(num_sites, letters):
    """Pauli label with the given {site: letter} entries, identity elsewhere"""
    chars = ['I'] * num_sites
    for site, letter in letters.items():
        chars[site - 1] = letter
    return ''.join(chars)


def build_hamiltonian(params):
    """
    H = -1/4 sum_k (X_k X_k+1 + Y_k Y_k+1 + cosh(eta) Z_k Z_k+1 - cosh(eta)),
    with site N+1 wrapped to site 1

    Parameters:
    params (XxzParams): chain length and anisotropy

    Returns:
    PauliSum: the Hamiltonian, constant kept as an identity-string term
    """
    n = params.num_sites
    ch = np.cosh(params.eta)
    terms = []
    for site in range(1, n + 1):
        nxt = site % n + 1
        for letter, weight in (('X', 1.0), ('Y', 1.0), ('Z', ch)):
            terms.append((-0.25 * weight, _site_label(n, {site: letter, nxt: letter})))
    terms.append((0.25 * n * ch, 'I' * n))
    return PauliSum(terms).simplify()


def build_sz(num_sites):
    """S^z = 1/2 sum_k Z_k"""
    if num_sites < 1:
        raise ValueError(f"num_sites must be >= 1, got {num_sites}")
    return PauliSum((0.5, _site_label(num_sites, {site: 'Z'})) for site in range(1, num_sites + 1))


def charge_conjugation_operator(num_sites):
    return PauliSum([(1.0, 'X' * num_sites)])


def apply_charge_conjugation(state):
    """X on every qubit: basis index i goes to its bitwise complement"""
    return Statevector(state.num_qubits, state.amplitudes[::-1])


def reference_state(num_sites):
    """All spins up, amplitude 1 at basis index 0"""
    return Statevector.basis(num_sites, 0)


def magnetization(index, num_sites):
    """S^z eigenvalue of a computational basis state"""
    return num_sites / 2 - np.bitwise_count(np.asarray(index))


def sector_of(state, tol=config.NORMALIZED_TOLERANCE):
    """
    S^z sector of a state

    Returns:
    float: the common S^z of every amplitude above tol, or None when the
    state mixes sectors or vanishes
    """
    support = np.flatnonzero(np.abs(state.amplitudes) > tol)
    if support.size == 0:
        return None
    values = np.unique(magnetization(support, state.num_qubits))
    return float(values[0]) if values.size == 1 else None


def hamiltonian_matrix(params):
    """Dense real matrix of the Hamiltonian"""
    if params.num_sites > config.MAX_ED_SITES:
        raise CapacityError(
            f"exact diagonalization limited to {config.MAX_ED_SITES} sites, got {params.num_sites}"
        )
    return build_hamiltonian(params).to_matrix().real


def sector_block(operator, basis_indices):
    """
    Restriction of a U(1)-conserving PauliSum to a set of basis states

    Parameters:
    operator (PauliSum): operator that maps the span of basis_indices into itself
    basis_indices (numpy.ndarray): sorted basis indices of the sector

    Returns:
    numpy.ndarray: complex block, rows and columns ordered like basis_indices
    """
    basis_indices = np.asarray(basis_indices)
    dim = 2 ** operator.num_qubits
    size = len(basis_indices)
    position = np.full(dim, -1)
    position[basis_indices] = np.arange(size)
    cols = np.arange(size)
    block = np.zeros((size, size), dtype=np.complex128)
    leaked_keys, leaked_values = [], []
    for coef, label in operator.terms:
        x_mask, z_mask, n_y = pauli_masks(label)
        values = (coef * 1j ** n_y) * parity_signs(basis_indices, z_mask)
        targets = basis_indices ^ x_mask
        rows = position[targets]
        inside = rows >= 0
        block[rows[inside], cols[inside]] += values[inside]
        leaked_keys.append(targets[~inside] * size + cols[~inside])
        leaked_values.append(values[~inside])

    # Single terms may leave the sector as long as their sum does not
    keys = np.concatenate(leaked_keys)
    if keys.size:
        _, inverse = np.unique(keys, return_inverse=True)
        totals = np.bincount(inverse, weights=np.concatenate(leaked_values).real) \
            + 1j * np.bincount(inverse, weights=np.concatenate(leaked_values).imag)
        scale = max(1.0, sum(abs(coef) for coef, _ in operator.terms))
        if np.max(np.abs(totals)) > config.SECTOR_TOLERANCE * scale:
            raise ValueError("operator does not conserve the sector")
    return block


@dataclass(frozen=True)
class Spectrum:
    """
    Eigen-decomposition of H sorted by energy, ties broken by descending S^z

    vectors holds one real eigenvector per column, or None when the
    spectrum was computed without them.
    """

    params: XxzParams
    energies: np.ndarray
    sz: np.ndarray
    vectors: np.ndarray = None

    def __len__(self):
        return len(self.energies)

    def eigenstate(self, n):
        if self.vectors is None:
            raise ValueError("spectrum was computed without eigenvectors")
        return Statevector(self.params.num_sites, self.vectors[:, n])

    @property
    def eigenstates(self):
        return [self.eigenstate(n) for n in range(len(self))]

    def to_frame(self):
        return pd.DataFrame({'E': self.energies, 'sz': self.sz})

    def to_dict(self):
        return {
            'N': self.params.num_sites,
            'eta': self.params.eta,
            'levels': [{'E': float(e), 'sz': float(s)} for e, s in zip(self.energies, self.sz)],
        }


def exact_spectrum(params, compute_vectors=True):
    """
    Diagonalize H one magnetization sector at a time

    Every eigenvector therefore has a definite S^z, also inside degenerate
    levels, and the output is deterministic.

    Parameters:
    params (XxzParams): chain, at most config.MAX_ED_SITES sites
    compute_vectors (bool): also return eigenvectors

    Returns:
    Spectrum: ascending energies with S^z labels
    """
    n = params.num_sites
    if n > config.MAX_ED_SITES:
        raise CapacityError(f"exact diagonalization limited to {config.MAX_ED_SITES} sites, got {n}")
    hamiltonian = build_hamiltonian(params)
    dim = 2 ** n
    indices = np.arange(dim)
    popcounts = np.bitwise_count(indices)

    energies, labels, columns = [], [], []
    for flips in range(n + 1):
        sector = indices[popcounts == flips]
        block = sector_block(hamiltonian, sector).real
        if compute_vectors:
            values, vecs = linalg.eigh(block)
            full = np.zeros((dim, len(values)))
            full[sector] = vecs
            columns.append(full)
        else:
            values = linalg.eigvalsh(block)
        energies.append(values)
        labels.append(np.full(len(values), n / 2 - flips))
        logger.debug("sector with %d flip(s): %d states", flips, len(sector))

    energies = np.concatenate(energies)
    labels = np.concatenate(labels)
    order = np.lexsort((-labels, np.round(energies, 9)))
    vectors = np.hstack(columns)[:, order] if compute_vectors else None
    logger.info("exact spectrum for N=%d, eta=%g: %d levels", n, params.eta, dim)
    return Spectrum(params, energies[order], labels[order], vectors)
