"""
Statevector simulation: gates, circuits, Pauli observables and shot sampling

Qubit 0 is the least-significant bit of a basis index. A basis index is
written as a bitstring with qubit n-1 on the left.
"""

import logging
from dataclasses import dataclass

import numpy as np

import config

logger = logging.getLogger(__name__)


class CapacityError(ValueError):
    """Raised when a dense representation would exceed its configured cap"""


def wrap_angle(x):
    """Map an angle into (-pi, pi]"""
    return float(np.pi - np.mod(np.pi - x, 2 * np.pi))


def check_qubit_cap(num_qubits, cap=config.MAX_QUBITS, what='statevector'):
    if num_qubits > cap:
        raise CapacityError(f"{what} limited to {cap} qubits, got {num_qubits}")


@dataclass(frozen=True)
class Statevector:
    """Dense vector of 2**num_qubits complex amplitudes"""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {self.num_qubits}")
        check_qubit_cap(self.num_qubits)
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** self.num_qubits,):
            raise ValueError(
                f"expected {2 ** self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amps)

    @classmethod
    def from_array(cls, amplitudes):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        num_qubits = int(amps.size).bit_length() - 1
        if amps.ndim != 1 or amps.size != 2 ** num_qubits or num_qubits < 1:
            raise ValueError(f"amplitude count must be a power of two >= 2, got {amps.size}")
        return cls(num_qubits, amps)

    @classmethod
    def basis(cls, num_qubits, index=0):
        amps = np.zeros(2 ** num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @property
    def dimension(self):
        return self.amplitudes.size

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_normalized(self):
        return abs(self.norm() - 1.0) < config.NORMALIZED_TOLERANCE

    def normalized(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Statevector(self.num_qubits, self.amplitudes / nrm)

    def inner(self, other):
        """<self|other>"""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def to_json(self):
        """[re, im] pairs in ascending basis-index order"""
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]

    @classmethod
    def from_json(cls, pairs):
        return cls.from_array([complex(re, im) for re, im in pairs])


# Gate matrices. For two-qubit gates the first listed qubit is the high bit.

def u3_matrix(theta, phi, lam):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([
        [c, -np.exp(1j * lam) * s],
        [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
    ], dtype=np.complex128)


X_MATRIX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z_MATRIX = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
CNOT_MATRIX = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
], dtype=np.complex128)
SWAP_MATRIX = np.array([
    [1, 0, 0, 0],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
], dtype=np.complex128)

# kind -> (arity, parameter count)
GATE_KINDS = {
    'u3': (1, 3),
    'x': (1, 0),
    'z': (1, 0),
    'h': (1, 0),
    'cx': (2, 0),
    'swap': (2, 0),
}


@dataclass(frozen=True)
class Gate:
    """
    A primitive gate

    Parameters:
    kind (str): one of GATE_KINDS
    qubits (tuple): target qubits; for 'cx' this is (control, target)
    params (tuple): (theta, phi, lambda) in radians for 'u3', empty otherwise
    """

    kind: str
    qubits: tuple
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind '{self.kind}'")
        arity, n_params = GATE_KINDS[self.kind]
        qubits = tuple(int(q) for q in self.qubits)
        params = tuple(float(x) for x in self.params)
        if len(qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {qubits}")
        if len(params) != n_params:
            raise ValueError(f"{self.kind} takes {n_params} parameter(s), got {params}")
        if any(q < 0 for q in qubits):
            raise ValueError(f"negative qubit index in {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{self.kind} needs distinct qubits, got {qubits}")
        object.__setattr__(self, 'qubits', qubits)
        object.__setattr__(self, 'params', params)

    @classmethod
    def u3(cls, theta, phi, lam, qubit):
        return cls('u3', (qubit,), (theta, phi, lam))

    @classmethod
    def x(cls, qubit):
        return cls('x', (qubit,))

    @classmethod
    def z(cls, qubit):
        return cls('z', (qubit,))

    @classmethod
    def hadamard(cls, qubit):
        return cls('h', (qubit,))

    @classmethod
    def cnot(cls, control, target):
        return cls('cx', (control, target))

    @classmethod
    def swap(cls, i, j):
        return cls('swap', (i, j))

    def matrix(self):
        if self.kind == 'u3':
            return u3_matrix(*self.params)
        return {
            'x': X_MATRIX,
            'z': Z_MATRIX,
            'h': H_MATRIX,
            'cx': CNOT_MATRIX,
            'swap': SWAP_MATRIX,
        }[self.kind]

    def remap(self, mapping):
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.params)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list; the first gate is applied first"""

    num_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        for gate in gates:
            if max(gate.qubits) >= self.num_qubits:
                raise ValueError(
                    f"gate {gate.kind}{gate.qubits} references a qubit outside "
                    f"a {self.num_qubits}-qubit circuit"
                )
        object.__setattr__(self, 'gates', gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def then(self, *gates):
        return Circuit(self.num_qubits, self.gates + tuple(gates))

    def compose(self, other):
        if other.num_qubits != self.num_qubits:
            raise ValueError("cannot compose circuits of different widths")
        return Circuit(self.num_qubits, self.gates + other.gates)

    def remap(self, mapping, num_qubits=None):
        """
        Relabel qubits

        Parameters:
        mapping (dict or sequence): old qubit index -> new qubit index
        num_qubits (int): width of the new circuit (defaults to the current width)
        """
        width = self.num_qubits if num_qubits is None else num_qubits
        return Circuit(width, tuple(gate.remap(mapping) for gate in self.gates))


def _apply_matrix(amplitudes, num_qubits, matrix, qubits):
    k = len(qubits)
    axes = [num_qubits - 1 - q for q in qubits]
    psi = np.moveaxis(amplitudes.reshape((2,) * num_qubits), axes, list(range(k)))
    shape = psi.shape
    psi = (matrix @ psi.reshape(2 ** k, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(k)), axes).reshape(-1)


def _check_gate(gate, num_qubits):
    if max(gate.qubits) >= num_qubits:
        raise ValueError(
            f"gate {gate.kind}{gate.qubits} out of range for {num_qubits} qubit(s)"
        )


def apply_gate(state, gate):
    """Return U|psi> for the gate's unitary embedded on its qubits"""
    _check_gate(gate, state.num_qubits)
    amps = _apply_matrix(state.amplitudes, state.num_qubits, gate.matrix(), gate.qubits)
    return Statevector(state.num_qubits, amps)


def run_circuit(circuit, initial):
    if circuit.num_qubits != initial.num_qubits:
        raise ValueError(
            f"circuit width {circuit.num_qubits} does not match state width {initial.num_qubits}"
        )
    amps = initial.amplitudes
    for gate in circuit:
        amps = _apply_matrix(amps, circuit.num_qubits, gate.matrix(), gate.qubits)
    return Statevector(circuit.num_qubits, amps)


def circuit_unitary(circuit):
    """Dense unitary of a circuit; column i is the circuit applied to basis state i"""
    dim = 2 ** circuit.num_qubits
    columns = [
        run_circuit(circuit, Statevector.basis(circuit.num_qubits, i)).amplitudes
        for i in range(dim)
    ]
    return np.column_stack(columns)


def phase_residual(a, b):
    """
    min over phi of ||a - exp(i phi) b||

    The optimal phase is read off the overlap <b|a>, so no amplitude is
    ever divided by.
    """
    a = np.asarray(getattr(a, 'amplitudes', a), dtype=np.complex128)
    b = np.asarray(getattr(b, 'amplitudes', b), dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def states_equal_up_to_phase(a, b, tol=1e-10):
    return phase_residual(a, b) < tol


class PauliSum:
    """
    Real-weighted sum of Pauli strings

    label[i] acts on qubit n-1-i, so labels read like bitstrings.
    """

    def __init__(self, terms):
        terms = tuple((float(coef), str(label).upper()) for coef, label in terms)
        if not terms:
            raise ValueError("a PauliSum needs at least one term")
        n = len(terms[0][1])
        for coef, label in terms:
            if len(label) != n:
                raise ValueError(f"label '{label}' has length {len(label)}, expected {n}")
            if set(label) - set('IXYZ'):
                raise ValueError(f"label '{label}' contains letters outside IXYZ")
        self._terms = terms
        self._num_qubits = n

    @property
    def terms(self):
        return self._terms

    @property
    def num_qubits(self):
        return self._num_qubits

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        body = ' + '.join(f"{coef:g}*{label}" for coef, label in self._terms)
        return f"PauliSum({body})"

    def __add__(self, other):
        if other.num_qubits != self.num_qubits:
            raise ValueError("cannot add PauliSums of different widths")
        return PauliSum(self._terms + other.terms).simplify()

    def __mul__(self, scalar):
        return PauliSum((scalar * coef, label) for coef, label in self._terms)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def simplify(self):
        """Merge repeated labels, keeping first-seen order"""
        merged = {}
        for coef, label in self._terms:
            merged[label] = merged.get(label, 0.0) + coef
        return PauliSum((coef, label) for label, coef in merged.items())

    def coefficient(self, label):
        return sum(coef for coef, lab in self._terms if lab == label)

    def apply(self, amplitudes):
        """Matrix-free action on an amplitude array"""
        psi = np.asarray(getattr(amplitudes, 'amplitudes', amplitudes), dtype=np.complex128)
        if psi.size != 2 ** self._num_qubits:
            raise ValueError(
                f"operator on {self._num_qubits} qubits applied to a vector of length {psi.size}"
            )
        idx = np.arange(psi.size)
        out = np.zeros_like(psi)
        for coef, label in self._terms:
            x_mask, z_mask, n_y = pauli_masks(label)
            sign = parity_signs(idx, z_mask)
            out[idx ^ x_mask] += (coef * 1j ** n_y) * sign * psi
        return out

    def to_matrix(self):
        dim = 2 ** self._num_qubits
        check_qubit_cap(self._num_qubits, config.MAX_ED_SITES, 'dense operator')
        idx = np.arange(dim)
        mat = np.zeros((dim, dim), dtype=np.complex128)
        for coef, label in self._terms:
            x_mask, z_mask, n_y = pauli_masks(label)
            sign = parity_signs(idx, z_mask)
            mat[idx ^ x_mask, idx] += (coef * 1j ** n_y) * sign
        return mat


def parity_signs(indices, mask):
    """(-1)**popcount(index & mask) as floats"""
    return np.where(np.bitwise_count(np.asarray(indices) & mask) & 1, -1.0, 1.0)


def pauli_masks(label):
    """(x_mask, z_mask, number of Y letters) with Y = i X Z"""
    n = len(label)
    x_mask = z_mask = 0
    n_y = 0
    for i, letter in enumerate(label):
        bit = 1 << (n - 1 - i)
        if letter in 'XY':
            x_mask |= bit
        if letter in 'ZY':
            z_mask |= bit
        if letter == 'Y':
            n_y += 1
    return x_mask, z_mask, n_y


def expectation(state, observable):
    """<psi|O|psi> for a normalized state and a Hermitian PauliSum"""
    if observable.num_qubits != state.num_qubits:
        raise ValueError(
            f"observable on {observable.num_qubits} qubits, state on {state.num_qubits}"
        )
    if abs(state.norm() - 1.0) > config.NORM_TOLERANCE:
        raise ValueError(f"state is not normalized (norm {state.norm():.12g})")
    value = np.vdot(state.amplitudes, observable.apply(state.amplitudes))
    scale = max(1.0, sum(abs(coef) for coef, _ in observable.terms))
    if abs(value.imag) > config.IMAG_TOLERANCE * scale:
        raise ValueError(f"expectation has imaginary part {value.imag:.3g}")
    return float(value.real)


# Shot sampling

def basis_change_circuit(num_qubits, basis):
    """Rotations that map the given uniform product basis onto Z"""
    if basis == 'Z':
        return Circuit(num_qubits)
    if basis == 'X':
        per_qubit = [(np.pi / 2, 0.0, np.pi)]
    elif basis == 'Y':
        per_qubit = [(0.0, 0.0, -np.pi / 2), (np.pi / 2, 0.0, np.pi)]
    else:
        raise ValueError(f"unknown measurement setting '{basis}', expected X, Y or Z")
    gates = [Gate.u3(*angles, q) for q in range(num_qubits) for angles in per_qubit]
    return Circuit(num_qubits, gates)


def derive_seed(seed, *keys):
    """Deterministic child seed for a (seed, key...) tuple"""
    return int(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]).generate_state(1)[0])


@dataclass(frozen=True)
class MeasurementRecord:
    """Histogram of sampled bitstrings in one measurement setting"""

    basis: str
    shots: int
    counts: dict
    seed: int

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.shots:
            raise ValueError(f"histogram holds {total} counts for {self.shots} shots")

    def parity_mean(self, mask):
        """Empirical mean of (-1)**popcount(bits & mask)"""
        acc = 0
        for bits, count in self.counts.items():
            parity = bin(int(bits, 2) & mask).count('1') & 1
            acc += -count if parity else count
        return acc / self.shots


def _rotated_probabilities(state, basis):
    rotated = run_circuit(basis_change_circuit(state.num_qubits, basis), state)
    probs = rotated.probabilities()
    return probs / probs.sum()


def sample_counts(state, basis, shots, seed):
    """
    Sample bitstrings after rotating every qubit into the chosen basis

    Parameters:
    state (Statevector): state to measure
    basis (str): 'X', 'Y' or 'Z'
    shots (int): number of samples, at least 1
    seed (int): seed of the Philox generator

    Returns:
    MeasurementRecord: histogram keyed by bitstring (qubit n-1 first)
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    probs = _rotated_probabilities(state, basis)
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    # Inverse-CDF draws: a fixed seed gives outcomes that move continuously with the state
    uniforms = np.random.Generator(np.random.Philox(seed)).random(int(shots))
    outcomes = np.searchsorted(cdf, uniforms, side='right')
    draws = np.bincount(outcomes, minlength=probs.size)
    width = state.num_qubits
    counts = {format(i, f'0{width}b'): int(c) for i, c in enumerate(draws) if c}
    return MeasurementRecord(basis, int(shots), counts, seed)


def group_terms_by_setting(hamiltonian):
    """
    Split a PauliSum into uniform measurement settings

    Returns:
    tuple: (constant, {setting: [(coefficient, support_mask), ...]})
    """
    constant = 0.0
    groups = {setting: [] for setting in config.MEASUREMENT_SETTINGS}
    n = hamiltonian.num_qubits
    for coef, label in hamiltonian.terms:
        letters = set(label) - {'I'}
        if not letters:
            constant += coef
            continue
        if len(letters) > 1:
            raise ValueError(f"term '{label}' mixes Pauli letters and fits no uniform setting")
        mask = sum(1 << (n - 1 - i) for i, letter in enumerate(label) if letter != 'I')
        groups[letters.pop()].append((coef, mask))
    return constant, groups


def split_shots(shots, settings):
    base, extra = divmod(int(shots), len(settings))
    split = [base + (1 if i < extra else 0) for i in range(len(settings))]
    if min(split) < 1:
        raise ValueError(f"{shots} shot(s) cannot cover {len(settings)} measurement settings")
    return split


def drop_vanishing_terms(state, groups):
    """
    Remove X and Y strings whose expectation is identically zero on this state

    An X or Y string on support mask m couples basis index i only to i ^ m,
    so its expectation vanishes exactly when no nonzero amplitude has a
    partner i ^ m with nonzero amplitude.

    Returns:
    dict: {setting: [(coefficient, support_mask), ...]} with those terms removed
    """
    support = np.flatnonzero(state.amplitudes)
    kept = {}
    for setting, terms in groups.items():
        if setting == 'Z':
            kept[setting] = list(terms)
            continue
        kept[setting] = [(coef, mask) for coef, mask in terms
                         if np.isin(support ^ mask, support, assume_unique=True).any()]
    return kept


def estimate_energy_sampled(state, hamiltonian, shots, seed):
    """
    Shot-based estimate of <psi|H|psi>, shots split evenly over the settings in use

    Terms whose expectation vanishes identically on the state contribute an
    exact zero; a setting left without terms keeps its shot share and seed
    but is not sampled.
    """
    constant, groups = group_terms_by_setting(hamiltonian)
    settings = [s for s in config.MEASUREMENT_SETTINGS if groups[s]]
    if not settings:
        return constant
    groups = drop_vanishing_terms(state, groups)
    estimate = constant
    for i, (setting, n_shots) in enumerate(zip(settings, split_shots(shots, settings))):
        if not groups[setting]:
            logger.debug("setting %s: every correlator vanishes, not sampled", setting)
            continue
        record = sample_counts(state, setting, n_shots, derive_seed(seed, i))
        estimate += sum(coef * record.parity_mean(mask) for coef, mask in groups[setting])
        logger.debug("setting %s: %d shots, running estimate %.8f", setting, n_shots, estimate)
    return float(estimate)


def sampled_energy_standard_error(state, hamiltonian, shots):
    """Analytic standard error of estimate_energy_sampled for this state"""
    _, groups = group_terms_by_setting(hamiltonian)
    settings = [s for s in config.MEASUREMENT_SETTINGS if groups[s]]
    if not settings:
        return 0.0
    split = split_shots(shots, settings)
    groups = drop_vanishing_terms(state, groups)
    idx = np.arange(state.dimension)
    variance = 0.0
    for setting, n_shots in zip(settings, split):
        if not groups[setting]:
            continue
        probs = _rotated_probabilities(state, setting)
        single_shot = np.zeros(state.dimension)
        for coef, mask in groups[setting]:
            single_shot += coef * parity_signs(idx, mask)
        mean = probs @ single_shot
        variance += max(probs @ single_shot ** 2 - mean ** 2, 0.0) / n_shots
    return float(np.sqrt(variance))
