"""
Hardcoded one-magnon trial-state circuits for N=2 and N=4 chains

The two-qubit factors of the N=4 circuit are stored as fixed gate lists.
Each decomposition reads like a matrix product, rightmost factor first.
In a factor [A (x) B], A acts on local qubit 1 and B on local qubit 0.
"""

import logging
import re
from dataclasses import dataclass

import numpy as np

import config
from quantum_core import Circuit, Gate, GATE_KINDS, Statevector, run_circuit
from xxz_model import reference_state

logger = logging.getLogger(__name__)

PI = np.pi
SUPPORTED_SITES = (2, 4)
TARGETS = ('first', 'second')

# Gates in the N=4 ansatz: H, two CNOTs, and 12 gates for each 4x4 factor
N4_GATE_COUNT = 27


@dataclass(frozen=True)
class AnsatzSpec:
    """
    One-magnon trial state

    Parameters:
    num_sites (int): 2 or 4
    target (str): 'first' minimizes H, 'second' minimizes -H (N=2 only)
    p (float): variational momentum in radians
    """

    num_sites: int
    target: str = 'first'
    p: float = 0.0

    def __post_init__(self):
        if self.num_sites not in SUPPORTED_SITES:
            raise ValueError(f"ansatz circuits exist for N in {SUPPORTED_SITES}, got {self.num_sites}")
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}, got '{self.target}'")
        if self.target == 'second' and self.num_sites != 2:
            raise ValueError("the second-excited target is only available for N=2")
        if not np.isfinite(self.p):
            raise ValueError(f"p must be finite, got {self.p}")

    def circuit(self, p=None):
        return one_magnon_circuit(self.num_sites, self.p if p is None else p)

    def state(self, p=None):
        return run_circuit(self.circuit(p), reference_state(self.num_sites))


@dataclass(frozen=True)
class TwoQubitBlockParams:
    alpha: float
    beta: float
    delta: float


def one_magnon_circuit_n2(p):
    """X_0 C_10 U3_1(pi/2, -p, 0) on |00>"""
    return Circuit(2, (
        Gate.u3(PI / 2, -p, 0.0, 1),
        Gate.cnot(1, 0),
        Gate.x(0),
    ))


def v_block_circuit(params):
    """
    Z_1 C_01 U3_0(-alpha,pi,pi) C_10 U3_1(0,0,delta) U3_0(-beta,pi,pi) C_01 U3_0(0,0,-pi/2)

    Returns:
    Circuit: the 8-gate two-qubit block, first gate applied first
    """
    return Circuit(2, (
        Gate.u3(0.0, 0.0, -PI / 2, 0),
        Gate.cnot(0, 1),
        Gate.u3(-params.beta, PI, PI, 0),
        Gate.u3(0.0, 0.0, params.delta, 1),
        Gate.cnot(1, 0),
        Gate.u3(-params.alpha, PI, PI, 0),
        Gate.cnot(0, 1),
        Gate.z(1),
    ))


def _dressed_block(inner_layer, block, outer_layer):
    """[outer] . V . [inner] as a circuit; each layer is ((theta, phi, lam) on 1, (theta, phi, lam) on 0)"""
    (in_hi, in_lo), (out_hi, out_lo) = inner_layer, outer_layer
    return (Circuit(2, (Gate.u3(*in_hi, 1), Gate.u3(*in_lo, 0)))
            .compose(v_block_circuit(block))
            .then(Gate.u3(*out_hi, 1), Gate.u3(*out_lo, 0)))


def u_cal_circuit(p):
    return _dressed_block(
        ((PI / 2, -PI / 4, (3 * p + PI) / 2), (0.0, 0.0, (3 * PI - p) / 2)),
        TwoQubitBlockParams(0.0, PI / 2, PI / 4),
        ((PI / 2, -3 * p / 2, 0.0), (PI / 2, (PI - p) / 2, PI)),
    )


def v_cal_circuit(p):
    return _dressed_block(
        ((PI / 2, -PI / 2, PI / 2), (PI / 2, -PI / 2, -PI)),
        TwoQubitBlockParams((3 * PI - p) / 2, 3 * PI / 4, 3 * PI / 4),
        ((PI / 2, (PI - p) / 2, 0.0), (PI / 2, p / 2, -PI / 2)),
    )


def u_cal_matrix(p):
    s = np.sqrt(0.5)
    return np.array([
        [np.exp(0.5j * p), 0, 0, 0],
        [0, s * np.exp(-0.5j * p), 0, -s * np.exp(1j * p)],
        [0, s * np.exp(-1.5j * p), 0, s],
        [0, 0, 1, 0],
    ], dtype=np.complex128)


def v_cal_matrix(p):
    s = np.sqrt(0.5)
    return np.array([
        [0, 1, 0, 0],
        [s * np.exp(1j * p), 0, 0, -s * np.exp(1j * p)],
        [s, 0, 0, s],
        [0, 0, 1, 0],
    ], dtype=np.complex128)


def one_magnon_circuit_n4(p):
    """
    Schmidt-form preparation: H_2, C_20, C_31, then U on qubits (3, 2) and V on (1, 0)

    Returns:
    Circuit: N4_GATE_COUNT gates on four qubits
    """
    prep = Circuit(4, (Gate.hadamard(2), Gate.cnot(2, 0), Gate.cnot(3, 1)))
    upper = u_cal_circuit(p).remap({0: 2, 1: 3}, num_qubits=4)
    lower = v_cal_circuit(p).remap({0: 0, 1: 1}, num_qubits=4)
    return prep.compose(upper).compose(lower)


def one_magnon_circuit(num_sites, p):
    if num_sites == 2:
        return one_magnon_circuit_n2(p)
    if num_sites == 4:
        return one_magnon_circuit_n4(p)
    raise ValueError(
        f"no closed-form ansatz circuit for N={num_sites}; supported chain lengths are {SUPPORTED_SITES}"
    )


def trial_state_reference(num_sites, p):
    """
    Direct amplitude construction of the one-magnon trial state

    N=2: (0, e^{ip}, 1, 0)/sqrt(2)
    N=4: e^{i3p/2}, e^{ip/2}, e^{-ip/2}, e^{-i3p/2} at indices 1, 2, 4, 8, over 2
    """
    if num_sites == 2:
        amps = np.array([0, np.exp(1j * p), 1, 0]) / np.sqrt(2)
    elif num_sites == 4:
        amps = np.zeros(16, dtype=np.complex128)
        for index, k in ((1, 1.5), (2, 0.5), (4, -0.5), (8, -1.5)):
            amps[index] = np.exp(1j * k * p) / 2
    else:
        raise ValueError(f"trial states are defined for N in {SUPPORTED_SITES}, got {num_sites}")
    return Statevector(num_sites, amps)


def closed_form_energy(num_sites, eta, p):
    """<Psi(p)|H|Psi(p)>: cosh(eta) - cos(p) for N=2, cosh(eta) - cos(p)**3 for N=4"""
    p = np.asarray(p, dtype=float)
    if num_sites == 2:
        return np.cosh(eta) - np.cos(p)
    if num_sites == 4:
        return np.cosh(eta) - np.cos(p) ** 3
    raise ValueError(f"closed-form landscape known for N in {SUPPORTED_SITES}, got {num_sites}")


# Circuit text: one gate per line, e.g. "u3(theta,phi,lambda) q[1]" or "cx q[1],q[0]"

_FLOAT = r'[-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?'
_GATE_LINE = re.compile(
    r'^(?P<kind>[a-z0-9]+)'
    r'(?:\((?P<params>[^)]*)\))?'
    r'\s+(?P<args>q\[\d+\](?:\s*,\s*q\[\d+\])*)\s*;?$'
)
_QUBIT = re.compile(r'q\[(\d+)\]')
_QREG = re.compile(r'^qreg\s+q\[(\d+)\]\s*;?$')
_NUMBER = re.compile(rf'^\s*{_FLOAT}\s*$')


def _literal(x):
    return format(float(x), f'.{config.CIRCUIT_DIGITS}g')


def emit_circuit_text(circuit):
    lines = []
    for gate in circuit:
        args = ','.join(f'q[{q}]' for q in gate.qubits)
        if gate.params:
            lines.append(f"{gate.kind}({','.join(_literal(x) for x in gate.params)}) {args}")
        else:
            lines.append(f"{gate.kind} {args}")
    return '\n'.join(lines) + '\n'


def _err_with_lineno(lineno, msg):
    raise ValueError(f"Line {lineno}: {msg}")


def parse_circuit_text(text, num_qubits=None):
    """
    Parse the line-based gate text

    Blank lines and lines starting with '#' or '//' are skipped; an optional
    "qreg q[n]" line fixes the width.

    Parameters:
    text (str): circuit text
    num_qubits (int): width; inferred from the largest qubit index when omitted

    Returns:
    Circuit: parsed circuit
    """
    gates = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#') or line.startswith('//'):
            continue
        reg = _QREG.match(line)
        if reg:
            declared = int(reg.group(1))
            continue
        match = _GATE_LINE.match(line)
        if not match:
            _err_with_lineno(lineno, f"cannot parse '{line}'")
        kind = match.group('kind')
        if kind not in GATE_KINDS:
            _err_with_lineno(lineno, f"unknown gate '{kind}'")
        params = []
        if match.group('params') is not None:
            for token in match.group('params').split(','):
                if not _NUMBER.match(token):
                    _err_with_lineno(lineno, f"bad numeric literal '{token.strip()}'")
                params.append(float(token))
        qubits = tuple(int(q) for q in _QUBIT.findall(match.group('args')))
        try:
            gates.append(Gate(kind, qubits, tuple(params)))
        except ValueError as exc:
            _err_with_lineno(lineno, str(exc))

    width = num_qubits or declared
    if width is None:
        if not gates:
            raise ValueError("empty circuit text needs an explicit width")
        width = max(max(g.qubits) for g in gates) + 1
    logger.debug("parsed %d gate(s) on %d qubit(s)", len(gates), width)
    return Circuit(width, tuple(gates))
