"""
Command-line entry point for the Bethe ansatz / VQE laboratory

    python main.py spectrum --sites 4 --eta 1.0
    python main.py vqe --sites 2 --target second --backend exact
    python main.py vqe --sites 4 --backend shots --shots 8192 --seed 7 --json n4.json
    python main.py bethe solve --sites 256 --magnons 128
    python main.py bethe verify --sites 4 --p 1.5707963267948966
    python main.py sweep --sites 4 --points 181 --csv landscape.csv
    python main.py circuit emit --sites 4 --p 0.3 --out n4.txt
    python main.py circuit simulate --in n4.txt

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

import argparse
import datetime
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from logging.handlers import RotatingFileHandler

import numpy as np

import analysis
import ansatz_circuits
import bethe_engine
import config
import data_loader
import vqe
import xxz_model
from quantum_core import Statevector, run_circuit

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

_installed_handlers = []


def setup_logging(level=None, log_file=None):
    """
    Configure the root logger: stderr stream plus an optional rotating file

    Parameters:
    level (str): level name, defaults to BETHE_VQE_LOG_LEVEL
    log_file (str): log file path, defaults to BETHE_VQE_LOG_FILE
    """
    root = logging.getLogger()
    for handler in _installed_handlers:
        root.removeHandler(handler)
        handler.close()
    _installed_handlers.clear()

    level = getattr(logging, (level or config.LOG_LEVEL).upper(), logging.WARNING)
    formatter = logging.Formatter(config.LOG_FORMAT)
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    _installed_handlers.append(stream_handler)

    log_file = log_file or config.LOG_FILE
    if log_file:
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10240000,  # 10MB
            backupCount=10
        )
        file_handler.setFormatter(formatter)
        _installed_handlers.append(file_handler)

    for handler in _installed_handlers:
        handler.setLevel(level)
        root.addHandler(handler)
    root.setLevel(level)


@dataclass(frozen=True)
class RunManifest:
    """Provenance block embedded in every JSON output"""

    subcommand: str
    flags: dict
    version: str
    timestamp: str
    seed: int = None

    @classmethod
    def from_args(cls, args):
        flags = {key: value for key, value in vars(args).items() if key != 'handler'}
        subcommand = ' '.join(filter(None, (args.command, getattr(args, 'action', None))))
        return cls(
            subcommand=subcommand,
            flags=flags,
            version=config.VERSION,
            timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
            seed=getattr(args, 'seed', None),
        )

    def to_dict(self):
        return asdict(self)


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got '{text}'")


def build_parser():
    parser = _ArgumentParser(prog='main.py', description=__doc__.strip().splitlines()[0])
    parser.add_argument('--log-level', default=None, help='Override BETHE_VQE_LOG_LEVEL.')
    commands = parser.add_subparsers(dest='command', required=True)

    spectrum = commands.add_parser('spectrum', help='Exact spectrum with S^z labels.')
    spectrum.add_argument('--sites', type=int, required=True)
    spectrum.add_argument('--eta', type=float, default=config.DEFAULT_ETA)
    spectrum.add_argument('--json', dest='json_path', default=None)
    spectrum.set_defaults(handler=cmd_spectrum)

    run = commands.add_parser('vqe', help='Variational run over the one-magnon ansatz.')
    run.add_argument('--sites', type=int, choices=ansatz_circuits.SUPPORTED_SITES, default=config.DEFAULT_SITES)
    run.add_argument('--eta', type=float, default=config.DEFAULT_ETA)
    run.add_argument('--target', choices=ansatz_circuits.TARGETS, default='first')
    run.add_argument('--backend', choices=('exact', 'shots'), default='exact')
    run.add_argument('--shots', type=int, default=None, help='Defaults to 1024 (N=2) or 8192 (N=4).')
    run.add_argument('--seed', type=int, default=config.DEFAULT_SEED)
    run.add_argument('--budget', type=int, default=config.DEFAULT_BUDGET, help='Objective evaluations.')
    run.add_argument('--optimizer', choices=config.OPTIMIZERS, default=config.DEFAULT_OPTIMIZER,
                     help='hybrid: Nelder-Mead then Brent; cobyla: COBYLA with --budget as maxiter.')
    run.add_argument('--initial-p', type=float, default=config.DEFAULT_INITIAL_P)
    run.add_argument('--repeats', type=int, default=1, help='Sampled runs over seeds seed..seed+repeats-1.')
    run.add_argument('--json', dest='json_path', default=None)
    run.set_defaults(handler=cmd_vqe)

    bethe = commands.add_parser('bethe', help='Bethe equations: solve or verify.')
    actions = bethe.add_subparsers(dest='action', required=True)
    solve = actions.add_parser('solve')
    solve.add_argument('--sites', type=int, required=True)
    solve.add_argument('--magnons', type=int, required=True)
    solve.add_argument('--eta', type=float, default=config.DEFAULT_ETA)
    solve.add_argument('--quantum-numbers', type=_float_list, default=None,
                       help='Comma-separated J values; defaults to the symmetric set.')
    solve.add_argument('--json', dest='json_path', default=None)
    solve.set_defaults(handler=cmd_bethe)
    verify = actions.add_parser('verify')
    verify.add_argument('--sites', type=int, required=True)
    verify.add_argument('--magnons', type=int, default=None)
    verify.add_argument('--p', type=_float_list, required=True, help='Comma-separated momenta.')
    verify.add_argument('--eta', type=float, default=config.DEFAULT_ETA)
    verify.add_argument('--json', dest='json_path', default=None)
    verify.set_defaults(handler=cmd_bethe)

    sweep = commands.add_parser('sweep', help='Energy landscape against the closed form.')
    sweep.add_argument('--sites', type=int, choices=ansatz_circuits.SUPPORTED_SITES, default=config.DEFAULT_SITES)
    sweep.add_argument('--eta', type=float, default=config.DEFAULT_ETA)
    sweep.add_argument('--points', type=int, default=181)
    sweep.add_argument('--csv', dest='csv_path', required=True)
    sweep.set_defaults(handler=cmd_sweep)

    circuit = commands.add_parser('circuit', help='Emit or re-simulate ansatz circuit text.')
    circuit_actions = circuit.add_subparsers(dest='action', required=True)
    emit = circuit_actions.add_parser('emit')
    emit.add_argument('--sites', type=int, choices=ansatz_circuits.SUPPORTED_SITES, required=True)
    emit.add_argument('--p', type=float, required=True)
    emit.add_argument('--out', dest='out_path', default=None)
    emit.set_defaults(handler=cmd_circuit)
    simulate = circuit_actions.add_parser('simulate')
    simulate.add_argument('--in', dest='in_path', required=True)
    simulate.add_argument('--json', dest='json_path', default=None)
    simulate.set_defaults(handler=cmd_circuit)
    return parser


def validate_eta(args):
    if not np.isfinite(args.eta) or args.eta <= 0:
        return f"--eta must be > 0, got {args.eta}"
    return None


def validate_spectrum_args(args):
    if args.sites < 2:
        return f"--sites must be >= 2, got {args.sites}"
    return validate_eta(args)


def validate_vqe_args(args):
    if args.target == 'second' and args.sites != 2:
        return "--target second is only available with --sites 2"
    if args.shots is not None and args.shots < 1:
        return f"--shots must be >= 1, got {args.shots}"
    if args.budget < 1:
        return f"--budget must be >= 1, got {args.budget}"
    if args.repeats < 1:
        return f"--repeats must be >= 1, got {args.repeats}"
    if args.repeats > 1 and args.backend != 'shots':
        return "--repeats needs --backend shots"
    return validate_eta(args)


def validate_bethe_args(args):
    if args.sites < 2:
        return f"--sites must be >= 2, got {args.sites}"
    if args.action == 'verify':
        if not args.p:
            return "--p needs at least one momentum"
        if args.magnons is not None and args.magnons != len(args.p):
            return f"--magnons {args.magnons} does not match {len(args.p)} momenta"
        magnons = len(args.p)
    else:
        magnons = args.magnons
    if not 0 <= magnons <= args.sites // 2:
        return f"--magnons must lie in 0..{args.sites // 2} for {args.sites} sites, got {magnons}"
    if args.action == 'solve' and args.quantum_numbers is not None:
        error = bethe_engine.validate_quantum_numbers(args.sites, magnons, args.quantum_numbers)
        if error:
            return error
    return validate_eta(args)


def validate_sweep_args(args):
    if args.points < 2:
        return f"--points must be >= 2, got {args.points}"
    return validate_eta(args)


VALIDATORS = {
    'spectrum': validate_spectrum_args,
    'vqe': validate_vqe_args,
    'bethe': validate_bethe_args,
    'sweep': validate_sweep_args,
}


def resolve_defaults(args):
    if args.command == 'vqe' and args.shots is None:
        args.shots = config.DEFAULT_SHOTS[args.sites]
    return args


def _with_manifest(payload, args):
    payload = dict(payload)
    payload['manifest'] = RunManifest.from_args(args).to_dict()
    return payload


def cmd_spectrum(args):
    params = xxz_model.XxzParams(args.sites, args.eta)
    spectrum = xxz_model.exact_spectrum(params, compute_vectors=False)
    print(f"Exact spectrum, N={params.num_sites}, eta={params.eta}")
    print(spectrum.to_frame().to_string(index=False, float_format=lambda x: f"{x:.8f}"))
    if args.json_path:
        path = data_loader.save_json(_with_manifest(spectrum.to_dict(), args), args.json_path)
        print(f"Spectrum saved to '{path}'")
    return EXIT_OK


def cmd_vqe(args):
    params = xxz_model.XxzParams(args.sites, args.eta)
    hamiltonian = xxz_model.build_hamiltonian(params)
    ansatz = ansatz_circuits.AnsatzSpec(args.sites, args.target)
    settings = vqe.OptimizerConfig(initial_p=args.initial_p, max_evaluations=args.budget,
                                   seed=args.seed, method=args.optimizer)
    exact = float(ansatz_circuits.closed_form_energy(
        args.sites, args.eta, 0.0 if args.target == 'first' else np.pi))

    if args.repeats > 1:
        seeds = range(args.seed, args.seed + args.repeats)
        results, summary = vqe.repeat_sampled_vqe(ansatz, hamiltonian, args.shots, seeds, settings, exact=exact)
        print(f"Sampled VQE, N={args.sites}, eta={args.eta}, {args.shots} shots, {args.repeats} seeds")
        print(f"Mean energy: {summary['mean']:.8f} +/- {summary['sem']:.8f} "
              f"(exact {exact:.8f}, bias {summary['bias']:+.8f})")
        payload = {'runs': [r.to_dict(args.eta) for r in results], 'summary': summary}
    else:
        if args.backend == 'exact':
            backend = vqe.ExactBackend()
        else:
            backend = vqe.SampledBackend(args.shots, args.seed)
        result = vqe.vqe_run(ansatz, hamiltonian, backend, settings)
        print(f"VQE N={args.sites} eta={args.eta} target={args.target} backend={backend.describe()}: "
              f"E = {result.energy:.8f} at p = {result.p:.8f} ({result.evaluations} evaluations)")
        table = analysis.create_results_table([(backend.describe(), result)], exact=exact)
        print(table.to_string(index=False))
        payload = result.to_dict(args.eta)

    if args.json_path:
        path = data_loader.save_json(_with_manifest(payload, args), args.json_path)
        print(f"Results saved to '{path}'")
    return EXIT_OK


def cmd_bethe(args):
    if args.action == 'solve':
        roots = bethe_engine.solve_bethe_real(args.sites, args.magnons, args.eta, args.quantum_numbers)
        payload = bethe_engine.roots_to_dict(roots)
        payload['quantum_numbers'] = list(roots.quantum_numbers or ())
    else:
        roots = bethe_engine.BetheRoots.from_momenta(args.sites, args.eta, args.p)
        payload = bethe_engine.roots_to_dict(roots)
        if args.sites <= config.MAX_ED_SITES:
            state = bethe_engine.bethe_state(roots)
            hamiltonian = xxz_model.build_hamiltonian(xxz_model.XxzParams(args.sites, args.eta))
            applied = hamiltonian.apply(state.amplitudes)
            payload['eigenstate_residual'] = float(
                np.linalg.norm(applied - payload['energy'] * state.amplitudes))
    payload = _with_manifest(payload, args)
    print(json.dumps(payload, indent=2))
    if args.json_path:
        data_loader.save_json(payload, args.json_path)
    return EXIT_OK


def cmd_sweep(args):
    params = xxz_model.XxzParams(args.sites, args.eta)
    hamiltonian = xxz_model.build_hamiltonian(params)
    grid = np.linspace(-np.pi, np.pi, args.points)
    landscape = vqe.energy_landscape(ansatz_circuits.AnsatzSpec(args.sites), hamiltonian, grid)
    table = analysis.landscape_comparison(
        landscape, ansatz_circuits.closed_form_energy(args.sites, args.eta, grid))
    path = data_loader.save_csv(table, args.csv_path)
    print(f"Landscape with {args.points} points saved to '{path}'")
    print(f"Max abs_diff: {table['abs_diff'].max():.3e}")
    return EXIT_OK


def cmd_circuit(args):
    if args.action == 'emit':
        circuit = ansatz_circuits.one_magnon_circuit(args.sites, args.p)
        text = ansatz_circuits.emit_circuit_text(circuit)
        if args.out_path:
            path = data_loader.save_text(text, args.out_path)
            print(f"{len(circuit)} gates saved to '{path}'")
        else:
            sys.stdout.write(text)
        return EXIT_OK

    circuit = ansatz_circuits.parse_circuit_text(data_loader.load_text(args.in_path))
    state = run_circuit(circuit, Statevector.basis(circuit.num_qubits, 0))
    payload = _with_manifest({'num_qubits': state.num_qubits, 'amplitudes': state.to_json()}, args)
    if args.json_path:
        path = data_loader.save_json(payload, args.json_path)
        print(f"Statevector saved to '{path}'")
    else:
        print(json.dumps(payload, indent=2))
    return EXIT_OK


def main(argv=None):
    """
    Parse arguments, run one subcommand and return its exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_USAGE

    setup_logging(args.log_level)
    validator = VALIDATORS.get(args.command)
    error = validator(args) if validator else None
    if error:
        print(f"usage error: {error}", file=sys.stderr)
        return EXIT_USAGE
    resolve_defaults(args)

    start_time = time.time()
    try:
        code = args.handler(args)
    except bethe_engine.BetheConvergenceError as exc:
        print(f"error: {exc}; final residuals {np.array2string(exc.residuals, precision=3)}",
              file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    logger.info("%s finished in %.2f seconds", args.command, time.time() - start_time)
    return code


if __name__ == "__main__":
    sys.exit(main())
