"""
Configuration parameters for the Bethe ansatz / VQE laboratory
"""

import os

from dotenv import load_dotenv

load_dotenv()

VERSION = '1.0.0'

# Model parameters
DEFAULT_ETA = 1.0        # Anisotropy used throughout the reproduction runs
DEFAULT_SITES = 2        # Chain length for vqe/sweep when not given

# Sampling parameters
DEFAULT_SHOTS = {2: 1024, 4: 8192}  # Shots per energy evaluation, by chain length
DEFAULT_SEED = 7
MEASUREMENT_SETTINGS = ('X', 'Y', 'Z')  # Uniform product bases, in sampling order

# Optimizer parameters
DEFAULT_BUDGET = 60           # Objective evaluations per VQE run
DEFAULT_INITIAL_P = 1.0
DEFAULT_INITIAL_STEP = 0.5    # Width of the starting simplex
DEFAULT_TOLERANCE = 1e-8      # Target spread on p
SIMPLEX_SHARE = 0.5           # Fraction of the budget given to the simplex phase
SIMPLEX_XATOL = 1e-3          # Simplex stops once it brackets the minimum this tightly
OPTIMIZERS = ('hybrid', 'cobyla')  # Simplex-then-Brent, or a single COBYLA run
DEFAULT_OPTIMIZER = 'hybrid'

# Dense caps
MAX_QUBITS = 20               # Statevector simulation
MAX_ED_SITES = 12             # Exact diagonalization
MAX_MONODROMY_SITES = 12      # Dense monodromy blocks / transfer matrices

# Numerical tolerances
NORM_TOLERANCE = 1e-8         # Allowed norm deviation for expectation values
NORMALIZED_TOLERANCE = 1e-12  # Deviation allowed for a state flagged normalized
IMAG_TOLERANCE = 1e-12        # Imaginary residue of a Hermitian expectation
SECTOR_TOLERANCE = 1e-12      # Amplitude allowed to leak out of a sector block
ROOT_SEPARATION = 1e-8        # Minimum distance between Bethe roots
SINGULAR_TOLERANCE = 1e-12

# Bethe solver parameters
NEWTON_DAMPING = 0.5          # Step shrink factor on a failed Newton step
NEWTON_MAX_HALVINGS = 30
SOLVER_MAX_ITER = 500
SOLVER_TOLERANCE = 1e-11      # Max |residual| of the logarithmic Bethe equations

# Generating-function finite difference
DV_MIN = 1e-6
DV_MAX = 1e-3
DEFAULT_DV = 1e-5

# Output settings
CIRCUIT_DIGITS = 17           # Significant digits for circuit text literals
OUTPUT_DIR = os.environ.get('BETHE_VQE_OUTPUT_DIR')  # Base for relative output paths

# Logging
LOG_LEVEL = os.environ.get('BETHE_VQE_LOG_LEVEL', 'WARNING')
LOG_FILE = os.environ.get('BETHE_VQE_LOG_FILE')
LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'
