import os

# Application root: the directory containing the 'cremona_clt' package.
APP_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
APP_EXPERIMENTS_DIR = os.path.join(APP_ROOT, "experiments")
APP_OUTPUT_DIR = os.path.join(APP_ROOT, "output")

# Symbolic composition grows exponentially; results above this degree are refused.
DEFAULT_DEGREE_CAP = 1024

# Experiment config files carry this version in `schema_version`.
CONFIG_SCHEMA_VERSION = 1

BACKENDS = ("symbolic", "fast", "auto")

# Generator family tags (mirror the four classification cases plus the
# constructed arithmetic-spectrum pair).
FAMILY_TAGS = ("elliptic", "parabolic", "lineal", "nonelementary_free", "arithmetic")

# Family constructors reachable from experiment configs.
FAMILY_CONSTRUCTORS = (
    "henon",
    "henon_system",
    "jonquiere",
    "monomial",
    "linear",
    "arithmetic_pair",
    "affine",
)

VERIFY_SUITES = (
    "submult",
    "sqrt_subadd",
    "functorial",
    "fast_oracle",
    "arithmetic",
    "table",
)

# Statistical pass levels (descriptive, not a hypothesis test).
KS_THRESHOLD = 0.03
KS_THRESHOLD_FITTED = 0.05
DIRAC_TOLERANCE = 1e-9
HISTOGRAM_BINS = 50

# Seed used by `verify` suites unless overridden on the command line.
VERIFY_SEED = 20240611

# Trials per vectorized block of the fast backend.
TRIAL_CHUNK = 512

# Suffix naming the inverse of a generator in configs and reports.
INVERSE_SUFFIX = "^-1"

# CLI exit statuses.
EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_IO_ERROR = 3

# Default output file names inside an experiment's output directory.
DEFAULT_OUTPUTS = {
    "csv": "trajectories.csv",
    "summary": "summary.json",
    "histogram": "histogram.csv",
}
