import os
import tempfile

# Import static configurations from cremona_clt.app_config
from .app_config import (
    APP_ROOT as PROJECT_APP_ROOT,  # Renaming to avoid clash if Config defines its own APP_ROOT
    APP_EXPERIMENTS_DIR as PROJECT_EXPERIMENTS_DIR,
    APP_OUTPUT_DIR as PROJECT_OUTPUT_DIR,
    DEFAULT_DEGREE_CAP,
    DIRAC_TOLERANCE,
    HISTOGRAM_BINS,
    KS_THRESHOLD,
    KS_THRESHOLD_FITTED,
    TRIAL_CHUNK,
    VERIFY_SEED,
)


def _env_int(name, default):
    value = os.environ.get(name)
    if value is None or value == "":
        return default
    return int(value)


class Config:
    """Base configuration."""

    PROJECT_ROOT = PROJECT_APP_ROOT

    # Symbolic compositions above this degree are refused (trial marked failed).
    DEGREE_CAP = _env_int("CREMONA_DEGREE_CAP", DEFAULT_DEGREE_CAP)

    # Process pool size for run_trials; 1 runs everything in-process.
    WORKERS = _env_int("CREMONA_WORKERS", 1)
    TRIAL_CHUNK = TRIAL_CHUNK

    LOG_DIR = os.environ.get("CREMONA_LOG_DIR") or os.path.join(PROJECT_ROOT, "logs")

    EXPERIMENTS_DIR = PROJECT_EXPERIMENTS_DIR
    OUTPUT_DIR = os.environ.get("CREMONA_OUTPUT_DIR") or PROJECT_OUTPUT_DIR

    KS_THRESHOLD = KS_THRESHOLD
    KS_THRESHOLD_FITTED = KS_THRESHOLD_FITTED
    DIRAC_TOLERANCE = DIRAC_TOLERANCE
    HISTOGRAM_BINS = HISTOGRAM_BINS

    VERIFY_SEED = VERIFY_SEED


class DevelopmentConfig(Config):
    DEBUG = True


class ProductionConfig(Config):
    DEBUG = False


class TestingConfig(Config):
    TESTING = True
    DEBUG = True
    WORKERS = 1
    # Keep test logs out of the project tree.
    LOG_DIR = os.path.join(tempfile.gettempdir(), "cremona_clt_test_logs")
    OUTPUT_DIR = os.path.join(tempfile.gettempdir(), "cremona_clt_test_output")


# Helper to get config class based on environment variable
def get_config():
    env = os.environ.get("CREMONA_ENV", "development")
    if env == "production":
        return ProductionConfig
    if env == "testing":
        return TestingConfig
    return DevelopmentConfig
