import logging
import os
from logging.handlers import RotatingFileHandler

from flask import Flask

# Library modules log through this logger (logging.getLogger(__name__)).
PACKAGE_LOGGER = "cremona_clt"


def _configure_logging(app):
    os.makedirs(app.config["LOG_DIR"], exist_ok=True)
    log_file = os.path.join(app.config["LOG_DIR"], "cremona_clt.log")
    level = logging.DEBUG if app.debug else logging.INFO

    package_logger = logging.getLogger(PACKAGE_LOGGER)
    package_logger.setLevel(level)

    if not app.debug:  # More restrictive logging in production
        # create_app may run several times in one process; attach handlers once.
        if not package_logger.handlers:
            file_handler = RotatingFileHandler(log_file, maxBytes=1048576, backupCount=10)
            log_format = (
                "%(asctime)s %(levelname)s: %(message)s " "[in %(pathname)s:%(lineno)d]"
            )
            file_handler.setFormatter(logging.Formatter(log_format))
            file_handler.setLevel(logging.INFO)
            package_logger.addHandler(file_handler)

            # StreamHandler writes to stderr; command results own stdout.
            stream_handler = logging.StreamHandler()
            stream_handler.setLevel(logging.WARNING)
            package_logger.addHandler(stream_handler)

    else:  # Debug mode logging (basicConfig is a no-op once root has handlers)
        logging.basicConfig(
            level=logging.DEBUG,
            format="%(asctime)s - %(levelname)s - %(message)s",
            handlers=[
                logging.FileHandler(log_file),
                logging.StreamHandler(),
            ],
        )

    app.logger.setLevel(level)


def create_app(config_object=None):
    app = Flask(__name__, instance_relative_config=True)

    # Load configuration from config.py; CREMONA_ENV picks Dev, Prod or Testing.
    from .config import get_config

    app.config.from_object(config_object or get_config())

    _configure_logging(app)
    app.logger.debug("cremona_clt starting up...")
    app.logger.debug(f"Environment: {os.environ.get('CREMONA_ENV', 'development')}")
    app.logger.debug(f"Degree cap: {app.config['DEGREE_CAP']}")
    app.logger.debug(f"Workers: {app.config['WORKERS']}")

    # Import and register blueprints (each contributes top-level CLI commands)
    from .blueprints.maps import bp as maps_bp

    app.register_blueprint(maps_bp)

    from .blueprints.walks import bp as walks_bp

    app.register_blueprint(walks_bp)

    from .blueprints.verify import bp as verify_bp

    app.register_blueprint(verify_bp)

    app.logger.debug("Blueprints registered.")

    return app
