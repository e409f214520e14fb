import sys

from flask.cli import FlaskGroup

from cremona_clt import create_app

# `python run.py clt --config experiments/henon_symmetric.json` etc.
cli = FlaskGroup(create_app=create_app)

if __name__ == "__main__":
    try:
        cli.main(prog_name="cremona")
    except KeyboardInterrupt:
        print("Interrupted, no output files were renamed into place.", file=sys.stderr)
        sys.exit(130)
