"""
borninfeld-lab Main Entry Point

Runs the Born-Infeld laboratory command group: single-charge potentials,
path audits, variational solves, hydrogen spectra and the invariant suite.
"""

import sys

from borninfeld.cli import main

if __name__ == "__main__":
    sys.exit(main())
