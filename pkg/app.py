import os
import sys

sys.path.insert(0, os.path.dirname(__file__))
from src.cli import run_cli


if __name__ == "__main__":
    sys.exit(run_cli(sys.argv[1:]))
