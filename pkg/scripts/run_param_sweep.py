"""Run the param_sweep experiment from configs/param_sweep.ini.

Extra arguments are passed to the CLI and override the config, e.g.
``python scripts/run_param_sweep.py --trials 5 --csv out.csv``.
"""
import sys
from pathlib import Path

from wl1approx.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "param_sweep.ini"

if __name__ == "__main__":
    sys.exit(main(["sweep-param", "--config", str(CONFIG), *sys.argv[1:]]))
