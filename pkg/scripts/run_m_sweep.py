"""Run the m_sweep experiment from configs/m_sweep.ini.

Extra arguments are passed to the CLI and override the config, e.g.
``python scripts/run_m_sweep.py --trials 5 --csv out.csv``.
"""
import sys
from pathlib import Path

from wl1approx.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "m_sweep.ini"

if __name__ == "__main__":
    sys.exit(main(["sweep-m", "--config", str(CONFIG), *sys.argv[1:]]))
