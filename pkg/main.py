"""
Convertible Codes
=================
Entry point that delegates to the package CLI.

Usage:
    python main.py encode FILE DIR --n 6 --k 5 [--nf 13 --kf 12]
    python main.py convert DIR OUT --nf 13 --kf 12
    python main.py verify DIR
    python main.py decode DIR FILE
    python main.py sweep
    python main.py figures
"""

import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent

# Ensure project root is importable
sys.path.insert(0, str(PROJECT_ROOT))

from convertible.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
