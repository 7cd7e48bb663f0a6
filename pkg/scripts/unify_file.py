"""
Run the unifier on a problem file.
Same flags as the ratunif command: --mode, --trace, --check-depth, --json, --max-steps.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from services.cli_service import main

if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
