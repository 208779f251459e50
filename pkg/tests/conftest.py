import sys
from pathlib import Path

# make sibling test helpers (gradcheck.py) importable regardless of cwd
sys.path.insert(0, str(Path(__file__).parent))
