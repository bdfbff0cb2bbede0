import sys
from pathlib import Path

# allow tests to import shared helpers/oracles as plain modules
sys.path.insert(0, str(Path(__file__).parent))
