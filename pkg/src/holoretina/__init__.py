# holoretina namespace initialization
from pathlib import Path

__version__ = "0.1.0"

# Root for bundled data (catalog/)
dist_root = Path(__file__).parent
