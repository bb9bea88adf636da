"""Regenerate the committed fixtures/ tree from engrasp.fixtures."""

import sys
from pathlib import Path

from engrasp.fixtures import write_fixtures

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent.parent / "fixtures"
paths = write_fixtures(root)
for key, path in paths.items():
    print(f"{key}: {path}")
