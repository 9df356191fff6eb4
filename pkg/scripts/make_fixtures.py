"""Regenerate the golden files under fixtures/."""

import pathlib
import sys

from dgkit.cli import dump
from dgkit.instances import fixture_matrix

root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
root.mkdir(exist_ok=True)
for name, x in fixture_matrix().items():
    dump(x, str(root / name))
    print(name)
