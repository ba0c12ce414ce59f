"""Spec files and the command line.

Every fixture exports to a JSON spec file with a bit-exact parse/serialize
round trip; the same files drive the CLI verdict suites.  This script
writes a spec file, reloads it and runs a couple of CLI commands in
process.
"""

import tempfile
from pathlib import Path

from pnalgebroid import (
    build_toda, SpecDocument, parse_document, serialize_document,
)
from pnalgebroid.cli import main

t = build_toda(2)
doc = SpecDocument(
    t.atiyah,
    bivectors={"pi0": t.pi0, "pi1": t.pi1},
    endomorphisms={"N": t.recursion_atiyah().exact()},
)
text = serialize_document(doc)
print("round trip is bit-exact:", serialize_document(parse_document(text)) == text)

with tempfile.TemporaryDirectory() as tmp:
    spec = Path(tmp) / "toda2_invariant.json"
    spec.write_text(text)

    print()
    print("$ pnalgebroid check-sn", spec.name)
    code = main(["check-sn", str(spec)])
    print("exit code:", code)

    print()
    print("$ pnalgebroid riesz aff1 --points 100 --seed 7")
    code = main(["riesz", "aff1", "--points", "100", "--seed", "7"])
    print("exit code:", code)
