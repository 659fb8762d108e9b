"""Regenerate the pinned golden outputs for the scripted query workflows.

Run from the repository root:  python3 scripts/make_goldens.py
"""

import io
import sys
from contextlib import redirect_stdout
from pathlib import Path

from relquery.cli import run_script
from relquery.session import Session

ROOT = Path(__file__).resolve().parent.parent
GOLDENS = ROOT / "tests" / "goldens"


def regenerate(name: str, seed: int = 7):
    script = GOLDENS / f"{name}.bql"
    out = io.StringIO()
    session = Session(seed=seed)
    with redirect_stdout(out):
        status = run_script(session, script, output="table", stdout=out)
    if status != 0:
        raise SystemExit(f"{name}: script failed with status {status}")
    golden = GOLDENS / f"{name}.golden"
    golden.write_text(out.getvalue(), encoding="utf-8")
    print(f"wrote {golden} ({len(out.getvalue())} bytes)")


if __name__ == "__main__":
    names = sys.argv[1:] or ["college_search"]
    for name in names:
        regenerate(name)
