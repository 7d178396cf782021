#!/usr/bin/env python3
"""Run the acceptance suite and print only the per-criterion summary lines."""
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main():
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", str(ROOT / "tests" / "test_acceptance.py")],
        cwd=ROOT, capture_output=True, text=True,
    )
    lines = [ln for ln in proc.stdout.splitlines() if ln.startswith(("[PASS]", "[FAIL]"))]
    print("\n".join(lines) or proc.stdout)
    return proc.returncode


if __name__ == "__main__":
    sys.exit(main())
