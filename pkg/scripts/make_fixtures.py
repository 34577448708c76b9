"""Regenerate the frozen scan fixtures under tests/fixtures.

    python3 scripts/make_fixtures.py [OUT_DIR]
"""
from pathlib import Path
import sys

from motprobe.config import paper_default
from motprobe.experiments import scan_fixtures

DEFAULT_OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main(out=DEFAULT_OUT):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for name, series in scan_fixtures(paper_default()).items():
        series.write_csv(out / f"{name}.csv")
        print(out / f"{name}.csv")


if __name__ == "__main__":
    main(*sys.argv[1:])
