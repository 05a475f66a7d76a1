"""Rewrite tests/golden from the current CLI output.  Review the diff before committing."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from golden_cases import CASES, GOLDEN, golden_paths, render  # noqa: E402


def main():
    GOLDEN.mkdir(exist_ok=True)
    for name, (_, want) in CASES.items():
        code, text, js = render(name)
        if code != want:
            print(f"warning: {name} exited {code}, expected {want}")
        txt, jsn = golden_paths(name)
        txt.write_text(text)
        if js is not None:
            jsn.write_text(js)
        elif jsn.exists():
            jsn.unlink()
        print(f"{name}: exit {code}")


if __name__ == "__main__":
    main()
