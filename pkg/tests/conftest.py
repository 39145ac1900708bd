from __future__ import annotations

from pathlib import Path

import pytest


def write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def build_resolution_tree(root: Path, wd: Path) -> None:
    """Small two-solver hierarchy for exercising command resolution.

    The expected lists in RESOLUTION_CASES are worked out by hand with
    plain set algebra over these files.
    """
    write(root / "collections/painting/all.lst", "p1 p2 p3 p4 p5 p6\n")
    write(root / "collections/painting/default.lst", "p1 p2 p3\n")
    write(root / "collections/painting/small.lst", "p2 p4\n")
    write(root / "collections/painting/wdtest.lst", "p1 p2 p3 p4\n")
    write(root / "solvers/s1/painting/all.lst", "p1 p2 p3 p4 p5\n")
    write(root / "solvers/s1/painting/default.lst", "p2 p5\n")
    write(root / "solvers/s1/painting/mine.lst", "p5 p1\n")
    write(root / "solvers/s2/painting/all.lst", "p2 p6\n")
    write(wd / "painting.wdtest.lst", "p4\n")
    write(wd / "painting.local.lst", "p3 p1\n")
    # s3 is inconsistent on purpose: a default list but no all.lst
    write(root / "solvers/s3/painting/default.lst", "p1\n")


# (command, expected final list; None = command ignored)
RESOLUTION_CASES = [
    ("s1 painting", ["p2", "p5"]),  # no subc, no probs: default, solver side wins
    ("s1 painting p1 p6", ["p1"]),  # no subc with probs: all; p6 not soluble by s1
    ("s2 painting", ["p2"]),  # default falls back to the collection side
    ("s2 painting p6", ["p6"]),  # s2's own all.lst allows p6
    ("s1 painting.small", ["p2", "p4"]),  # named subc from the collection side
    ("s1 painting.wdtest", ["p4"]),  # working-directory list shadows
    ("s1 painting.local", ["p3", "p1"]),  # located order is preserved
    ("s1 painting.mine", ["p5", "p1"]),  # solver-side named subc
    ("s1 painting.nosuch", None),  # no list anywhere: command ignored
    ("s2 painting.small p4", []),  # p4 not soluble by s2, p2 not requested
    ("s1 painting p9", []),  # explicit problem unknown everywhere
    ("s2 painting.wdtest", []),  # shadowed list has nothing s2 can solve
    ("s1 painting p2 p1", ["p1", "p2"]),  # explicit list does not reorder
    ("s1 painting.small p4 p2", ["p2", "p4"]),  # subc with explicit intersection
]


@pytest.fixture
def resolution_tree(tmp_path):
    root = tmp_path / "root"
    wd = tmp_path / "wd"
    wd.mkdir()
    build_resolution_tree(root, wd)
    return root, wd
