"""Acceptance criteria 1-12, one test each.

Run under pytest for a PASS/FAIL summary section, or directly with
`python3 tests/test_acceptance.py` for the same lines on stdout.
"""

import sys
import tempfile
from functools import lru_cache
from pathlib import Path

from sandwichmat import checks
from sandwichmat.cli import main as cli_main
from sandwichmat.combinatorics import idempotent_counts, rank_formulas
from sandwichmat.field import make_field
from sandwichmat.generators import genset
from sandwichmat.sandwich import context_from_rank, idempotents


@lru_cache(maxsize=None)
def sweep():
    """Every check group over the default grid, single-threaded."""
    return tuple(checks.run_checks(threads=1))


def group_results(group):
    return [r for r in sweep() if r.group == group]


def summarize(results):
    failed = [r.instance for r in results if not r.ok]
    text = f"{len(results) - len(failed)}/{len(results)} instances"
    if failed:
        text += f"; failing: {', '.join(failed[:4])}"
    return not failed and bool(results), text


def grid_criterion(*groups):
    # a check that raised is logged under "error" without its group, so it fails every criterion
    results = [r for g in groups for r in group_results(g)] + group_results("error")
    return summarize(results)


def criterion_1():
    return grid_criterion("green")


def criterion_2():
    ok, text = grid_criterion("eggbox")
    fixed = [r for r in group_results("eggbox") if "mdclass" in r.instance]
    d = fixed[0].detail if fixed else {}
    return ok and bool(fixed), f"{text}; ordinary class {d.get('nR')}x{d.get('nL')}, H sizes {d.get('hSizes')}, total {d.get('size')}"


def criterion_3():
    return grid_criterion("counts")


def criterion_4():
    ok, text = grid_criterion("idempotents")
    spot = len(idempotents(context_from_rank(make_field(2), 2, 2, 1)))
    spot_ok = spot == 5 == idempotent_counts(2, 2, 2, 1)
    return ok and spot_ok, f"{text}; (2,2,2,1) has {spot} idempotents"


def criterion_5():
    return grid_criterion("closure")


SPOT_GENSETS = [
    ("full", (2, 2, 2, 1), 6),
    ("full", (2, 2, 3, 2), 7),
    ("reg", (2, 3, 2, 1), 5),
    ("idem", (2, 3, 2, 1), 5),
    ("ideal:1", (2, 2, 3, 2), 6),
]


def criterion_6():
    ok, text = grid_criterion("gensets")
    spots = []
    for target, (q, m, n, r), expected in SPOT_GENSETS:
        rep = genset(context_from_rank(make_field(q), m, n, r), target)
        spots.append(rep.claimed_size == expected == rank_formulas(q, m, n, r, target) and rep.certified)
    return ok and all(spots), f"{text}; spot sizes {sum(spots)}/{len(spots)}"


def criterion_7():
    return grid_criterion("inflation")


def criterion_8():
    return grid_criterion("pullback")


def criterion_9():
    return grid_criterion("classify")


def criterion_10():
    return grid_criterion("mididentity")


def criterion_11():
    return grid_criterion("imported")


def criterion_12():
    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        codes = []
        for threads in ("1", "4"):
            path = Path(tmp) / f"verify-{threads}.json"
            codes.append(cli_main(["verify", "--format", "json", "--threads", threads, "--out", str(path)]))
            outs.append(path.read_bytes())
    same = outs[0] == outs[1]
    return same and codes == [0, 0], f"exit codes {codes}, {len(outs[0])} bytes, identical={same}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


def _run(number, record_criterion):
    ok, text = CRITERIA[number - 1]()
    record_criterion(number, ok, text)
    assert ok, text


def test_criterion_01_green_relations(record_criterion):
    _run(1, record_criterion)


def test_criterion_02_eggbox(record_criterion):
    _run(2, record_criterion)


def test_criterion_03_regular_counts(record_criterion):
    _run(3, record_criterion)


def test_criterion_04_idempotent_counts(record_criterion):
    _run(4, record_criterion)


def test_criterion_05_idempotent_closure(record_criterion):
    _run(5, record_criterion)


def test_criterion_06_generating_sets(record_criterion):
    _run(6, record_criterion)


def test_criterion_07_inflation(record_criterion):
    _run(7, record_criterion)


def test_criterion_08_pullback_and_congruence(record_criterion):
    _run(8, record_criterion)


def test_criterion_09_classification(record_criterion):
    _run(9, record_criterion)


def test_criterion_10_mididentities(record_criterion):
    _run(10, record_criterion)


def test_criterion_11_desk_scale_imports(record_criterion):
    _run(11, record_criterion)


def test_criterion_12_determinism(record_criterion):
    _run(12, record_criterion)


if __name__ == "__main__":
    failures = 0
    for number, fn in enumerate(CRITERIA, 1):
        ok, text = fn()
        failures += not ok
        print(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {text}", flush=True)
    sys.exit(1 if failures else 0)
