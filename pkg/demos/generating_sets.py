"""Build certified generating sets and check they cannot be thinned.

For each target (whole semigroup, regular part, idempotent-generated part,
ideals) prints the constructed size, the closed-form rank and the closure
certificate, then runs the necessity check.

    python3 demos/generating_sets.py [q m n r]
"""

import sys

from sandwichmat import make_field
from sandwichmat.errors import SandwichError
from sandwichmat.generators import genset, necessity_check
from sandwichmat.sandwich import context_from_rank


def main(argv) -> None:
    q, m, n, r = (int(v) for v in argv) if argv else (2, 2, 3, 2)
    ctx = context_from_rank(make_field(q), m, n, r)
    print(f"q={q} m={m} n={n} r={r}")
    targets = ["full", "reg", "idem"] + [f"ideal:{s}" for s in range(r)]
    for target in targets:
        try:
            rep = genset(ctx, target)
        except SandwichError as exc:
            print(f"  {target:8} skipped: {exc}")
            continue
        nec = necessity_check(ctx, target, rep)
        print(f"  {target:8} size {rep.claimed_size:4} (formula {rep.formula_size}), "
              f"closure {rep.closure_size}/{rep.target_size}, certified {rep.certified}, "
              f"necessity {'ok' if nec['ok'] else 'FAILED'}")


if __name__ == "__main__":
    main(sys.argv[1:])
