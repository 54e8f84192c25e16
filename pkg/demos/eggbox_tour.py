"""Walk through the Green's structure of one sandwich semigroup.

Takes 2x3 matrices over GF(3) with a rank-1 sandwich matrix, then:
counts regular elements and idempotents, draws the regular eggboxes,
and compares with an ordinary D-class of the full matrix set.

    python3 demos/eggbox_tour.py [--dot out.dot]
"""

import argparse

from sandwichmat import make_field
from sandwichmat.combinatorics import idempotent_counts, sandwich_counts
from sandwichmat.sandwich import context_from_rank, eggbox, maximal_dclasses, regular_mask


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dot", help="write the regular eggboxes as DOT here")
    args = ap.parse_args()

    F = make_field(3)
    ctx = context_from_rank(F, 2, 3, 1)
    q, m, n, r = ctx.q, ctx.m, ctx.n, ctx.r
    print(f"{ctx.size} matrices of shape {m}x{n} over GF({q}), sandwich rank {r}")

    scanned = int(regular_mask(ctx, ctx.all_elements()).sum())
    print(f"regular elements: {scanned} by scan, {sandwich_counts(q, m, n, r, 0)['P_size']} by formula")
    print(f"idempotents: {idempotent_counts(q, m, n, r)}")

    reg = eggbox(ctx, "reg")
    print("\nregular classes:")
    print(reg.to_text())

    top = maximal_dclasses(ctx)
    print(f"maximal classes: {top['kind']}, {top['count']} of them")

    # the ordinary rank-1 class splits into the 3x9 regular block plus singletons
    plain = eggbox(ctx, "mdclass:1").dclasses[0]
    print(f"\nordinary rank-1 class of all 2x3 matrices: {plain.nR} x {plain.nL}, H-classes of size {plain.h_sizes}")

    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(reg.to_dot())
        print(f"wrote {args.dot}")


if __name__ == "__main__":
    main()
