import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles as O
from sandwichmat.combinatorics import idempotent_counts, sandwich_counts
from sandwichmat.errors import DimensionMismatch, NotInImage, NotRegular
from sandwichmat.field import make_field
from sandwichmat.matrix import Matrix, batch_encode, identity, jmatrix, man_compose, mat_mul, zeros
from sandwichmat.psgp import brute_green
from sandwichmat.sandwich import (
    classify_iso,
    context_from_rank,
    corner_images,
    dclass_leq,
    eggbox,
    green_key,
    green_labels,
    hhat_structure,
    idempotent_mask,
    idempotents,
    make_context,
    man_congruence_check,
    man_decompose,
    maximal_dclasses,
    mididentity_check,
    parse_scope,
    phi_project,
    psi_embed,
    psi_reconstruct,
    pullback_check,
    reg_membership,
    regular_elements,
    regular_mask,
    regularity_preserving,
    star,
    verify_witness,
)

# (q, m, n, r) -> (|P|, #idempotents, #R, #L, #H, #D, #J), computed once with
# the pure-Python oracle in tests/oracles.py from full multiplication tables
ORACLE_COUNTS = {
    (2, 1, 1, 0): (1, 1, 2, 2, 2, 2, 2), (2, 1, 1, 1): (2, 2, 2, 2, 2, 2, 2),
    (2, 1, 2, 0): (1, 1, 4, 4, 4, 4, 4), (2, 1, 2, 1): (3, 3, 3, 4, 4, 3, 3),
    (2, 1, 3, 0): (1, 1, 8, 8, 8, 8, 8), (2, 1, 3, 1): (5, 5, 5, 8, 8, 5, 5),
    (2, 2, 1, 0): (1, 1, 4, 4, 4, 4, 4), (2, 2, 1, 1): (3, 3, 4, 3, 4, 3, 3),
    (2, 2, 2, 0): (1, 1, 16, 16, 16, 16, 16), (2, 2, 2, 1): (5, 5, 13, 13, 16, 11, 11),
    (2, 2, 2, 2): (16, 8, 5, 5, 11, 3, 3), (2, 2, 3, 0): (1, 1, 64, 64, 64, 64, 64),
    (2, 2, 3, 1): (9, 9, 55, 57, 64, 51, 51), (2, 2, 3, 2): (43, 17, 26, 15, 44, 7, 7),
    (2, 3, 1, 0): (1, 1, 8, 8, 8, 8, 8), (2, 3, 1, 1): (5, 5, 8, 5, 8, 5, 5),
    (2, 3, 2, 0): (1, 1, 64, 64, 64, 64, 64), (2, 3, 2, 1): (9, 9, 57, 55, 64, 51, 51),
    (2, 3, 2, 2): (43, 17, 15, 26, 44, 7, 7),
    (3, 1, 1, 0): (1, 1, 3, 3, 3, 3, 3), (3, 1, 1, 1): (3, 2, 2, 2, 2, 2, 2),
    (3, 1, 2, 0): (1, 1, 9, 9, 9, 9, 9), (3, 1, 2, 1): (7, 4, 4, 5, 6, 3, 3),
    (3, 1, 3, 0): (1, 1, 27, 27, 27, 27, 27), (3, 1, 3, 1): (19, 10, 10, 14, 18, 6, 6),
    (3, 2, 1, 0): (1, 1, 9, 9, 9, 9, 9), (3, 2, 1, 1): (7, 4, 5, 4, 6, 3, 3),
    (3, 2, 2, 0): (1, 1, 81, 81, 81, 81, 81), (3, 2, 2, 1): (19, 10, 61, 61, 72, 54, 54),
    (3, 2, 2, 2): (81, 14, 6, 6, 18, 3, 3), (3, 3, 1, 0): (1, 1, 27, 27, 27, 27, 27),
    (3, 3, 1, 1): (19, 10, 14, 10, 18, 6, 6),
}

FIELDS = {2: make_field(2), 3: make_field(3)}
F2, F3 = FIELDS[2], FIELDS[3]


def n_classes(labels):
    return len(np.unique(labels))


@pytest.mark.parametrize("params", sorted(ORACLE_COUNTS))
def test_frozen_oracle_counts(params):
    q, m, n, r = params
    ctx = context_from_rank(FIELDS[q], m, n, r)
    P, E, nR, nL, nH, nD, nJ = ORACLE_COUNTS[params]
    X = ctx.all_elements()
    assert int(regular_mask(ctx, X).sum()) == P
    assert sandwich_counts(q, m, n, r, 0)["P_size"] == P
    assert len(idempotents(ctx)) == E == idempotent_counts(q, m, n, r)
    assert int(idempotent_mask(ctx, X).sum()) == E
    got = [n_classes(green_labels(ctx, k)) for k in "RLHDJ"]
    assert got == [nR, nL, nH, nD, nJ]


def random_sandwich(q, m, n, seed):
    F = FIELDS[q]
    rng = np.random.default_rng(seed)
    return Matrix(F, rng.integers(0, q, size=(n, m)), shape=(n, m))


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([(2, 2, 2), (2, 1, 3), (2, 3, 2), (3, 2, 1), (3, 1, 2), (2, 2, 3)]), st.integers(0, 10**6))
def test_green_keys_match_oracle_for_arbitrary_sandwich(dims, seed):
    q, m, n = dims
    A = random_sandwich(q, m, n, seed)
    ctx = make_context(FIELDS[q], m, n, A)
    mats, table = O.sandwich_table(O.RefField(q), m, n, A.tolist())
    parts, regular = O.green(table)
    X = ctx.all_elements()
    for k in "RLHDJ":
        assert O.partition_of(green_labels(ctx, k)) == parts[k]
    assert regular_mask(ctx, X).tolist() == regular


def test_green_keys_match_brute_green_at_larger_size():
    # 3^6 = 729 elements: the numpy brute-force engine stands in for the list oracle
    A = random_sandwich(3, 2, 3, 11)
    ctx = make_context(F3, 2, 3, A)
    X = ctx.all_elements()
    table = batch_encode(F3, ctx.star_array(X[:, None], X[None]))
    G = brute_green(table)
    for k in "RLHDJ":
        assert O.partition_of(green_labels(ctx, k)) == O.partition_of(getattr(G, k))
    assert np.array_equal(regular_mask(ctx, X), G.regular)


# ---------------------------------------------------------------- worked examples


def test_context_construction():
    ctx = context_from_rank(F3, 2, 3, 1)
    assert ctx.normalized and ctx.U == identity(F3, 3) and ctx.V == identity(F3, 2)
    assert make_context(F2, 2, 3, zeros(F2, 3, 2)).r == 0
    with pytest.raises(DimensionMismatch):
        make_context(F2, 2, 3, zeros(F2, 2, 3))


def test_swap_sandwich_normalizes():
    A = Matrix(F2, [[0, 1], [1, 0]])
    ctx = make_context(F2, 2, 2, A)
    assert ctx.r == 2 and not ctx.normalized
    assert mat_mul(mat_mul(ctx.U, ctx.J), ctx.V) == A
    J = context_from_rank(F2, 2, 2, 2)
    X = ctx.all_elements()
    lhs = ctx.to_normalized_array(ctx.star_array(X[:, None], X[None]))
    Xn = ctx.to_normalized_array(X)
    rhs = J.star_array(Xn[:, None], Xn[None])
    assert np.array_equal(lhs, rhs)


def test_star_examples():
    ctx = context_from_rank(F3, 2, 3, 1)
    X = Matrix(F3, [[1, 0, 0], [0, 0, 0]])
    Y = Matrix(F3, [[1, 1, 0], [0, 0, 0]])
    assert star(ctx, X, Y).tolist() == [[1, 1, 0], [0, 0, 0]]
    zero = make_context(F3, 2, 3, zeros(F3, 3, 2))
    assert star(zero, X, Y).is_zero()
    with pytest.raises(DimensionMismatch):
        star(ctx, X, Matrix(F3, [[1]]))


def test_man_product_rule():
    F = F3
    ctx = context_from_rank(F, 3, 3, 2)
    rng = np.random.default_rng(1)
    for _ in range(20):
        M, K = (Matrix(F, rng.integers(0, 3, (1, 2)), shape=(1, 2)) for _ in range(2))
        A, B = (Matrix(F, rng.integers(0, 3, (2, 2)), shape=(2, 2)) for _ in range(2))
        N, L = (Matrix(F, rng.integers(0, 3, (2, 1)), shape=(2, 1)) for _ in range(2))
        assert star(ctx, man_compose(M, A, N), man_compose(K, B, L)) == man_compose(M, mat_mul(A, B), L)


def test_reg_membership_examples():
    ctx = context_from_rank(F3, 2, 3, 1)
    flags = reg_membership(ctx, zeros(F3, 2, 3))
    assert flags.in_P1 and flags.in_P2 and flags.in_P
    flags = reg_membership(ctx, Matrix(F3, [[0, 1, 0], [0, 0, 0]]))
    assert not flags.in_P1 and not flags.in_P
    assert reg_membership(context_from_rank(F2, 2, 2, 1), Matrix(F2, [[1, 1], [1, 1]])).in_P


def test_green_key_examples():
    ctx = context_from_rank(F2, 2, 2, 1)
    I = identity(F2, 2)
    keys = {green_key(ctx, I, k).case for k in "RLHDJ"}
    assert keys == {"single"}
    X, Y = Matrix(F2, [[1, 0], [0, 0]]), Matrix(F2, [[1, 1], [1, 1]])
    assert green_key(ctx, X, "D") == green_key(ctx, Y, "D")
    ctx3 = context_from_rank(F3, 2, 3, 1)
    X, Y = Matrix(F3, [[0, 0, 0], [1, 0, 0]]), Matrix(F3, [[0, 0, 0], [2, 0, 0]])
    assert not reg_membership(ctx3, X).in_P2
    kx, ky = green_key(ctx3, X, "L"), green_key(ctx3, Y, "L")
    assert kx.case == ky.case == "single" and kx != ky


def test_maximal_dclasses():
    top = maximal_dclasses(context_from_rank(F2, 2, 3, 2))
    assert top["count"] == 1 and top["subsemigroup"]
    low = maximal_dclasses(context_from_rank(F2, 2, 2, 1))
    assert low["count"] == 6 and not low["subsemigroup"]
    assert maximal_dclasses(context_from_rank(F2, 2, 2, 0))["zero semigroup"]


def test_idempotent_examples():
    ctx = context_from_rank(F2, 2, 2, 1)
    E = idempotents(ctx)
    assert len(E) == 5 and zeros(F2, 2, 2) in E
    # the top class idempotents are exactly the [M, I_r, N]
    ctx = context_from_rank(F3, 2, 3, 1)
    top = idempotents(ctx, 1)
    assert len(top) == 3 * 9
    assert all(phi_project(ctx, X) == identity(F3, 1) for X in top)


def test_man_decompose_examples():
    ctx = context_from_rank(F2, 2, 2, 1)
    t = man_decompose(ctx, jmatrix(F2, 2, 2, 1))
    assert t.M.is_zero() and t.A == identity(F2, 1) and t.N.is_zero()
    t = man_decompose(ctx, Matrix(F2, [[1, 1], [1, 1]]))
    assert (t.M.tolist(), t.A.tolist(), t.N.tolist()) == ([[1]], [[1]], [[1]])
    with pytest.raises(NotRegular):
        man_decompose(ctx, identity(F2, 2))


def test_corner_images_blocks():
    ctx = context_from_rank(F3, 3, 3, 1)
    X = Matrix(F3, [[1, 2, 0], [2, 1, 1], [0, 1, 2]])
    c = corner_images(ctx, X)
    assert c.XJ.tolist() == [[1, 0, 0], [2, 0, 0], [0, 0, 0]]
    assert c.JX.tolist() == [[1, 2, 0], [0, 0, 0], [0, 0, 0]]
    assert c.JXJ.tolist() == [[1, 0, 0], [0, 0, 0], [0, 0, 0]]


def test_psi_roundtrip_and_errors():
    ctx = context_from_rank(F2, 2, 2, 1)
    P = regular_elements(ctx)
    pairs = {tuple(Y.code for Y in psi_embed(ctx, ctx.matrix(x))) for x in P}
    assert len(pairs) == len(P) == 5
    for x in P:
        X = ctx.matrix(x)
        assert psi_reconstruct(ctx, *psi_embed(ctx, X)) == X
    with pytest.raises(NotRegular):
        psi_embed(ctx, identity(F2, 2))
    with pytest.raises(NotInImage):
        psi_reconstruct(ctx, identity(F2, 2), identity(F2, 2))
    # outside P the corner images do not determine X
    a = corner_images(ctx, Matrix(F2, [[1, 0], [0, 1]]))
    b = corner_images(ctx, Matrix(F2, [[1, 0], [0, 0]]))
    assert (a.XJ, a.JX) == (b.XJ, b.JX)


def test_man_congruence_examples():
    rep = man_congruence_check(context_from_rank(F2, 2, 2, 1))
    assert rep["ok"] and rep["U_size"] == 8 and rep["P_size"] == 5
    assert man_congruence_check(context_from_rank(F3, 2, 3, 1))["ok"]


def test_hhat_examples():
    ctx = context_from_rank(F2, 2, 2, 1)
    rep = hhat_structure(ctx, jmatrix(F2, 2, 2, 1))
    assert rep.size == 4 and rep.n_hclasses == 4 and rep.group_all and rep.verdict_ok
    ctx = context_from_rank(F3, 2, 3, 2)
    X = man_compose(zeros(F3, 0, 2), Matrix(F3, [[0, 1], [0, 0]]), Matrix(F3, [[1], [0]]))
    rep = hhat_structure(ctx, X)
    assert not rep.phi_group and not rep.group_any and rep.verdict_ok


def test_pullback():
    for q, m, n, r in [(2, 2, 2, 1), (3, 2, 3, 1), (2, 3, 3, 2)]:
        assert pullback_check(context_from_rank(FIELDS[q], m, n, r))["ok"]


# ---------------------------------------------------------------- properties


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(2, 2, 3), (3, 2, 2), (2, 3, 3), (3, 3, 2)]), st.integers(0, 10**6))
def test_star_associative_and_normalization_isomorphism(dims, seed):
    q, m, n = dims
    F = FIELDS[q]
    ctx = make_context(F, m, n, random_sandwich(q, m, n, seed))
    rng = np.random.default_rng(seed)
    X, Y, Z = (rng.integers(0, q, size=(40, m, n)) for _ in range(3))
    s = ctx.star_array
    assert np.array_equal(s(s(X, Y), Z), s(X, s(Y, Z)))
    J = context_from_rank(F, m, n, ctx.r)
    nrm = ctx.to_normalized_array
    assert np.array_equal(nrm(s(X, Y)), J.star_array(nrm(X), nrm(Y)))


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([(2, 2, 3), (3, 2, 2), (2, 3, 3), (3, 2, 3)]), st.integers(0, 10**6))
def test_regular_part_properties(dims, seed):
    q, m, n = dims
    F = FIELDS[q]
    ctx = make_context(F, m, n, random_sandwich(q, m, n, seed))
    P = regular_elements(ctx)
    assert np.all(regular_mask(ctx, P))
    prods = ctx.star_array(P[:, None], P[None]).reshape(-1, m, n)
    assert np.all(regular_mask(ctx, prods))
    for x in P[:: max(1, len(P) // 12)]:
        X = ctx.matrix(x)
        # the triple describes the normalized image of X
        assert man_decompose(ctx, X).compose() == ctx.to_normalized(X)
    # phi is a homomorphism on the normalized regular part
    Jc = context_from_rank(F, m, n, ctx.r)
    Pn = regular_elements(Jc)[:20]
    for x in Pn:
        for y in Pn[:5]:
            X, Y = Jc.matrix(x), Jc.matrix(y)
            assert phi_project(Jc, star(Jc, X, Y)) == mat_mul(phi_project(Jc, X), phi_project(Jc, Y))


@pytest.mark.parametrize("params", [(2, 2, 2, 1), (2, 2, 3, 1), (2, 2, 3, 2), (3, 2, 2, 1), (3, 1, 3, 1)])
def test_dclass_order_matches_brute(params):
    q, m, n, r = params
    ctx = context_from_rank(FIELDS[q], m, n, r)
    X = ctx.all_elements()
    table = batch_encode(ctx.field, ctx.star_array(X[:, None], X[None]))
    G = brute_green(table)
    reps = {}
    for x, d in enumerate(G.D):
        reps.setdefault(int(d), x)
    for a in reps.values():
        for b in reps.values():
            assert dclass_leq(ctx, ctx.matrix(X[a]), ctx.matrix(X[b])) == bool(G.leq_J[a, b])


def test_regular_dclasses_form_chain():
    ctx = context_from_rank(F3, 2, 3, 2)
    reps = [regular_elements(ctx, s)[0] for s in range(3)]
    for s in range(3):
        for t in range(3):
            assert dclass_leq(ctx, ctx.matrix(reps[s]), ctx.matrix(reps[t])) == (s <= t)


@pytest.mark.parametrize("params", [(2, 2, 2, 1), (2, 2, 3, 1), (3, 2, 2, 1), (2, 3, 2, 2)])
def test_mididentities_and_regularity_preserving(params):
    q, m, n, r = params
    ctx = context_from_rank(FIELDS[q], m, n, r)
    top = idempotents(ctx, r)
    assert all(mididentity_check(ctx, E.array) for E in top)
    rp = regularity_preserving(ctx)
    D = regular_elements(ctx, r)
    assert sorted(rp.tolist()) == sorted(batch_encode(ctx.field, D).tolist())


# ---------------------------------------------------------------- classification


def test_classify_zero_semigroups():
    left = context_from_rank(F2, 2, 2, 0)
    right = make_context(make_field(2, 2), 2, 1, zeros(make_field(2, 2), 1, 2))
    res = classify_iso(left, right)
    assert res.isomorphic
    assert verify_witness(left, right, res.mapping)[0]


def test_classify_equal_rank_with_witness():
    A = Matrix(F2, [[1, 1], [1, 1]])
    B = Matrix(F2, [[0, 0], [0, 1]])
    left, right = make_context(F2, 2, 2, A), make_context(F2, 2, 2, B)
    res = classify_iso(left, right)
    assert res.isomorphic
    ok, why = verify_witness(left, right, res.mapping)
    assert ok, why
    broken = res.mapping.copy()
    broken[[1, 2]] = broken[[2, 1]]
    assert not verify_witness(left, right, broken)[0]


def test_classify_negative_cases():
    assert not classify_iso(context_from_rank(F2, 2, 2, 1), context_from_rank(F2, 2, 2, 2)).isomorphic
    assert not classify_iso(context_from_rank(F2, 2, 3, 1), context_from_rank(F2, 3, 2, 1)).isomorphic
    assert not classify_iso(context_from_rank(F2, 2, 2, 1), context_from_rank(F3, 2, 2, 1)).isomorphic
    assert not classify_iso(context_from_rank(F2, 2, 2, 0), context_from_rank(F3, 2, 2, 0)).isomorphic


def test_classify_across_moduli():
    K1, K2 = make_field(2, 3, [1, 1, 0, 1]), make_field(2, 3, [1, 0, 1, 1])
    left = make_context(K1, 1, 2, Matrix(K1, [[3], [5]]))
    right = make_context(K2, 1, 2, Matrix(K2, [[0], [6]]))
    res = classify_iso(left, right)
    assert res.isomorphic and verify_witness(left, right, res.mapping)[0]


# ---------------------------------------------------------------- eggbox


def test_eggbox_ordinary_dclass():
    ctx = context_from_rank(F3, 2, 3, 1)
    rep = eggbox(ctx, "mdclass:1")
    (d,) = rep.dclasses
    assert (d.nR, d.nL, d.h_sizes) == (4, 13, [2])


def test_eggbox_regular_scope():
    ctx = context_from_rank(F3, 2, 3, 1)
    rep = eggbox(ctx, "reg")
    by_rank = {d.s: d for d in rep.dclasses}
    assert (by_rank[1].nR, by_rank[1].nL, by_rank[1].h_sizes) == (3, 9, [2])
    assert (by_rank[0].nR, by_rank[0].nL, by_rank[0].size) == (1, 1, 1)
    # two regular classes, one covering edge
    assert len(rep.order) == 1
    data = json.loads(rep.to_json())
    assert data["params"] == {"q": 3, "m": 2, "n": 3, "r": 1}
    assert {"s", "regular", "nR", "nL", "hSize", "idempotents", "size"} <= set(data["dclasses"][0])


@pytest.mark.parametrize("params", [(2, 2, 2, 1), (2, 2, 3, 2), (3, 2, 2, 1)])
def test_eggbox_all_matches_brute(params):
    q, m, n, r = params
    ctx = context_from_rank(FIELDS[q], m, n, r)
    rep = eggbox(ctx, "all")
    X = ctx.all_elements()
    table = batch_encode(ctx.field, ctx.star_array(X[:, None], X[None]))
    G = brute_green(table)
    assert len(rep.dclasses) == n_classes(G.D)
    assert sum(d.size for d in rep.dclasses) == len(X)
    assert sum(d.nR for d in rep.dclasses) == n_classes(G.R)
    assert sum(d.nL for d in rep.dclasses) == n_classes(G.L)
    E = int(idempotent_mask(ctx, X).sum())
    assert sum(d.idempotents for d in rep.dclasses) == E
    csv_rows = rep.to_csv().strip().splitlines()
    assert len(csv_rows) - 1 == n_classes(G.H)


def test_eggbox_outputs_and_scopes():
    ctx = context_from_rank(F2, 2, 3, 2)
    rep = eggbox(ctx, "dclass:2")
    assert len(rep.dclasses) == 1 and rep.dclasses[0].regular
    assert rep.to_dot().startswith("digraph")
    assert "gray80" in rep.to_dot()
    assert rep.render("text")
    assert parse_scope("dclass(1)") == ("dclass", 1)
    assert parse_scope("all") == ("all", None)
    with pytest.raises(Exception):
        parse_scope("bogus")
    zero = eggbox(context_from_rank(F2, 2, 2, 1), "dclass:0")
    (d,) = zero.dclasses
    assert (d.nR, d.nL, d.size) == (1, 1, 1)
