from __future__ import annotations

import random

import pytest

from ringstore.algebra import FieldSpec, Matrix
from ringstore.construct import build_ed_matrix
from ringstore.errors import DimensionMismatch, NotFullRank, PartitionMismatch, TooFewNodes
from ringstore.scheme import (
    USER,
    cut_constraints,
    encode,
    make_scheme,
    reconstruct_lower_bound,
    repair_lower_bound,
    rotate,
    validate_ordss,
)

from conftest import ED_ROWS, GF2, GF11


def ed_schemes(max_n=8, max_alpha=4):
    for n in range(1, max_n + 1):
        for alpha in range(1, max_alpha + 1):
            for m in range(1, n * alpha):
                yield make_scheme(build_ed_matrix(m, n * alpha), n, alpha)


def symbolic_node(s, i):
    """Which x's each symbol of node i involves (over GF(2))."""
    return [tuple(r + 1 for r in range(s.m) if s.g[r, c]) for c in s.node_columns(i)]


def test_make_scheme_ed(ed_scheme):
    s = ed_scheme
    assert (s.n, s.alpha, s.m, s.k, s.gamma) == (4, 2, 5, 3, 1)
    assert symbolic_node(s, 1) == [(1,), (2,)]
    assert symbolic_node(s, 2) == [(3,), (4,)]
    assert symbolic_node(s, 3) == [(5,), (1, 4)]
    assert symbolic_node(s, 4) == [(2, 5), (3, 4, 5)]


def test_make_scheme_trivial():
    s = make_scheme(Matrix.identity(4, GF2), 4, 1)
    assert s.k == 4
    assert [list(s.node_columns(i)) for i in range(1, 5)] == [[0], [1], [2], [3]]


def test_make_scheme_mds(mds_scheme):
    assert mds_scheme.field == GF11
    assert mds_scheme.node_matrix(4).to_lists() == [[5, 4], [9, 7], [1, 5], [4, 2], [4, 5]]
    assert validate_ordss(mds_scheme).is_ordss


def test_make_scheme_errors():
    with pytest.raises(PartitionMismatch):
        make_scheme(Matrix(ED_ROWS, GF2), 3, 2)
    with pytest.raises(NotFullRank):
        make_scheme(Matrix([[1, 0, 1, 0], [1, 0, 1, 0]], GF2), 2, 2)
    # three rows cannot fit in one node of two symbols
    with pytest.raises(TooFewNodes):
        make_scheme(Matrix([[1, 0], [0, 1], [1, 1]], GF2), 1, 2)


def test_gamma_is_alpha_when_divisible():
    s = make_scheme(build_ed_matrix(4, 6), 3, 2)
    assert (s.k, s.gamma) == (2, 2)


def test_encode_ed_symbolic(ed_scheme):
    # X = e_j isolates the coefficient of x_j in each stored symbol
    got = [encode(ed_scheme, [int(i == j) for i in range(5)]).node(4) for j in range(5)]
    involved = [tuple(j + 1 for j in range(5) if got[j][t]) for t in range(2)]
    assert involved == [(2, 5), (3, 4, 5)]


def test_encode_zero_and_mds(mds_scheme):
    zero = encode(mds_scheme, [0] * 5)
    assert all(v == 0 for i in range(1, 5) for v in zero.node(i))
    st = encode(mds_scheme, [1, 0, 0, 0, 0])
    assert st.node(3) == (0, 1)
    assert st.node(4) == (5, 4)


def test_encode_errors(mds_scheme):
    with pytest.raises(DimensionMismatch):
        encode(mds_scheme, [1, 2, 3])


def test_encode_linear(mds_scheme):
    rng = random.Random(5)
    for _ in range(20):
        x = [rng.randrange(11) for _ in range(5)]
        y = [rng.randrange(11) for _ in range(5)]
        xy = [(a + b) % 11 for a, b in zip(x, y)]
        sx, sy, sxy = (encode(mds_scheme, v) for v in (x, y, xy))
        for i in range(1, 5):
            assert sxy.node(i) == tuple((a + b) % 11 for a, b in zip(sx.node(i), sy.node(i)))


def test_stored_state_erase_install(ed_scheme):
    st = encode(ed_scheme, [1, 0, 1, 1, 0])
    gone = st.erase(2)
    assert gone.symbols[1] is None
    assert gone.install(2, st.node(2)) == st


def test_validate_examples(mds_scheme, ed_scheme, interleaved_scheme):
    for s in (mds_scheme, ed_scheme, interleaved_scheme):
        report = validate_ordss(s)
        assert report.is_ordss
        assert report.failed_window_condition_i == ()
        assert report.failed_window_condition_ii == ()


def test_validate_detects_deficient_window():
    # N1={x1,x2} N2={x3,x4} N3={x5,x5} N4={x1+x4, x2+x5}: node 3 repeats x5
    rows = [
        [1, 0, 0, 0, 0, 0, 1, 0],
        [0, 1, 0, 0, 0, 0, 0, 1],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 1, 0],
        [0, 0, 0, 0, 1, 1, 0, 1],
    ]
    report = validate_ordss(make_scheme(Matrix(rows, GF2), 4, 2))
    assert not report.is_ordss
    assert 3 in report.failed_window_condition_i
    assert report.failed_window_condition_ii


def test_validate_k1_condition_i_vacuous(single_hop_scheme):
    report = validate_ordss(single_hop_scheme)
    assert single_hop_scheme.k == 1
    assert report.is_ordss


def test_reconstruct_bound_examples():
    assert reconstruct_lower_bound(4, 2, 5) == 9
    assert reconstruct_lower_bound(3, 5, 5) == 5
    assert reconstruct_lower_bound(5, 1, 5) == 15
    with pytest.raises(TooFewNodes):
        reconstruct_lower_bound(2, 2, 5)


def test_repair_bound_examples(mds_scheme, ed_scheme):
    assert repair_lower_bound(ed_scheme) == 5
    assert repair_lower_bound(mds_scheme) == 5
    assert repair_lower_bound(make_scheme(Matrix([[1, 1]], GF2), 2, 1)) == 1


def constraint_table(n, alpha, m):
    return [(c.link, c.min_symbols) for c in cut_constraints(n, alpha, m)]


def test_cut_constraint_examples():
    assert constraint_table(4, 2, 5) == [((1, USER), 5), ((2, 1), 3), ((3, 2), 1)]
    assert constraint_table(3, 5, 5) == [((1, USER), 5)]
    assert constraint_table(5, 1, 3) == [((1, USER), 3), ((2, 1), 2), ((3, 2), 1)]
    with pytest.raises(TooFewNodes):
        cut_constraints(1, 1, 3)


def test_cut_constraints_sum_to_bound():
    for n in range(1, 9):
        for alpha in range(1, 6):
            for m in range(1, n * alpha + 1):
                total = sum(c.min_symbols for c in cut_constraints(n, alpha, m))
                assert total == reconstruct_lower_bound(n, alpha, m)
                assert all(c.min_symbols > 0 for c in cut_constraints(n, alpha, m))


def test_rotation_invariance(mds_scheme, interleaved_scheme):
    deficient = make_scheme(
        Matrix([[1, 0, 1, 0, 0, 1], [0, 1, 0, 1, 0, 1], [0, 0, 0, 0, 1, 0]], GF2), 3, 2
    )
    for s in (mds_scheme, interleaved_scheme, deficient, make_scheme(build_ed_matrix(5, 9), 3, 3)):
        verdict = validate_ordss(s).is_ordss
        for off in range(s.n):
            assert validate_ordss(rotate(s, off)).is_ordss == verdict
    assert not validate_ordss(deficient).is_ordss


def test_rotate_renames_nodes(ed_scheme):
    r = rotate(ed_scheme, 1)
    assert r.node_matrix(1) == ed_scheme.node_matrix(2)
    assert r.node_matrix(4) == ed_scheme.node_matrix(1)


def test_ed_sweep_is_ordss():
    count = 0
    for s in ed_schemes():
        assert validate_ordss(s).is_ordss, (s.n, s.alpha, s.m)
        count += 1
    assert count == 328


def test_large_field_scheme():
    big = FieldSpec(2**31 + 11)
    g = Matrix([[1, 0, 2**31, 5], [0, 1, 7, 2**30]], big)
    s = make_scheme(g, 2, 2)
    st = encode(s, [2**31, 3])
    assert st.node(1) == (2**31, 3)
