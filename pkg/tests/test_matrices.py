import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from osb.errors import DomainError, FormatError
from osb.matrices import (
    Matrix,
    averaged_top_matrix,
    decreasing_rearrangement,
    indicator_matrix,
    kth_largest,
    order_map,
    parse_matrix_csv,
    parse_matrix_json,
    reduce_to_top,
)


def small_matrices(max_dim=4):
    return st.integers(1, max_dim).flatmap(
        lambda n: st.integers(1, max_dim).flatmap(
            lambda N: st.lists(
                st.lists(st.floats(0, 100, allow_nan=False), min_size=N, max_size=N),
                min_size=n, max_size=n,
            )
        )
    ).map(Matrix.from_rows)


class TestRearrangement:
    def test_symmetric_example(self):
        m = Matrix.from_rows([[1, 0], [0, 1]])
        assert decreasing_rearrangement(m).tolist() == [1, 1, 0, 0]

    def test_direct_sort_example(self):
        m = Matrix.from_rows([[3, 1], [2, 2]])
        assert decreasing_rearrangement(m).tolist() == [3, 2, 2, 1]

    def test_zero_matrix(self):
        assert decreasing_rearrangement(Matrix.zeros(3, 3)).tolist() == [0.0] * 9

    @given(small_matrices())
    @settings(max_examples=50, deadline=None)
    def test_permutation_invariance(self, m):
        rng = np.random.default_rng(0)
        shuffled = m.entries[rng.permutation(m.rows)][:, rng.permutation(m.cols)]
        assert decreasing_rearrangement(Matrix(shuffled)).tolist() == \
            decreasing_rearrangement(m).tolist()

    def test_abs_at_construction(self):
        m = Matrix.from_rows([[-3, 1]])
        assert m.entries.tolist() == [[3, 1]]

    def test_top_sum(self):
        m = Matrix.from_rows([[3, 1], [2, 2]])
        assert m.top_sum(2) == 5.0
        assert m.top_sum(0) == 0.0
        with pytest.raises(DomainError):
            m.top_sum(5)


class TestKthLargest:
    def test_examples(self):
        assert kth_largest([3, 1, 2], 2) == 2
        assert all(kth_largest([5, 5, 5], k) == 5 for k in (1, 2, 3))
        assert kth_largest([0, 0, 0, 0], 3) == 0

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            kth_largest([1, 2], 0)
        with pytest.raises(DomainError):
            kth_largest([1, 2], 3)

    @given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_sum_identity(self, x):
        total = sum(kth_largest(x, k) for k in range(1, len(x) + 1))
        assert total == pytest.approx(sum(abs(v) for v in x), abs=1e-9)


class TestOrderMap:
    def test_tie_break_example(self):
        h = order_map(Matrix.from_rows([[1, 0], [0, 1]]))
        assert h.pairs == ((1, 1), (2, 2), (1, 2), (2, 1))

    def test_value_order_example(self):
        h = order_map(Matrix.from_rows([[3, 1], [2, 2]]))
        assert h.pairs == ((1, 1), (2, 1), (2, 2), (1, 2))

    @given(small_matrices())
    @settings(max_examples=50, deadline=None)
    def test_compatibility_invariant(self, m):
        h = order_map(m)
        assert h.compatible_with(m)
        assert m.entry(*h.position(1)) == m.rearrangement[0]

    def test_ordered_class_membership(self):
        m = Matrix.from_rows([[3, 1], [2, 2]])
        h = order_map(m)
        member = indicator_matrix(h, 2)
        assert h.in_ordered_class(member, 1)
        assert not h.in_ordered_class(Matrix.from_rows([[0, 1], [1, 0]]), 1)


class TestAveragedMatrix:
    def test_identity_example(self):
        m = Matrix.from_rows([[1, 0], [0, 1]])
        out = averaged_top_matrix(m, order_map(m), 1)
        assert out.entries.tolist() == [[1, 0], [0, 1]]

    def test_average_value_example(self):
        m = Matrix.from_rows([[3, 1], [2, 2]])
        out = averaged_top_matrix(m, order_map(m), 1)
        assert out.entries.tolist() == [[2.5, 0], [2.5, 0]]

    def test_zero_matrix(self):
        m = Matrix.zeros(2, 3)
        out = averaged_top_matrix(m, order_map(m), 2)
        assert not out.entries.any()

    @given(small_matrices(), st.integers(1, 4))
    @settings(max_examples=50, deadline=None)
    def test_mass_identity(self, m, ell):
        ell = min(ell, m.rows)
        out = averaged_top_matrix(m, order_map(m), ell)
        assert out.entries.sum() == pytest.approx(
            m.top_sum(ell * m.cols), abs=1e-9)

    def test_ell_out_of_range(self):
        m = Matrix.zeros(2, 2)
        with pytest.raises(DomainError):
            averaged_top_matrix(m, order_map(m), 3)


class TestIndicatorMatrix:
    def test_full_range_is_all_ones(self):
        h = order_map(Matrix.from_rows([[3, 1], [2, 2]]))
        assert indicator_matrix(h, 4).entries.tolist() == [[1, 1], [1, 1]]

    def test_singleton(self):
        h = order_map(Matrix.from_rows([[3, 1], [2, 2]]))
        assert indicator_matrix(h, 1).entries.tolist() == [[1, 0], [0, 0]]

    def test_top_two_positions(self):
        h = order_map(Matrix.from_rows([[3, 1], [2, 2]]))
        assert indicator_matrix(h, 2).entries.tolist() == [[1, 0], [1, 0]]

    def test_rearrangement_is_step(self):
        h = order_map(Matrix.from_rows([[3, 1], [2, 2]]))
        assert indicator_matrix(h, 3).rearrangement.tolist() == [1, 1, 1, 0]

    def test_m_out_of_range(self):
        h = order_map(Matrix.zeros(2, 2))
        with pytest.raises(DomainError):
            indicator_matrix(h, 5)


class TestReduceToTop:
    def test_keeps_largest(self):
        m = Matrix.from_rows([[3, 1], [2, 2]])
        out = reduce_to_top(m, order_map(m), 1)
        assert out.entries.tolist() == [[3, 0], [2, 0]]


class TestFileFormats:
    def test_json_round_trip(self):
        text = '{"rows": 2, "cols": 2, "entries": [[1, 0.5], [2, 3]]}'
        m = parse_matrix_json(text)
        assert m.entries.tolist() == [[1, 0.5], [2, 3]]

    def test_json_rejects_ragged(self):
        with pytest.raises(FormatError):
            parse_matrix_json('{"rows": 2, "cols": 2, "entries": [[1], [2, 3]]}')

    def test_json_rejects_bad_dims(self):
        with pytest.raises(FormatError):
            parse_matrix_json('{"rows": -2, "cols": 2, "entries": []}')

    def test_json_rejects_nan(self):
        with pytest.raises(FormatError):
            parse_matrix_json('{"rows": 1, "cols": 1, "entries": [[NaN]]}')

    def test_csv_parse(self):
        m = parse_matrix_csv("1,2\n3,4\n")
        assert m.entries.tolist() == [[1, 2], [3, 4]]

    def test_csv_rejects_ragged(self):
        with pytest.raises(FormatError):
            parse_matrix_csv("1,2\n3\n")

    def test_csv_rejects_empty(self):
        with pytest.raises(FormatError):
            parse_matrix_csv("\n")

    def test_digest_is_stable(self):
        a = Matrix.from_rows([[1, 2], [3, 4]])
        b = Matrix.from_rows([[1, 2], [3, 4]])
        assert a.digest() == b.digest()
        assert a.digest() != Matrix.from_rows([[1, 2], [3, 5]]).digest()

    def test_json_write_read_round_trip(self):
        import json as _json
        from osb.matrices import matrix_to_json_obj
        a = Matrix.from_rows([[0.25, 1.75], [2.0, 0.0]])
        b = parse_matrix_json(_json.dumps(matrix_to_json_obj(a)))
        assert b.entries.tolist() == a.entries.tolist()
