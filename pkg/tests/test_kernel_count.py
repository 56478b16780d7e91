import pytest
from hypothesis import given
from hypothesis import strategies as st

import kernel_corpus
from bops.core import BopsTally
from bops.kernel import (
    DivisionByZeroError,
    KernelRuntimeError,
    StepBudgetExceededError,
    UndefinedValueError,
    count_static,
    interpret,
    parse,
)
from bops.kernel.static import ENUMERATION_LIMIT, trip_count
from test_kernel_parse import CLUSTER


def both(source, inputs=None):
    p = parse(source)
    return count_static(p), interpret(p, inputs)


class TestWorkedExamples:
    def test_cluster_sizes(self):
        static, run = both(CLUSTER)
        assert static.exact
        assert static.tally == run.tally == BopsTally(200, 100, 100)
        assert static.tally.total() == 400
        assert run.state["newClusterSize"] == list(range(1, 101))
        assert run.state["j"] == 100

    def test_empty(self):
        static, run = both("")
        assert static.tally.total() == 0 and static.exact
        assert run.tally.total() == 0 and run.state == {}

    def test_nested_loops(self):
        static, run = both("long A[10][10]; long i, j;"
                           "for (i = 0; i < 10; i++) for (j = 0; j < 10; j++) A[i][j] = i * j;")
        # outer control 20, inner control 200, body 100 x (2 addressing + 1 multiply)
        assert static.tally == run.tally == BopsTally(210, 110, 200)
        assert static.tally.total() == 520
        assert run.state["A"][3][4] == 12

    def test_branch_taken(self):
        p = parse("long x, y, z; if (x < y) { z = x + y; }")
        run = interpret(p, {"x": 1, "y": 2})
        assert run.tally == BopsTally(arithmetic=1, comparing=1)
        assert run.state["z"] == 3
        assert interpret(p, {"x": 2, "y": 1}).tally == BopsTally(comparing=1)
        static = count_static(p)
        assert not static.exact
        assert static.tally == BopsTally(arithmetic=1, comparing=1)


class TestStaticRules:
    def test_declarations_and_scalar_copies_are_free(self):
        assert count_static(parse("long a, b; double x[4]; a = 1; b = a; x[0] = 0.0;")).tally == BopsTally(addressing=1)

    def test_compound_expression_counts_each_operator(self):
        assert count_static(parse("long a, b, c; a = b + c * 2;")).tally == BopsTally(arithmetic=2)

    def test_init_expression_counts_once(self):
        t = count_static(parse("long i, n; n = 3; for (i = n + 1; i < 10; i++) ;")).tally
        assert t == BopsTally(arithmetic=1 + 6, comparing=6)

    def test_bound_and_step_expressions_count_per_iteration(self):
        t = count_static(parse("long i, n; n = 6; for (i = 0; i < n - 1; i += 1 + 1) ;")).tally
        # trips: 0,2,4 -> 3; per trip: compare + bound '-' + step '+' + step '+'
        assert t == BopsTally(arithmetic=9, comparing=3)

    def test_constants_propagate_into_bounds(self):
        s = count_static(parse("long n, i, a[8]; n = 8; for (i = 0; i < n; i++) a[i] = i;"))
        assert s.exact and s.tally == BopsTally(8, 8, 8)

    def test_unknown_bound_is_inexact_lower_bound(self):
        p = parse("long n, i, a[8]; for (i = 0; i < n; i++) a[i] = i;")
        s = count_static(p)
        assert not s.exact
        assert s.tally == BopsTally(1, 1, 1)
        assert interpret(p, {"n": 5}).tally.total() >= s.tally.total()

    def test_loop_variable_written_in_body_is_inexact(self):
        s = count_static(parse("long i; for (i = 0; i < 10; i++) i = i + 1;"))
        assert not s.exact

    def test_triangular_loop_unrolled(self):
        static, run = both("long i, j, a[10]; for (i = 0; i < 10; i++) for (j = 0; j <= i; j++) a[j] = a[j] + 1;")
        assert static.exact and static.tally == run.tally

    def test_branch_resolved_inside_unrolled_loop(self):
        static, run = both("long i, a; for (i = 0; i < 7; i++) if (i % 2 == 0) a = a * 3 + i;", {"a": 1})
        assert static.exact and static.tally == run.tally

    def test_equal_branches_stay_exact(self):
        s = count_static(parse("long x, a; if (x > 0) a = a + 1; else a = a - 1;"))
        assert s.exact and s.tally == BopsTally(1, 1, 0)

    def test_huge_constant_loop_uses_closed_form(self):
        s = count_static(parse("long i, a[4]; for (i = 0; i < 1000000000; i++) a[1] = a[2] + 1;"))
        assert s.exact
        assert s.tally == BopsTally(2 * 10**9, 10**9, 2 * 10**9)

    def test_huge_variable_dependent_loop_is_inexact(self):
        n = ENUMERATION_LIMIT + 10
        s = count_static(parse(f"long i, a; for (i = 0; i < {n}; i++) if (i < 5) a = a + 1;"))
        assert not s.exact

    @pytest.mark.parametrize("start, rel, bound, op, step, expected", [
        (0, "<", 100, "+", 1, 100), (0, "<=", 100, "+", 1, 101), (0, "<", 10, "+", 3, 4),
        (10, ">", 0, "-", 1, 10), (10, ">=", 0, "-", 2, 6), (5, "<", 5, "+", 1, 0),
        (0, "!=", 10, "+", 2, 5), (0, "!=", 10, "+", 3, None), (0, "<", 10, "-", 1, None),
        (0, "<", 10, "+", 0, None), (3, "==", 3, "+", 1, 1), (0, "<", 2.5, "+", 1, 3),
        (0, "<", 10, "+", 0.5, None),
    ])
    def test_trip_count(self, start, rel, bound, op, step, expected):
        assert trip_count(start, rel, bound, op, step) == expected


class TestInterpreter:
    def test_int64_wraps(self):
        run = interpret(parse("long a; a = 9223372036854775807; a = a + 1;"))
        assert run.state["a"] == -(2**63)

    def test_c_division_truncates(self):
        run = interpret(parse("long a, b; double x; a = -7 / 2; b = -7 % 2; x = 7 / 2.0;"))
        assert (run.state["a"], run.state["b"], run.state["x"]) == (-3, -1, 3.5)

    def test_float_to_int_truncates(self):
        assert interpret(parse("long a; a = 2.9;")).state["a"] == 2
        assert interpret(parse("long a; a = -2.9;")).state["a"] == -2

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZeroError) as info:
            interpret(parse("long a, b;\na = 1 / b;"), {"b": 0})
        assert info.value.line == 2
        with pytest.raises(DivisionByZeroError):
            interpret(parse("double x; x = 1.0 / 0.0;"))
        with pytest.raises(DivisionByZeroError):
            interpret(parse("long a; a = 5 % 0;"), {})

    def test_step_budget(self):
        with pytest.raises(StepBudgetExceededError):
            interpret(parse("long i, k; for (i = 0; i < 10; i = i + k) ;"), {"k": 0}, max_ops=10_000)

    def test_undefined_scalar_read(self):
        with pytest.raises(UndefinedValueError, match="'n'"):
            interpret(parse("long n, a; a = n + 1;"))

    def test_unwritten_array_cells_read_zero(self):
        assert interpret(parse("long a[3], b; b = a[2];")).state["b"] == 0

    def test_index_out_of_range(self):
        with pytest.raises(KernelRuntimeError, match="out of range"):
            interpret(parse("long a[3]; a[3] = 1;"))

    def test_array_inputs(self):
        run = interpret(parse("long m[2][2], s; s = m[0][1] + m[1][0];"), {"m": [[1, 2], [3, 4]]})
        assert run.state["s"] == 5
        with pytest.raises(KernelRuntimeError, match="shape"):
            interpret(parse("long m[2];"), {"m": [1, 2, 3]})

    def test_undeclared_input(self):
        with pytest.raises(KernelRuntimeError, match="not declared"):
            interpret(parse("long a;"), {"b": 1})

    def test_logic_and_unary_count(self):
        run = interpret(parse("long a, b; a = !(1 < 2) || (3 > 2); b = ~a;"))
        assert run.state == {"a": 1, "b": -2}
        assert run.tally == BopsTally(arithmetic=3, comparing=2)


class TestProperties:
    @given(st.integers(0, 2**31))
    def test_static_matches_dynamic_on_random_programs(self, seed):
        p = parse(kernel_corpus.generate(seed))
        s = count_static(p)
        assert s.exact
        assert s.tally == interpret(p).tally

    @given(st.integers(0, 2**31), st.data())
    def test_adding_a_statement_never_decreases_total(self, seed, data):
        src = kernel_corpus.generate(seed)
        extra = data.draw(st.sampled_from([
            "a = b;", "A[1] = a + 2;", "for (i = 0; i < 3; i++) x = x * 2.0;", "if (a < b) c = 1;", ";",
        ]))
        before = count_static(parse(src)).tally.total()
        assert count_static(parse(src + extra)).tally.total() >= before

    @given(st.integers(0, 2**31), st.integers(0, 40))
    def test_loop_linearity(self, seed, k):
        body = kernel_corpus.generate(seed).split(kernel_corpus.HEADER, 1)[1]
        header = kernel_corpus.HEADER + "long q;\n"
        assert count_static(parse(header)).tally.total() == 0
        inner = count_static(parse(header + body)).tally
        wrapped = count_static(parse(f"{header}for (q = 0; q < {k}; q++) {{\n{body}}}\n")).tally
        assert wrapped == inner.scaled(k) + BopsTally(arithmetic=k, comparing=k)

    @given(st.integers(1, 4), st.integers(0, 30))
    def test_addressing_dimensionality(self, m, trips):
        dims = "".join("[3]" for _ in range(m))
        idx = "".join("[1]" for _ in range(m))
        one = count_static(parse(f"long i, v, a[3], b{dims}; for (i = 0; i < {trips}; i++) v = a[1];")).tally
        many = count_static(parse(f"long i, v, a[3], b{dims}; for (i = 0; i < {trips}; i++) v = b{idx};")).tally
        assert many.addressing - one.addressing == (m - 1) * trips
        assert (many.arithmetic, many.comparing) == (one.arithmetic, one.comparing)
