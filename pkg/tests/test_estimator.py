import pytest
from hypothesis import given
from hypothesis import strategies as st

from bops.estimator import (
    REQUIRED_COUNTERS,
    CounterDump,
    CounterFormatError,
    EstimatorProfile,
    MissingCountersError,
    default_mapping,
    deviation,
    estimate_bops,
    format_counter_export,
    identity_mapping,
    load_profile,
    parse_counter_export,
    parse_mapping,
)


def dump(**counters):
    base = dict.fromkeys(REQUIRED_COUNTERS, 0)
    base.update(counters)
    return CounterDump(base)


def test_synthetic_dump():
    d = dump(Integer_Ins=100, SSE_Integer=10, FP_Ins=5, SSE_Scalar=2, SSE_Packed=3)
    assert estimate_bops(d) == 133


def test_zero_and_integer_identity():
    assert estimate_bops(dump()) == 0
    assert estimate_bops(dump(Integer_Ins=10**6)) == 10**6


def test_missing_counters_listed():
    with pytest.raises(MissingCountersError) as info:
        estimate_bops(CounterDump({"Integer_Ins": 7, "FP_Ins": 3}))
    assert info.value.missing == ("SSE_Integer", "SSE_Scalar", "SSE_Packed")


def test_negative_counter_rejected():
    with pytest.raises(CounterFormatError):
        dump(FP_Ins=-1)


def test_wide_vector_profile():
    d = dump(SSE_Integer=10, SSE_Packed=3)
    assert estimate_bops(d, EstimatorProfile.for_vector_width(256)) == 52
    assert estimate_bops(d, EstimatorProfile.for_vector_width(128)) == 26


def test_profile_validation(tmp_path):
    with pytest.raises(ValueError):
        EstimatorProfile(packed_fp_multiplier=0)
    path = tmp_path / "p.profile"
    path.write_text("schema_version = 1\npacked_fp_multiplier = 4\n")
    assert load_profile(path) == EstimatorProfile(packed_fp_multiplier=4)
    path.write_text("schema_version = 1\nwidth = 4\n")
    with pytest.raises(ValueError, match="width"):
        load_profile(path)


def test_deviation():
    assert deviation(108, 100) == 0.08
    assert deviation(77, 77) == 0
    assert deviation(133, 120) == pytest.approx(0.1083, abs=1e-4)
    with pytest.raises(ValueError):
        deviation(1, 0)


@given(st.sampled_from(REQUIRED_COUNTERS), st.dictionaries(st.sampled_from(REQUIRED_COUNTERS),
                                                            st.integers(0, 2**40)))
def test_linear_in_every_counter(name, values):
    d = dump(**values)
    doubled = dump(**{**values, name: 2 * d.counters[name]})
    mult = {"Integer_Ins": 1, "SSE_Integer": 2, "FP_Ins": 1, "SSE_Scalar": 1, "SSE_Packed": 2}[name]
    assert estimate_bops(doubled) - estimate_bops(d) == mult * d.counters[name]


@given(st.integers(1, 10**6), st.integers(0, 10**6))
def test_deviation_uses_reference_denominator(ref, delta):
    assert deviation(ref + delta, ref) == deviation(ref - delta, ref)


class TestParsing:
    def test_two_line_file(self):
        d = parse_counter_export("ev.int,7\nev.fp,3\n", {"ev.int": "Integer_Ins", "ev.fp": "FP_Ins"})
        assert d.counters == {"Integer_Ins": 7, "FP_Ins": 3}
        assert d.warnings == ()

    def test_empty_file(self):
        with pytest.raises(MissingCountersError, match="missing required counters"):
            parse_counter_export("", identity_mapping())

    def test_unmapped_event_warns(self):
        d = parse_counter_export("Integer_Ins,1\nMYSTERY_EVENT,5\n", identity_mapping())
        assert d.counters == {"Integer_Ins": 1}
        assert any("MYSTERY_EVENT" in w for w in d.warnings)

    @pytest.mark.parametrize("text, line", [
        ("Integer_Ins,1\nFP_Ins\n", 2),
        ("Integer_Ins,1\nFP_Ins,1.5\n", 2),
        ("Integer_Ins,x\n", 1),
        ("# c\n\nFP_Ins,-3\n", 3),
        ("a,1,2\n", 1),
    ])
    def test_malformed_line_number(self, text, line):
        with pytest.raises(CounterFormatError, match=f"line {line}"):
            parse_counter_export(text, identity_mapping())

    def test_duplicate_logical_counter(self):
        mapping = {"a": "Integer_Ins", "b": "Integer_Ins"}
        with pytest.raises(CounterFormatError, match="duplicate logical counter"):
            parse_counter_export("a,1\nb,2\n", mapping)

    def test_duplicate_raw_event(self):
        with pytest.raises(CounterFormatError, match="twice"):
            parse_counter_export("Integer_Ins,1\nInteger_Ins,1\n", identity_mapping())

    def test_whitespace_separated(self):
        assert parse_counter_export("Integer_Ins   42\n", identity_mapping()).counters == {"Integer_Ins": 42}

    def test_header_metadata(self, fixtures):
        d = parse_counter_export((fixtures / "counters" / "westmere_sort.csv").read_text(), default_mapping())
        assert (d.machine, d.workload, d.duration_s) == ("E5645", "sort", 2.0)
        assert estimate_bops(d) == 133
        assert len(d.warnings) == 1

    def test_version_checked(self):
        with pytest.raises(CounterFormatError, match="schema_version"):
            parse_counter_export("# schema_version: 2\nInteger_Ins,1\n", identity_mapping())

    def test_default_mapping_covers_required(self):
        assert set(default_mapping().values()) == set(REQUIRED_COUNTERS)

    def test_mapping_conflict(self):
        with pytest.raises(CounterFormatError):
            parse_mapping("a,Integer_Ins\na,FP_Ins\n")

    @given(st.dictionaries(st.sampled_from(REQUIRED_COUNTERS), st.integers(0, 2**63), min_size=1),
           st.sampled_from(["", "E5645"]), st.sampled_from(["", "sort"]),
           st.one_of(st.none(), st.floats(0.001, 1e4)))
    def test_round_trip(self, counters, machine, workload, duration):
        d = CounterDump(counters, machine, workload, duration)
        assert parse_counter_export(format_counter_export(d), identity_mapping()) == d
