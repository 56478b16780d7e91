import math
import random

import numpy as np
import pytest

import sort_oracle
from bops.core import BopsTally, operation_intensity
from bops.kernel import count_static, parse
from bops.workloads import (
    Mode,
    RunConfig,
    SortVerificationError,
    Workload,
    measure_stream_triad,
    run_sort,
    run_stream_triad,
    triad_tally,
)
from bops.workloads import sort as sortmod


def counting(n, seed=0, threads=1):
    return run_sort(RunConfig(Workload.SORT, n, seed, threads, Mode.COUNTING))


class TestSortKernels:
    def test_two_elements(self):
        out, acc, _ = sortmod.sort_array(np.array([5, 3], np.int64), 1, True)
        tally, _ = acc.merged()
        assert out.tolist() == [3, 5]
        assert tally.comparing >= 1 and tally.total() > 0

    @pytest.mark.parametrize("n, threads, seed", [
        (2, 1, 0), (3, 2, 1), (16, 1, 2), (17, 1, 3), (64, 3, 4), (500, 1, 5), (1000, 4, 6),
        (2049, 7, 7), (4000, 2, 8),
    ])
    def test_counts_match_overloading_oracle(self, n, threads, seed):
        data = sortmod.generate_input(n, seed)
        expected, oracle = sort_oracle.sort_counted(data.tolist(), threads)
        out, acc, _ = sortmod.sort_array(data.copy(), threads, True)
        tally, accesses = acc.merged()
        assert out.tolist() == expected == sorted(data.tolist())
        assert (tally.arithmetic, tally.comparing, tally.addressing) == oracle.as_tuple()
        assert accesses == oracle.data

    @pytest.mark.parametrize("data", [
        [7] * 100, list(range(300)), list(range(300, 0, -1)), [1, 2] * 150,
        [2**63 - 1, -(2**63), 0] * 40,
    ])
    def test_adversarial_inputs(self, data):
        arr = np.array(data, np.int64)
        for counting_mode in (True, False):
            out, _, _ = sortmod.sort_array(arr.copy(), 3, counting_mode)
            assert out.tolist() == sorted(data)

    def test_timing_mode_matches_counting_output(self):
        data = sortmod.generate_input(20_000, 9)
        a, _, _ = sortmod.sort_array(data.copy(), 4, True)
        b, acc, _ = sortmod.sort_array(data.copy(), 4, False)
        assert np.array_equal(a, b)
        assert acc.merged()[0].total() == 0

    def test_accumulator_merge_is_exact_sum(self):
        acc = sortmod.TallyAccumulator.for_workers(3)
        for k, slot in enumerate(acc.slots):
            slot[:] = [k + 1, 10 * (k + 1), 100 * (k + 1), 7]
        assert acc.merged() == (BopsTally(6, 60, 600), 21)


class TestInput:
    def test_reproducible(self):
        assert np.array_equal(sortmod.generate_input(100_000, 42), sortmod.generate_input(100_000, 42))
        assert not np.array_equal(sortmod.generate_input(1000, 1), sortmod.generate_input(1000, 2))

    def test_prefix_stable_across_sizes(self):
        small, big = sortmod.generate_input(70_000, 5), sortmod.generate_input(140_000, 5)
        assert np.array_equal(small[:65536], big[:65536])

    def test_negative_seed_accepted(self):
        assert len(sortmod.generate_input(10, -1)) == 10

    def test_checksum_sees_changes(self):
        a = sortmod.generate_input(1000, 3)
        perm = np.random.default_rng(0).permutation(a)
        assert sortmod.multiset_checksum(a) == sortmod.multiset_checksum(perm)
        b = a.copy()
        b[10] += 1
        assert sortmod.multiset_checksum(a) != sortmod.multiset_checksum(b)
        c = a.copy()
        c[1] = c[0]
        assert sortmod.multiset_checksum(a) != sortmod.multiset_checksum(c)


class TestRunSort:
    def test_counting_record(self):
        m = counting(50_000, 1, 4)
        assert m.workload == "sort" and m.threads == 4
        assert m.meta["verified"] == 1 and m.meta["mode"] == "counting"
        assert m.wall_time_s > 0 and m.bytes_accessed > 0
        assert 0 < operation_intensity(m) < 10

    def test_tally_deterministic(self):
        assert counting(30_000, 11, 3).tally == counting(30_000, 11, 3).tally

    @pytest.mark.parametrize("n, threads", [(5000, 1), (5000, 4), (100_000, 8)])
    def test_class_ordering(self, n, threads):
        t = counting(n, 2, threads).tally
        assert t.addressing > t.arithmetic > t.comparing

    def test_nlogn_scaling(self):
        n = 200_000
        ratio = counting(2 * n, 4).tally.total() / counting(n, 4).tally.total()
        expected = 2 * math.log(2 * n) / math.log(n)
        assert abs(ratio / expected - 1) <= 0.15

    def test_timing_reuses_counting_tally(self):
        ref = counting(40_000, 6, 2)
        timed = run_sort(RunConfig(Workload.SORT, 40_000, 6, 2, Mode.TIMING))
        assert timed.tally == ref.tally and timed.bytes_accessed == ref.bytes_accessed
        assert timed.meta["tally_source"] == "counting-run"
        via_ref = run_sort(RunConfig(Workload.SORT, 40_000, 6, 2, Mode.TIMING), reference=ref)
        assert via_ref.tally == ref.tally and via_ref.meta["tally_source"] == "reference"

    def test_reference_from_another_config_rejected(self):
        ref = counting(2000, 1, 2)
        for cfg in (RunConfig(Workload.SORT, 3000, 1, 2, Mode.TIMING), RunConfig(Workload.SORT, 2000, 9, 2, Mode.TIMING),
                    RunConfig(Workload.SORT, 2000, 1, 3, Mode.TIMING)):
            with pytest.raises(ValueError, match="reference"):
                run_sort(cfg, reference=ref)

    def test_verification_failure_is_fatal(self, monkeypatch):
        def broken(data, threads, counting_mode):
            out, acc, t = real(data, threads, counting_mode)
            out[0], out[-1] = out[-1], out[0]
            return out, acc, t

        real = sortmod.sort_array
        monkeypatch.setattr(sortmod, "sort_array", broken)
        with pytest.raises(SortVerificationError, match="ascending"):
            counting(1000)

        def lossy(data, threads, counting_mode):
            out, acc, t = real(data, threads, counting_mode)
            out[1] = out[0]
            return out, acc, t

        monkeypatch.setattr(sortmod, "sort_array", lossy)
        with pytest.raises(SortVerificationError, match="permutation"):
            counting(1000, 1)

    def test_randomized_configs(self):
        rng = random.Random(1234)
        for _ in range(12):
            n, threads = rng.randint(2, 30_000), rng.randint(1, 9)
            mode = rng.choice(list(Mode))
            m = run_sort(RunConfig(Workload.SORT, n, rng.getrandbits(64), threads, mode))
            assert m.meta["verified"] == 1

    @pytest.mark.parametrize("kw", [
        dict(n_elements=1), dict(n_elements=0), dict(threads=0), dict(iterations=0), dict(seed=2**64),
    ])
    def test_config_validation(self, kw):
        base = dict(workload=Workload.SORT, n_elements=10)
        base.update(kw)
        with pytest.raises(ValueError):
            RunConfig(**base)

    def test_wrong_workload(self):
        with pytest.raises(ValueError):
            run_sort(RunConfig(Workload.STREAM_TRIAD, 10))
        with pytest.raises(ValueError):
            run_stream_triad(RunConfig(Workload.SORT, 10))


class TestTriad:
    def test_positive_bandwidth(self):
        assert run_stream_triad(RunConfig(Workload.STREAM_TRIAD, 1_000_000, iterations=3)) > 0

    def test_threads(self):
        assert run_stream_triad(RunConfig(Workload.STREAM_TRIAD, 1_000_000, threads=3, iterations=2)) > 0

    def test_cache_factor_enforced(self):
        with pytest.raises(ValueError, match="4x"):
            run_stream_triad(RunConfig(Workload.STREAM_TRIAD, 1000, cache_bytes=1 << 20))

    def test_tally_matches_kernel_language_count(self):
        n = 37
        src = f"long i; double s, a[{n}], b[{n}], c[{n}]; s = 3.0;" \
              f"for (i = 0; i < {n}; i++) a[i] = b[i] + s * c[i];"
        assert count_static(parse(src)).tally == triad_tally(n)

    def test_measurement(self):
        m = measure_stream_triad(RunConfig(Workload.STREAM_TRIAD, 500_000, iterations=3))
        assert m.bytes_accessed == 24 * 500_000
        assert m.bytes_accessed / m.wall_time_s == pytest.approx(m.meta["bandwidth_bytes_per_s"])
        assert m.tally == triad_tally(500_000)
