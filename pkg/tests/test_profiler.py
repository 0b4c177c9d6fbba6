import csv

import numpy as np
import pytest

from app.errors import WorkloadError
from app.models.schemas import Variant
from app.services.matrix_io import dump_problem, write_tensor_dump
from app.services.profiler_service import (
    HISTOGRAM_CSV_COLUMNS,
    estimate_workload_latency,
    fraction_at_most,
    merge_stats,
    parse_maxima_spec,
    profile_maxima,
    stats_from_maxima,
    synthetic_corpus,
    value_at_percentile,
    write_histogram_csv,
)

# 8% нулевых, половина меньше 50, 90% меньше 80, средний максимум ровно 41
MAXIMA_MEAN_41 = [0] * 8 + [16] * 14 + [17] * 28 + [60] * 40 + [100] * 10


def test_small_histogram():
    stats = profile_maxima(synthetic_corpus([0, 41, 41]), w=8)
    assert stats.n_operations == 3
    assert stats.histogram[0] == 1
    assert stats.histogram[41] == 2
    assert stats.mean_max == pytest.approx(27.333, abs=1e-3)
    assert stats.cdf[-1] == 100.0


def test_zero_fraction_and_mean():
    stats = profile_maxima(synthetic_corpus(MAXIMA_MEAN_41, shape=(4, 4)), w=8)
    assert stats.cdf[0] == 8.0
    assert fraction_at_most(stats, 0) == 8.0
    assert stats.mean_max == 41.0
    assert value_at_percentile(stats, 8) == 0


def test_measured_distribution_holds_jointly():
    stats = stats_from_maxima(MAXIMA_MEAN_41, w=8)
    assert fraction_at_most(stats, 0) == 8.0
    assert fraction_at_most(stats, 49) == 50.0
    assert fraction_at_most(stats, 79) == 90.0
    assert value_at_percentile(stats, 50) == 17
    assert value_at_percentile(stats, 90) == 60
    assert stats.mean_max == 41.0


def test_worst_case_ratio_near_ten():
    stats = stats_from_maxima(MAXIMA_MEAN_41, w=8)
    summary = estimate_workload_latency(stats, 16, Variant.SERIAL)
    assert summary.worst_case_latency == 262144
    assert summary.latency_at_mean_max == 26896
    assert 9.5 <= summary.worst_case_ratio <= 10
    assert summary.per_operation_ratio < summary.worst_case_ratio


def test_synthetic_corpus_hits_requested_maxima():
    corpus = synthetic_corpus([0, 1, 77, 128], shape=(3, 5), w=8, seed=4)
    assert [int(np.abs(t).max()) for t in corpus] == [0, 1, 77, 128]
    assert corpus[3].min() == -128


def test_merge_is_order_independent():
    left = stats_from_maxima([1, 2, 2], w=4)
    right = stats_from_maxima([8, 0], w=4)
    assert merge_stats(left, right) == merge_stats(right, left) == stats_from_maxima([1, 2, 2, 8, 0], w=4)
    with pytest.raises(WorkloadError):
        merge_stats(left, stats_from_maxima([1], w=8))


def test_mixed_sources_agree(tmp_path, running_example):
    dump_problem(running_example, tmp_path / "problems" / "example.txt")
    write_tensor_dump(tmp_path / "dumps" / "a.tugw", running_example.a.to_array())
    write_tensor_dump(tmp_path / "dumps" / "b.tugw", running_example.b.to_array())
    from_problem = profile_maxima([tmp_path / "problems"], w=4)
    from_dumps = profile_maxima([tmp_path / "dumps"], w=4, workers=1)
    assert from_problem == from_dumps
    assert from_problem.n_operations == 2


def test_out_of_range_tensor(tmp_path):
    write_tensor_dump(tmp_path / "big.tugw", np.array([1, 200]))
    with pytest.raises(WorkloadError, match="big.tugw"):
        profile_maxima([tmp_path / "big.tugw"], w=8)


def test_unknown_file(tmp_path):
    (tmp_path / "noise.bin").write_bytes(b"\xff\xfe\x00")
    with pytest.raises(WorkloadError):
        profile_maxima([tmp_path / "noise.bin"], w=8)


def test_missing_source(tmp_path):
    with pytest.raises(WorkloadError):
        profile_maxima([tmp_path / "missing"], w=8)


def test_histogram_csv(tmp_path):
    stats = stats_from_maxima([0, 3, 3, 8], w=4)
    path = write_histogram_csv(stats, tmp_path / "hist.csv")
    with path.open() as f:
        rows = list(csv.reader(f))
    assert rows[0] == HISTOGRAM_CSV_COLUMNS
    assert len(rows) == 1 + 9
    assert rows[4] == ["3", "2", "50.0", "75.0"]


def test_parse_maxima_spec():
    assert parse_maxima_spec(["41:3", "0"]) == [41, 41, 41, 0]
    with pytest.raises(WorkloadError):
        parse_maxima_spec(["x:1"])


def test_single_zero_tensor():
    stats = profile_maxima([np.zeros((2, 3), dtype=np.int64)], w=8)
    assert stats.mean_max == 0.0
    assert stats.cdf[0] == 100.0


def test_matches_brute_force_rescan():
    corpus = synthetic_corpus([3, 17, 0, 100, 128, 64], shape=(2, 3, 4), w=8, seed=11)
    stats = profile_maxima(corpus, w=8)
    maxima = [max(abs(int(v)) for v in tensor.reshape(-1)) for tensor in corpus]
    assert stats.magnitude_sum == sum(maxima)
    for value, count in enumerate(stats.histogram):
        assert count == maxima.count(value)


def test_all_worst_case_bucket():
    summary = estimate_workload_latency(stats_from_maxima([128] * 5, w=8), 16, Variant.SERIAL)
    assert summary.mean_latency == 262144
    assert summary.worst_case_ratio == 1.0


def test_two_bucket_mean():
    stats = stats_from_maxima([0, 128], w=8)
    serial = estimate_workload_latency(stats, 16, Variant.SERIAL)
    parallel = estimate_workload_latency(stats, 16, Variant.PARALLEL)
    assert serial.mean_latency == (16 + 262144) / 2
    assert parallel.mean_latency == (1 + 16384) / 2


def test_empty_stats_rejected():
    with pytest.raises(WorkloadError):
        estimate_workload_latency(stats_from_maxima([], w=8), 16, Variant.SERIAL)
