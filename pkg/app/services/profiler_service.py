"""
Профилирование максимальных модулей рабочей нагрузки.

Операция = один тензор. Для каждого тензора берётся max |x|, по всем
операциям строятся гистограмма, кумулятивное распределение (в процентах)
и средний максимум, из которых выводится оценка средней задержки.

Источники: файлы .tugw, файлы задач (текст/JSON, дают две операции: A и B),
каталоги (все файлы по алфавиту) и массивы numpy в памяти.
"""
import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import get_settings
from app.errors import ProblemParseError, WorkloadError
from app.models.schemas import BitWidth, Variant, WorkloadLatencySummary, WorkloadStats
from app.services import latency_service
from app.services.matrix_io import decode_tensor_dump, is_tensor_dump, parse_problem

logger = logging.getLogger(__name__)

Source = Union[str, Path, np.ndarray]

HISTOGRAM_CSV_COLUMNS = ["value", "count", "percent", "cumulative_percent"]


# === Ingestion ===

def expand_sources(sources: Iterable[Source]) -> List[Source]:
    """Раскрыть каталоги в отсортированный список файлов"""
    expanded: List[Source] = []
    for source in sources:
        if isinstance(source, np.ndarray):
            expanded.append(source)
            continue
        path = Path(source)
        if path.is_dir():
            expanded.extend(sorted(p for p in path.iterdir() if p.is_file()))
        elif path.is_file():
            expanded.append(path)
        else:
            raise WorkloadError("файл не найден", str(path))
    return expanded


def load_tensors(source: Source) -> List[Tuple[str, np.ndarray]]:
    """Прочитать тензоры одного источника"""
    if isinstance(source, np.ndarray):
        return [("<array>", np.asarray(source, dtype=np.int64))]

    path = Path(source)
    return tensors_from_bytes(path.read_bytes(), str(path))


def tensors_from_bytes(content: bytes, name: str) -> List[Tuple[str, np.ndarray]]:
    """Разобрать содержимое файла: дамп .tugw или задача в текстовом/JSON формате"""
    if is_tensor_dump(content):
        return [(name, decode_tensor_dump(content, name))]
    try:
        problem = parse_problem(content.decode("ascii"), name)
    except UnicodeDecodeError:
        raise WorkloadError("неизвестный формат файла", name)
    except ProblemParseError as e:
        raise WorkloadError(str(e))
    # C только инициализирует выходные счётчики, в унарный код не переводится
    return [(f"{name}:a", problem.a.to_array()), (f"{name}:b", problem.b.to_array())]


def tensor_max(name: str, tensor: np.ndarray, width: BitWidth) -> int:
    """max |x| тензора с проверкой диапазона"""
    if tensor.size == 0:
        raise WorkloadError("пустой тензор", name)
    outside = np.argwhere((tensor < width.min_value) | (tensor > width.max_value))
    if len(outside):
        index = tuple(int(v) for v in outside[0])
        raise WorkloadError(
            f"элемент {index} = {int(tensor[index])} вне диапазона "
            f"[{width.min_value}, {width.max_value}] для w={width.w}",
            name,
        )
    return int(np.abs(tensor).max())


# === Statistics ===

def stats_from_histogram(histogram: Sequence[int], w: int) -> WorkloadStats:
    width = BitWidth(w=w)
    histogram = [int(v) for v in histogram]
    if len(histogram) != width.max_magnitude + 1:
        raise WorkloadError(f"гистограмма должна иметь {width.max_magnitude + 1} корзин")
    n_operations = sum(histogram)
    magnitude_sum = sum(value * count for value, count in enumerate(histogram))

    cdf = []
    running = 0
    for count in histogram:
        running += count
        cdf.append(float(Fraction(100 * running, n_operations)) if n_operations else 0.0)

    mean_max = float(Fraction(magnitude_sum, n_operations)) if n_operations else 0.0
    return WorkloadStats(
        width=w,
        histogram=tuple(histogram),
        cdf=tuple(cdf),
        mean_max=mean_max,
        n_operations=n_operations,
        magnitude_sum=magnitude_sum,
    )


def stats_from_maxima(maxima: Iterable[int], w: int) -> WorkloadStats:
    width = BitWidth(w=w)
    maxima = list(maxima)
    if any(not 0 <= v <= width.max_magnitude for v in maxima):
        raise WorkloadError(f"максимум вне диапазона 0..{width.max_magnitude}")
    histogram = np.bincount(np.asarray(maxima, dtype=np.int64), minlength=width.max_magnitude + 1)
    return stats_from_histogram(histogram, w)


def merge_stats(left: WorkloadStats, right: WorkloadStats) -> WorkloadStats:
    """Слияние частичных статистик; порядок не влияет на результат"""
    if left.width != right.width:
        raise WorkloadError(f"нельзя объединить статистики w={left.width} и w={right.width}")
    merged = [a + b for a, b in zip(left.histogram, right.histogram)]
    return stats_from_histogram(merged, left.width)


def _profile_source(source: Source, width: BitWidth) -> WorkloadStats:
    maxima = [tensor_max(name, tensor, width) for name, tensor in load_tensors(source)]
    return stats_from_maxima(maxima, width.w)


def profile_maxima(sources: Iterable[Source], w: int, workers: Optional[int] = None) -> WorkloadStats:
    """Построить гистограмму максимумов по всем тензорам источников"""
    width = BitWidth(w=w)
    expanded = expand_sources(sources)
    if not expanded:
        raise WorkloadError("источник не содержит ни одного тензора")

    workers = workers or get_settings().PROFILE_WORKERS
    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        partials = list(pool.map(lambda source: _profile_source(source, width), expanded))

    stats = stats_from_histogram([0] * (width.max_magnitude + 1), w)
    for partial in partials:
        stats = merge_stats(stats, partial)

    logger.info(
        f"✅ Profiled {stats.n_operations} operations from {len(expanded)} sources: "
        f"mean max {stats.mean_max:.2f}"
    )
    return stats


def fraction_at_most(stats: WorkloadStats, value: int) -> float:
    """Процент операций с максимумом <= value"""
    if value < 0:
        return 0.0
    return stats.cdf[min(value, len(stats.cdf) - 1)]


def value_at_percentile(stats: WorkloadStats, percent: float) -> int:
    """Наименьшее значение, до которого включительно набирается percent операций"""
    if stats.n_operations == 0:
        raise WorkloadError("статистика пуста")
    for value, cumulative in enumerate(stats.cdf):
        if cumulative >= percent:
            return value
    return len(stats.cdf) - 1


# === Latency ===

def estimate_workload_latency(stats: WorkloadStats, n: int, variant: Variant) -> WorkloadLatencySummary:
    """
    Оценка средней задержки по гистограмме.

    mean_latency усредняет оценку по корзинам гистограммы. worst_case_ratio
    сравнивает худший случай с задержкой при среднем максимуме, как
    (128/41)^2 ~ 9.75 для INT8.
    """
    if stats.n_operations == 0:
        raise WorkloadError("статистика пуста")
    variant = Variant(variant)

    total = sum(
        count * latency_service.avg_latency_from_max(value, n, variant)
        for value, count in enumerate(stats.histogram)
        if count
    )
    mean_latency = Fraction(total, stats.n_operations)
    at_mean = latency_service.latency_at_mean(stats.mean_max_fraction, n, variant)
    worst = latency_service.worst_case_latency(n, stats.width, variant)

    return WorkloadLatencySummary(
        variant=variant,
        n=n,
        width=stats.width,
        mean_max=stats.mean_max,
        mean_latency=float(mean_latency),
        latency_at_mean_max=float(at_mean),
        worst_case_latency=worst,
        worst_case_ratio=float(Fraction(worst) / at_mean),
        per_operation_ratio=float(Fraction(worst) / mean_latency),
    )


# === Output ===

def write_histogram_csv(stats: WorkloadStats, path: Union[str, Path]) -> Path:
    """CSV: value, count, percent, cumulative_percent"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(HISTOGRAM_CSV_COLUMNS)
        for value, (count, cumulative) in enumerate(zip(stats.histogram, stats.cdf)):
            percent = float(Fraction(100 * count, stats.n_operations)) if stats.n_operations else 0.0
            writer.writerow([value, count, percent, cumulative])
    return path


# === Synthetic corpora ===

def parse_maxima_spec(specs: Iterable[str]) -> List[int]:
    """'41:10' -> десять операций с максимумом 41"""
    maxima: List[int] = []
    for spec in specs:
        value, _, count = spec.partition(":")
        try:
            maxima.extend([int(value)] * (int(count) if count else 1))
        except ValueError:
            raise WorkloadError(f"ожидалось VALUE[:COUNT], получено {spec!r}")
    return maxima


def synthetic_corpus(
    maxima: Sequence[int],
    shape: Tuple[int, ...] = (8, 8),
    w: int = 8,
    seed: int = 0,
) -> List[np.ndarray]:
    """Тензоры, у которых max |x| в точности равен заданным значениям"""
    width = BitWidth(w=w)
    rng = np.random.Generator(np.random.PCG64(seed))
    corpus = []
    for value in maxima:
        if not 0 <= value <= width.max_magnitude:
            raise WorkloadError(f"максимум {value} вне диапазона 0..{width.max_magnitude}")
        hi = min(value, width.max_value)
        tensor = rng.integers(-value, hi, size=shape, dtype=np.int64, endpoint=True)
        # Один элемент с точным модулем value; +value не представим для 2^(w-1)
        if value == width.max_magnitude or rng.integers(0, 2):
            pinned = -value
        else:
            pinned = value
        tensor.reshape(-1)[rng.integers(0, tensor.size)] = pinned
        corpus.append(tensor)
    return corpus
