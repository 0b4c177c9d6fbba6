"""
Pydantic модели предметной области и отчётов
"""
from datetime import datetime
from enum import Enum
from fractions import Fraction
from typing import Optional, List, Any, Dict, Tuple, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Variant(str, Enum):
    """Вариант архитектуры"""
    SERIAL = "serial"
    PARALLEL = "parallel"


# === Core Models ===

class BitWidth(BaseModel):
    """Разрядность входов в дополнительном коде"""
    model_config = ConfigDict(frozen=True)

    w: int = Field(..., ge=2)

    @property
    def min_value(self) -> int:
        return -(1 << (self.w - 1))

    @property
    def max_value(self) -> int:
        return (1 << (self.w - 1)) - 1

    @property
    def max_magnitude(self) -> int:
        """Наибольший модуль, достигается только самым отрицательным значением"""
        return 1 << (self.w - 1)

    def contains(self, value: int) -> bool:
        return self.min_value <= value <= self.max_value


class Matrix(BaseModel):
    """Плотная целочисленная матрица, данные построчно"""
    model_config = ConfigDict(frozen=True)

    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    data: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_size(self):
        if len(self.data) != self.rows * self.cols:
            raise ValueError(
                f"data содержит {len(self.data)} элементов, ожидалось {self.rows}x{self.cols}"
            )
        return self

    @classmethod
    def from_rows(cls, rows: List[List[int]]) -> "Matrix":
        if not rows or not rows[0]:
            raise ValueError("Матрица должна содержать хотя бы один элемент")
        width = len(rows[0])
        for r, row in enumerate(rows):
            if len(row) != width:
                raise ValueError(f"Строка {r} содержит {len(row)} элементов, ожидалось {width}")
        return cls(rows=len(rows), cols=width, data=tuple(int(v) for row in rows for v in row))

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Matrix":
        array = np.asarray(array)
        rows, cols = array.shape
        return cls(rows=rows, cols=cols, data=tuple(int(v) for v in array.reshape(-1)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows=rows, cols=cols, data=(0,) * (rows * cols))

    @classmethod
    def identity(cls, size: int) -> "Matrix":
        return cls(
            rows=size,
            cols=size,
            data=tuple(1 if r == c else 0 for r in range(size) for c in range(size)),
        )

    def at(self, r: int, c: int) -> int:
        return self.data[r * self.cols + c]

    def row(self, r: int) -> Tuple[int, ...]:
        return self.data[r * self.cols:(r + 1) * self.cols]

    def column(self, c: int) -> Tuple[int, ...]:
        return self.data[c::self.cols]

    def to_rows(self) -> List[List[int]]:
        return [list(self.row(r)) for r in range(self.rows)]

    def to_array(self) -> np.ndarray:
        return np.array(self.data, dtype=np.int64).reshape(self.rows, self.cols)

    def max_abs(self) -> int:
        return max(abs(v) for v in self.data)


class GemmProblem(BaseModel):
    """Один экземпляр Y = AB + C"""
    model_config = ConfigDict(frozen=True)

    a: Matrix
    b: Matrix
    c: Matrix
    width: BitWidth

    @field_validator("width", mode="before")
    @classmethod
    def _coerce_width(cls, value: Any) -> Any:
        if isinstance(value, int):
            return BitWidth(w=value)
        return value

    @property
    def m(self) -> int:
        return self.a.rows

    @property
    def n(self) -> int:
        return self.a.cols

    @property
    def p(self) -> int:
        return self.b.cols


class ValidationVerdict(BaseModel):
    """Результат validate_problem"""
    ok: bool
    kind: Optional[Literal["dimension", "range", "width"]] = None
    message: str = "ok"
    matrix: Optional[str] = None
    index: Optional[Tuple[int, int]] = None


class OutputWidthPolicy(BaseModel):
    """Разрядность выходных регистров: без ограничения или фиксированная"""
    model_config = ConfigDict(frozen=True)

    mode: Literal["unbounded", "fixed"] = "unbounded"
    bits: Optional[int] = Field(None, ge=2)

    @model_validator(mode="after")
    def _check_bits(self):
        if self.mode == "fixed" and self.bits is None:
            raise ValueError("Для режима fixed нужно указать bits")
        if self.mode == "unbounded" and self.bits is not None:
            raise ValueError("Режим unbounded не принимает bits")
        return self

    @classmethod
    def unbounded(cls) -> "OutputWidthPolicy":
        return cls()

    @classmethod
    def fixed(cls, bits: int) -> "OutputWidthPolicy":
        return cls(mode="fixed", bits=bits)

    @property
    def is_fixed(self) -> bool:
        return self.mode == "fixed"

    @property
    def bounds(self) -> Optional[Tuple[int, int]]:
        if not self.is_fixed:
            return None
        return -(1 << (self.bits - 1)), (1 << (self.bits - 1)) - 1


# === Simulation Models ===

class ActivityStats(BaseModel):
    """Счётчики активности одного прогона"""
    output_cell_updates: int = Field(0, ge=0)
    positive_updates: int = Field(0, ge=0)
    negative_updates: int = Field(0, ge=0)
    unary_signal_transitions: int = Field(0, ge=0)
    counter_loads: int = Field(0, ge=0)
    line_loads: int = Field(0, ge=0)


class SimResult(BaseModel):
    variant: Variant
    y: Matrix
    cycles: int = Field(..., ge=0)
    activity: ActivityStats
    # serial: такты каждого шага; parallel: такты каждого векторного счётчика
    step_cycles: Tuple[int, ...] = ()
    engine: str = "event"
    # Переходы и загрузки каждой унарной линии: сначала линии столбцов, затем строк
    line_transitions: Tuple[int, ...] = ()
    line_loads: Tuple[int, ...] = ()


class LatencyBreakdown(BaseModel):
    per_step: Tuple[int, ...]
    serial_total: int
    parallel_total: int

    @model_validator(mode="after")
    def _check_totals(self):
        if any(step < 1 for step in self.per_step):
            raise ValueError("Каждый шаг занимает не меньше одного такта")
        if self.serial_total != sum(self.per_step):
            raise ValueError("serial_total должен быть суммой per_step")
        if self.parallel_total != max(max(self.per_step, default=0), 1):
            raise ValueError("parallel_total должен быть максимумом per_step")
        return self

    @classmethod
    def from_steps(cls, per_step: List[int]) -> "LatencyBreakdown":
        return cls(
            per_step=tuple(per_step),
            serial_total=sum(per_step),
            parallel_total=max(max(per_step, default=0), 1),
        )


class HardwareInventory(BaseModel):
    """Количество аппаратных блоков варианта (без площади и мощности)"""
    variant: Variant
    m: int
    n: int
    p: int
    index_counters: int
    vector_generators: int
    column_counters: int
    row_counters: int
    vector_counters: int
    output_cells: int
    output_cell_kind: Literal["counter", "adder"]
    unary_lines: int
    neg_lines: int


# === Profiler Models ===

class WorkloadStats(BaseModel):
    width: int
    histogram: Tuple[int, ...]
    cdf: Tuple[float, ...]
    mean_max: float
    n_operations: int = Field(..., ge=0)
    magnitude_sum: int = Field(0, ge=0)

    @property
    def mean_max_fraction(self) -> Fraction:
        if self.n_operations == 0:
            return Fraction(0)
        return Fraction(self.magnitude_sum, self.n_operations)


class WorkloadLatencySummary(BaseModel):
    variant: Variant
    n: int
    width: int
    mean_max: float
    mean_latency: float
    latency_at_mean_max: float
    worst_case_latency: int
    worst_case_ratio: float
    per_operation_ratio: float


# === Reports ===

REPORT_SCHEMA_VERSION = 1


class RunConfig(BaseModel):
    """Параметры команды simulate"""
    variant: Literal["serial", "parallel", "both"] = "both"
    m: Optional[int] = Field(None, ge=1)
    n: Optional[int] = Field(None, ge=1)
    p: Optional[int] = Field(None, ge=1)
    w: Optional[int] = Field(None, ge=2)
    input_path: Optional[str] = None
    seed: Optional[int] = None
    output_bits: Optional[int] = Field(None, ge=2)
    trace: Optional[str] = None
    output: Optional[str] = None
    engine: str = "auto"

    @model_validator(mode="after")
    def _check_source(self):
        if (self.input_path is None) == (self.seed is None):
            raise ValueError("Нужно указать ровно один источник: input_path или seed")
        if self.seed is not None and None in (self.m, self.n, self.p, self.w):
            raise ValueError("Для генерации по seed нужны m, n, p и w")
        return self

    @property
    def variants(self) -> List[Variant]:
        if self.variant == "both":
            return [Variant.SERIAL, Variant.PARALLEL]
        return [Variant(self.variant)]

    @property
    def policy(self) -> OutputWidthPolicy:
        if self.output_bits is None:
            return OutputWidthPolicy.unbounded()
        return OutputWidthPolicy.fixed(self.output_bits)


class VariantReport(BaseModel):
    y: List[List[int]]
    cycles: int
    activity: ActivityStats
    step_cycles: List[int]
    engine: str
    hardware: HardwareInventory


class SimulateReport(BaseModel):
    schema_version: int = REPORT_SCHEMA_VERSION
    config: Dict[str, Any]
    results: Dict[str, VariantReport]
    latency_breakdown: LatencyBreakdown
    max_abs_output: int


class MismatchRecord(BaseModel):
    trial: int
    seed: int
    dims: Tuple[int, int, int]
    width: int
    failed_checks: List[str]
    reproducer: Optional[str] = None


class VerifySummary(BaseModel):
    schema_version: int = REPORT_SCHEMA_VERSION
    config: Dict[str, Any]
    trials: int
    passed: int
    failed: int
    mismatches: List[MismatchRecord] = []


# === API Models ===

class ProblemPayload(BaseModel):
    """JSON-представление задачи: {m, n, p, w, a, b, c}"""
    m: int = Field(..., ge=1, example=2)
    n: int = Field(..., ge=1, example=2)
    p: int = Field(..., ge=1, example=2)
    w: int = Field(..., ge=2, example=4)
    a: List[List[int]] = Field(..., example=[[3, -2], [1, 0]])
    b: List[List[int]] = Field(..., example=[[2, 1], [-1, 2]])
    c: List[List[int]] = Field(..., example=[[0, 0], [0, 0]])


class SimulateRequest(BaseModel):
    problem: Optional[ProblemPayload] = None
    seed: Optional[int] = None
    m: Optional[int] = Field(None, ge=1)
    n: Optional[int] = Field(None, ge=1)
    p: Optional[int] = Field(None, ge=1)
    w: Optional[int] = Field(None, ge=2)
    variant: Literal["serial", "parallel", "both"] = "both"
    output_bits: Optional[int] = Field(None, ge=2)


class ProfileResponse(BaseModel):
    schema_version: int = REPORT_SCHEMA_VERSION
    config: Dict[str, Any]
    stats: WorkloadStats
    summary: WorkloadLatencySummary


class LatencyReport(BaseModel):
    """Отчёт команды latency: таблица худших случаев либо разбивка задачи"""
    schema_version: int = REPORT_SCHEMA_VERSION
    config: Dict[str, Any]
    rows: List[Dict[str, int]] = []
    latency_breakdown: Optional[LatencyBreakdown] = None


# === Health ===

class HealthResponse(BaseModel):
    status: str
    project: str
    timestamp: datetime
    engine: str


class ErrorResponse(BaseModel):
    error: str
    detail: Optional[str] = None
    timestamp: datetime
