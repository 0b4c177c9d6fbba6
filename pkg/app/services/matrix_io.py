"""
Форматы файлов задач и тензоров.

Текстовый формат задачи: первая строка `M N P w`, затем M строк по N чисел (A),
N строк по P чисел (B), M строк по P чисел (C). Пустые строки пропускаются.
JSON-формат: {"m", "n", "p", "w", "a", "b", "c"} с вложенными массивами.

Бинарный дамп тензора .tugw (little-endian):
    0..3    magic b"TUGW"
    4       ширина элемента в байтах: 1, 2 или 4
    5       ранг: 1..4
    6..7    резерв, всегда 0
    8..15   четыре uint16 размерности, неиспользуемые равны 0
    16..    prod(dims) знаковых целых заданной ширины
"""
import json
import logging
import math
import struct
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from pydantic import ValidationError

from app.errors import ProblemParseError, WorkloadError
from app.models.schemas import GemmProblem, Matrix, ProblemPayload

logger = logging.getLogger(__name__)

TUGW_MAGIC = b"TUGW"
TUGW_HEADER = struct.Struct("<4sBBH4H")
TUGW_MAX_RANK = 4
TUGW_ELEMENT_BYTES = (1, 2, 4)


# === Problems ===

def _numbered_lines(text: str) -> List[Tuple[int, str]]:
    return [(no, line) for no, line in enumerate(text.splitlines(), start=1) if line.strip()]


def _parse_ints(line_no: int, line: str, expected: int, path: str = None) -> List[int]:
    tokens = line.split()
    try:
        values = [int(tok) for tok in tokens]
    except ValueError:
        raise ProblemParseError(f"ожидались целые числа: {line.strip()!r}", line=line_no, path=path)
    if len(values) != expected:
        raise ProblemParseError(
            f"ожидалось {expected} чисел, получено {len(values)}", line=line_no, path=path
        )
    return values


def parse_problem_text(text: str, path: str = None) -> GemmProblem:
    """Разобрать текстовый формат задачи"""
    lines = _numbered_lines(text)
    if not lines:
        raise ProblemParseError("пустой файл", line=1, path=path)

    header_no, header = lines[0]
    m, n, p, w = _parse_ints(header_no, header, 4, path)
    if min(m, n, p) < 1:
        raise ProblemParseError(f"размеры должны быть >= 1: {m} {n} {p}", line=header_no, path=path)

    cursor = 1

    def read_block(rows: int, cols: int) -> List[List[int]]:
        nonlocal cursor
        block = []
        for _ in range(rows):
            if cursor >= len(lines):
                last = lines[-1][0]
                raise ProblemParseError("неожиданный конец файла", line=last + 1, path=path)
            line_no, line = lines[cursor]
            block.append(_parse_ints(line_no, line, cols, path))
            cursor += 1
        return block

    a = read_block(m, n)
    b = read_block(n, p)
    c = read_block(m, p)
    if cursor < len(lines):
        raise ProblemParseError("лишние строки после матрицы C", line=lines[cursor][0], path=path)

    try:
        return GemmProblem(a=Matrix.from_rows(a), b=Matrix.from_rows(b), c=Matrix.from_rows(c), width=w)
    except ValidationError as e:
        raise ProblemParseError(str(e), line=header_no, path=path)


def payload_to_problem(payload: ProblemPayload, path: str = None) -> GemmProblem:
    """Преобразовать JSON-представление в GemmProblem с проверкой заявленных размеров"""
    expected = {"a": (payload.m, payload.n), "b": (payload.n, payload.p), "c": (payload.m, payload.p)}
    matrices = {}
    for name, (rows, cols) in expected.items():
        data = getattr(payload, name)
        if len(data) != rows or any(len(row) != cols for row in data):
            raise ProblemParseError(f"матрица {name} должна быть {rows}x{cols}", path=path)
        matrices[name] = Matrix.from_rows(data)
    return GemmProblem(width=payload.w, **matrices)


def problem_to_payload(problem: GemmProblem) -> ProblemPayload:
    return ProblemPayload(
        m=problem.m,
        n=problem.n,
        p=problem.p,
        w=problem.width.w,
        a=problem.a.to_rows(),
        b=problem.b.to_rows(),
        c=problem.c.to_rows(),
    )


def parse_problem_json(text: str, path: str = None) -> GemmProblem:
    """Разобрать JSON-формат задачи"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemParseError(e.msg, line=e.lineno, path=path)
    try:
        payload = ProblemPayload.model_validate(raw)
    except ValidationError as e:
        raise ProblemParseError(str(e), path=path)
    return payload_to_problem(payload, path)


def parse_problem(text: str, path: str = None) -> GemmProblem:
    """Определить формат по содержимому и разобрать"""
    if text.lstrip().startswith("{"):
        return parse_problem_json(text, path)
    return parse_problem_text(text, path)


def load_problem(path: Union[str, Path]) -> GemmProblem:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except UnicodeDecodeError:
        raise ProblemParseError("файл не является ASCII-текстом", path=str(path))
    except OSError as e:
        raise ProblemParseError(f"не удалось прочитать файл: {e}", path=str(path))
    problem = parse_problem(text, str(path))
    logger.debug(f"Loaded problem {problem.m}x{problem.n}x{problem.p} w={problem.width.w} from {path}")
    return problem


def format_problem_text(problem: GemmProblem) -> str:
    """Сериализовать задачу в текстовый формат"""
    lines = [f"{problem.m} {problem.n} {problem.p} {problem.width.w}"]
    for matrix in (problem.a, problem.b, problem.c):
        for row in matrix.to_rows():
            lines.append(" ".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def format_problem_json(problem: GemmProblem) -> str:
    return problem_to_payload(problem).model_dump_json(indent=2)


def dump_problem(problem: GemmProblem, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".json":
        path.write_text(format_problem_json(problem), encoding="ascii")
    else:
        path.write_text(format_problem_text(problem), encoding="ascii")
    return path


# === Tensor dumps ===

def is_tensor_dump(content: bytes) -> bool:
    return content[:4] == TUGW_MAGIC


def _element_bytes_for(array: np.ndarray) -> int:
    if array.size == 0:
        return 1
    lo, hi = int(array.min()), int(array.max())
    for size in TUGW_ELEMENT_BYTES:
        bound = 1 << (8 * size - 1)
        if -bound <= lo and hi < bound:
            return size
    raise WorkloadError(f"значения [{lo}, {hi}] не помещаются в 32 бита")


def encode_tensor_dump(array: np.ndarray, element_bytes: int = None) -> bytes:
    """Закодировать целочисленный тензор в формат .tugw"""
    array = np.asarray(array)
    if not np.issubdtype(array.dtype, np.integer):
        raise WorkloadError(f"поддерживаются только целочисленные тензоры, получен {array.dtype}")
    if not 1 <= array.ndim <= TUGW_MAX_RANK:
        raise WorkloadError(f"ранг {array.ndim} вне диапазона 1..{TUGW_MAX_RANK}")
    if any(not 1 <= dim <= 0xFFFF for dim in array.shape):
        raise WorkloadError(f"размерности {array.shape} вне диапазона 1..65535")

    element_bytes = element_bytes or _element_bytes_for(array)
    if element_bytes not in TUGW_ELEMENT_BYTES:
        raise WorkloadError(f"ширина элемента {element_bytes} не поддерживается")
    if _element_bytes_for(array) > element_bytes:
        raise WorkloadError(f"значения не помещаются в {element_bytes} байт")

    dims = list(array.shape) + [0] * (TUGW_MAX_RANK - array.ndim)
    header = TUGW_HEADER.pack(TUGW_MAGIC, element_bytes, array.ndim, 0, *dims)
    return header + array.astype(f"<i{element_bytes}").tobytes(order="C")


def decode_tensor_dump(content: bytes, path: str = None) -> np.ndarray:
    """Декодировать .tugw в массив int64"""
    if len(content) < TUGW_HEADER.size:
        raise WorkloadError("дамп короче 16-байтного заголовка", path)
    magic, element_bytes, rank, reserved, *dims = TUGW_HEADER.unpack_from(content)
    if magic != TUGW_MAGIC:
        raise WorkloadError(f"неверная сигнатура {magic!r}", path)
    if element_bytes not in TUGW_ELEMENT_BYTES:
        raise WorkloadError(f"ширина элемента {element_bytes} не поддерживается", path)
    if not 1 <= rank <= TUGW_MAX_RANK:
        raise WorkloadError(f"ранг {rank} вне диапазона 1..{TUGW_MAX_RANK}", path)
    if reserved != 0:
        raise WorkloadError("резервное поле заголовка не равно 0", path)
    shape = tuple(dims[:rank])
    if any(dim == 0 for dim in shape) or any(dims[rank:]):
        raise WorkloadError(f"некорректные размерности {tuple(dims)} для ранга {rank}", path)

    count = math.prod(shape)
    payload = content[TUGW_HEADER.size:]
    if len(payload) != count * element_bytes:
        raise WorkloadError(
            f"ожидалось {count * element_bytes} байт данных, получено {len(payload)}", path
        )
    return np.frombuffer(payload, dtype=f"<i{element_bytes}").astype(np.int64).reshape(shape)


def write_tensor_dump(path: Union[str, Path], array: np.ndarray, element_bytes: int = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_tensor_dump(array, element_bytes))
    return path


def read_tensor_dump(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    return decode_tensor_dump(path.read_bytes(), str(path))
