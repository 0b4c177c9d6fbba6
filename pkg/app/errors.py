"""
Иерархия ошибок.

Все ошибки наследуют ValueError, поэтому роутеры обрабатывают их
так же, как и остальные ошибки входных данных. exit_code используется CLI.
"""
from typing import Optional, Tuple


class TugemmError(ValueError):
    exit_code = 1


class ConfigError(TugemmError):
    """Некорректная конфигурация запуска"""
    exit_code = 2


class ProblemParseError(TugemmError):
    """Ошибка разбора файла задачи"""
    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = ""
        if path:
            where += f"{path}: "
        if line is not None:
            where += f"строка {line}: "
        super().__init__(f"{where}{message}")


class ProblemValidationError(TugemmError):
    """Задача нарушает инварианты GemmProblem"""
    exit_code = 4

    def __init__(self, verdict):
        self.verdict = verdict
        super().__init__(verdict.message)


class OutputOverflowError(TugemmError):
    """Выходной регистр вышел за диапазон фиксированной разрядности"""
    exit_code = 5

    def __init__(self, cell: Tuple[int, int], cycle: int, value: int, bits: int):
        self.cell = cell
        self.cycle = cycle
        self.value = value
        self.bits = bits
        super().__init__(
            f"Переполнение выходной ячейки {cell} на такте {cycle}: "
            f"значение {value} вне {bits}-битного диапазона"
        )


class WorkloadError(TugemmError):
    """Ошибка источника данных профилировщика"""
    exit_code = 6

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
