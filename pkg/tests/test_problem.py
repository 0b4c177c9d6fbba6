import numpy as np
import pytest

from app.errors import ProblemValidationError
from app.models.schemas import BitWidth, GemmProblem, Matrix, Variant
from app.services.problem_service import (
    hardware_inventory,
    random_problem,
    require_valid,
    validate_problem,
)
from tests.conftest import make_problem


def test_bit_width_range():
    width = BitWidth(w=4)
    assert (width.min_value, width.max_value, width.max_magnitude) == (-8, 7, 8)
    assert width.contains(-8)
    assert not width.contains(8)


def test_valid_problem(running_example):
    assert validate_problem(running_example).ok
    assert require_valid(running_example) is running_example


def test_range_violation_reports_matrix_and_index():
    problem = make_problem([[1, 2], [3, 8]], [[1], [1]], w=4)
    verdict = validate_problem(problem)
    assert not verdict.ok
    assert verdict.kind == "range"
    assert verdict.matrix == "a"
    assert verdict.index == (1, 1)


def test_dimension_violation():
    problem = GemmProblem(
        a=Matrix.zeros(2, 3),
        b=Matrix.zeros(2, 2),
        c=Matrix.zeros(2, 2),
        width=4,
    )
    verdict = validate_problem(problem)
    assert verdict.kind == "dimension"
    with pytest.raises(ProblemValidationError) as exc:
        require_valid(problem)
    assert exc.value.exit_code == 4


def test_width_limit_from_settings(monkeypatch):
    monkeypatch.setenv("MAX_WIDTH", "8")
    problem = make_problem([[1]], [[1]], w=12)
    assert validate_problem(problem).kind == "width"


def test_random_problem_is_deterministic():
    first = random_problem(3, 4, 5, 8, seed=42)
    second = random_problem(3, 4, 5, 8, seed=42)
    assert first == second
    assert random_problem(3, 4, 5, 8, seed=43) != first


def test_random_problem_stays_in_range():
    problem = random_problem(8, 8, 8, 2, seed=1)
    for matrix in (problem.a, problem.b, problem.c):
        assert set(matrix.data) <= {-2, -1, 0, 1}
    assert validate_problem(problem).ok


def test_random_problem_accepts_wide_seeds():
    assert random_problem(1, 1, 1, 4, seed=-1) == random_problem(1, 1, 1, 4, seed=(1 << 64) - 1)


def test_matrix_helpers():
    matrix = Matrix.from_rows([[1, 2, 3], [4, 5, 6]])
    assert matrix.at(1, 2) == 6
    assert matrix.column(1) == (2, 5)
    assert matrix.to_rows() == [[1, 2, 3], [4, 5, 6]]
    np.testing.assert_array_equal(matrix.to_array(), [[1, 2, 3], [4, 5, 6]])
    assert Matrix.identity(2).data == (1, 0, 0, 1)
    with pytest.raises(ValueError):
        Matrix.from_rows([[1, 2], [3]])


def test_hardware_inventory():
    serial = hardware_inventory(4, 16, 3, Variant.SERIAL)
    assert serial.index_counters == 1
    assert serial.column_counters == 4
    assert serial.output_cell_kind == "counter"

    parallel = hardware_inventory(4, 16, 3, Variant.PARALLEL)
    assert parallel.vector_counters == 16
    assert parallel.unary_lines == 16 * (4 + 3)
    assert parallel.output_cell_kind == "adder"


@pytest.mark.parametrize("seed", range(40))
def test_range_check_near_boundaries(seed):
    rng = np.random.default_rng(3000 + seed)
    problem = random_problem(3, 3, 3, int(rng.choice([2, 4, 8])), seed)
    width = problem.width
    name = ("a", "b", "c")[int(rng.integers(0, 3))]
    r, c = (int(v) for v in rng.integers(0, 3, size=2))
    value = int(rng.choice([width.min_value - 1, width.min_value, width.max_value, width.max_value + 1]))

    array = getattr(problem, name).to_array()
    array[r, c] = value
    verdict = validate_problem(problem.model_copy(update={name: Matrix.from_array(array)}))

    if width.contains(value):
        assert verdict.ok
    else:
        assert not verdict.ok
        assert verdict.kind == "range"
        assert verdict.matrix == name
        assert verdict.index == (r, c)
