import pytest

from app.config import get_settings
from app.models.schemas import GemmProblem, Matrix

RUNNING_EXAMPLE_TEXT = """2 2 2 4
3 -2
1 0
2 1
-1 2
0 0
0 0
"""


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def running_example() -> GemmProblem:
    """A = [[3, -2], [1, 0]], B = [[2, 1], [-1, 2]], C = 0, w = 4"""
    return GemmProblem(
        a=Matrix.from_rows([[3, -2], [1, 0]]),
        b=Matrix.from_rows([[2, 1], [-1, 2]]),
        c=Matrix.zeros(2, 2),
        width=4,
    )


@pytest.fixture
def running_example_file(tmp_path):
    path = tmp_path / "example.txt"
    path.write_text(RUNNING_EXAMPLE_TEXT)
    return path


def make_problem(a, b, c=None, w=4) -> GemmProblem:
    a = Matrix.from_rows(a)
    b = Matrix.from_rows(b)
    c = Matrix.from_rows(c) if c is not None else Matrix.zeros(a.rows, b.cols)
    return GemmProblem(a=a, b=b, c=c, width=w)
