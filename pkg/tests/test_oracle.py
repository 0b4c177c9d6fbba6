import numpy as np

from app.models.schemas import GemmProblem, Matrix
from app.services.oracle_service import gemm_exact, max_abs_output
from app.services.parallel_service import parallel_run
from app.services.problem_service import random_problem
from app.services.serial_service import serial_run
from tests.conftest import make_problem


def test_running_example(running_example):
    assert gemm_exact(running_example).to_rows() == [[8, -1], [2, 1]]


def test_most_negative_square_plus_offset():
    problem = make_problem([[-8]], [[-8]], [[7]], w=4)
    assert gemm_exact(problem).to_rows() == [[71]]


def test_identity_returns_a_plus_c():
    a = Matrix.from_rows([[1, -2], [3, -4]])
    c = Matrix.from_rows([[5, 5], [-5, 0]])
    problem = GemmProblem(a=a, b=Matrix.identity(2), c=c, width=4)
    assert gemm_exact(problem).to_rows() == [[6, 3], [-2, -4]]


def test_matches_numpy():
    problem = random_problem(5, 7, 3, 8, seed=11)
    expected = problem.a.to_array() @ problem.b.to_array() + problem.c.to_array()
    np.testing.assert_array_equal(gemm_exact(problem).to_array(), expected)


def test_bilinear_in_a():
    b = random_problem(2, 3, 2, 4, seed=1).b
    a1 = Matrix.from_rows([[1, 2, -3], [0, 4, 1]])
    a2 = Matrix.from_rows([[-5, 1, 2], [3, 3, -1]])
    summed = Matrix.from_array(a1.to_array() + a2.to_array())
    zeros = Matrix.zeros(2, 2)

    def y(a):
        return gemm_exact(GemmProblem(a=a, b=b, c=zeros, width=4), validate=False).to_array()

    np.testing.assert_array_equal(y(summed), y(a1) + y(a2))


def test_max_abs_output():
    assert max_abs_output(make_problem([[0]], [[0]], [[0]], w=2)) == 0
    assert max_abs_output(make_problem([[-2]], [[-2]], [[1]], w=2)) == 5
    assert max_abs_output(make_problem([[3, -2], [1, 0]], [[2, 1], [-1, 2]])) == 8


def test_single_element_problems_all_widths():
    for w in range(2, 9):
        for seed in range(5):
            problem = random_problem(1, 1, 1, w, seed)
            expected = gemm_exact(problem)
            assert serial_run(problem).y == expected
            assert parallel_run(problem).y == expected
