"""
Эталонный GEMM в обычной двоичной арифметике: Y = AB + C.

Считает на целых Python без ограничения разрядности.
"""
from typing import List

from app.models.schemas import GemmProblem, Matrix
from app.services.problem_service import require_valid


def _gemm(problem: GemmProblem) -> List[List[int]]:
    a, b, c = problem.a, problem.b, problem.c
    y = []
    for m in range(a.rows):
        row = []
        for q in range(b.cols):
            acc = c.at(m, q)
            for i in range(a.cols):
                acc += a.at(m, i) * b.at(i, q)
            row.append(acc)
        y.append(row)
    return y


def gemm_exact(problem: GemmProblem, validate: bool = True) -> Matrix:
    """Y[m][q] = sum_i A[m][i] * B[i][q] + C[m][q]"""
    if validate:
        require_valid(problem)
    return Matrix.from_rows(_gemm(problem))


def max_abs_output(problem: GemmProblem) -> int:
    """Наибольший модуль элемента Y"""
    return gemm_exact(problem).max_abs()
