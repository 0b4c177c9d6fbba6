from app.models.schemas import GemmProblem, Matrix
from app.services.matrix_io import load_problem
from app.services.verify_service import (
    check_problem,
    expected_updates,
    generate_trials,
    minimize_problem,
    verify,
)
from tests.conftest import make_problem


def test_campaign_passes(tmp_path):
    summary = verify(
        trials=200,
        max_dim=6,
        widths=(2, 4, 8),
        seed=1,
        large_trials=2,
        workers=1,
        reproducer_dir=str(tmp_path),
    )
    assert summary.trials == 202
    assert summary.failed == 0
    assert summary.passed == 202
    assert not list(tmp_path.iterdir())


def test_campaign_is_reproducible():
    first = verify(trials=30, seed=7, workers=1)
    second = verify(trials=30, seed=7, workers=1)
    assert first == second
    assert list(generate_trials(30, 8, (2, 4, 8), 7)) == list(generate_trials(30, 8, (2, 4, 8), 7))


def test_large_trials_use_large_shape():
    specs = list(generate_trials(3, 4, (2,), seed=0, large_trials=2, large_dim=16, large_width=8))
    assert [(s.m, s.n, s.p, s.w) for s in specs[3:]] == [(16, 16, 16, 8)] * 2
    assert [s.index for s in specs] == [0, 1, 2, 3, 4]


def test_expected_updates(running_example):
    assert expected_updates(running_example) == (14, 4)


def test_injected_fault_is_caught_and_minimized(tmp_path):
    summary = verify(trials=20, max_dim=4, seed=2, workers=1, reproducer_dir=str(tmp_path), fault=True)
    assert summary.failed > 0
    first = summary.mismatches[0]
    assert "serial_exact" in first.failed_checks
    assert "sign_rule" in first.failed_checks
    assert all(m.reproducer is None for m in summary.mismatches[1:])

    reproducer = load_problem(first.reproducer)
    assert (reproducer.m, reproducer.n, reproducer.p) == (1, 1, 1)
    assert reproducer.a.data[0] < 0 and reproducer.b.data[0] < 0
    assert check_problem(reproducer, fault=True)
    assert not check_problem(reproducer)


def test_minimize_keeps_failure():
    problem = make_problem([[1, -3], [2, 0]], [[4, 1], [-2, 5]], [[1, 1], [1, 1]])

    def fails(candidate: GemmProblem) -> bool:
        return any(v < 0 for v in candidate.a.data)

    minimized = minimize_problem(problem, fails)
    assert fails(minimized)
    assert minimized.a == Matrix.from_rows([[-3]])
    assert minimized.c == Matrix.zeros(1, 1)
