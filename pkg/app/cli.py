"""CLI entry point: python -m app.cli"""
import logging
import sys
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from app.config import get_settings
from app.errors import ConfigError, TugemmError
from app.models.schemas import LatencyReport, ProfileResponse, RunConfig, Variant
from app.services import latency_service, profiler_service, verify_service
from app.services.hardware import ENGINES
from app.services.matrix_io import load_problem, write_tensor_dump
from app.services.serial_service import serial_step_trace
from app.services.simulation_service import run_config

logger = logging.getLogger(__name__)

VARIANT_CHOICE = click.Choice(["serial", "parallel", "both"])


def _configure_logging(level: Optional[str]) -> None:
    settings = get_settings()
    level = level or ("DEBUG" if settings.DEBUG else settings.LOG_LEVEL)
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def _fail(error: TugemmError) -> None:
    click.echo(f"❌ {error}", err=True)
    sys.exit(error.exit_code)


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")
        logger.info(f"📝 Report written: {path}")
    else:
        click.echo(text)


def _resolve_seed(seed: Optional[int], input_path: Optional[str] = None) -> Optional[int]:
    """--seed, иначе TUGEMM_SEED (только если не задан входной файл)"""
    if seed is not None or input_path is not None:
        return seed
    return get_settings().TUGEMM_SEED


def _variants(choice: str):
    if choice == "both":
        return [Variant.SERIAL, Variant.PARALLEL]
    return [Variant(choice)]


@click.group(name="tugemm")
@click.option("--log-level", default=None, help="Уровень логирования (по умолчанию из LOG_LEVEL)")
def main(log_level: Optional[str]):
    """Симулятор и модель задержки temporal-unary GEMM (tuGEMM)."""
    _configure_logging(log_level)


@main.command()
@click.option("--variant", type=VARIANT_CHOICE, default="both", show_default=True)
@click.option("--input", "input_path", type=click.Path(dir_okay=False), help="Файл задачи (текст или JSON)")
@click.option("--seed", type=int, help="Seed генератора задач (иначе TUGEMM_SEED)")
@click.option("--m", type=int)
@click.option("--n", type=int)
@click.option("--p", type=int)
@click.option("--w", type=int, help="Разрядность входов")
@click.option("--output-bits", type=int, help="Фиксированная разрядность выходных регистров")
@click.option("--trace", type=click.Path(dir_okay=False), help="CSV с потактовой трассой")
@click.option("--output", type=click.Path(dir_okay=False), help="Файл JSON-отчёта (по умолчанию stdout)")
@click.option("--engine", type=click.Choice(ENGINES), default=None, help="Движок (по умолчанию SIM_ENGINE)")
def simulate(variant, input_path, seed, m, n, p, w, output_bits, trace, output, engine):
    """Смоделировать GEMM и вывести отчёт {y, cycles, activity, latency_breakdown}."""
    try:
        try:
            cfg = RunConfig(
                variant=variant,
                input_path=input_path,
                seed=_resolve_seed(seed, input_path),
                m=m, n=n, p=p, w=w,
                output_bits=output_bits,
                trace=trace,
                output=output,
                engine=engine or get_settings().SIM_ENGINE,
            )
        except ValidationError as e:
            raise ConfigError(str(e))
        report = run_config(cfg)
        _emit(report.model_dump_json(indent=2), cfg.output)
    except TugemmError as e:
        _fail(e)


@main.command()
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--max-dim", type=int, default=8, show_default=True, help="Размеры берутся из [1, max-dim]")
@click.option("--width", "widths", type=int, multiple=True, default=(2, 4, 8), show_default=True)
@click.option("--seed", type=int, help="Seed кампании (иначе TUGEMM_SEED, иначе 0)")
@click.option("--large-trials", type=int, default=100, show_default=True)
@click.option("--large-dim", type=int, default=16, show_default=True)
@click.option("--large-width", type=int, default=8, show_default=True)
@click.option("--workers", type=int, default=None, help="Процессов (по умолчанию VERIFY_WORKERS)")
@click.option("--reproducer-dir", type=click.Path(file_okay=False), default=None)
@click.option("--output", type=click.Path(dir_okay=False))
@click.option("--inject-fault", is_flag=True, hidden=True)
def verify(trials, max_dim, widths, seed, large_trials, large_dim, large_width, workers,
           reproducer_dir, output, inject_fault):
    """Сравнить оба варианта с эталоном и аналитической моделью на случайных задачах."""
    try:
        if trials < 1:
            raise ConfigError("--trials должно быть >= 1")
        seed = _resolve_seed(seed)
        summary = verify_service.verify(
            trials=trials,
            max_dim=max_dim,
            widths=widths,
            seed=seed if seed is not None else 0,
            large_trials=large_trials,
            large_dim=large_dim,
            large_width=large_width,
            workers=workers,
            reproducer_dir=reproducer_dir,
            fault=inject_fault,
        )
    except TugemmError as e:
        _fail(e)
        return
    _emit(summary.model_dump_json(indent=2), output)
    if summary.failed:
        sys.exit(1)


@main.command()
@click.option("--n", type=int, help="Общая размерность N")
@click.option("--w", "widths", type=int, multiple=True, help="Разрядность (можно несколько)")
@click.option("--variant", type=VARIANT_CHOICE, default="both", show_default=True)
@click.option("--input", "input_path", type=click.Path(dir_okay=False), help="Файл задачи: таблица по шагам")
@click.option("--json", "as_json", is_flag=True, help="Вывести JSON вместо таблицы")
def latency(n, widths, variant, input_path, as_json):
    """Худшая задержка по формуле или разбивка задержки задачи по шагам."""
    config = {"n": n, "w": list(widths), "variant": variant, "input_path": input_path}
    try:
        if input_path:
            problem = load_problem(input_path)
            breakdown = serial_step_trace(problem)
            analytic = latency_service.analytic_latency(problem)
            if as_json:
                click.echo(LatencyReport(config=config, latency_breakdown=breakdown).model_dump_json(indent=2))
            else:
                click.echo(f"{'step':>6} {'cycles':>10}")
                for step, cycles in enumerate(breakdown.per_step):
                    click.echo(f"{step:>6} {cycles:>10}")
                click.echo(f"serial total:   {breakdown.serial_total}")
                click.echo(f"parallel total: {breakdown.parallel_total}")
            if breakdown != analytic:
                logger.error(f"❌ Engine {breakdown} disagrees with analytic model {analytic}")
                sys.exit(1)
            return

        if not widths:
            raise ConfigError("Нужно указать --w или --input")
        rows = latency_service.latency_sweep([n] if n else (16, 32), widths)
        variants = [v.value for v in _variants(variant)]
        if as_json:
            rows = [{k: v for k, v in row.items() if k in ("n", "w", "speedup", *variants)} for row in rows]
            click.echo(LatencyReport(config=config, rows=rows).model_dump_json(indent=2))
            return
        header = f"{'n':>6} {'w':>3}" + "".join(f" {name:>12}" for name in variants)
        click.echo(header)
        for row in rows:
            click.echo(f"{row['n']:>6} {row['w']:>3}" + "".join(f" {row[name]:>12,}" for name in variants))
    except TugemmError as e:
        _fail(e)


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--w", type=int, default=8, show_default=True)
@click.option("--n", type=int, default=16, show_default=True)
@click.option("--variant", type=click.Choice(["serial", "parallel"]), default="serial", show_default=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="CSV гистограммы и CDF")
@click.option("--output", type=click.Path(dir_okay=False))
def profile(paths, w, n, variant, csv_path, output):
    """Гистограмма максимальных модулей тензоров и оценка средней задержки."""
    try:
        stats = profiler_service.profile_maxima(paths, w)
        summary = profiler_service.estimate_workload_latency(stats, n, Variant(variant))
    except TugemmError as e:
        _fail(e)
        return
    if csv_path:
        profiler_service.write_histogram_csv(stats, csv_path)
    logger.info(
        f"✅ mean max {summary.mean_max:.2f}, worst-case ratio {summary.worst_case_ratio:.2f}x"
    )
    config = {"paths": list(paths), "w": w, "n": n, "variant": variant, "csv": csv_path}
    report = ProfileResponse(config=config, stats=stats, summary=summary)
    _emit(report.model_dump_json(indent=2), output)


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--max", "maxima", multiple=True, required=True, help="VALUE[:COUNT], можно несколько")
@click.option("--shape", default="8x8", show_default=True, help="Форма тензора, например 4x8x8")
@click.option("--w", type=int, default=8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def corpus(out_dir, maxima, shape, w, seed):
    """Записать синтетический корпус .tugw с заданными максимумами."""
    try:
        try:
            dims = tuple(int(v) for v in shape.lower().split("x"))
        except ValueError:
            raise ConfigError(f"Некорректная форма {shape!r}")
        values = profiler_service.parse_maxima_spec(maxima)
        tensors = profiler_service.synthetic_corpus(values, dims, w, seed)
        for k, tensor in enumerate(tensors):
            write_tensor_dump(Path(out_dir) / f"tensor_{k:05d}.tugw", tensor)
    except TugemmError as e:
        _fail(e)
        return
    click.echo(f"✅ {len(tensors)} tensors written to {out_dir}")


@main.command()
def serve():
    """Запустить HTTP API."""
    import uvicorn

    settings = get_settings()
    uvicorn.run("app.main:app", host=settings.HOST, port=settings.PORT)


if __name__ == "__main__":
    main()
