"""Command-line entry point: ``smilelearn {gaussian,maze,sweep,selftest,replay}``."""

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .experiments import (
    GAUSSIAN_HEADER,
    MAZE_HEADER,
    PAPER_SCALE,
    ExperimentConfig,
    run_gaussian_experiment,
    run_maze_experiment,
    run_sweep,
)
from .selftest import run_selftest

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; invalid input must give 1
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser():
    parser = _Parser(prog="smilelearn", description="Surprise-modulated learning experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    common.add_argument("--paper-scale", action="store_true",
                        help=f"{PAPER_SCALE['episodes']} episodes x {PAPER_SCALE['steps']} steps")
    sub.add_parser("gaussian", parents=[common], help="Gaussian change-point estimation")
    sub.add_parser("maze", parents=[common], help="switching maze exploration")
    sw = sub.add_parser("sweep", parents=[common], help="parameter grid sweep")
    sw.add_argument("--task", choices=("gaussian", "maze"), help="task when no config is given")
    sub.add_parser("selftest", parents=[common], help="analytic identity checks")
    rp = sub.add_parser("replay", parents=[common], help="re-run from a saved summary or config")
    rp.add_argument("source", help="JSON summary written by a previous run, or a config file")
    return parser


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _make_config(data, args, task):
    data = dict(data)
    data.setdefault("task", task)
    if data["task"] != task:
        raise UsageError(f"config is for task {data['task']!r}, not {task!r}")
    if args.seed is not None:
        data["seed"] = args.seed
    if args.paper_scale:
        data.update(PAPER_SCALE)
    if args.out is not None:
        data["output"] = args.out
    try:
        return ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _dict_rows_csv(rows):
    header = []
    for row in rows:
        header.extend(k for k in row if k not in header)
    return _csv_text(header, ([row.get(k, "") for k in header] for row in rows))


def _json_text(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _episode_path(out, episode, n_episodes):
    if n_episodes == 1:
        return Path(out)
    p = Path(out)
    return p.with_name(f"{p.stem}_ep{episode:03d}{p.suffix}")


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _run_task(config, fmt, command):
    if config.task == "gaussian":
        traces, summary = run_gaussian_experiment(config)
        header = GAUSSIAN_HEADER
    else:
        results, summary = run_maze_experiment(config)
        traces = [r.rows for r in results]
        header = MAZE_HEADER
    summary["command"] = command
    # where the output went is not part of the experiment
    summary["config"].pop("output", None)
    if fmt == "json":
        _emit(_json_text(summary), config.output)
    elif config.output is None:
        if config.episodes != 1:
            raise UsageError("CSV traces of several episodes need --out")
        _emit(_csv_text(header, traces[0]), None)
    else:
        for ep, rows in enumerate(traces):
            _emit(_csv_text(header, rows), _episode_path(config.output, ep, config.episodes))
    return summary


def _run_sweep(config, fmt):
    rows = run_sweep(config)
    if fmt == "json":
        cfg = {k: v for k, v in config.to_dict().items() if k != "output"}
        _emit(_json_text({"command": "sweep", "config": cfg, "rows": rows}), config.output)
    else:
        _emit(_dict_rows_csv(rows), config.output)
    return rows


def _log(args, message):
    if not args.quiet:
        print(message, file=sys.stderr)


def _selftest(args):
    results, elapsed = run_selftest(args.seed or 0)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    text = "\n".join(lines) + "\n"
    # timing goes to stderr so the report itself is reproducible
    _log(args, f"selftest: {elapsed:.2f} s")
    if args.out is not None:
        Path(args.out).write_text(text)
    if not args.quiet or args.out is None:
        sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def _prepare(args):
    """Validate inputs; returns a callable that performs the run."""
    if args.command == "selftest":
        return lambda: _selftest(args)
    if args.command == "replay":
        saved = _read_json(args.source)
        command = saved.get("command", saved.get("task")) if "config" in saved else saved.get("task")
        data = saved.get("config", saved)
        data = {k: v for k, v in data.items() if k != "output"}
        if command not in ("gaussian", "maze", "sweep"):
            raise UsageError(f"cannot tell which command produced {args.source}")
    else:
        command = args.command
        data = _read_json(args.config) if args.config else {}
    if command == "sweep":
        task = data.get("task") or getattr(args, "task", None)
        if task is None:
            raise UsageError("sweep needs a task, from the config or --task")
        config = _make_config(data, args, task)
        return lambda: _log(args, f"sweep: {len(_run_sweep(config, args.format))} rows") or EXIT_OK
    config = _make_config(data, args, command)

    def run():
        summary = _run_task(config, args.format, command)
        if config.task == "gaussian":
            _log(args, f"{command}: mean error {summary['error_mean']:.4f}")
        else:
            _log(args, f"{command}: mean E_A {summary['E_A_mean']:.5f}, mean E_B {summary['E_B_mean']:.5f}")
        return EXIT_OK

    return run


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        run = _prepare(args)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_INVALID
    try:
        return run()
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - any failure during a run maps to the runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
