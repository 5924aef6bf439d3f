"""Command-line entry point: ``vanhove run | validate | list-scenarios``.

The output directory defaults to ``$VANHOVE_OUTPUT_DIR`` (then ``./vanhove-out``)
unless ``--out`` or the config's ``[output] directory`` says otherwise. Each
scenario writes into a subdirectory named after it.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ._validation import VanHoveError
from .scenario import (OUTPUT_ENV, build_scenario, builtin_scenarios, emit_outputs,
                       load_builtin, resolve_config, run_scenario)

__all__ = ["main"]

log = logging.getLogger("vanhove")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_ERROR = 0, 1, 2


def _output_root(cli_out, config) -> Path:
    if cli_out:
        return Path(cli_out)
    if config.output["directory"]:
        return Path(config.output["directory"])
    return Path(os.environ.get(OUTPUT_ENV) or "vanhove-out")


def _configs(target: str) -> list:
    path = Path(target)
    if path.is_dir():
        files = sorted(path.glob("*.ini"))
        if not files:
            raise VanHoveError(f"no *.ini scenario files in {path}")
        return [resolve_config(str(f)) for f in files]
    if target == "all":
        return [load_builtin(name) for name in builtin_scenarios()]
    return [resolve_config(target)]


def _run_one(config, out, plot, refine, seed) -> tuple[str, int, list[str]]:
    lines = []
    try:
        result = run_scenario(config, refine=refine, seed=seed)
        dest = _output_root(out, config) / config.name
        emit_outputs(result, dest, plot=plot or None)
    except VanHoveError as exc:
        return config.name, EXIT_ERROR, [f"{config.name}: error: {exc}"]
    s = result.summary
    for c in s.checks:
        status = "ok  " if c.passed else "FAIL"
        cond = f" ({c.condition})" if c.condition else ""
        lines.append(f"  {status} [{c.module}] {c.name}{cond}: {c.value:.3e} (tol {c.tolerance:.1e})")
    lines.insert(0, f"{config.name}: {'passed' if s.passed else 'FAILED'} -> {dest}")
    lines.append(f"  t_D = {s.decoherence_time}, fit = {s.fit_model}")
    for note in s.notes:
        lines.append(f"  note: {note}")
    return config.name, EXIT_OK if s.passed else EXIT_CHECK_FAILED, lines


def cmd_run(args) -> int:
    configs = _configs(args.config)
    jobs = max(1, min(args.jobs, len(configs)))
    call = (args.out, args.plot, True if args.refine else None, args.seed)
    if jobs == 1:
        outcomes = [_run_one(c, *call) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_one, configs, *[[v] * len(configs) for v in call]))
    for _, _, lines in outcomes:
        print("\n".join(lines))
    return max(code for _, code, _ in outcomes)


def cmd_validate(args) -> int:
    for config in _configs(args.config):
        sc = build_scenario(config)
        print(f"{config.name}: valid ({sc.grid.size} nodes, t_max={config.time['t_max']:g}, "
              f"band={config.band:g}, normalized={sc.state.normalized})")
    return EXIT_OK


def cmd_list(args) -> int:
    for name, description in builtin_scenarios().items():
        print(f"{name:20s} {description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vanhove",
        description="Decoherence scenarios in the van Hove algebra",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its outputs")
    run.add_argument("config", help="config file, built-in name, directory of *.ini, or 'all'")
    run.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./vanhove-out)")
    run.add_argument("--plot", action="store_true", help="also write SVG decay plots")
    run.add_argument("--refine", action="store_true", help="assert convergence at 2n and 4n")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--jobs", type=int, default=1, help="parallel scenario workers")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="parse a config and build its state")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)

    ls = sub.add_parser("list-scenarios", help="list the built-in scenarios")
    ls.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except VanHoveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
