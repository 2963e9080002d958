"""
Command-line front end: single points, sweeps, figure datasets and validation.

    ancilla-metrology qfi [--config FILE] [--N 10 --probe thermal --beta 2 ...]
    ancilla-metrology cfi ...
    ancilla-metrology sweep --axis t1 --start 0 --stop pi --points 121
    ancilla-metrology figure fig2 --out figures/
    ancilla-metrology validate [--tol 1e-8]

Every config key is also a flag (``omega_p`` is ``--omega-p``); flags win
over the file.  Exit codes: 0 success, 1 configuration error, 2 failed
validation, 3 numerical contract violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..errors import ConfigError, ContractViolation, DomainError, InvalidDimensionError
from . import checks, config, figures, runner

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_CONTRACT = 0, 1, 2, 3

logger = logging.getLogger("ancilla_metrology")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("-v", "--verbose", action="count", default=0)
    for name in config.FIELDS:
        if name in ("mode", "figure"):
            continue
        flags = [f"--{name.replace('_', '-')}"]
        if "_" in name:
            flags.append(f"--{name}")
        p.add_argument(*flags, dest=name, default=argparse.SUPPRESS, metavar="VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ancilla-metrology", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("qfi", "quantum Fisher information at one point"),
        ("cfi", "Jz-readout classical Fisher information at one point (QFI reported too)"),
        ("sweep", "evaluate over a grid of one parameter"),
        ("validate", "run every acceptance check"),
    ):
        _add_config_flags(sub.add_parser(name, help=help_text))
    fig = sub.add_parser("figure", help="write a figure dataset (CSV + manifest)")
    fig.add_argument("figure", choices=figures.FIGURES + ("all",))
    _add_config_flags(fig)
    return parser


def make_config(args: argparse.Namespace) -> config.RunConfig:
    overrides = {}
    for name in config.FIELDS:
        if name in ("mode", "figure"):
            continue
        if hasattr(args, name):
            overrides[name] = config.parse_value(name, getattr(args, name))
    overrides["mode"] = args.command
    if args.command == "figure":
        overrides["figure"] = args.figure
    if args.config:
        return config.load(args.config, overrides)
    return config.build(overrides)


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _validation_report(results, fmt: str) -> str:
    if fmt == "json":
        rows = [r.as_dict() for r in results]
        summary = {s: sum(r.status == s for r in results) for s in (checks.PASS, checks.WARN, checks.FAIL)}
        return json.dumps({"summary": summary, "checks": rows}, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["criterion", "name", "status", "measured", "target", "residual", "tol", "detail"])
    for r in results:
        w.writerow([r.criterion, r.name, r.status, runner.format_cell(r.measured),
                    runner.format_cell(r.target), runner.format_cell(r.residual),
                    runner.format_cell(r.tol), r.detail])
    return buf.getvalue()


def execute(cfg: config.RunConfig) -> int:
    if cfg.mode in ("qfi", "cfi"):
        record = runner.evaluate(cfg, with_qfi=True, with_cfi=cfg.mode == "cfi")
        _emit(runner.render([record], cfg.format), cfg.out)
        return EXIT_OK
    if cfg.mode == "sweep":
        _emit(runner.render(runner.sweep(cfg), cfg.format), cfg.out)
        return EXIT_OK
    if cfg.mode == "figure":
        ids = figures.FIGURES if cfg.figure == "all" else (cfg.figure,)
        for fig_id in ids:
            for path in figures.write(fig_id, cfg.out or "figures", cfg.jobs):
                print(path, file=sys.stderr)
        return EXIT_OK
    results = checks.run_all(cfg.tol, cfg.jobs)
    for r in results:
        print(r.line(), file=sys.stderr)
    _emit(_validation_report(results, cfg.format), cfg.out)
    return EXIT_VALIDATION if any(r.status == checks.FAIL for r in results) else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        level = logging.WARNING - 10 * min(getattr(args, "verbose", 0), 2)
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        return execute(make_config(args))
    except (ContractViolation, ArithmeticError) as exc:
        print(f"error: numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (ConfigError, DomainError, InvalidDimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
