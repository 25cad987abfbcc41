"""Command-line entry point.

Exit codes: 0 success, 2 configuration or I/O error, 3 physics-domain error
(for example no cooling), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import MODES, PRESETS, RunConfig, parse_config, preset_config, validate
from .errors import ConfigError, NumericalError, PhysicsDomainError, TrapFluorError
from .oracle import build_exact, elastic_weight, exact_nbar, exact_spectrum
from .spectrum import SpectrumResult, assemble

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_NUMERICAL = 0, 2, 3, 4
SIDEBAND_WINDOW = 0.02


def _num(x: float) -> str:
    return f"{x:.16e}"


def parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--grid expects MIN:MAX:N, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"--grid expects MIN:MAX:N, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="trapfluor",
        description="Resonance fluorescence spectrum of a laser-cooled trapped ion.",
    )
    p.add_argument("--config", type=Path, help="configuration file (key = value lines)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named parameter preset")
    p.add_argument("--mode", choices=MODES, help="which pipeline(s) to run")
    p.add_argument("--out", help="output table path")
    p.add_argument(
        "--grid",
        help="frequency grid MIN:MAX:N in trap frequencies (write --grid=-4:4:2001 "
        "when MIN is negative)",
    )
    p.add_argument("--emit-lines", action="store_true", help="write the line inventory (JSON)")
    p.add_argument("--emit-plot-script", action="store_true", help="write a gnuplot script")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from None
        cfg = parse_config(text)
    if args.preset:
        cfg = preset_config(args.preset, cfg)
    updates = {}
    if args.mode:
        updates["mode"] = args.mode
    if args.out:
        updates["output"] = args.out
    if args.grid:
        updates["grid_min"], updates["grid_max"], updates["grid_points"] = parse_grid(args.grid)
    if args.emit_lines:
        updates["emit_lines"] = True
    if args.emit_plot_script:
        updates["emit_plot_script"] = True
    return validate(replace(cfg, **updates))


def header(cfg: RunConfig) -> list[str]:
    lines = ["# trapfluor spectrum; frequencies relative to the laser, in trap units"]
    if cfg.preset:
        lines.append(f"# preset = {cfg.preset}")
    p = cfg
    lines.append(
        f"# delta = {p.delta!r}  omega = {p.omega!r}  gamma = {p.gamma!r}  eta = {p.eta!r}"
    )
    lines.append(
        f"# theta = {p.theta!r} deg  psi = {p.psi!r} deg  beta = {p.beta!r}  nmax = {p.nmax}"
    )
    drive = p.drive_kind + (f" (phi = {p.drive_phi!r} deg)" if p.drive_kind == "standing" else "")
    lines.append(f"# drive = {drive}  mode = {p.mode}")
    return lines


def write_table(path: Path, cfg: RunConfig, grid, columns: dict[str, np.ndarray], extra=()):
    rows = header(cfg) + [f"# {line}" for line in extra]
    rows.append("# " + " ".join(["omega", *columns]))
    data = np.column_stack([grid, *columns.values()])
    rows += [" ".join(_num(v) for v in row) for row in data]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def lines_record(result: SpectrumResult) -> dict:
    def cplx(z):
        return [float(np.real(z)), float(np.imag(z))]

    rates = result.rates
    return {
        "nbar": result.nbar,
        "a_plus": rates.a_plus if rates else None,
        "a_minus": rates.a_minus if rates else None,
        "elastic_weight": result.elastic_weight,
        "elastic_correction": result.elastic_correction,
        "degraded": result.degraded,
        "lines": [
            {
                "origin": ln.origin,
                "parent": cplx(ln.parent),
                "sign": ln.sign,
                "pole": cplx(ln.pole),
                "amplitude": cplx(ln.amplitude),
            }
            for ln in result.lines
        ],
    }


def plot_script(table: Path, columns: Sequence[str]) -> str:
    out = [
        "set xlabel '(omega - omega_L) / nu'",
        "set ylabel 'S(omega) (arb. units)'",
        "set key top right",
    ]
    plots = []
    for i, name in enumerate(columns, start=2):
        if name in ("s0", "s2"):
            continue
        plots.append(f"'{table.name}' using 1:{i} with lines title '{name}'")
    out.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(out) + "\n"


def comparison(cfg: RunConfig, grid, result: SpectrumResult, exact, model) -> list[str]:
    scale = float(np.max(exact))
    dev = np.abs(result.total - exact) / scale
    mask = np.ones(len(grid), dtype=bool)
    for ln in result.lines_with("elastic-sideband"):
        mask &= np.abs(grid - ln.center) > SIDEBAND_WINDOW
    masked = float(dev[mask].max()) if mask.any() else float("nan")
    return [
        f"max_rel_deviation = {_num(float(dev.max()))}",
        f"max_rel_deviation_outside_sideband_windows = {_num(masked)}",
        f"elastic_weight_perturbative = {_num(result.elastic_weight + result.elastic_correction)}",
        f"elastic_weight_oracle = {_num(elastic_weight(model))}",
        f"nbar_perturbative = {_num(result.nbar)}",
        f"nbar_oracle = {_num(exact_nbar(model))}",
        f"oracle_nmax = {model.nmax}",
    ]


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    params = cfg.params()
    grid = np.linspace(cfg.grid_min, cfg.grid_max, cfg.grid_points)
    out = Path(cfg.output)
    columns: dict[str, np.ndarray] = {}
    result = model = exact = None
    if cfg.mode in ("perturbative", "both"):
        result = assemble(params, grid)
        columns.update(s0=result.s0, s2=result.s2, total=result.total)
    if cfg.mode in ("oracle", "both"):
        model = build_exact(params)
        exact = exact_spectrum(model, grid)
        columns["oracle"] = exact

    extra = []
    if result is not None:
        extra.append(f"elastic_weight = {_num(result.elastic_weight)}")
        extra.append(f"elastic_correction = {_num(result.elastic_correction)}")
        extra.append(f"nbar = {_num(result.nbar)}")
    if model is not None:
        extra.append(f"oracle_elastic_weight = {_num(elastic_weight(model))}")
        extra.append(f"oracle_nbar = {_num(exact_nbar(model))}")
    write_table(out, cfg, grid, columns, extra)
    written = [out]

    if cfg.mode == "both":
        summary = comparison(cfg, grid, result, exact, model)
        path = out.with_name(out.name + ".summary.txt")
        path.write_text("\n".join(summary) + "\n", encoding="utf-8")
        written.append(path)
        for line in summary:
            print(line, file=stdout)
    if cfg.emit_lines:
        record = lines_record(result) if result is not None else {}
        if model is not None:
            record["oracle_elastic_weight"] = elastic_weight(model)
            record["oracle_nbar"] = exact_nbar(model)
        path = out.with_name(out.name + ".lines.json")
        path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
    if cfg.emit_plot_script:
        path = out.with_name(out.name + ".gp")
        path.write_text(plot_script(out, list(columns)), encoding="utf-8")
        written.append(path)
    for path in written:
        print(f"wrote {path}", file=stdout)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"trapfluor: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsDomainError as exc:
        print(f"trapfluor: physics-domain error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except NumericalError as exc:
        print(f"trapfluor: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"trapfluor: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrapFluorError as exc:
        print(f"trapfluor: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
