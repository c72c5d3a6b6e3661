"""Command-line front end: ``closedlambda {spectrum,phase-scan,oracle-check,plot}``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import checks
from .config import load_config, with_overrides
from .errors import ClosedLambdaError
from .experiment import fit_sinusoid, PhaseScan, scan_detuning, scan_position

__all__ = ["main", "write_csv", "read_csv", "run_spectrum", "run_phase_scan", "run_oracle_check", "emit_plot"]


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(2)


def _num(x):
    return repr(float(x))


def write_csv(path, header, columns):
    """Write columns with round-trip-exact decimal formatting."""
    lines = [",".join(header)]
    lines += [",".join(_num(v) for v in row) for row in zip(*columns)]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path):
    """Return ``(header, array)``; the array has one column per header name."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if len(rows) < 2:
        raise CliError(f"{path}: no data rows")
    header = rows[0].split(",")
    try:
        data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    except ValueError as exc:
        raise CliError(f"{path}: malformed number ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header) or len(header) < 2:
        raise CliError(f"{path}: rows do not match header {header}")
    return header, data


def run_spectrum(cfg, out=None):
    grid = cfg.detuning_grid
    if grid is None:
        raise CliError("config has no detuning grid (detuning_min/detuning_max/detuning_count)")
    spec = scan_detuning(cfg.atom, cfg.fields, cfg.cell, grid.start, grid.stop, grid.count)
    path = out or cfg.spectrum_out
    write_csv(path, ["delta", "transmission"], [spec.detunings, spec.transmissions])
    print(f"wrote {grid.count} rows to {path}")
    return spec


def _polarizations(cfg):
    return ("right", "left") if cfg.polarization == "both" else (cfg.polarization,)


def run_phase_scan(cfg, out=None):
    grid = cfg.position_grid
    if grid is None:
        raise CliError("config has no position grid (z0_min/z0_max/z0_count)")
    z = grid.values()
    rng = np.random.default_rng(cfg.seed if cfg.seed is not None else 0)
    header, columns = ["z0"], [z]
    pols = _polarizations(cfg)
    for pol in pols:
        peaks = scan_position(cfg.atom, cfg.fields, cfg.cell, z, pol).peak_amplitudes
        if cfg.noise_sigma > 0:
            peaks = peaks + rng.normal(0.0, cfg.noise_sigma, peaks.size)
        header.append(f"peak_{pol}")
        columns.append(peaks)
    # the scan is written before fitting so a failed fit still leaves the data
    path = out or cfg.phase_out
    write_csv(path, header, columns)
    print(f"wrote {z.size} rows to {path}")
    fits = {pol: fit_sinusoid(PhaseScan(z, peaks, pol)) for pol, peaks in zip(pols, columns[1:])}
    for pol, fit in fits.items():
        print(
            f"fit {pol}: A0={fit.offset!r} A1={fit.amplitude!r} period={fit.period!r} "
            f"phi0={fit.phase!r} residual_rms={fit.residual_rms!r} "
            f"converged={str(fit.converged).lower()} degenerate={str(fit.degenerate).lower()}"
        )
    return fits


def run_oracle_check(cfg):
    """Print one line per check; return True iff every check passed or was expected to fail."""
    results = checks.run_checks(cfg)
    for r in results:
        print(r.line())
    ok = all(r.ok for r in results)
    print("oracle-check: " + ("all checks met" if ok else "tolerance breached"))
    return ok


def emit_plot(csv_path, image_path):
    """Line plot of every CSV column against the first; format from the suffix (default SVG)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, data = read_csv(csv_path)
    suffix = Path(image_path).suffix.lower().lstrip(".") or "svg"
    with plt.rc_context({"svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for k, name in enumerate(header[1:], start=1):
            ax.plot(data[:, 0], data[:, k], label=name)
        ax.set_xlabel(header[0])
        ax.set_ylabel("transmission" if len(header) == 2 else "peak amplitude")
        if len(header) > 2:
            ax.legend()
        fig.tight_layout()
        try:
            fig.savefig(image_path, format=suffix)
        except OSError as exc:
            raise CliError(f"cannot write {image_path}: {exc.strerror or exc}") from exc
        finally:
            plt.close(fig)
    print(f"wrote {image_path}")


def build_parser():
    parser = _Parser(prog="closedlambda", description="Closed-loop (microwave-controlled) EIT simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_config=True):
        p.add_argument("--config", required=needs_config, help="path to a key = value config file")
        p.add_argument("--out", help="output path (overrides the config)")
        p.add_argument("--steps", type=int, help="RK4 steps across the cell")
        p.add_argument("--polarization", choices=("right", "left", "both"))
        p.add_argument("--seed", type=int, help="noise seed (unsigned 64-bit)")
        return p

    common(sub.add_parser("spectrum", help="transmission vs detuning to CSV"))
    common(sub.add_parser("phase-scan", help="peak amplitude vs cell position to CSV, plus sinusoid fit"))
    common(sub.add_parser("oracle-check", help="cross-check analytic results against numerical oracles"))
    plot = common(sub.add_parser("plot", help="render a CSV written by this tool"), needs_config=False)
    plot.add_argument("csv", help="CSV produced by spectrum or phase-scan")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot":
            out = args.out or str(Path(args.csv).with_suffix(".svg"))
            emit_plot(args.csv, out)
            return 0
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise CliError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
        cfg = with_overrides(cfg, steps=args.steps, polarization=args.polarization, seed=args.seed)
        if args.command == "spectrum":
            run_spectrum(cfg, args.out)
        elif args.command == "phase-scan":
            run_phase_scan(cfg, args.out)
        else:
            return 0 if run_oracle_check(cfg) else 1
    except (CliError, ClosedLambdaError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(f"error: {msg}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
