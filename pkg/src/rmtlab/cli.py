"""Command-line interface: reproducible experiments with file outputs.

Every command is a pure function of (config, seed): reruns produce
byte-identical files.  Exit codes: 0 success, 2 validation, 3 capacity,
4 numerical or invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .cumulant_scan import scan_graph
from .ensembles import ParameterError, sample_stream
from .graphs import CapacityError, CumulantGraph, GraphParseError
from .linalg import RngHandle, eigenvalues_hermitian
from .replica_rg import (DEFAULT_MAX_EDGES, CumulantSpec, FlowInvariantError,
                         check_bounds_flow, extract_resolvent, initial_potential,
                         integrate_flow)
from .ring import RingElement
from .semicircle import SemicircleParams
from .spectral import convergence_scan, histogram, scale_spectrum
from .svgplot import render_histogram_svg

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3
EXIT_NUMERICAL = 4

MAX_CLI_FLOW_ORDER = 8


class OutputLock:
    """One command invocation owns an output directory at a time."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / ".lock"
        self.fd = None

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            self.fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(f"output directory is locked by another run: {self.path}")
        return self

    def __exit__(self, *exc):
        if self.fd is not None:
            os.close(self.fd)
            self.path.unlink(missing_ok=True)
        return False


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_metadata(out_dir: Path, config: ExperimentConfig, command: str, extra: dict):
    doc = {
        "command": command,
        "config_sha256": config.digest(),
        "config": config.to_json(),
        "seed": config.seed,
        "versions": {"rmtlab": __version__, "numpy": np.__version__},
    }
    doc.update(extra)
    _write_text(out_dir / "metadata.json", json.dumps(doc, sort_keys=True, indent=1) + "\n")


def cmd_sample(config: ExperimentConfig, out_dir: Path) -> int:
    """Write per-sample scaled spectra, one CSV per matrix size."""
    warnings: dict[str, list[str]] = {}
    with OutputLock(out_dir):
        for n_index, n in enumerate(config.n_grid):
            rng = RngHandle(config.seed, 0).substream(n_index)
            lines = ["sample_index,eig_index,lambda_scaled"]
            for s_idx, matrix in enumerate(sample_stream(config.ensemble, n,
                                                         config.samples_per_n, rng)):
                spectrum = scale_spectrum(eigenvalues_hermitian(matrix), n)
                for e_idx, lam in enumerate(spectrum.eigs_scaled):
                    lines.append(f"{s_idx},{e_idx},{float(lam)!r}")
                for w in matrix.meta.get("warnings", []):
                    warnings.setdefault(str(n), []).append(w)
            _write_text(out_dir / f"spectra_N{n}.csv", "\n".join(lines) + "\n")
        _write_metadata(out_dir, config, "sample", {"warnings": warnings})
    return EXIT_OK


def cmd_moments(config: ExperimentConfig, out_dir: Path) -> int:
    """Scaled-moment table with standard errors and the semicircle gap."""
    with OutputLock(out_dir):
        rng = RngHandle(config.seed, 0)
        rows = convergence_scan(config.ensemble, config.n_grid, config.moment_orders,
                                config.samples_per_n, rng)
        lines = ["N,k,mean,stderr,gap"]
        for row in rows:
            lines.append(f"{row.n},{row.k},{row.mean!r},{row.stderr!r},{row.gap!r}")
        _write_text(out_dir / "moments.csv", "\n".join(lines) + "\n")
        _write_metadata(out_dir, config, "moments", {})
    return EXIT_OK


def cmd_cumulant_scan(config: ExperimentConfig, out_dir: Path) -> int:
    """Scaled cumulant estimates per graph and N, with bound verdicts."""
    graphs = config.parsed_graphs()
    if not graphs:
        raise ConfigError("graphs_to_scan: required for cumulant-scan")
    for g in graphs:
        if g.num_edges > 4:
            raise ConfigError(f"graphs_to_scan: {g.to_text()} has more than 4 edges")
    with OutputLock(out_dir):
        rng = RngHandle(config.seed, 0)
        lines = ["N,graph,scaled_estimate,stderr,verdict"]
        for g_index, graph in enumerate(graphs):
            result = scan_graph(config.ensemble, graph, config.n_grid,
                                config.samples_per_n, rng.substream(g_index))
            from .graphs import scaling_exponent
            expo = float(scaling_exponent(graph))
            for est in result.estimates:
                scaled = est.estimate * est.n ** expo
                scaled_err = est.stderr * est.n ** expo
                lines.append(f"{est.n},{graph.to_text()},{scaled!r},{scaled_err!r},"
                             f"{result.verdict.value}")
        _write_text(out_dir / "scan.csv", "\n".join(lines) + "\n")
        _write_metadata(out_dir, config, "cumulant-scan", {})
    return EXIT_OK


def cmd_rg_flow(order: int, sigma: Fraction, pert_graph: str | None = None,
                pert_coeff: Fraction | None = None, pert_nhalf: int = 0,
                max_edges: int | None = None, out_dir: Path | None = None,
                stream=None) -> int:
    """Run the exact flow, print the resolvent series, check the bounds."""
    stream = stream or sys.stdout
    if order < 1 or order > MAX_CLI_FLOW_ORDER:
        raise CapacityError(f"flow order must be in [1, {MAX_CLI_FLOW_ORDER}]")
    spec = CumulantSpec.gaussian_spec(sigma * sigma)
    if pert_graph is not None:
        graph = CumulantGraph.from_text(pert_graph)
        value = RingElement({(0, pert_nhalf): Fraction(pert_coeff if pert_coeff is not None else 1)})
        spec = spec.with_perturbation(graph, value)
    state = integrate_flow(initial_potential(spec, max_edges or DEFAULT_MAX_EDGES), order)
    coeffs = extract_resolvent(state, order)
    print(", ".join(str(c) for c in coeffs), file=stream)
    report = check_bounds_flow(state, spec)
    if out_dir is not None:
        with OutputLock(out_dir):
            _write_text(out_dir / "flow_state.json", state.dumps() + "\n")
            _write_text(out_dir / "resolvent.txt",
                        "\n".join(str(c) for c in coeffs) + "\n")
            _write_text(out_dir / "bounds.txt", "\n".join(
                f"{e.graph} t^{e.t_order} {e.part} grade={e.half_grade} ok={e.ok}"
                for e in report.entries) + "\n")
    if not report.all_ok:
        print("scaling-bound violation in the n^0 grade", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_plot(spectra_files: list[Path], sigma: float, bins: int,
             value_range: tuple[float, float], out_file: Path) -> int:
    """SVG histogram of pooled spectra with the semicircle curve overlaid."""
    eigs = []
    for path in spectra_files:
        if not path.exists():
            raise ConfigError(f"spectra file not found: {path}")
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "sample_index,eig_index,lambda_scaled":
                raise ConfigError(f"unexpected spectra header in {path}: {header!r}")
            for line in fh:
                eigs.append(float(line.rsplit(",", 1)[1]))
    if not eigs:
        raise ConfigError("no eigenvalues found in the given spectra files")
    from .spectral import SpectrumSample
    pooled = SpectrumSample(len(eigs), np.sort(np.array(eigs)))
    bars = histogram(pooled, bins, value_range)
    svg = render_histogram_svg(bars, sigma)
    _write_text(out_file, svg)
    return EXIT_OK


def cmd_verify(suite: str, stream=None) -> int:
    from .acceptance import run_suite
    stream = stream or sys.stdout
    results = run_suite(suite)
    failed = False
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}", file=stream)
        failed = failed or not res.passed
    return EXIT_NUMERICAL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmt",
                                     description="random-matrix laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", required=True, help="output directory")

    with_config(sub.add_parser("sample", help="write per-sample scaled spectra"))
    with_config(sub.add_parser("moments", help="write the moment convergence table"))
    with_config(sub.add_parser("cumulant-scan", help="scan entry cumulants over N"))

    flow = sub.add_parser("rg-flow", help="exact flow and resolvent series")
    flow.add_argument("--order", type=int, required=True)
    flow.add_argument("--sigma", type=Fraction, default=Fraction(1))
    flow.add_argument("--pert-graph", default=None, help="graph text form")
    flow.add_argument("--pert-coeff", type=Fraction, default=None)
    flow.add_argument("--pert-nhalf", type=int, default=0,
                      help="N grade of the perturbation, in units of N^(1/2)")
    flow.add_argument("--max-edges", type=int, default=None)
    flow.add_argument("--out", default=None)

    plot = sub.add_parser("plot", help="SVG histogram with semicircle overlay")
    plot.add_argument("--spectra", nargs="+", required=True)
    plot.add_argument("--sigma", type=float, default=1.0)
    plot.add_argument("--bins", type=int, default=50)
    plot.add_argument("--range", type=float, nargs=2, default=(-3.0, 3.0))
    plot.add_argument("--out", required=True)

    verify = sub.add_parser("verify", help="run an acceptance suite")
    verify.add_argument("--suite", default="all")
    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        doc = config.to_json()
        doc["seed"] = args.seed
        config = ExperimentConfig.from_json(doc)
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sample":
            return cmd_sample(_load_config(args), Path(args.out))
        if args.command == "moments":
            return cmd_moments(_load_config(args), Path(args.out))
        if args.command == "cumulant-scan":
            return cmd_cumulant_scan(_load_config(args), Path(args.out))
        if args.command == "rg-flow":
            return cmd_rg_flow(args.order, args.sigma, args.pert_graph, args.pert_coeff,
                               args.pert_nhalf, args.max_edges,
                               Path(args.out) if args.out else None)
        if args.command == "plot":
            return cmd_plot([Path(p) for p in args.spectra], args.sigma, args.bins,
                            tuple(args.range), Path(args.out))
        if args.command == "verify":
            return cmd_verify(args.suite)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, ParameterError, GraphParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (FlowInvariantError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
