"""
Command-line interface: ``comb-transversal <subcommand> [options]``.

=============   ===============================================================
Subcommand      Action
=============   ===============================================================
design          print the designed tap weights, one per line
simulate        simulate the Gaussian test pulse and write the waveforms as CSV
sweep           run a scenario and write its RMSE table as CSV
calibrate       run the feedback calibration and write its residuals as CSV
presets         print the three processor presets as JSON
sources         print the modelled error sources as JSON
=============   ===============================================================

Exit code 0 on success, 2 on any invalid input (with a one-line diagnostic naming
the offending field), 3 when an output file cannot be written.
"""

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import ConfigurationError, ProcessorError, __version__
from .calibration import calibrate
from .config import apply_overrides, parse_config, spec_to_dict
from .datastores import FileSystemDataStore
from .engine import Preset, alignment_delay, delay_span, perturbed_taps, preset, synthesize
from .experiments import Scenario, calibration_rmse, fade_rows, run_sweep
from .impairments import ErrorSource, sources_for_budget
from .signals import FunctionKind, normalize_and_align, reference_output, rmse

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_OUTPUT = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="comb-transversal",
        description="Accuracy of microcomb-based transversal signal processors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="override a config key"
    )
    common.add_argument("--out", help="output CSV path (standard output if omitted)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more log output (repeatable)")
    common.add_argument("--quiet", action="store_true", help="only log errors")

    subparsers = parser.add_subparsers(dest="command", required=True)

    design = subparsers.add_parser("design", parents=[common], help="print the designed tap weights")
    design.add_argument("--function", help="DIF, INT, HT (or differentiator, integrator, hilbert)")
    design.add_argument("--taps", type=int, help="tap number M")

    simulate = subparsers.add_parser("simulate", parents=[common], help="simulate the Gaussian test pulse")
    simulate.add_argument("--function")
    simulate.add_argument("--taps", type=int)
    simulate.add_argument("--preset", help="start from a processor preset (PROCESSOR_1, 2 or 3)")

    sweep = subparsers.add_parser("sweep", parents=[common], help="run an RMSE sweep")
    sweep.add_argument("--scenario", help=", ".join(s.name for s in Scenario))
    sweep.add_argument("--seeds", type=int, help="number of Monte-Carlo seeds (0 ... N-1)")
    sweep.add_argument("--workers", type=int, help="worker processes")

    calibrate = subparsers.add_parser("calibrate", parents=[common], help="run the feedback calibration")
    calibrate.add_argument("--function")
    calibrate.add_argument("--taps", type=int)
    calibrate.add_argument("--preset", help="start from a processor preset (PROCESSOR_1, 2 or 3)")
    calibrate.add_argument("--rmse", action="store_true", help="also report the RMSE before/after/theoretical")

    subparsers.add_parser("presets", parents=[common], help="print the processor presets")
    subparsers.add_parser("sources", parents=[common], help="print the modelled error sources")
    return parser


def _configure_logging(args):
    if args.quiet:
        level = logging.ERROR
    else:
        level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _load(args) -> dict:
    data = {}
    if args.config:
        data = FileSystemDataStore().load_data(args.config)
    flags = []
    if getattr(args, "function", None):
        flags.append(f"function={json.dumps(args.function)}")
    if getattr(args, "taps", None) is not None:
        flags.append(f"M={args.taps}")
    return apply_overrides(data, list(args.overrides) + flags)


def _spec(args, data):
    run = parse_config(data)
    spec = run.spec
    if getattr(args, "preset", None):
        base = preset(args.preset, function=spec.function, seed=spec.budget.seed)
        spec = base if "M" not in data else replace(base, M=spec.M)
    return run, spec


def _emit(args, rows, config=None, seeds=()):
    if args.out:
        store = FileSystemDataStore()
        store.write_csv(args.out, rows)
        store.write_manifest(args.out, config or {}, seeds)
    else:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)


def _print_json(document):
    json.dump(document, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_design(args, data):
    _, spec = _spec(args, data)
    taps = spec.design()
    rows = [[repr(float(w))] for w in taps.weights]
    if args.out:
        _emit(args, [["n", "weight"]] + [[str(n), r[0]] for n, r in enumerate(rows)], spec_to_dict(spec))
    else:
        for row in rows:
            print(row[0])


def cmd_simulate(args, data):
    run, spec = _spec(args, data)
    grid = run.grid.fitted(*delay_span(spec))
    pulse = grid.pulse()
    realized = perturbed_taps(spec)
    output = synthesize(pulse, realized, spec.geometry, spec.budget)
    header = ["time", "input", "output"]
    columns = [pulse.times, pulse.samples, output.samples]
    if spec.function.kind is not FunctionKind.PHASE_ENCODE:
        ideal = reference_output(spec.function, grid)
        aligned, reference = normalize_and_align(output, ideal, alignment_delay(spec, realized))
        logger.info("RMSE %.6g", rmse(grid.observe(reference), grid.observe(aligned)))
        header += ["aligned", "ideal"]
        columns += [aligned.samples, reference.samples]
    rows = [header] + [[repr(float(v)) for v in values] for values in zip(*columns)]
    _emit(args, rows, spec_to_dict(spec), [spec.budget.seed])


def cmd_sweep(args, data):
    run = parse_config(data)
    seeds = range(args.seeds) if args.seeds is not None else None
    if args.seeds is not None and args.seeds < 1:
        raise ConfigurationError("--seeds must be at least 1")
    cfg = run.sweep_config(args.scenario, seeds=seeds, output=args.out)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    result = run_sweep(cfg)
    manifest = {"scenario": cfg.scenario.name, "config": data, "seeds": list(cfg.seeds)}
    _emit(args, result.to_csv_rows(), manifest, cfg.seeds)
    if args.out and cfg.parameter == "d2":
        out = Path(args.out)
        FileSystemDataStore().write_csv(out.with_name(out.stem + "_fade.csv"), fade_rows(cfg))


def cmd_calibrate(args, data):
    run, spec = _spec(args, data)
    cfg = run.calibration
    if args.rmse:
        _, report = calibration_rmse(spec, cfg, run.grid.fitted(*delay_span(spec)))
    else:
        _, report = calibrate(spec, spec.design(), cfg)
    _emit(args, [list(row) for row in report.to_csv_rows()], spec_to_dict(spec), [spec.budget.seed])
    summary = {"iterations_used": report.iterations_used, "converged": report.converged}
    if args.rmse:
        summary.update(
            rmse_theoretical=report.rmse_theoretical, rmse_before=report.rmse_before, rmse_after=report.rmse_after
        )
    print(json.dumps(summary), file=sys.stderr)


def cmd_presets(args, data):
    rows = []
    for p in Preset:
        spec = preset(p)
        budget = spec.budget
        rows.append(
            {
                "id": p.name,
                "M": spec.M,
                "osnr_db": budget.osnr_db,
                "alpha": budget.alpha,
                "delay_jitter": budget.delay_jitter,
                "rtce_range": budget.rtce_range,
                "delta_lambda": spec.geometry.delta_lambda,
                "delta_t_ps": spec.geometry.delta_t * 1e12,
            }
        )
    _print_json(rows)


def cmd_sources(args, data):
    active = None
    if data:
        run = parse_config(data)
        active = set(sources_for_budget(run.spec.budget, run.spec.geometry))
    rows = []
    for source in ErrorSource:
        row = source.to_json()
        if active is not None:
            row["active"] = source in active
        rows.append(row)
    _print_json(rows)


COMMANDS = {
    "design": cmd_design,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
    "presets": cmd_presets,
    "sources": cmd_sources,
}


def cli_main(argv=None) -> int:
    """Run the command line and return the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_INVALID
    _configure_logging(args)
    try:
        data = _load(args)
        COMMANDS[args.command](args, data)
    except ProcessorError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
