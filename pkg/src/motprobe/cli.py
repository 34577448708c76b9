"""Command-line front end: ``motprobe <command> [options]``."""
import argparse
from datetime import datetime, timezone
import json
import logging
import os
from pathlib import Path
import sys

from . import __version__
from ._backend import BACKEND
from .config import config_hash, config_to_dict, load_config, paper_default
from .errors import MotProbeError, OutputError, ValidationError
from . import experiments as ex
from .series import read_csv

COMMANDS = ("steps", "scan", "loading", "decay", "fit", "compare", "paper-report")


def build_parser():
    p = argparse.ArgumentParser(prog="motprobe", description=__doc__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config; omitted keys take the reference defaults")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--no-noise", action="store_true", help="emit expected (noise-free) signals")
    p.add_argument("--out", help="output directory (default $MOTPROBE_OUT or .)")
    p.add_argument("--scan-speed", type=float, metavar="MM_PER_S",
                   help="index the scan SPCM channel by time at this speed")
    p.add_argument("--plot-files", action="store_true",
                   help="also write headerless two-column .dat files")
    p.add_argument("--input", help="CSV series to fit (fit command)")
    p.add_argument("--model", choices=("gaussian", "loading", "decay"),
                   help="model family (fit command)")
    p.add_argument("--gate", type=float, metavar="S",
                   help="weight the fit by Poisson counts with this gate time")
    p.add_argument("--fixed-offset", type=float, metavar="Y",
                   help="hold the fit baseline at this value instead of fitting it")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _out_dir(args):
    path = Path(args.out or os.environ.get("MOTPROBE_OUT") or ".")
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _write_json(path, doc):
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _manifest(command, cfg, noise, files):
    return {
        "command": command,
        "artifact_version": __version__,
        "kernel_backend": BACKEND,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "noise": noise,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "files": files,
        "config": config_to_dict(cfg),
    }


def _emit_series(command, channels, cfg, noise, out, plot_files):
    files = []
    for name, series in channels.items():
        path = out / f"{command}_{name}.csv"
        series.write_csv(path)
        files.append(path.name)
        if plot_files:
            dat = out / f"{command}_{name}.dat"
            series.write_plot_file(dat)
            files.append(dat.name)
    _write_json(out / f"{command}_manifest.json", _manifest(command, cfg, noise, files))
    return files


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    cfg = load_config(args.config) if args.config else paper_default()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    noise = not args.no_noise
    out = _out_dir(args)
    command = args.command

    if command in ("steps", "loading", "decay"):
        runner = {"steps": ex.run_steps, "loading": ex.run_loading, "decay": ex.run_decay}[command]
        files = _emit_series(command, runner(cfg, noise), cfg, noise, out, args.plot_files)
    elif command == "scan":
        chans = ex.run_scan(cfg, noise, scan_speed_mm_s=args.scan_speed)
        files = _emit_series(command, chans, cfg, noise, out, args.plot_files)
    elif command == "fit":
        if not (args.input and args.model):
            raise ValidationError("fit needs --input and --model")
        result = ex.fit_series(read_csv(args.input), args.model, gate_s=args.gate,
                               offset=args.fixed_offset)
        doc = result.to_dict()
        doc["input"] = str(args.input)
        _write_json(out / f"fit_{args.model}.json", doc)
        # stdout carries only the result so it can be piped.
        print(json.dumps(doc, sort_keys=True))
        return 0
    elif command == "compare":
        doc = ex.compare(cfg, noise)
        doc["manifest"] = _manifest(command, cfg, noise, ["compare.json"])
        _write_json(out / "compare.json", doc)
        files = ["compare.json"]
    else:
        results = ex.paper_report(cfg, noise)
        passed = all(r["passed"] for r in results)
        doc = {"all_passed": passed, "targets": results,
               "manifest": _manifest(command, cfg, noise, ["paper_report.json"])}
        _write_json(out / "paper_report.json", doc)
        for r in results:
            print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: "
                  f"obtained {r['obtained']:.6g}, target {r['target']:.6g}")
        return 0 if passed else 1
    for f in files:
        print(out / f)
    return 0


def main(argv=None):
    try:
        return run(argv)
    except MotProbeError as exc:
        print(json.dumps({"error": exc.kind, "type": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
