"""Command-line driver: ``projlim validate | sample | report``.

Exit codes: 0 all tests passed, 1 some test failed, 2 bad config or usage,
3 numerical failure during a run.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from projlim import __version__, kernels
from projlim.config import ExperimentConfig, load_config, parse_seed
from projlim.errors import ConfigError, ProjlimError
from projlim.intervals import _fmt
from projlim.measures import Charge
from projlim.rng import SeededRng, replicate
from projlim.samplers import sample_chain
from projlim.validators import (
    TestReport,
    harris_test,
    make_harris_sequences,
    mean_condition_test,
    projectivity_test,
)

log = logging.getLogger("projlim")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
STREAM_PROJECTIVITY, STREAM_MEAN, STREAM_HARRIS, STREAM_SAMPLE = 0, 1, 2, 3


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _mean_partitions(cfg: ExperimentConfig, spec: str):
    spec = spec.strip().lower()
    if spec == "all":
        return cfg.partitions
    if spec == "finest":
        return cfg.partitions[-1:]
    wanted = spec.split()
    names = {n.lower(): (n, p) for n, p in cfg.partitions}
    missing = [w for w in wanted if w not in names]
    if missing:
        raise ConfigError(f"mean_condition: unknown partitions {missing}")
    return [names[w] for w in wanted]


def run_validation(cfg: ExperimentConfig) -> list[tuple[str, TestReport]]:
    """Run every configured test; returns (file stem, report) pairs in run order."""
    root = SeededRng(cfg.seed)
    out: list[tuple[str, TestReport]] = []
    tests = cfg.tests
    if "projectivity" in tests:
        t = tests["projectivity"]
        for k, ((cn, coarse), (fn, fine)) in enumerate(zip(cfg.partitions, cfg.partitions[1:])):
            rep = projectivity_test(cfg.family, fine, coarse, t["n"],
                                    root.spawn(STREAM_PROJECTIVITY).spawn(k), cfg.threads, t["level"])
            out.append((f"projectivity_{cn}_{fn}", rep))
    if "mean_condition" in tests:
        t = tests["mean_condition"]
        for k, (name, part) in enumerate(_mean_partitions(cfg, t["partitions"])):
            rep = mean_condition_test(cfg.family, part, t["n"],
                                      root.spawn(STREAM_MEAN).spawn(k), cfg.threads, k_se=t["k_se"])
            out.append((f"mean_condition_{name}", rep))
    if "harris" in tests:
        t = tests["harris"]
        seqs = make_harris_sequences(cfg.base, t["sequences"], t["depth"])
        rep = harris_test(cfg.family, seqs, t["n_draws"], root.spawn(STREAM_HARRIS), cfg.threads,
                          k_se=t["k_se"], limit_tol=t["limit_tol"])
        out.append(("harris", rep))
    for _, rep in out:
        rep.config = {**rep.config, "experiment": cfg.resolved}
    return out


def cmd_validate(args) -> int:
    cfg = load_config(args.config, args.seed, args.out, args.threads, args.replicates)
    if not cfg.tests:
        raise ConfigError("config enables no tests")
    stamp = datetime.now(timezone.utc).isoformat()
    reports = run_validation(cfg)
    for stem, rep in reports:
        rep.metadata = {"timestamp": stamp, "version": __version__, "backend": kernels.BACKEND,
                        "config_file": cfg.source}
        atomic_write(cfg.out / f"{stem}.json", rep.to_json())
        atomic_write(cfg.out / f"{stem}.csv", rep.to_csv())
        log.info("%s %s", "PASS" if rep.passed else "FAIL", stem)
    ok = all(rep.passed for _, rep in reports)
    print(f"{'PASS' if ok else 'FAIL'}: {sum(r.passed for _, r in reports)}/{len(reports)} "
          f"tests passed; reports in {cfg.out}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(args) -> int:
    cfg = load_config(args.config, args.seed, args.out, args.threads, args.replicates)
    if isinstance(cfg.family, Charge):
        raise ConfigError("cannot sample from a deterministic charge")
    if not cfg.partitions:
        raise ConfigError("config defines no partitions")
    chain = cfg.chain
    draws = replicate(
        lambda gen, m: _stack(sample_chain(cfg.family, chain, gen, m).points),
        cfg.replicates, SeededRng(cfg.seed).spawn(STREAM_SAMPLE), cfg.threads)
    col = 0
    for name, part in cfg.partitions:
        block = draws[:, col:col + len(part)]
        col += len(part)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["[" + ", ".join(f"[{_fmt(a)}, {_fmt(b)})" for a, b in cell.intervals) + "]"
                    for cell in part])
        for row in block:
            w.writerow([repr(float(v)) for v in row])
        atomic_write(cfg.out / f"samples_{name}.csv", buf.getvalue())
    print(f"wrote {cfg.replicates} draws for {len(cfg.partitions)} partitions to {cfg.out}")
    return EXIT_OK


def _stack(points):
    return np.concatenate(points, axis=1)


def _expand(paths):
    files = []
    for p in map(Path, paths):
        files.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    return files


def _summary_line(name: str, d: dict) -> str:
    stats = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                      for k, v in d.get("statistics", {}).items() if not isinstance(v, list))
    return f"{'PASS' if d.get('passed') else 'FAIL'}  {name:<40} {stats}"


def cmd_report(args) -> int:
    files = _expand(args.reports)
    if not files:
        print("usage: projlim report REPORT.json [...]: no report files given", file=sys.stderr)
        return EXIT_CONFIG
    loaded = []
    for f in files:
        try:
            d = json.loads(Path(f).read_text())
            d["test"], d["passed"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            print(f"error: cannot read report {f}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        loaded.append((Path(f).stem, d))
    n_pass = sum(bool(d["passed"]) for _, d in loaded)
    if n_pass == len(loaded):
        print(f"PASS: {n_pass}/{len(loaded)} reports passed")
        if args.verbose:
            for name, d in loaded:
                print(_summary_line(name, d))
        return EXIT_OK
    print(f"FAIL: {n_pass}/{len(loaded)} reports passed")
    for name, d in loaded:
        print(_summary_line(name, d))
    return EXIT_FAIL


def _seed_arg(v: str) -> int:
    try:
        return parse_seed(v)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="projlim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("validate", cmd_validate, "run the configured validators"),
                            ("sample", cmd_sample, "write raw draws as CSV")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="experiment file (or a bundled config name)")
        sp.add_argument("--seed", type=_seed_arg, help="64-bit seed (fallback: $PROJLIM_SEED, then config)")
        sp.add_argument("--replicates", type=int, help="draws per test / rows per sample file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--threads", type=int, help="worker threads for replicate streams")
        sp.set_defaults(func=fn)
    sp = sub.add_parser("report", help="summarize JSON reports")
    sp.add_argument("reports", nargs="*", help="report files or directories")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProjlimError, ArithmeticError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
