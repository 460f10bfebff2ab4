"""Experiment configuration files.

An experiment is an INI file::

    [experiment]
    seed = 42
    out = reports

    [family]
    variant = dirichlet        ; dirichlet | nig | polya_tree | charge
    alpha = 5                  ; c = ... and level_alphas = ... for polya_tree
                               ; fixture = escape for variant = charge
    [base_measure]
    kind = exponential
    rate = 1

    [partitions]
    dyadic_levels = 1 2 3 4    ; or one named interval list per line, coarse to fine:
                               ; coarse = [[[-inf, 0]], [[0, inf]]]

    [test projectivity]
    n = 100000

Each ``[test NAME]`` section enables one validator; keys are its settings.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from projlim.errors import ConfigError, ProjlimError
from projlim.families import MarginalFamily, PolyaTree, family_from_spec, family_to_spec, polya_level
from projlim.intervals import Partition, partition_from_text
from projlim.measures import (
    BaseMeasure,
    Charge,
    base_measure_from_spec,
    dyadic_quantile_partition,
    escape_charge,
)
from projlim.rng import MAX_SEED
from projlim.samplers import chain_groupings

SEED_ENV = "PROJLIM_SEED"
BUNDLED = Path(__file__).parent / "configs"

TEST_DEFAULTS: dict[str, dict[str, Any]] = {
    "projectivity": {"n": 100_000, "level": 0.01},
    "mean_condition": {"n": 100_000, "k_se": 3.0, "partitions": "all"},
    "harris": {"n_draws": 10_000, "sequences": 5, "depth": 8, "k_se": 3.0, "limit_tol": 0.05},
}
CHARGE_FIXTURES = {"escape": escape_charge}


@dataclass
class ExperimentConfig:
    family: MarginalFamily | Charge
    base: BaseMeasure
    partitions: list[tuple[str, Partition]]
    tests: dict[str, dict[str, Any]]
    seed: int
    out: Path
    threads: int = 1
    replicates: int = 100
    source: str = ""
    resolved: dict[str, Any] = field(default_factory=dict)

    @property
    def chain(self) -> list[Partition]:
        return [p for _, p in self.partitions]


def find_config(path: str | os.PathLike) -> Path:
    p = Path(path)
    if p.exists():
        return p
    if (BUNDLED / p.name).exists():
        return BUNDLED / p.name
    raise ConfigError(f"config file not found: {path}")


def _num(v: str, kind=float, what=""):
    try:
        return kind(v)
    except ValueError:
        raise ConfigError(f"{what or 'value'}: cannot parse {v!r} as {kind.__name__}") from None


def parse_seed(v) -> int:
    seed = _num(str(v).strip(), int, "seed")
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _coerce(default, raw: str, key: str):
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return _num(raw, int, key)
    if isinstance(default, float):
        return _num(raw, float, key)
    return raw.strip()


def load_config(path, seed: int | None = None, out: str | None = None,
                threads: int | None = None, replicates: int | None = None) -> ExperimentConfig:
    """Parse and validate an experiment file; explicit arguments override it.

    The seed is taken from ``seed``, then the ``PROJLIM_SEED`` environment
    variable, then the file; a missing seed is an error.
    """
    path = find_config(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(path.read_text(), source=str(path))
    except (configparser.Error, OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    try:
        return _build(cp, path, seed, out, threads, replicates)
    except ConfigError:
        raise
    except ProjlimError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _build(cp, path, seed, out, threads, replicates) -> ExperimentConfig:
    exp = cp["experiment"] if cp.has_section("experiment") else {}
    if seed is None and os.environ.get(SEED_ENV, "").strip():
        seed = os.environ[SEED_ENV]
    if seed is None:
        seed = exp.get("seed")
    if seed is None:
        raise ConfigError("no seed: pass --seed, set PROJLIM_SEED or add seed to [experiment]")
    seed = parse_seed(seed)

    if not cp.has_section("base_measure"):
        raise ConfigError("missing [base_measure] section")
    bm = dict(cp["base_measure"])
    kind = bm.pop("kind", None)
    if kind is None:
        raise ConfigError("[base_measure] needs kind")
    params: dict[str, Any] = {}
    for k, v in bm.items():
        params[k] = [_num(t, float, k) for t in v.split()] if kind == "empirical" else _num(v, float, k)
    base = base_measure_from_spec({"kind": kind, "params": params})

    if not cp.has_section("family"):
        raise ConfigError("missing [family] section")
    fam = dict(cp["family"])
    variant = fam.get("variant", "").lower()
    if variant == "charge":
        fixture = fam.get("fixture", "")
        if fixture not in CHARGE_FIXTURES:
            raise ConfigError(f"unknown charge fixture {fixture!r}")
        family = CHARGE_FIXTURES[fixture]()
        family_spec = {"variant": "charge", "fixture": fixture}
    else:
        spec: dict[str, Any] = {"variant": variant}
        for k in ("alpha", "c"):
            if k in fam:
                spec[k] = _num(fam[k], float, k)
        if "level_alphas" in fam:
            spec["level_alphas"] = [_num(t, float, "level_alphas") for t in fam["level_alphas"].split()]
        family = family_from_spec(spec, base)
        family_spec = family_to_spec(family)

    partitions: list[tuple[str, Partition]] = []
    if cp.has_section("partitions"):
        for name, text in cp["partitions"].items():
            if name == "dyadic_levels":
                for lv in text.split():
                    n = _num(lv, int, "dyadic level")
                    partitions.append((f"L{n}", dyadic_quantile_partition(base, n)))
            else:
                partitions.append((name, partition_from_text(text)))
    if isinstance(family, PolyaTree):
        for _, p in partitions:
            polya_level(family, p)
    if len(partitions) > 1:
        chain_groupings([p for _, p in partitions])

    tests: dict[str, dict[str, Any]] = {}
    for sec in cp.sections():
        if not sec.startswith("test"):
            continue
        name = sec[4:].strip()
        if name not in TEST_DEFAULTS:
            raise ConfigError(f"unknown test section [{sec}]")
        settings = dict(TEST_DEFAULTS[name])
        for k, v in cp[sec].items():
            if k not in settings:
                raise ConfigError(f"[{sec}]: unknown key {k!r}")
            settings[k] = _coerce(settings[k], v, k)
        if replicates is not None:
            for k in ("n", "n_draws"):
                if k in settings:
                    settings[k] = replicates
        tests[name] = settings
    if isinstance(family, Charge) and set(tests) - {"harris"}:
        raise ConfigError("a deterministic charge only supports the harris test")
    if ("projectivity" in tests and len(partitions) < 2) or ("mean_condition" in tests and not partitions):
        raise ConfigError("not enough partitions for the requested tests")

    threads = threads if threads is not None else _num(exp.get("threads", "1"), int, "threads")
    reps = replicates if replicates is not None else _num(exp.get("replicates", "100"), int, "replicates")
    if threads < 1 or reps < 1:
        raise ConfigError("threads and replicates must be positive")
    out_dir = Path(out if out is not None else exp.get("out", "reports"))

    resolved = {
        "family": family_spec,
        "base_measure": base.to_spec(),
        "partitions": [[n, p.to_text()] for n, p in partitions],
        "tests": tests,
        "seed": seed,
    }
    return ExperimentConfig(family, base, partitions, tests, seed, out_dir, threads, reps,
                            str(path), resolved)
