"""Batch driver: ``heatindex run --config PATH [--suite NAME] [--out DIR]``.

Configs are INI files. Every section and key is optional except that the file
must define at least one section; see ``DEFAULTS`` for the recognised keys.
Exit status: 0 all checks pass, 1 some check failed, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

__all__ = [
    "SUITES",
    "RunConfig",
    "CheckRecord",
    "VerificationReport",
    "ConfigError",
    "load_config",
    "run_suite",
    "emit_report",
    "main",
]

SUITES = ("mckean-singer", "mehler", "rescale", "jlo-limit", "k-pairing", "charclass", "all")

DEFAULTS: dict[str, dict[str, str]] = {
    "run": {"suite": "all", "out": "heatindex-report"},
    "models": {
        "flux": "1, 2, 3",
        "charge": "-2, -1, 1, 2",
        "landau_levels": "64",
        "monopole_cutoff": "64",
        "mode_cutoff": "8",
        "index_cutoffs": "8, 12, 16",
        "bott_grid": "128",
        "bott_profile": "trigonometric",
        "prefactor_power": "auto",
    },
    "sweeps": {
        "t": "0.05, 0.2, 1.0",
        "mehler_b": "0.5, 1, 2",
        "mehler_t": "0.25, 0.5",
        "u": "0.1, 0.0562341325, 0.0316227766, 0.0177827941, 0.01, 0.0056234133, 0.0031622777, 0.0017782794, 0.001",
        "twist": "0, 1",
        "jlo_t": "0.02, 0.01, 0.005, 0.0025",
        "pairing_t": "0.002",
    },
    "tolerances": {
        "mckean_singer": "1e-8",
        "mehler": "1e-4",
        "mehler_order": "1.8",
        "rescale": "1e-6",
        "rescale_rate": "0.5",
        "jlo_limit": "0.01",
        "rhs_index": "1e-6",
        "pairing": "0.05",
        "charclass": "1e-10",
    },
}


class ConfigError(ValueError):
    """Invalid or empty configuration."""


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def _ints(text: str) -> tuple[int, ...]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers in {text!r}")
    return tuple(int(v) for v in vals)


def _monotone(seq: tuple[float, ...]) -> bool:
    d = np.diff(seq)
    return bool(np.all(d > 0) or np.all(d < 0))


@dataclass(frozen=True)
class RunConfig:
    suite: str
    out: Path
    flux: tuple[int, ...]
    charge: tuple[int, ...]
    landau_levels: int
    monopole_cutoff: int
    mode_cutoff: int
    index_cutoffs: tuple[int, ...]
    bott_grid: int
    bott_profile: str
    prefactor_power: int | None
    t: tuple[float, ...]
    mehler_b: tuple[float, ...]
    mehler_t: tuple[float, ...]
    u: tuple[float, ...]
    twist: tuple[float, ...]
    jlo_t: tuple[float, ...]
    pairing_t: float
    tolerances: dict[str, float]

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        for name in ("t", "mehler_b", "mehler_t", "u", "twist", "jlo_t", "index_cutoffs"):
            seq = getattr(self, name)
            if not seq:
                raise ConfigError(f"sweep {name!r} is empty")
            if len(seq) > 1 and not _monotone(seq):
                raise ConfigError(f"sweep {name!r} must be strictly monotone")
        if any(v <= 0 for v in self.tolerances.values()):
            raise ConfigError("tolerances must be positive")
        if any(t <= 0 for t in self.t + self.mehler_t + self.jlo_t) or self.pairing_t <= 0:
            raise ConfigError("times must be positive")


def _prefactor(text: str) -> int | None:
    text = text.strip().lower()
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"prefactor_power must be 'auto' or an integer, got {text!r}") from exc


def load_config(path: str | Path, suite: str | None = None, out: str | Path | None = None) -> RunConfig:
    """Parse an INI config, filling unspecified keys from ``DEFAULTS``."""
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        with path.open() as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not parser.sections():
        raise ConfigError(f"config {path} defines no sections")
    unknown = set(parser.sections()) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    merged = {sec: dict(keys) for sec, keys in DEFAULTS.items()}
    for sec in parser.sections():
        for key, val in parser.items(sec):
            if sec != "tolerances" and key not in merged[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
            merged[sec][key] = val
    m, s = merged["models"], merged["sweeps"]
    try:
        tolerances = {k: float(v) for k, v in merged["tolerances"].items()}
    except ValueError as exc:
        raise ConfigError(f"bad tolerance value: {exc}") from exc
    return RunConfig(
        suite=suite or merged["run"]["suite"].strip(),
        out=Path(out) if out is not None else Path(merged["run"]["out"].strip()),
        flux=_ints(m["flux"]),
        charge=_ints(m["charge"]),
        landau_levels=_ints(m["landau_levels"])[0],
        monopole_cutoff=_ints(m["monopole_cutoff"])[0],
        mode_cutoff=_ints(m["mode_cutoff"])[0],
        index_cutoffs=_ints(m["index_cutoffs"]),
        bott_grid=_ints(m["bott_grid"])[0],
        bott_profile=m["bott_profile"].strip(),
        prefactor_power=_prefactor(m["prefactor_power"]),
        t=_floats(s["t"]),
        mehler_b=_floats(s["mehler_b"]),
        mehler_t=_floats(s["mehler_t"]),
        u=_floats(s["u"]),
        twist=_floats(s["twist"]),
        jlo_t=_floats(s["jlo_t"]),
        pairing_t=_floats(s["pairing_t"])[0],
        tolerances=tolerances,
    )


# ---------------------------------------------------------------------------
# Reports


def _num(x) -> Any:
    if isinstance(x, complex) or isinstance(x, np.complexfloating):
        x = complex(x)
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


@dataclass
class CheckRecord:
    name: str
    lhs: Any
    rhs: Any
    abs_err: float
    rel_err: float
    tolerance: float
    passed: bool
    meta: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, name: str, lhs, rhs, tolerance: float, relative: bool = False, **meta) -> "CheckRecord":
        err = abs(complex(lhs) - complex(rhs))
        rel = err / abs(complex(rhs)) if complex(rhs) != 0 else (0.0 if err == 0 else math.inf)
        passed = (rel if relative else err) <= tolerance
        meta["measure"] = "relative" if relative else "absolute"
        return cls(name, lhs, rhs, float(err), float(rel), tolerance, bool(passed), meta)

    @classmethod
    def bound(cls, name: str, value: float, limit: float, upper: bool = True, **meta) -> "CheckRecord":
        """Check ``value <= limit`` (``upper``) or ``value >= limit``."""
        passed = value <= limit if upper else value >= limit
        meta["measure"] = "upper bound" if upper else "lower bound"
        return cls(name, value, limit, math.nan, math.nan, limit, bool(passed), meta)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lhs"] = _num(self.lhs)
        d["rhs"] = _num(self.rhs)
        d["meta"] = {k: _num(v) for k, v in self.meta.items()}
        for k in ("abs_err", "rel_err"):
            if not math.isfinite(d[k]):
                d[k] = None
        return d


@dataclass
class VerificationReport:
    suite: str
    timestamp: str
    checks: list[CheckRecord] = field(default_factory=list)
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "timestamp": self.timestamp,
            "passed": self.passed,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "tables": sorted(self.tables),
        }


def emit_report(report: VerificationReport, directory: str | Path) -> list[Path]:
    """Write ``report.json`` and one CSV per table into ``directory``."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
        written = []
        p = d / "report.json"
        p.write_text(json.dumps(report.as_dict(), indent=2, allow_nan=True) + "\n")
        written.append(p)
        for name in sorted(report.tables):
            header, rows = report.tables[name]
            p = d / f"{name}.csv"
            with p.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for row in rows:
                    w.writerow([repr(x) if isinstance(x, float) else x for x in row])
            written.append(p)
    except OSError as exc:
        raise OSError(f"writing report to {d}: {exc}") from exc
    return written


# ---------------------------------------------------------------------------
# Suites


def _suite_mckean_singer(cfg: RunConfig, rep: VerificationReport):
    from .heat import heat_supertrace
    from .models import landau_model, monopole_model

    tol = cfg.tolerances["mckean_singer"]
    rows = []
    models = [("landau", k, landau_model(k, cfg.landau_levels)) for k in cfg.flux]
    models += [("monopole", q, monopole_model(q, cfg.monopole_cutoff)) for q in cfg.charge]
    for kind, p, model in models:
        for t in cfg.t:
            st = heat_supertrace(model, t)
            rep.checks.append(
                CheckRecord.compare(f"supertrace {kind} {p} t={t:g}", st.value, p, tol, tail_bound=st.tail_bound)
            )
            rep.checks.append(CheckRecord.bound(f"tail bound {kind} {p} t={t:g}", st.tail_bound, tol))
            rows.append([kind, p, t, st.value, st.tail_bound])
    rep.tables["mckean_singer"] = (["model", "parameter", "t", "supertrace", "tail_bound"], rows)


def _suite_mehler(cfg: RunConfig, rep: VerificationReport):
    from .heat import mehler_kernel, oscillator_fd_oracle

    J = np.array([[0, 1j], [-1j, 0]])  # magnetic block: eigenvalues +-b
    rows = []
    for b in cfg.mehler_b:
        for t in cfg.mehler_t:
            oracle = oscillator_fd_oracle(b * J, 0.0, t)
            mk = mehler_kernel(b * J, 0.0, t).real
            rep.checks.append(
                CheckRecord.compare(
                    f"mehler b={b:g} t={t:g}", mk, oracle.value, cfg.tolerances["mehler"], oracle_error=oracle.error_estimate
                )
            )
            rep.checks.append(
                CheckRecord.bound(f"oracle order b={b:g} t={t:g}", oracle.order, cfg.tolerances["mehler_order"], upper=False)
            )
            rows.append([b, t, mk, oracle.value, oracle.order, oracle.error_estimate])
    rep.tables["mehler"] = (["b", "t", "mehler", "fd_oracle", "fd_order", "fd_error_estimate"], rows)


def _suite_rescale(cfg: RunConfig, rep: VerificationReport):
    from .heat import rescaled_limit_check

    us = tuple(sorted(cfg.u, reverse=True))
    for f in cfg.twist:
        tab = rescaled_limit_check(f, us)
        rep.checks.append(
            CheckRecord.bound(f"rescaled limit error f={f:g}", tab.final_error, cfg.tolerances["rescale"], u=float(tab.u[-1]))
        )
        rep.checks.append(CheckRecord.bound(f"rescale rate f={f:g}", tab.rate, cfg.tolerances["rescale_rate"], upper=False))
        rows = [[float(u), float(e), int(m)] for u, e, m in zip(tab.u, tab.errors, tab.fit_mask)]
        rep.tables[f"rescale_f{f:g}"] = (["u", "error", "used_in_fit"], rows)


def _sin_cos_triple():
    a0 = {(1, 1): -0.25, (-1, -1): -0.25, (1, -1): 0.25, (-1, 1): 0.25}
    a1 = {(1, 0): 0.5, (-1, 0): 0.5}
    a2 = {(0, 1): 0.5, (0, -1): 0.5}
    return a0, a1, a2


def _suite_jlo_limit(cfg: RunConfig, rep: VerificationReport):
    from .jlo import JloQuery, jlo_small_t_limit
    from .models import flat_torus_dirac

    model = flat_torus_dirac(cfg.mode_cutoff)
    ts = tuple(sorted(cfg.jlo_t, reverse=True))
    res = jlo_small_t_limit(JloQuery(model, 2, _sin_cos_triple(), ts[0]), ts)
    rep.checks.append(
        CheckRecord.compare("jlo2 sin/cos limit", res.extrapolated, res.de_rham, cfg.tolerances["jlo_limit"], relative=True)
    )
    rows = [[float(t), v.real, v.imag] for t, v in zip(res.ts, res.values)]
    rows.append([0.0, res.extrapolated.real, res.extrapolated.imag])
    rep.tables["jlo_limit"] = (["t", "value_re", "value_im"], rows)


def _suite_k_pairing(cfg: RunConfig, rep: VerificationReport):
    from .charclass import rhs_index
    from .heat import heat_supertrace
    from .jlo import k_pairing_index, spectral_index
    from .models import bott_projection, flat_torus_dirac, landau_model

    e = bott_projection(cfg.bott_grid, cfg.bott_profile)
    rows = []
    indices = []
    for M in cfg.index_cutoffs:
        si = spectral_index(flat_torus_dirac(M), e)
        indices.append(si.index)
        rows.append([M, si.index, si.signed_weight, si.threshold, si.gap_ratio])
    rep.tables["spectral_index"] = (["cutoff", "index", "signed_weight", "threshold", "gap_ratio"], rows)
    stable = len(set(indices)) == 1 and abs(indices[0]) == 1
    rep.checks.append(CheckRecord("spectral index stable", indices, "+-1", math.nan, math.nan, 0.0, stable, {}))
    ind = indices[0]
    rhs = rhs_index(e, prefactor_power=cfg.prefactor_power)
    rep.checks.append(CheckRecord.compare("rhs_index vs spectral index", rhs, ind, cfg.tolerances["rhs_index"]))
    pr = k_pairing_index(flat_torus_dirac(cfg.mode_cutoff), e, cfg.pairing_t, 2)
    rep.checks.append(
        CheckRecord.compare(
            "jlo pairing vs spectral index", pr.pairing, ind, cfg.tolerances["pairing"], relative=True, t=cfg.pairing_t
        )
    )
    for k in cfg.flux:
        model = landau_model(k, cfg.landau_levels)
        for t in cfg.t:
            pu = k_pairing_index(model, None, t)
            rep.checks.append(
                CheckRecord.compare(
                    f"unit pairing landau {k} t={t:g}",
                    pu.pairing,
                    k,
                    cfg.tolerances["mckean_singer"],
                    tail_bound=heat_supertrace(model, t).tail_bound,
                )
            )


def _suite_charclass(cfg: RunConfig, rep: VerificationReport):
    from fractions import Fraction

    from .charclass import (
        IdempotentField,
        SphereGrid,
        TorusGrid,
        a_hat,
        landau_curvature,
        monopole_curvature,
        rhs_index,
        root_block,
        sphere_curvature,
    )
    from .exterior_clifford import MultiVector

    tol = cfg.tolerances["charclass"]
    theta = MultiVector(4, {(1, 2): 1, (3, 4): 1})
    got = a_hat(root_block(theta))
    want = MultiVector(4, {(): 1, (1, 2, 3, 4): Fraction(-1, 12)})
    rep.checks.append(
        CheckRecord("a_hat four generators", repr(got), repr(want), (got - want).norm(), math.nan, 0.0, got == want, {})
    )
    unit = IdempotentField.identity(TorusGrid(16))
    for k in cfg.flux:
        rep.checks.append(
            CheckRecord.compare(f"rhs_index landau {k}", rhs_index(unit, F=landau_curvature(k)), k, tol)
        )
    sphere = IdempotentField.identity(SphereGrid(16, 32))
    for q in cfg.charge:
        rep.checks.append(
            CheckRecord.compare(
                f"rhs_index monopole {q}", rhs_index(sphere, R=sphere_curvature(), F=monopole_curvature(q)), q, tol
            )
        )


_RUNNERS: dict[str, Callable[[RunConfig, VerificationReport], None]] = {
    "mckean-singer": _suite_mckean_singer,
    "mehler": _suite_mehler,
    "rescale": _suite_rescale,
    "jlo-limit": _suite_jlo_limit,
    "k-pairing": _suite_k_pairing,
    "charclass": _suite_charclass,
}


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["out"] = str(cfg.out)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def run_suite(config: RunConfig) -> VerificationReport:
    """Run the configured suite (or all suites) and collect a report."""
    rep = VerificationReport(
        suite=config.suite,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        config=_config_dict(config),
    )
    names = [s for s in SUITES if s != "all"] if config.suite == "all" else [config.suite]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # truncation notes are carried inside results
        for name in names:
            start = time.perf_counter()
            _RUNNERS[name](config, rep)
            rep.config.setdefault("runtime_seconds", {})[name] = round(time.perf_counter() - start, 3)
    return rep


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="heatindex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a verification suite")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--suite", choices=SUITES)
    run.add_argument("--out", type=Path)
    sub.add_parser("list-suites", help="print the available suite names")
    args = parser.parse_args(argv)
    if args.command == "list-suites":
        print("\n".join(SUITES))
        return 0
    try:
        cfg = load_config(args.config, args.suite, args.out)
    except ConfigError as exc:
        print(f"heatindex: {exc}", file=sys.stderr)
        return 2
    report = run_suite(cfg)
    emit_report(report, cfg.out)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'}  ({cfg.out / 'report.json'})")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
