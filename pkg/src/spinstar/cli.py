"""Command-line front end: trace, transition, sweep, verify.

Configuration is flat ``key = value`` text with ``#`` comments and dotted
sections (``model.n``, ``coupling.family``, ``grid.samples``).  Data goes to
CSV (full double precision, LF endings, atomic writes); every run also
leaves a deterministic-key JSON report and, unless ``--no-plot`` is given,
a rendered PNG figure next to the data.

Exit codes: 0 success, 2 configuration error, 3 engine error, 4 transition
bracket failure in every cell, 5 verification failure.
"""

import argparse
import dataclasses
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import model, plots, propagate, witness
from .errors import (
    BracketError,
    ConfigError,
    ContractError,
    DimensionError,
    DomainError,
    EngineError,
)
from .linalg import DEFAULT_TOLERANCES, Tolerances
from .model import ModelConfig
from .propagate import TimeGrid
from .witness import EntanglementTrace, entanglement_trace

EXIT_CONFIG = 2
EXIT_ENGINE = 3
EXIT_BRACKET = 4
EXIT_VERIFY = 5

_FAMILY_KEYS = {
    "sites_constant": {"coupling.g"},
    "time_exponential": {"coupling.gamma"},
    "time_polynomial": {"coupling.exponent"},
    "site_time_exponential": {"coupling.gamma1"},
    "site_time_power": {"coupling.gamma", "coupling.t0"},
    "tabulated": {"coupling.times", "coupling.values"},
}


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class RunConfig:
    model: ModelConfig
    grid: TimeGrid
    engine: str
    seed: int
    out: str | None
    tolerances: Tolerances
    raw: dict


class _KeyValues:
    """Parsed key/value lines with line numbers, consumed key by key."""

    def __init__(self, text: str):
        self.entries: dict[str, tuple[str, int]] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno)
            key, value = (part.strip() for part in stripped.split("=", 1))
            if not key or not value:
                raise ConfigError(f"empty key or value in {stripped!r}", lineno)
            if key in self.entries:
                raise ConfigError(f"duplicate key {key!r}", lineno)
            self.entries[key] = (value, lineno)

    def take(self, key: str, convert, default=None, required: bool = False):
        if key not in self.entries:
            if required:
                raise ConfigError(f"missing required key {key!r}")
            return default
        value, lineno = self.entries.pop(key)
        try:
            return convert(value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno)

    def reject_unknown(self) -> None:
        if self.entries:
            key, (_, lineno) = next(iter(self.entries.items()))
            raise ConfigError(f"unknown key {key!r}", lineno)


def _as_int(s: str) -> int:
    return int(s)


def _as_float(s: str) -> float:
    return float(s)


def _as_complex(s: str) -> complex:
    return complex(s.replace(" ", ""))


def _as_complex_list(s: str) -> tuple[complex, ...]:
    return tuple(_as_complex(tok) for tok in s.split(",") if tok.strip())


def _as_float_list(s: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in s.split(",") if tok.strip())


def _as_rows(s: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_as_float_list(row) for row in s.split(";") if row.strip())


def _build_coupling(kv: _KeyValues, family: str, n: int) -> model.CouplingSpec:
    if family not in _FAMILY_KEYS:
        raise ConfigError(
            f"unknown coupling.family {family!r}; expected one of "
            f"{sorted(_FAMILY_KEYS)}"
        )
    try:
        if family == "sites_constant":
            return model.SitesConstant(kv.take("coupling.g", _as_complex_list,
                                               required=True))
        if family == "time_exponential":
            return model.TimeExponential(kv.take("coupling.gamma", _as_complex,
                                                 required=True))
        if family == "time_polynomial":
            return model.TimePolynomial(kv.take("coupling.exponent", _as_float,
                                                required=True))
        if family == "site_time_exponential":
            return model.SiteTimeExponential(kv.take("coupling.gamma1", _as_float,
                                                     required=True))
        if family == "site_time_power":
            gamma = kv.take("coupling.gamma", _as_float, required=True)
            t0 = kv.take("coupling.t0", _as_float)
            if t0 is None:
                t0 = 1e-3
                print("warning: coupling.t0 not given, defaulting to 1e-3",
                      file=sys.stderr)
            return model.SiteTimePower(gamma=gamma, t0=t0)
        times = kv.take("coupling.times", _as_float_list, required=True)
        values = kv.take("coupling.values", _as_rows, required=True)
        if len(values) == 1 and n > 1:
            values = values * n  # one row means site-independent
        return model.Tabulated(times, values)
    except DomainError as exc:
        raise ConfigError(str(exc))


def parse_config(text: str) -> RunConfig:
    """Validate configuration text into a RunConfig (unknown keys rejected)."""
    kv = _KeyValues(text)
    raw = {k: v for k, (v, _) in kv.entries.items()}

    n = kv.take("model.n", _as_int, required=True)
    alpha = kv.take("model.alpha", _as_float, required=True)
    p = kv.take("model.p", _as_float)
    beta = kv.take("model.beta", lambda s: float(s))
    if (p is None) == (beta is None):
        raise ConfigError("give exactly one of model.p and model.beta")
    family = kv.take("coupling.family", str, required=True)
    coupling = _build_coupling(kv, family, n)
    try:
        mdl = ModelConfig(n=n, alpha=alpha, coupling=coupling, p=p, beta=beta)
    except DomainError as exc:
        raise ConfigError(str(exc))

    t_start = kv.take("grid.t_start", _as_float, default=mdl.start_time)
    t_end = kv.take("grid.t_end", _as_float, required=True)
    samples = kv.take("grid.samples", _as_int, required=True)
    slices = kv.take("grid.slices", _as_int, default=16)
    try:
        grid = TimeGrid(t_start, t_end, samples, slices)
        propagate.validate_grid(mdl, grid)
    except DomainError as exc:
        raise ConfigError(str(exc))

    engine = kv.take("engine", str, default="fast")
    if engine not in ("fast", "oracle", "closed_form", "all"):
        raise ConfigError(f"engine must be fast|oracle|closed_form|all, got {engine!r}")
    seed = kv.take("seed", _as_int, default=0)
    out = kv.take("out", str)
    tol = DEFAULT_TOLERANCES
    revival = kv.take("tolerances.revival", _as_float)
    halving = kv.take("tolerances.step_halving", _as_float)
    if revival is not None or halving is not None:
        tol = dataclasses.replace(
            tol,
            revival=revival if revival is not None else tol.revival,
            step_halving=halving if halving is not None else tol.step_halving,
        )
    kv.reject_unknown()
    return RunConfig(mdl, grid, engine, seed, out, tol, raw)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(repr(float(x)) if isinstance(x, (float, np.floating))
                          else str(x) for x in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def write_report(path: str, payload: dict) -> str:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True,
                                   default=str) + "\n")
    return path


def _stem(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root


def _config_echo(run: RunConfig) -> dict:
    cfg = run.model
    return {
        "model": {"n": cfg.n, "alpha": cfg.alpha, "p": cfg.p,
                  "family": model.family_name(cfg.coupling),
                  "coupling": str(cfg.coupling)},
        "grid": dataclasses.asdict(run.grid),
        "engine": run.engine,
        "seed": run.seed,
        "source": run.raw,
    }


# ---------------------------------------------------------------------------
# trace
# ---------------------------------------------------------------------------

def _applicable_engines(run: RunConfig) -> list[str]:
    engines = ["fast"]
    if 2 ** (run.model.n + 2) <= propagate.oracle_dimension_cap():
        engines.append("oracle")
    if model.is_commuting(run.model.coupling) and not isinstance(
            run.model.coupling, model.Tabulated):
        engines.append("closed_form")
    return engines


def cmd_trace(run: RunConfig, out: str, plot: bool) -> int:
    started = time.perf_counter()
    engines = _applicable_engines(run) if run.engine == "all" else [run.engine]
    traces: list[EntanglementTrace] = []
    csv_paths = []
    for engine in engines:
        trace = entanglement_trace(run.model, run.grid, engine, tol=run.tolerances)
        traces.append(trace)
        path = out if len(engines) == 1 else f"{_stem(out)}.{engine}.csv"
        rows = zip(trace.times, trace.entanglement, trace.lambda_min)
        csv_paths.append(write_csv(path, "t,entanglement,lambda_min", rows))

    report_trace = traces[0]
    verdict = witness.detect_revival(report_trace, run.tolerances.revival)
    deviations = {}
    for i in range(len(traces)):
        for j in range(i + 1, len(traces)):
            key = f"{traces[i].engine}_vs_{traces[j].engine}"
            deviations[key] = float(np.abs(traces[i].entanglement
                                           - traces[j].entanglement).max())
    outputs = list(csv_paths)
    if plot:
        title = (f"N={run.model.n}, p={run.model.p:g}, "
                 f"{model.family_name(run.model.coupling)}")
        outputs.append(plots.render_trace_figure(traces, f"{_stem(out)}.png", title))
    report = {
        "command": "trace",
        "config": _config_echo(run),
        "engines": engines,
        "verdict": verdict.verdict.value,
        "revivals": [dataclasses.asdict(r) for r in verdict.revivals],
        "total_revival": verdict.total_revival,
        "max_entanglement_deviation": deviations,
        "diagnostics": {t.engine: t.diagnostics for t in traces},
        "outputs": outputs,
        "timing_s": time.perf_counter() - started,
    }
    write_report(f"{_stem(out)}.report.json", report)
    worst = max(deviations.values(), default=0.0)
    print(f"trace: {len(engines)} engine(s), verdict {verdict.verdict.value}, "
          f"max deviation {worst:.3e}")
    return 0


# ---------------------------------------------------------------------------
# transition
# ---------------------------------------------------------------------------

def cmd_transition(run: RunConfig, out: str, plot: bool, parameter: str,
                   lo: float, hi: float, tol: float,
                   ns: list[int] | None, ps: list[float] | None) -> int:
    if run.engine == "all":
        raise ConfigError("transition needs a single engine, not 'all'")
    started = time.perf_counter()
    n_values = ns or [run.model.n]
    p_values = ps or [run.model.p]
    cells = witness.transition_curve(
        n_values, p_values, run.model, parameter, lo, hi, run.grid,
        tol=tol, engine=run.engine, revival_tol=run.tolerances.revival)
    good = [c for c in cells if c.result is not None]
    rows = [(c.n, c.p, c.result.value, c.result.evaluations)
            for c in sorted(good, key=lambda c: (c.n, c.p))]
    outputs = [write_csv(out, "N,p,gamma_star,evaluations", rows)]
    if plot and good:
        outputs.append(plots.render_transition_figure(cells, f"{_stem(out)}.png",
                                                      parameter))
    report = {
        "command": "transition",
        "config": _config_echo(run),
        "parameter": parameter,
        "bracket": [lo, hi],
        "tol": tol,
        "cells": [
            {"n": c.n, "p": c.p,
             "value": None if c.result is None else c.result.value,
             "evaluations": None if c.result is None else c.result.evaluations,
             "orientation": None if c.result is None else c.result.orientation,
             "error": c.error}
            for c in sorted(cells, key=lambda c: (c.n, c.p))
        ],
        "outputs": outputs,
        "timing_s": time.perf_counter() - started,
    }
    write_report(f"{_stem(out)}.report.json", report)
    print(f"transition: {len(good)}/{len(cells)} cells bracketed")
    return 0 if good else EXIT_BRACKET


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(run: RunConfig, out: str, plot: bool,
              ns: list[int] | None, ps: list[float] | None,
              parameter: str | None, values: list[float] | None) -> int:
    if run.engine == "all":
        raise ConfigError("sweep needs a single engine, not 'all'")
    if (parameter is None) != (values is None):
        raise ConfigError("sweep needs --param and --values together")
    started = time.perf_counter()
    n_values = ns or [run.model.n]
    p_values = ps or [run.model.p]
    header = "n,p" + (f",{parameter}" if parameter else "") \
        + ",t,entanglement,lambda_min"
    rows = []
    labeled = []
    for n in n_values:
        for p in p_values:
            coupling = run.model.coupling
            if isinstance(coupling, model.SitesConstant) and len(coupling.g) != n:
                coupling = model.SitesConstant(coupling.g[:1] * n)
            base = ModelConfig(n=n, alpha=run.model.alpha, coupling=coupling, p=p)
            for value in (values if values is not None else [None]):
                cfg = base if value is None else \
                    witness.config_with_parameter(base, parameter, value)
                trace = entanglement_trace(cfg, run.grid, run.engine,
                                           tol=run.tolerances)
                label = f"n={n}, p={p:g}" + ("" if value is None
                                             else f", {parameter}={value:g}")
                labeled.append((label, trace))
                prefix = (n, p) + (() if value is None else (value,))
                rows.extend(prefix + (t, e, lam) for t, e, lam in
                            zip(trace.times, trace.entanglement, trace.lambda_min))
    outputs = [write_csv(out, header, rows)]
    if plot:
        outputs.append(plots.render_sweep_figure(labeled, f"{_stem(out)}.png"))
    report = {
        "command": "sweep",
        "config": _config_echo(run),
        "cells": [label for label, _ in labeled],
        "outputs": outputs,
        "timing_s": time.perf_counter() - started,
    }
    write_report(f"{_stem(out)}.report.json", report)
    print(f"sweep: {len(labeled)} cell(s) written")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_cases(seed: int):
    rng = np.random.default_rng(seed)
    rand_g = tuple(rng.normal(size=3) + 1j * rng.normal(size=3))
    rand_g = tuple(g / np.linalg.norm(np.array(rand_g)) * 1.5 for g in rand_g)
    tab_times = tuple(np.linspace(0.0, 4.0, 33))
    tab_rows = tuple(
        tuple(np.exp(-0.4 * m * t) for t in tab_times) for m in range(1, 3)
    )
    return [
        ("case1_uniform", ModelConfig(3, 1.0, model.SitesConstant((1, 1, 1)), p=0.6),
         TimeGrid(0.0, 4.0, 61, 2)),
        ("case1_random", ModelConfig(3, 1.0, model.SitesConstant(rand_g), p=0.5),
         TimeGrid(0.0, 4.0, 61, 2)),
        ("case2_exponential", ModelConfig(4, 1.0, model.TimeExponential(0.7), p=0.6),
         TimeGrid(0.0, 6.0, 61, 2)),
        ("case2_polynomial", ModelConfig(3, 1.0, model.TimePolynomial(0.01), p=1.0),
         TimeGrid(0.0, 5.0, 61, 2)),
        ("case3_site_exponential",
         ModelConfig(3, 1.0, model.SiteTimeExponential(0.5), p=1.0),
         TimeGrid(0.0, 8.0, 61, 8)),
        ("case3_site_power",
         ModelConfig(3, 1.0, model.SiteTimePower(0.3, t0=1e-3), p=0.8),
         TimeGrid(1e-3, 5.0, 61, 8)),
        ("tabulated", ModelConfig(2, 1.0, model.Tabulated(tab_times, tab_rows), p=0.6),
         TimeGrid(0.0, 4.0, 41, 4)),
    ]


def run_verification(seed: int = 0, tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Built-in engine-equivalence suite; returns a report payload."""
    cases = []
    all_pass = True
    for name, cfg, grid in _verify_cases(seed):
        fast = propagate.fast_state_series(cfg, grid, auto_refine=True, tol=tol)
        oracle = propagate.brute_force_propagate(cfg, grid.with_slices(
            fast.diagnostics["slices_used"]), tol=tol)
        dev = float(np.abs(fast.states - oracle.states).max())
        entry = {"case": name, "fast_vs_oracle": dev}
        ok = dev <= tol.engine_match
        if model.is_commuting(cfg.coupling) and not isinstance(
                cfg.coupling, model.Tabulated):
            closed = propagate.closed_form_state_series(cfg, grid, tol=tol)
            dev_c = float(np.abs(fast.states - closed.states).max())
            entry["fast_vs_closed_form"] = dev_c
            ok = ok and dev_c <= tol.engine_match
        entry["pass"] = ok
        all_pass = all_pass and ok
        cases.append(entry)

    # frozen sector: a two-excitation environment never moves the Bell pair
    cfg = ModelConfig(3, 1.0, model.SitesConstant((1.0, 0.5, 0.25)), p=0.6)
    env = np.zeros(8)
    env[0b110] = 1.0
    series = propagate.brute_force_propagate(cfg, TimeGrid(0.0, 5.0, 41, 2),
                                             env_diagonal=env, tol=tol)
    dev = float(np.abs(series.states - propagate.bell_state()[None]).max())
    ok = dev <= 1e-10
    cases.append({"case": "frozen_sector", "deviation_from_bell": dev, "pass": ok})
    all_pass = all_pass and ok

    return {"command": "verify", "seed": seed, "cases": cases, "all_pass": all_pass}


def cmd_verify(out: str, seed: int) -> int:
    started = time.perf_counter()
    report = run_verification(seed)
    report["timing_s"] = time.perf_counter() - started
    write_report(out, report)
    for case in report["cases"]:
        status = "PASS" if case["pass"] else "FAIL"
        detail = ", ".join(f"{k}={v:.3e}" for k, v in case.items()
                           if isinstance(v, float))
        print(f"[{status}] {case['case']}: {detail}")
    return 0 if report["all_pass"] else EXIT_VERIFY


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _int_list(s: str) -> list[int]:
    return [int(tok) for tok in s.split(",") if tok.strip()]


def _float_list(s: str) -> list[float]:
    return [float(tok) for tok in s.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinstar",
        description="Spin-star dynamics, entanglement witness, and transition scans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="path to key=value config")
        p.add_argument("--out", help="output CSV path (report/figure use its stem)")
        p.add_argument("--engine", choices=["fast", "oracle", "closed_form", "all"])
        p.add_argument("--seed", type=int)
        p.add_argument("--no-plot", action="store_true",
                       help="skip rendering the PNG figure")

    p_trace = sub.add_parser("trace", help="entanglement trace E(t)")
    common(p_trace)

    p_tr = sub.add_parser("transition", help="bisect a coupling-parameter transition")
    common(p_tr)
    p_tr.add_argument("--param", required=True,
                      choices=sorted(witness.TRANSITION_PARAMETERS))
    p_tr.add_argument("--lo", type=float, required=True)
    p_tr.add_argument("--hi", type=float, required=True)
    p_tr.add_argument("--tol", type=float, default=1e-3)
    p_tr.add_argument("--ns", type=_int_list, help="comma list of N values")
    p_tr.add_argument("--ps", type=_float_list, help="comma list of p values")

    p_sw = sub.add_parser("sweep", help="stacked traces over a grid of configs")
    common(p_sw)
    p_sw.add_argument("--ns", type=_int_list)
    p_sw.add_argument("--ps", type=_float_list)
    p_sw.add_argument("--param", choices=sorted(witness.TRANSITION_PARAMETERS))
    p_sw.add_argument("--values", type=_float_list,
                      help="comma list of values for --param")

    p_ver = sub.add_parser("verify", help="built-in engine equivalence suite")
    common(p_ver, needs_config=False)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.out or "verify.report.json", args.seed or 0)
        run = load_config(args.config)
        if args.engine:
            run.engine = args.engine
        if args.seed is not None:
            run.seed = args.seed
        out = args.out or run.out or f"{args.command}.csv"
        plot = not args.no_plot
        if args.command == "trace":
            return cmd_trace(run, out, plot)
        if args.command == "transition":
            return cmd_transition(run, out, plot, args.param, args.lo, args.hi,
                                  args.tol, args.ns, args.ps)
        if args.command == "sweep":
            return cmd_sweep(run, out, plot, args.ns, args.ps,
                             args.param, args.values)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ContractError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EngineError, DimensionError) as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except BracketError as exc:
        print(f"bracket error: {exc}", file=sys.stderr)
        return EXIT_BRACKET


if __name__ == "__main__":
    sys.exit(main())
