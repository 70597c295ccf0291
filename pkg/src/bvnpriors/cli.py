"""Command-line interface: ``bvnpriors {fit,sample,table3,coverage,matching}``.

Every command is a pure function of its input file and flags (including
``--seed``), so reruns are byte-identical. Floats are written with 6
significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .core import DegenerateDataError, InvalidParameterError, ParamFn, SuffStats, parse_param, suff_stats
from .coverage import (
    DEFAULT_INNER_DRAWS,
    NON_MATCHING_POINTS,
    case_truth,
    coverage_hits,
    cross_validation_suite,
    expected_exact_match,
    matching_suite,
    rho_scan,
)
from .inference import credible_interval, empirical_quantile, pushforward
from .priors import (
    REJECTION_FAMILY,
    PriorSpec,
    UnsupportedPriorError,
    acceptance_probability,
    parse_prior,
    rejection_bound,
)
from .samplers import long_run_acceptance, posterior_sample

TABLE3_RHOS = (0.0, 0.80, 0.95, 0.99)
DEFAULT_PARAMS = ("mu1", "mu2", "sigma1", "sigma2", "rho")
FULL_MATCHING_REPS = 20_000
QUICK_FACTOR = 10


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    prior: str | None = None
    params: list = field(default_factory=list)
    seed: int = 0
    draws: int | None = None
    reps: int | None = None
    level: float = 0.95
    rho_grid: str | None = None
    n: int | None = None
    sigma_case: str = "a"
    input: str | None = None
    output: str | None = None
    fmt: str = "csv"
    quick: bool = False
    workers: int = 1

    def __post_init__(self):
        for name in ("draws", "reps", "n", "workers"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise CliError(f"--{name} must be positive, got {v}")
        if not 0.0 < self.level < 1.0:
            raise CliError(f"--level must lie in (0, 1), got {self.level}")
        if not 0 <= self.seed < 2**64:
            raise CliError("--seed must be a 64-bit unsigned integer")


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive of stop), a single value, or a comma list."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"--rho-grid expects start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise CliError("--rho-grid step must be positive")
        count = math.floor((stop - start) / step + 1e-9) + 1
        grid = [round(start + k * step, 10) for k in range(max(count, 0))]
    else:
        grid = [float(p) for p in text.split(",") if p.strip()]
    bad = [g for g in grid if not -1.0 < g < 1.0]
    if bad:
        raise CliError(f"--rho-grid values must lie in (-1, 1), got {bad}")
    return grid


def read_pairs(path: str) -> np.ndarray:
    """Two numeric columns from a CSV file; a non-numeric first row is a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0][:2]]
        except ValueError:
            rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise CliError(f"{path}: non-numeric value ({exc})") from None
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != 2:
        raise CliError(f"{path}: expected two numeric columns")
    return data


def fmt_value(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return f"{x:.6g}"
    return "" if x is None else str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(f"{x:.6g}") if math.isfinite(x) else fmt_value(x)
    return x


def render(columns, rows, meta, fmt) -> str:
    if fmt == "json":
        doc = {
            "meta": {k: _json_value(v) for k, v in meta.items()},
            "columns": list(columns),
            "rows": [{c: _json_value(r.get(c)) for c in columns} for r in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_value(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(cfg: RunConfig, text: str):
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _prior(cfg, default=None) -> PriorSpec:
    name = cfg.prior or default
    if name is None:
        raise CliError("--prior is required")
    try:
        return parse_prior(name)
    except (ValueError, UnsupportedPriorError) as exc:
        raise CliError(str(exc)) from None


def _params(cfg, default=DEFAULT_PARAMS) -> list[ParamFn]:
    names = cfg.params or list(default)
    try:
        return [parse_param(p) for p in names]
    except InvalidParameterError as exc:
        raise CliError(str(exc)) from None


def _stats_meta(st: SuffStats) -> dict:
    return {"n": st.n, "xbar1": st.xbar1, "xbar2": st.xbar2, "s11": st.s11, "s22": st.s22, "r": st.r}


# ---------------------------------------------------------------------------
# commands

def cmd_fit(cfg: RunConfig) -> str:
    if not cfg.input:
        raise CliError("fit needs --input")
    st = suff_stats(read_pairs(cfg.input))
    prior = _prior(cfg, "right-haar")
    params = _params(cfg)
    draws = cfg.draws or 10_000
    sample = posterior_sample(prior, st, draws, np.random.default_rng(cfg.seed))
    lv = cfg.level
    rows = []
    for p in params:
        x = pushforward(sample, p)
        two = credible_interval(x, p, lv, "two-sided")
        rows.append({
            "param": p.name,
            "median": empirical_quantile(x, 0.5),
            "upper_open_hi": credible_interval(x, p, lv, "upper-open").upper,
            "lower_open_lo": credible_interval(x, p, lv, "lower-open").lower,
            "two_sided_lo": two.lower,
            "two_sided_hi": two.upper,
        })
    meta = {"command": "fit", "prior": prior.name, "level": lv, "draws": draws, "seed": cfg.seed, **_stats_meta(st)}
    cols = ["param", "median", "upper_open_hi", "lower_open_lo", "two_sided_lo", "two_sided_hi"]
    if cfg.fmt == "csv":
        for r in rows:
            r.update(meta)
        cols = ["prior"] + cols + ["level", "draws", "n", "xbar1", "xbar2", "s11", "s22", "r", "seed"]
    return render(cols, rows, meta, cfg.fmt)


def cmd_sample(cfg: RunConfig) -> str:
    if not cfg.input:
        raise CliError("sample needs --input")
    st = suff_stats(read_pairs(cfg.input))
    prior = _prior(cfg, "right-haar")
    draws = cfg.draws or 1000
    s = posterior_sample(prior, st, draws, np.random.default_rng(cfg.seed))
    names = ("mu1", "mu2", "sigma1", "sigma2", "rho")
    rows = [dict(zip(names, row)) for row in s.to_array()]
    meta = {"command": "sample", "prior": prior.name, "draws": draws, "seed": cfg.seed, **_stats_meta(st)}
    cols = list(names)
    if cfg.fmt == "csv":
        for r in rows:
            r["seed"] = cfg.seed
        cols.append("seed")
    return render(cols, rows, meta, cfg.fmt)


def concentrated_stats(r: float, n: int) -> SuffStats:
    """Unit-scale synthetic statistics with sample correlation ``r``."""
    return SuffStats(n, 0.0, 0.0, float(n), float(n), r)


def cmd_table3(cfg: RunConfig) -> str:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n or 10_000
    rows = []
    for prior in REJECTION_FAMILY:
        for rho in TABLE3_RHOS:
            row = {
                "prior": prior.name,
                "bound": rejection_bound(prior),
                "rho": rho,
                "acceptance": float(acceptance_probability(prior, rho)),
            }
            if cfg.reps:
                row["empirical"] = long_run_acceptance(prior, concentrated_stats(rho, n), cfg.reps, rng)
            rows.append(row)
    cols = ["prior", "bound", "rho", "acceptance"]
    meta = {"command": "table3", "seed": cfg.seed}
    if cfg.reps:
        cols += ["empirical", "n", "proposals"]
        meta.update(n=n, proposals=cfg.reps)
        for r in rows:
            r.update(n=n, proposals=cfg.reps)
    if cfg.fmt == "csv":
        cols.append("seed")
        for r in rows:
            r["seed"] = cfg.seed
    return render(cols, rows, meta, cfg.fmt)


def cmd_coverage(cfg: RunConfig) -> str:
    prior = _prior(cfg, "right-haar")
    param = _params(cfg, ("rho",))[0]
    grid = parse_grid(cfg.rho_grid if cfg.rho_grid is not None else "-0.9:0.9:0.3")
    if cfg.sigma_case not in ("a", "b"):
        raise CliError("--sigma-case must be a or b")
    n = cfg.n or 3
    reps = cfg.reps or (2000 if cfg.quick else 10_000)
    inner = cfg.draws or DEFAULT_INNER_DRAWS
    results = rho_scan(prior, param, n, cfg.level, grid, reps, np.random.default_rng(cfg.seed),
                       cfg.sigma_case, inner, workers=cfg.workers)
    rows = [
        {
            "prior": r.prior.name, "param": r.param.name, "rho": r.truth.rho, "tail": r.tail,
            "coverage": r.coverage, "mc_stderr": r.mc_stderr, "reps": r.reps, "seed": cfg.seed,
            "sigma_case": cfg.sigma_case, "n": n, "level": cfg.level,
        }
        for r in results
    ]
    cols = ["prior", "param", "rho", "tail", "coverage", "mc_stderr", "reps", "seed", "sigma_case", "n", "level"]
    meta = {"command": "coverage", "prior": prior.name, "param": param.name, "n": n, "level": cfg.level,
            "sigma_case": cfg.sigma_case, "inner_draws": inner, "seed": cfg.seed}
    return render(cols, rows, meta, cfg.fmt)


def cmd_matching(cfg: RunConfig):
    """Returns (text, failures)."""
    reps = cfg.reps or (FULL_MATCHING_REPS // QUICK_FACTOR if cfg.quick else FULL_MATCHING_REPS)
    inner = cfg.draws or DEFAULT_INNER_DRAWS
    n = cfg.n or 3
    rng = np.random.default_rng(cfg.seed)
    rows = []
    log = lambda msg: print(msg, file=sys.stderr, flush=True)  # noqa: E731
    if cfg.prior:
        # user-chosen cells: pairs without an exact result are reported, not judged
        prior = _prior(cfg)
        params = _params(cfg, ("rho",))
        cells = [(p, rho) for p in params for rho in (-0.9, 0.0, 0.5, 0.9)]
        for (param, rho), child in zip(cells, rng.spawn(len(cells))):
            truth = case_truth(rho, "a")
            hits = coverage_hits(prior, param, truth, n, [cfg.level], reps, child, inner, workers=cfg.workers)[0]
            cov = hits / reps
            se = math.sqrt(cfg.level * (1 - cfg.level) / reps)
            expect = expected_exact_match(prior, param)
            if expect:
                status = "pass" if abs(cov - cfg.level) <= 3 * se else "fail"
            else:
                status = "non-matching (expected)"
            rows.append({"check": f"{prior.name}/{param.name}/rho={rho:g}/level={cfg.level:g}/upper",
                         "kind": "matching", "expected_match": expect, "coverage": cov,
                         "reference": cfg.level, "z": (cov - cfg.level) / se, "status": status})
            log(f"{rows[-1]['check']}: {cov:.4f} {status}")
    else:
        def on_check(c):
            status = ("pass" if c.passed else "fail") if c.expect_match else (
                "non-matching (expected)" if c.passed else "fail: expected non-matching")
            rows.append({"check": c.name, "kind": "matching" if c.expect_match else "non-matching",
                         "expected_match": c.expect_match, "coverage": c.result.coverage,
                         "reference": c.result.level, "z": c.deviation_se, "status": status})
            log(f"{c.name}: {c.result.coverage:.4f} {status}")

        matching_suite(reps=reps, n=n, level=cfg.level, rng=rng.spawn(1)[0], inner_draws=inner,
                       non_matching=NON_MATCHING_POINTS, workers=cfg.workers, progress=on_check)

        def on_cross(item):
            which, prior, value, cc, ok = item
            rows.append({"check": f"identity:{which}/{prior.name}/value={value:g}", "kind": "cross-validation",
                         "expected_match": None, "coverage": cc.data.coverage, "reference": cc.identity,
                         "z": (cc.data.coverage - cc.identity) / cc.combined_stderr,
                         "status": "pass" if ok else "fail"})
            log(f"{rows[-1]['check']}: {cc.data.coverage:.4f} vs {cc.identity:.4f} {rows[-1]['status']}")

        cross_validation_suite(reps=max(reps // 2, 1), n=n, level=cfg.level, rng=rng.spawn(1)[0],
                               inner_draws=inner, progress=on_cross)
    failures = [r["check"] for r in rows if r["status"].startswith("fail")]
    cols = ["check", "kind", "expected_match", "coverage", "reference", "z", "status"]
    meta = {"command": "matching", "reps": reps, "n": n, "level": cfg.level, "seed": cfg.seed,
            "failures": len(failures)}
    if cfg.fmt == "csv":
        cols.append("seed")
        for r in rows:
            r["seed"] = cfg.seed
    return render(cols, rows, meta, cfg.fmt), failures


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bvnpriors", description="Objective-prior inference for the bivariate normal.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master RNG seed (default 0)")
        p.add_argument("--output", help="write here instead of stdout")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    p = sub.add_parser("fit", help="posterior medians and credible intervals for a data file")
    common(p)
    p.add_argument("--input", required=True, help="CSV with two numeric columns, optional header")
    p.add_argument("--prior", default="right-haar")
    p.add_argument("--param", dest="params", action="append", help="repeatable; default mu1 mu2 sigma1 sigma2 rho")
    p.add_argument("--draws", type=int)
    p.add_argument("--level", type=float, default=0.95)

    p = sub.add_parser("sample", help="joint posterior draws for a data file")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--prior", default="right-haar")
    p.add_argument("--draws", type=int)

    p = sub.add_parser("table3", help="acceptance probabilities of the rejection samplers")
    common(p)
    p.add_argument("--reps", type=int, help="also run this many live proposals per cell")
    p.add_argument("--n", type=int, help="sample size of the synthetic data (default 10000)")

    p = sub.add_parser("coverage", help="coverage curve over a grid of true rho")
    common(p)
    p.add_argument("--prior", default="right-haar")
    p.add_argument("--param", dest="params", action="append")
    p.add_argument("--n", type=int)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--reps", type=int)
    p.add_argument("--draws", type=int, help=f"posterior draws per dataset (default {DEFAULT_INNER_DRAWS})")
    p.add_argument("--rho-grid", default="-0.9:0.9:0.3", help="start:stop:step, inclusive")
    p.add_argument("--sigma-case", choices=("a", "b"), default="a")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("matching", help="exact-matching and cross-validation checks")
    common(p)
    p.add_argument("--prior", help="check only this prior (cells without an exact result are report-only)")
    p.add_argument("--param", dest="params", action="append")
    p.add_argument("--n", type=int)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--reps", type=int)
    p.add_argument("--draws", type=int)
    p.add_argument("--quick", action="store_true", help=f"reps / {QUICK_FACTOR}; 3-sigma bands widen to match")
    p.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__})
        if cfg.command == "matching":
            t0 = time.perf_counter()
            text, failures = cmd_matching(cfg)
            emit(cfg, text)
            print(f"{len(failures)} failure(s) in {time.perf_counter() - t0:.0f} s", file=sys.stderr)
            if failures:
                print(f"first failure: {failures[0]}", file=sys.stderr)
                return 1
            return 0
        handler = {"fit": cmd_fit, "sample": cmd_sample, "table3": cmd_table3, "coverage": cmd_coverage}
        emit(cfg, handler[cfg.command](cfg))
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CliError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
