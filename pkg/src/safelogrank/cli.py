"""Command line interface: analyze, design, boundary, confseq, audit.

Exit codes make the test outcome scriptable: 0 means the command ran and the
monitored test says "continue"; 10 means "reject at level alpha"; 64 flags a
usage/configuration problem and 65 malformed or unreadable data.

Human-facing output reports e-values in log10 (a value of 1.3 means the
e-value passed 20); everything internal is natural-log.  ``--out BASE``
writes ``BASE.csv`` (fixed column order, '.' decimal separator, %.10g) and a
``BASE.json`` mirror carrying full precision.  A ``--config`` file holds
``key = value`` pairs for any long option; explicit flags win.  Environment
variables ``SAFELOGRANK_SEED`` and ``SAFELOGRANK_CHUNK`` supply defaults for
the seed and the simulation chunk size, nothing else.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from .adaptive import PriorSpec, confidence_sequence, plugin_log_trace, bayes_log_trace
from .core import (
    MartingaleState,
    RiskSet,
    log_evalue_increment,
    update_two_sided,
)
from .data import DatasetError, TrialDataset, read_dataset
from .gaussian import (
    fixed_sample_boundary,
    gaussian_safe_boundary,
    log_gaussian_evalue,
    null_expectation_audit,
    obf_boundary,
    schoenfeld_mu,
)
from .simulate import (
    DesignSpec,
    SimScenario,
    design_table,
    estimate_nmax,
    simulate_stopping_times,
    summarize_stopping,
    schoenfeld_sample_size,
    wald_expected_stopping,
    UnattainablePowerError,
)

EXIT_CONTINUE = 0
EXIT_REJECT = 10
EXIT_USAGE = 64
EXIT_DATA = 65

LN10 = math.log(10.0)

_TRUTHY = {"1", "true", "yes", "on"}


class _Parser(argparse.ArgumentParser):
    """argparse with sysexits-style usage failures (64, not 2)."""

    def error(self, message):  # noqa: A002 - argparse API
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(ValueError):
    """Flag combination or value that cannot be acted on."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def load_config(path: str) -> dict[str, str]:
    """Key-value config: one ``name = value`` per line, ``#`` comments.

    Names match the long command line options (hyphens and underscores are
    interchangeable).
    """
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{line_no}: expected 'name = value', got {raw.rstrip()!r}")
            name, value = line.split("=", 1)
            out[name.strip().lower().replace("-", "_")] = value.strip()
    return out


class Options:
    """Layered option lookup: explicit flag, then config file, then default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, name: str, default=None, cast=None):
        value = getattr(self.args, name, None)
        if value is None and name in self.config:
            value = self.config[name]
        if value is None:
            return default
        if cast is not None and isinstance(value, str):
            try:
                value = cast(value)
            except ValueError:
                raise UsageError(f"option {name!r}: cannot parse {value!r}") from None
        return value

    def flag(self, name: str) -> bool:
        if getattr(self.args, name, False):
            return True
        return self.config.get(name, "").lower() in _TRUTHY


def _env_seed() -> int:
    return int(os.environ.get("SAFELOGRANK_SEED", "0"))


def _env_chunk() -> int | None:
    raw = os.environ.get("SAFELOGRANK_CHUNK")
    return int(raw) if raw else None


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def emit_report(
    out: str | None, columns: Sequence[str], rows: Sequence[dict], summary: dict
) -> None:
    """Write ``<out>.csv`` (fixed order, %.10g) and ``<out>.json`` (full
    precision); no files when ``out`` is None."""
    if out is None:
        return
    base = out[:-4] if out.endswith(".csv") else out
    with open(base + ".csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(row.get(c)) for c in columns) + "\n")
    payload = {"summary": summary, "columns": list(columns), "rows": list(rows)}
    with open(base + ".json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, allow_nan=True)
        fh.write("\n")


def _print_summary(summary: dict) -> None:
    for key, value in summary.items():
        if isinstance(value, float):
            print(f"{key}: {value:.6g}")
        elif isinstance(value, (list, dict)):
            print(f"{key}: {json.dumps(value)}")
        else:
            print(f"{key}: {value}")


# ---------------------------------------------------------------------------
# shared flag parsing helpers
# ---------------------------------------------------------------------------

def _parse_prior(text: str | None, theta1: float | None) -> PriorSpec:
    if text is None:
        if theta1 is None:
            raise UsageError("the bayes test needs --prior or --theta1 to center a default prior")
        return PriorSpec.lognormal(math.log(theta1))
    kind, _, rest = text.partition(":")
    try:
        if kind == "lognormal":
            parts = [float(p) for p in rest.split(",") if p]
            if not 1 <= len(parts) <= 2:
                raise ValueError
            sd = parts[1] if len(parts) == 2 else 0.5
            return PriorSpec.lognormal(math.log(parts[0]), sd)
        if kind == "point":
            return PriorSpec.point_mass(float(rest))
    except ValueError:
        raise UsageError(f"cannot parse prior {text!r}") from None
    raise UsageError(
        f"unknown prior kind {kind!r}: use lognormal:CENTER[,SD_LOG] or point:THETA"
    )


def _parse_grid(text: str | None) -> np.ndarray | None:
    if text is None:
        return None
    try:
        lo, hi, count = text.split(":")
        grid = np.geomspace(float(lo), float(hi), int(count))
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}: expected LO:HI:COUNT") from None
    if not (0 < grid[0] < grid[-1]) or grid.size < 2:
        raise UsageError("grid needs 0 < LO < HI and COUNT >= 2")
    return grid


def _parse_ratio(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        pair = (int(a), int(b))
    except ValueError:
        raise UsageError(f"cannot parse allocation ratio {text!r}: expected A:B") from None
    if min(pair) < 1:
        raise UsageError("allocation ratio parts must be >= 1")
    return pair


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _analysis_rows(
    dataset: TrialDataset,
    test: str,
    theta1: float | None,
    theta0: float,
    alpha: float,
    two_sided: bool,
    prior: PriorSpec | None,
) -> tuple[list[dict], dict]:
    times, batches = dataset.event_batches()
    rows: list[dict] = []
    n_cum = 0
    score = variance = 0.0

    if not batches:
        log_e_trace = np.asarray([])
    elif test == "exact" and not two_sided:
        log_e_trace = np.cumsum(
            [log_evalue_increment(theta1, theta0, b) for b in batches]
        )
    elif test == "exact":
        state = MartingaleState()
        vals = []
        for b in batches:
            state = update_two_sided(state, b, theta1, theta0)
            vals.append(state.log_e)
        log_e_trace = np.asarray(vals)
    elif test == "plugin":
        log_e_trace = plugin_log_trace(batches, theta0=theta0)
    elif test == "bayes":
        log_e_trace = bayes_log_trace(batches, prior, theta0=theta0)
    else:  # gaussian
        m1 = batches[0].risk.y1 if batches else 0
        m0 = batches[0].risk.y0 if batches else 0
        mu1 = schoenfeld_mu(theta1, m1, m0) if batches else 0.0
        vals = []
        n_seen = 0
        s = v = 0.0
        for b in batches:
            y1, y = b.risk.y1, b.risk.total
            a1 = y1 / y
            s += b.o1 - b.o * a1
            if y > 1:
                v += b.o * a1 * (1 - a1) * (y - b.o) / (y - 1)
            n_seen += b.o
            z = s / math.sqrt(v) if v > 0 else math.nan
            vals.append(
                log_gaussian_evalue(n_seen, z, mu1) if v > 0 else -math.inf
            )
        log_e_trace = np.asarray(vals)

    for i, (t, b) in enumerate(zip(times, batches)):
        y1, y = b.risk.y1, b.risk.total
        a1 = y1 / y
        score += b.o1 - b.o * a1
        if y > 1:
            variance += b.o * a1 * (1 - a1) * (y - b.o) / (y - 1)
        n_cum += b.o
        z = score / math.sqrt(variance) if variance > 0 else None
        boundary = (
            gaussian_safe_boundary(n_cum, theta1, alpha)
            if test == "gaussian"
            else None
        )
        rows.append(
            {
                "index": i + 1,
                "time": t,
                "n": n_cum,
                "y1": b.risk.y1,
                "y0": b.risk.y0,
                "o": b.o,
                "o1": b.o1,
                "log10_e": float(log_e_trace[i]) / LN10,
                "z": z,
                "boundary_z": boundary,
            }
        )

    final_log_e = float(log_e_trace[-1]) if len(batches) else 0.0
    running_max = float(np.max(log_e_trace)) if len(batches) else 0.0
    threshold = math.log(1.0 / alpha)
    crossed = running_max >= threshold
    reject_at = None
    if crossed:
        first = int(np.argmax(log_e_trace >= threshold))
        reject_at = rows[first]["n"]
    summary = {
        "n_events": n_cum,
        "final_log10_e": final_log_e / LN10,
        "max_log10_e": running_max / LN10,
        "decision": "reject" if crossed else "continue",
        "reject_at_n": reject_at,
    }
    return rows, summary


def cmd_analyze(args: argparse.Namespace) -> int:
    opt = Options(args)
    test = opt.get("test", "exact")
    if test not in ("exact", "gaussian", "plugin", "bayes"):
        raise UsageError(f"unknown test {test!r}")
    alpha = opt.get("alpha", 0.05, float)
    theta0 = opt.get("theta0", 1.0, float)
    theta1 = opt.get("theta1", None, float)
    two_sided = opt.flag("two_sided")
    delimiter = opt.get("delimiter")
    if not (0 < alpha < 1):
        raise UsageError(f"alpha must be in (0, 1), got {alpha}")
    if test in ("exact", "gaussian") and theta1 is None:
        raise UsageError(f"--theta1 (or --theta-min) is required for the {test} test")
    if two_sided and test != "exact":
        raise UsageError("--two-sided is only available for the exact test")

    prior = None
    if test == "bayes":
        prior = _parse_prior(opt.get("prior"), theta1)

    paths = [args.dataset] + list(args.meta or [])
    datasets = [read_dataset(p, delimiter=delimiter) for p in paths]

    if test == "gaussian":
        for path, ds in zip(paths, datasets):
            batches = ds.batches
            if not batches:
                continue
            m1, m0 = batches[0].risk.y1, batches[0].risk.y0
            if (m1 != m0 or not 0.5 <= theta1 <= 2.0) and not opt.flag(
                "allow_unbalanced_gaussian"
            ):
                raise UsageError(
                    f"{path}: the Gaussian approximation is only recommended for "
                    f"balanced groups with theta1 in [0.5, 2] (got {m1}:{m0}, "
                    f"theta1={theta1}); it can overshoot the nominal level "
                    "otherwise. Re-run with --allow-unbalanced-gaussian to "
                    "proceed anyway, or use --test exact."
                )

    all_rows: list[dict] = []
    summaries = []
    combined_log10 = 0.0
    for index, (path, ds) in enumerate(zip(paths, datasets)):
        rows, summary = _analysis_rows(
            ds, test, theta1, theta0, alpha, two_sided, prior
        )
        for r in rows:
            r["dataset"] = index
        all_rows.extend(rows)
        summary["path"] = path
        summaries.append(summary)
        combined_log10 += summary["final_log10_e"]

    threshold_log10 = math.log10(1.0 / alpha)
    if len(datasets) == 1:
        decision = summaries[0]["decision"]
        summary = dict(summaries[0])
        del summary["path"]
    else:
        # evidence multiplies across studies; any single crossing, or the
        # combined product crossing, rejects
        decision = (
            "reject"
            if combined_log10 >= threshold_log10
            or any(s["decision"] == "reject" for s in summaries)
            else "continue"
        )
        summary = {
            "combined_log10_e": combined_log10,
            "decision": decision,
            "per_dataset": summaries,
        }
    summary["alpha"] = alpha
    summary["test"] = test

    columns = [
        "dataset",
        "index",
        "time",
        "n",
        "y1",
        "y0",
        "o",
        "o1",
        "log10_e",
        "z",
        "boundary_z",
    ]
    emit_report(opt.get("out"), columns, all_rows, summary)
    _print_summary(summary)
    return EXIT_REJECT if decision == "reject" else EXIT_CONTINUE


# ---------------------------------------------------------------------------
# design
# ---------------------------------------------------------------------------

def cmd_design(args: argparse.Namespace) -> int:
    opt = Options(args)
    theta1 = opt.get("theta1", None, float)
    if theta1 is None:
        raise UsageError("--theta1 is required")
    alpha = opt.get("alpha", 0.05, float)
    power = opt.get("power", 0.8, float)
    m1 = opt.get("m1", 5000, int)
    m0 = opt.get("m0", 5000, int)
    theta = opt.get("true_theta", theta1, float)
    reps = opt.get("reps", 1000, int)
    seed = opt.get("seed", _env_seed(), int)
    cap = opt.get("cap", None, int)
    tie_h0 = opt.get("tie_h0", None, float)
    tests = [t.strip() for t in opt.get("test", "exact").split(",")]
    for t in tests:
        if t not in ("exact", "gaussian", "plugin"):
            raise UsageError(f"design supports exact/gaussian/plugin, got {t!r}")

    if tie_h0 is not None:
        # tied streams go through the per-stream walker, one test at a time
        rows = []
        unattained = []
        n_fixed = schoenfeld_sample_size(theta1, alpha, 1.0 - power)
        for t in tests:
            design = DesignSpec(
                theta1=theta1, alpha=alpha, power=power, test_kind=t
            )
            scenario = SimScenario(
                m1=m1,
                m0=m0,
                theta=theta,
                design=design,
                replications=reps,
                seed=seed,
                tie_h0=tie_h0,
            )
            taus = simulate_stopping_times(scenario, cap=cap)
            try:
                n_max = estimate_nmax(taus, power)
            except UnattainablePowerError as err:
                unattained.append(
                    {"test_kind": t, "requested": err.requested, "achieved": err.achieved}
                )
                continue
            rep = summarize_stopping(taus, n_max, seed=seed)
            rows.append(
                {
                    "test": t,
                    "n_max": n_max,
                    "mean_capped": rep.mean_capped,
                    "conditional_mean": rep.conditional_mean,
                    "power": rep.power,
                    "ratio_n_max": n_max / n_fixed,
                    "ratio_mean": rep.mean_capped / n_fixed,
                }
            )
        try:
            wald = wald_expected_stopping(theta, theta1, m1, m0, alpha)
        except ValueError:
            wald = math.nan
        table = {
            "n_fixed": n_fixed,
            "wald_expected": wald,
            "rows": rows,
            "unattained": unattained,
        }
        row_dicts = rows
    else:
        table = design_table(
            theta1,
            m1,
            m0,
            theta=theta,
            alpha=alpha,
            power=power,
            replications=reps,
            seed=seed,
            kinds=tuple(tests),
            cap=cap,
            include_obf=opt.flag("obf"),
            obf_cap=opt.get("obf_cap", None, int),
        )
        row_dicts = [
            {
                "test": r.test_kind,
                "n_max": r.n_max,
                "mean_capped": r.mean_capped,
                "conditional_mean": r.conditional_mean,
                "power": r.power,
                "ratio_n_max": r.ratio_n_max,
                "ratio_mean": r.ratio_mean,
            }
            for r in table["rows"]
        ]

    summary = {
        "schoenfeld_n_fixed": table["n_fixed"],
        "wald_expected_stopping": table["wald_expected"],
        "theta1": theta1,
        "true_theta": theta,
        "alpha": alpha,
        "power": power,
        "replications": reps,
        "seed": seed,
        "unattained_power": table["unattained"],
    }
    columns = [
        "test",
        "n_max",
        "mean_capped",
        "conditional_mean",
        "power",
        "ratio_n_max",
        "ratio_mean",
    ]
    emit_report(opt.get("out"), columns, row_dicts, summary)
    _print_summary(summary)
    for row in row_dicts:
        print(
            f"  {row['test']}: n_max={row['n_max']}"
            f" mean={row['mean_capped']:.1f} power={row['power']:.3f}"
        )
    return EXIT_CONTINUE


# ---------------------------------------------------------------------------
# boundary
# ---------------------------------------------------------------------------

def cmd_boundary(args: argparse.Namespace) -> int:
    opt = Options(args)
    theta1 = opt.get("theta1", None, float)
    if theta1 is None:
        raise UsageError("--theta1 is required (it sets the gaussian-safe drift)")
    alpha = opt.get("alpha", 0.05, float)
    n_max = opt.get("nmax", None, int)
    if n_max is None:
        raise UsageError("--nmax is required (it anchors the O'Brien-Fleming column)")
    m1 = opt.get("m1", 1, int)
    m0 = opt.get("m0", 1, int)
    side = opt.get("side", "left" if theta1 < 1.0 else "right")
    n_from = opt.get("n_from", 1, int)
    n_to = opt.get("n_to", n_max, int)
    step = opt.get("n_step", 1, int)
    if not (1 <= n_from <= n_to) or step < 1:
        raise UsageError("need 1 <= n-from <= n-to and n-step >= 1")

    sign = -1.0 if side == "left" else 1.0
    fixed = fixed_sample_boundary(alpha, side)
    rows = []
    for n in range(n_from, n_to + 1, step):
        safe = sign * abs(gaussian_safe_boundary(n, theta1, alpha, m1, m0))
        rows.append(
            {
                "n": n,
                "gaussian_safe": safe,
                "obrien_fleming": obf_boundary(n, n_max, alpha, side) if n <= n_max else None,
                "fixed_classical": fixed,
            }
        )
    summary = {
        "theta1": theta1,
        "alpha": alpha,
        "n_max": n_max,
        "side": side,
        "rows_emitted": len(rows),
    }
    emit_report(opt.get("out"), ["n", "gaussian_safe", "obrien_fleming", "fixed_classical"], rows, summary)
    _print_summary(summary)
    return EXIT_CONTINUE


# ---------------------------------------------------------------------------
# confseq
# ---------------------------------------------------------------------------

def cmd_confseq(args: argparse.Namespace) -> int:
    opt = Options(args)
    alpha = opt.get("alpha", 0.05, float)
    numerator = opt.get("numerator", "plugin")
    if numerator not in ("plugin", "bayes"):
        raise UsageError(f"numerator must be plugin or bayes, got {numerator!r}")
    grid = _parse_grid(opt.get("grid"))
    prior = None
    if numerator == "bayes":
        prior = _parse_prior(opt.get("prior"), opt.get("theta1", None, float))
    dataset = read_dataset(args.dataset, delimiter=opt.get("delimiter"))
    times, batches = dataset.event_batches()

    seq = confidence_sequence(
        batches,
        alpha=alpha,
        numerator=numerator,
        grid=grid,
        prior=prior,
        running_intersection=opt.flag("intersect"),
    )
    rows = []
    n_cum = 0
    for i, (t, b) in enumerate(zip(times, batches)):
        n_cum += b.o
        rows.append(
            {
                "index": i + 1,
                "time": t,
                "n": n_cum,
                "lower": float(seq.lower[i]),
                "upper": float(seq.upper[i]),
                "lower_bracketed": bool(seq.lower_bracketed[i]),
                "upper_bracketed": bool(seq.upper_bracketed[i]),
            }
        )
    summary = {
        "n_events": n_cum,
        "final_lower": seq.final_lower,
        "final_upper": seq.final_upper,
        "alpha": alpha,
        "numerator": numerator,
        "intersected": seq.intersected,
        "grid_lo": float(seq.grid[0]),
        "grid_hi": float(seq.grid[-1]),
        "grid_points": int(seq.grid.size),
    }
    columns = ["index", "time", "n", "lower", "upper", "lower_bracketed", "upper_bracketed"]
    emit_report(opt.get("out"), columns, rows, summary)
    _print_summary(summary)
    return EXIT_CONTINUE


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------

def cmd_audit(args: argparse.Namespace) -> int:
    opt = Options(args)
    lo = opt.get("theta_from", 0.5, float)
    hi = opt.get("theta_to", 2.0, float)
    points = opt.get("points", 61, int)
    scale = opt.get("scale", 100, int)
    ratios = [_parse_ratio(r) for r in opt.get("ratios", "1:1,3:1").split(",")]
    if not (0 < lo < hi) or points < 2 or scale < 1:
        raise UsageError("need 0 < theta-from < theta-to, points >= 2, scale >= 1")

    thetas = np.geomspace(lo, hi, points)
    columns = ["theta"] + [f"audit_{a}_{b}" for a, b in ratios]
    rows = []
    worst = {f"audit_{a}_{b}": 0.0 for a, b in ratios}
    for theta in thetas:
        row = {"theta": float(theta)}
        for a, b in ratios:
            m1, m0 = a * scale, b * scale
            value = null_expectation_audit(float(theta), m1, m0, RiskSet(m1, m0))
            key = f"audit_{a}_{b}"
            row[key] = value
            worst[key] = max(worst[key], value)
        rows.append(row)
    summary = {"theta_from": lo, "theta_to": hi, "points": points, "scale": scale}
    for key, value in worst.items():
        summary[f"max_{key}"] = value
    emit_report(opt.get("out"), columns, rows, summary)
    _print_summary(summary)
    return EXIT_CONTINUE


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value file; flags override it")
    sub.add_argument("--out", help="write OUT.csv and OUT.json reports")
    sub.add_argument("--alpha", type=float, help="type-I error budget (default 0.05)")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="safelogrank",
        description="Anytime-valid logrank tests: analyze trials, size designs, "
        "tabulate boundaries, and invert confidence sequences.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser(
        "analyze", help="per-event-time e-value trace and decision for a dataset"
    )
    analyze.add_argument("dataset", help="delimited survival data (header required)")
    analyze.add_argument("--test", choices=["exact", "gaussian", "plugin", "bayes"])
    analyze.add_argument("--theta1", "--theta-min", dest="theta1", type=float,
                         help="design alternative hazard ratio (theta-min when two-sided)")
    analyze.add_argument("--theta0", type=float, help="null hazard ratio (default 1)")
    analyze.add_argument("--two-sided", action="store_true", dest="two_sided")
    analyze.add_argument("--prior", help="bayes numerator prior: lognormal:CENTER[,SD] | point:THETA")
    analyze.add_argument("--meta", nargs="+", metavar="DATASET",
                         help="further datasets; final e-values multiply")
    analyze.add_argument("--delimiter", help="force a field delimiter")
    analyze.add_argument("--allow-unbalanced-gaussian", action="store_true",
                         dest="allow_unbalanced_gaussian")
    _add_common(analyze)
    analyze.set_defaults(handler=cmd_analyze)

    design = commands.add_parser(
        "design", help="simulate stopping times and size a sequential design"
    )
    design.add_argument("--theta1", type=float, help="design alternative hazard ratio")
    design.add_argument("--true-theta", dest="true_theta", type=float,
                        help="data-generating hazard ratio (default: theta1)")
    design.add_argument("--test", help="comma list of exact,gaussian,plugin (default exact)")
    design.add_argument("--m1", type=int, help="treatment group size (default 5000)")
    design.add_argument("--m0", type=int, help="control group size (default 5000)")
    design.add_argument("--power", type=float, help="target power (default 0.8)")
    design.add_argument("--reps", type=int, help="replications (default 1000)")
    design.add_argument("--seed", type=int, help="simulation seed (default $SAFELOGRANK_SEED or 0)")
    design.add_argument("--cap", type=int, help="per-replication event cap")
    design.add_argument("--tie-h0", dest="tie_h0", type=float,
                        help="simulate tied unit-time streams with this control hazard")
    design.add_argument("--obf", action="store_true",
                        help="also size an O'Brien-Fleming comparator")
    design.add_argument("--obf-cap", dest="obf_cap", type=int,
                        help="horizon scan limit for the O'Brien-Fleming comparator")
    _add_common(design)
    design.set_defaults(handler=cmd_design)

    boundary = commands.add_parser(
        "boundary", help="per-n rejection thresholds on the Z scale"
    )
    boundary.add_argument("--theta1", type=float)
    boundary.add_argument("--nmax", type=int, help="O'Brien-Fleming horizon")
    boundary.add_argument("--side", choices=["left", "right"])
    boundary.add_argument("--m1", type=int, help="allocation numerator (default 1)")
    boundary.add_argument("--m0", type=int, help="allocation denominator (default 1)")
    boundary.add_argument("--n-from", dest="n_from", type=int)
    boundary.add_argument("--n-to", dest="n_to", type=int)
    boundary.add_argument("--n-step", dest="n_step", type=int)
    _add_common(boundary)
    boundary.set_defaults(handler=cmd_boundary)

    confseq = commands.add_parser(
        "confseq", help="anytime-valid confidence sequence for the hazard ratio"
    )
    confseq.add_argument("dataset")
    confseq.add_argument("--numerator", choices=["plugin", "bayes"])
    confseq.add_argument("--grid", help="hazard-ratio grid LO:HI:COUNT (log-spaced)")
    confseq.add_argument("--prior", help="bayes prior: lognormal:CENTER[,SD] | point:THETA")
    confseq.add_argument("--theta1", type=float, help="centers the default bayes prior")
    confseq.add_argument("--intersect", action="store_true",
                         help="running intersection (nested intervals)")
    confseq.add_argument("--delimiter", help="force a field delimiter")
    _add_common(confseq)
    confseq.set_defaults(handler=cmd_confseq)

    audit = commands.add_parser(
        "audit",
        help="null expectation of the Gaussian per-event factor across "
        "alternatives and allocation ratios (values > 1 flag leakage)",
    )
    audit.add_argument("--theta-from", dest="theta_from", type=float)
    audit.add_argument("--theta-to", dest="theta_to", type=float)
    audit.add_argument("--points", type=int)
    audit.add_argument("--ratios", help="comma list of allocation ratios, e.g. 1:1,3:1")
    audit.add_argument("--scale", type=int, help="participants per ratio unit (default 100)")
    _add_common(audit)
    audit.set_defaults(handler=cmd_audit)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except UsageError as err:
        print(f"safelogrank: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DatasetError as err:
        print(f"safelogrank: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except OSError as err:
        print(f"safelogrank: {err}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as err:
        print(f"safelogrank: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
