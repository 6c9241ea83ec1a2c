"""Command-line front end.

    qsecret ideal   [--branch Z]
    qsecret noisy   --gamma 0:1:0.1 --u 0 --v 0 --alpha 0.70710678
    qsecret sweep   --gamma 0:1:0.01 [--workers 4]
    qsecret metrics --metric fidelity --gamma 0:1:0.01
    qsecret verify  [--tol 1e-9] [--seed 0]

Every table goes to ``--out`` (default stdout) as CSV or JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import channels, discrimination as disc, metrics, protocol
from .qmath import is_hermitian, is_psd

GRID_EPS = 1e-12
EXIT_FAILURE = 1
EXIT_INVARIANT = 3

NOISY_COLUMNS = disc.REPORT_COLUMNS
METRIC_COLUMNS = ("gamma", "state_index", "metric", "numeric", "closed_form", "delta")
LEDGER_COLUMNS = ("section", "gamma", "quantity", "numeric", "reference", "delta", "flagged")
IDEAL_COLUMNS = ("alice", "bob", "lambda_index", "outcome", "probability", "charlie_bell", "alice_decoded", "ok")


def parse_grid(text: str, lo: float = 0.0, hi: float = 1.0) -> list[float]:
    """Parse ``start:stop:step``, a comma list, or a single value.

    ``stop`` is included when it lies within 1e-12 of a step multiple.
    """
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step!r}")
        if stop < start:
            raise ValueError(f"grid stop {stop!r} is below start {start!r}")
        n = math.floor((stop - start) / step)
        if abs(start + (n + 1) * step - stop) <= GRID_EPS:
            n += 1
        values = [round(start + k * step, 12) for k in range(n + 1)]
    else:
        values = [float(x) for x in text.split(",") if x.strip()]
    if not values:
        raise ValueError(f"grid {text!r} is empty")
    for x in values:
        if not lo - GRID_EPS <= x <= hi + GRID_EPS:
            raise ValueError(f"grid value {x!r} outside [{lo}, {hi}]")
    return [min(max(x, lo), hi) for x in values]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            x = 0.0  # no "-0"
        return format(x, ".12g")
    return str(x)


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(fmt(x))
        return None if math.isnan(v) else v
    return x


def render(rows: Sequence[dict], columns: Sequence[str], fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps([{c: _jsonable(r[c]) for c in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


@dataclass
class RunConfig:
    command: str
    gamma: list[float]
    u: list[float]
    v: list[float]
    alpha: list[float]
    branch: str | None
    prior: float
    out: str | None
    format: str
    tol: float | None
    seed: int
    workers: int
    metric: str

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        defaults = _DEFAULTS[args.command]
        grid = lambda name: parse_grid(getattr(args, name) or defaults[name]) if name in defaults else []
        alpha = parse_grid(args.alpha) if args.alpha else defaults.get("alpha_values", [])
        if not 0.0 < args.prior <= 1.0:
            raise ValueError(f"--prior must lie in (0, 1], got {args.prior!r}")
        return cls(
            command=args.command,
            gamma=grid("gamma"),
            u=grid("u"),
            v=grid("v"),
            alpha=list(alpha),
            branch=args.branch if args.branch is not None else defaults.get("branch"),
            prior=args.prior,
            out=args.out,
            format=args.format,
            tol=args.tol,
            seed=args.seed,
            workers=max(1, args.workers),
            metric=args.metric,
        )


_DEFAULTS = {
    "ideal": {},
    "noisy": {"gamma": "0", "u": "0", "v": "0", "alpha_values": [1 / math.sqrt(2)], "branch": "Z"},
    "sweep": {"gamma": "0:1:0.01", "u": "0:1:0.005", "v": "0:1:0.005",
              "alpha_values": disc.default_alpha_grid(), "branch": "Z"},
    "metrics": {"gamma": "0:1:0.01"},
    "verify": {"gamma": "0:1:0.25", "u": "0:1:0.005", "v": "0:1:0.005"},
}


def _map(fn, items, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_ideal(cfg: RunConfig) -> int:
    tally = protocol.run_ideal_exhaustive(cfg.branch)
    rows = []
    for run in tally.runs:
        for b in run.branches:
            rows.append({
                "alice": run.alice, "bob": run.bob, "lambda_index": run.lambda_index,
                "outcome": b.outcome.bits, "probability": b.probability, "charlie_bell": b.charlie_bell,
                "alice_decoded": b.alice_decoded, "ok": b.alice_decoded == run.alice,
            })
    if cfg.out is not None:
        emit(render(rows, IDEAL_COLUMNS, cfg.format), cfg.out)
    ok = tally.pairs_decoded == tally.pairs_total
    print(f"{tally.pairs_decoded}/{tally.pairs_total} pairs decoded, success probability {tally.success_rate}")
    for alice, bob in tally.failures:
        print(f"decode failure: alice={alice} bob={bob}", file=sys.stderr)
    return 0 if ok else EXIT_FAILURE


def cmd_noisy(cfg: RunConfig) -> int:
    tol = disc.PSD_TOL if cfg.tol is None else cfg.tol
    points = [(g, a, u, v) for g in cfg.gamma for a in cfg.alpha for u in cfg.u for v in cfg.v]

    def run(point):
        g, a, u, v = point
        m = disc.GenMeasurement.from_alpha(a)
        return disc.evaluate(g, u, v, m, cfg.branch, cfg.prior, tol).row()

    rows = _map(run, points, cfg.workers)
    bad = sum(1 for r in rows if not (r["feasible_u"] and r["feasible_v"]))
    if bad:
        print(f"warning: {bad}/{len(rows)} rows use a POVM that is not PSD", file=sys.stderr)
    emit(render(rows, NOISY_COLUMNS, cfg.format), cfg.out)
    return 0


def _infeasible_row(gamma: float) -> dict:
    row = {c: float("nan") for c in NOISY_COLUMNS}
    row.update(gamma=gamma, feasible_u=False, feasible_v=False)
    return row


def sweep_rows(cfg: RunConfig) -> list[dict]:
    tol = disc.PSD_TOL if cfg.tol is None else cfg.tol

    def run(g):
        best = disc.optimize(g, cfg.u, cfg.v, cfg.alpha, tol, cfg.branch, cfg.prior)
        return _infeasible_row(g) if isinstance(best, disc.Infeasible) else best.row()

    return _map(run, cfg.gamma, cfg.workers)


def cmd_sweep(cfg: RunConfig) -> int:
    rows = sweep_rows(cfg)
    bad = sum(1 for r in rows if not r["feasible_u"])
    if bad:
        print(f"warning: no feasible POVM for {bad}/{len(rows)} gamma values", file=sys.stderr)
    emit(render(rows, NOISY_COLUMNS, cfg.format), cfg.out)
    return 0


def cmd_metrics(cfg: RunConfig) -> int:
    names = metrics.METRICS if cfg.metric == "all" else (cfg.metric,)
    rows = []
    for name in names:
        for curve in metrics.metric_sweep(name, range(1, 9), cfg.gamma):
            for g, numeric, closed in curve.samples:
                rows.append({"gamma": g, "state_index": curve.state_index, "metric": name,
                             "numeric": numeric, "closed_form": closed, "delta": abs(numeric - closed)})
    emit(render(rows, METRIC_COLUMNS, cfg.format), cfg.out)
    return 0


def _random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def internal_invariants(gamma_grid: Sequence[float], seed: int, samples: int = 20) -> list[tuple[str, bool, str]]:
    """Checks whose failure means a bug in this package, not in the published forms."""
    rng = np.random.default_rng(seed)
    checks = []

    worst = max(channels.amplitude_damping(g).completeness_error() for g in gamma_grid)
    checks.append(("kraus completeness", worst < 1e-12, f"max deviation {worst:.2e}"))

    builders = (channels.amplitude_damping, channels.dephasing, channels.depolarizing)
    worst_tr, worst_eig, worst_herm = 0.0, 0.0, True
    for _ in range(samples):
        rho = _random_density(rng, 16)
        p = float(rng.uniform())
        for build in builders:
            out = channels.apply(build(p), rho, [1, 2])
            worst_tr = max(worst_tr, abs(np.trace(out).real - 1))
            worst_eig = min(worst_eig, is_psd(out)[1])
            worst_herm = worst_herm and is_hermitian(out)
    checks.append(("channel trace preservation", worst_tr < 1e-12, f"max |tr - 1| {worst_tr:.2e}"))
    checks.append(("channel PSD preservation", worst_eig >= -1e-10, f"min eigenvalue {worst_eig:.2e}"))
    checks.append(("channel Hermiticity", worst_herm, ""))

    bell = [disc.GenMeasurement.bell(k) for k in protocol.DennisOutcome]
    worst_sum = float(np.abs(sum(disc.measurement_operator(m) for m in bell) - np.eye(4)).max())
    worst_branch = 0.0
    for _ in range(samples):
        theta, phase = rng.uniform(0, math.pi / 2), rng.uniform(0, 2 * math.pi)
        base = disc.GenMeasurement(math.cos(theta), math.sin(theta) * complex(math.cos(phase), math.sin(phase)))
        kinds = [base.with_kind(k) for k in protocol.DennisOutcome]
        g = float(rng.uniform())
        for i in range(1, 9):
            probs = sum(disc.dennis_project(disc.damped_state(i, g), m)[1] for m in kinds)
            worst_branch = max(worst_branch, abs(probs - 1))
    checks.append(("Bell measurement completeness", worst_sum < 1e-12, f"max deviation {worst_sum:.2e}"))
    checks.append(("branch probabilities sum to 1", worst_branch < 1e-12, f"max deviation {worst_branch:.2e}"))

    sums = [max(float(np.abs(sum(fam.build(x).values()) - np.eye(2)).max()) for x in (0, 0.25, 0.5, 1))
            for fam in (disc.U_FAMILY, disc.V_FAMILY)]
    checks.append(("POVM element sums", max(sums) == 0.0, f"max deviation {max(sums):.2e}"))
    return checks


def cmd_verify(cfg: RunConfig) -> int:
    tol = disc.FLAG_TOL if cfg.tol is None else cfg.tol
    ledger = disc.discrepancy_report(cfg.gamma, tol, feasibility_grid=cfg.u)
    rows = [vars(r) for r in ledger.rows]
    if cfg.out is not None:
        emit(render(rows, LEDGER_COLUMNS, cfg.format), cfg.out)

    lines = [f"audit over {len(cfg.gamma)} gamma values, flag threshold {tol:g}"]
    for section, (passed, flagged) in ledger.summary().items():
        total = passed + flagged
        worst = [r for r in ledger.section(section) if r.flagged]
        where = ""
        if worst:
            gammas = sorted({fmt(r.gamma) for r in worst}, key=float)
            where = f" (flagged at gamma = {', '.join(gammas)})"
        lines.append(f"{section}: {passed}/{total} pass, {flagged} flagged{where}")
    for param, values in ledger.feasible_sets.items():
        lines.append(f"POVM feasibility: feasible {param}-set = {{{', '.join(fmt(x) for x in values)}}}")

    breach = False
    for name, ok, detail in internal_invariants(cfg.gamma, cfg.seed):
        lines.append(f"invariant {name}: {'ok' if ok else 'BREACH'} {detail}".rstrip())
        breach = breach or not ok
    print("\n".join(lines))
    if breach:
        print("internal invariant breach", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


COMMANDS = {"ideal": cmd_ideal, "noisy": cmd_noisy, "sweep": cmd_sweep, "metrics": cmd_metrics, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", help="damping grid: value, list a,b,c or start:stop:step")
    common.add_argument("--u", help="U-family parameter grid")
    common.add_argument("--v", help="V-family parameter grid")
    common.add_argument("--alpha", help="measurement alpha grid (beta = sqrt(1 - alpha^2))")
    common.add_argument("--branch", choices=protocol.PAULI_TAGS, help="Bob's announced operation")
    common.add_argument("--prior", type=float, default=0.5, help="class weight prior (default 0.5)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, help="PSD tolerance (noisy/sweep) or flag threshold (verify)")
    common.add_argument("--seed", type=int, default=0, help="seed for random invariant checks")
    common.add_argument("--workers", type=int, default=1, help="threads for grid evaluation")
    common.add_argument("--metric", choices=metrics.METRICS + ("all",), default="all")

    parser = argparse.ArgumentParser(prog="qsecret", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__name__.removeprefix("cmd_"))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    return COMMANDS[cfg.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
