"""Command-line entry points: run, sweep, verify-tree, oscillator.

Outputs are deterministic: fixed seeds give byte-identical files (nothing in
the pipeline draws random numbers; the seed is recorded for provenance, and
every emitted file embeds the fully resolved configuration).

Exit codes: 0 all verdicts pass, 1 verdict failure, 2 configuration error,
3 numerical abort.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import ConfigError, NumericsError, WavetreeError
from .scenarios import run_scenario, scenario_state_and_engine
from .serialize import compact_json, spec_hash, write_csv, write_json
from .tree import tree_from_record, verify_tree

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path} at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    if not isinstance(config, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return config


def _apply_overrides(config: dict, args) -> dict:
    config = dict(config)
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "tol_w", None) is not None:
        config["epsilon"] = args.tol_w
    if getattr(args, "horizon", None) is not None:
        config["horizon"] = args.horizon
    return config


def _pop_meta(config: dict) -> tuple[dict, dict]:
    """Split provenance-only keys (seed) from the scenario spec keys."""
    meta = {"seed": config.pop("seed", 0)}
    return config, meta


def _run_one(config: dict, outdir: Path, quiet: bool = False) -> int:
    config, meta = _pop_meta(dict(config))
    result = run_scenario(config)
    result.config["seed"] = meta["seed"]
    csv_path, json_path = result.write(outdir)
    if not quiet:
        for line in result.verdict_lines():
            print(line)
        print(f"wrote {csv_path}")
        print(f"wrote {json_path}")
    return EXIT_OK if result.passed else EXIT_VERDICT


def cmd_run(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    return _run_one(config, Path(args.out))


def cmd_sweep(args) -> int:
    base = _apply_overrides(_load_config(args.config), args)
    grid_spec = _load_config(args.grid)
    if not grid_spec:
        raise ConfigError("sweep grid is empty")
    names = sorted(grid_spec)
    for name, values in grid_spec.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep values for {name!r} must be a non-empty list")
    points = list(itertools.product(*(grid_spec[n] for n in names)))
    if len(points) > 10_000:
        raise ConfigError(f"sweep grid has {len(points)} points; limit is 10^4")

    def one(point):
        config = dict(base)
        config.update(dict(zip(names, point)))
        try:
            config_clean, meta = _pop_meta(config)
            result = run_scenario(config_clean)
            scalars = {k: v for k, v in result.summary.items()
                       if isinstance(v, (int, float, bool)) and not isinstance(v, dict)}
            return {"point": point, "status": "ok", "passed": result.passed,
                    "scalars": scalars, "verdicts": result.verdicts}
        except (WavetreeError, ValueError) as exc:
            return {"point": point, "status": "error", "passed": False,
                    "scalars": {}, "error": str(exc)}

    workers = max(1, args.workers)
    if workers == 1:
        outcomes = [one(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, points))

    order = sorted(range(len(points)), key=lambda i: points[i])
    scalar_keys = sorted({k for o in outcomes for k in o["scalars"]})
    header = list(names) + ["status", "passed"] + scalar_keys
    rows = []
    for i in order:
        o = outcomes[i]
        row = list(o["point"]) + [o["status"], o["passed"]]
        row += [o["scalars"].get(k, "") for k in scalar_keys]
        rows.append(tuple(row))

    outdir = Path(args.out)
    stem = f"sweep-{spec_hash({'base': base, 'grid': grid_spec})}"
    write_csv(outdir / f"{stem}.csv", header, rows,
              preamble=[f"config {compact_json({'base': base, 'grid': grid_spec})}"])
    write_json(outdir / f"{stem}.json", {
        "base": base, "grid": grid_spec,
        "outcomes": [outcomes[i] for i in order],
    })
    print(f"wrote {outdir / (stem + '.csv')}")
    print(f"wrote {outdir / (stem + '.json')}")
    n_failed = sum(1 for o in outcomes if not o["passed"])
    print(f"sweep: {len(points) - n_failed}/{len(points)} points passed")
    return EXIT_OK if n_failed == 0 else EXIT_VERDICT


def cmd_verify_tree(args) -> int:
    record = _load_config(args.tree)
    if "tree" not in record or "config" not in record:
        raise ConfigError("file does not contain a scenario result with a tree")
    config = dict(record["config"])
    config.pop("seed", None)
    psi0, engine = scenario_state_and_engine(config)
    tree = tree_from_record(record["tree"], psi0, engine)
    verdict = verify_tree(tree, engine, epsilon=args.tol_w)
    for name in ("sum_ok", "refinement_ok", "overlap_ok"):
        print(f"[{'PASS' if getattr(verdict, name) else 'FAIL'}] {name}")
    print(compact_json(verdict.to_dict()))
    return EXIT_OK if verdict.passed else EXIT_VERDICT


def cmd_oscillator(args) -> int:
    kind = {"decay": "oscillator-decay", "compare": "oscillator-compare",
            "ideal": "ideal-model"}[args.model]
    config = _load_config(args.config) if args.config else {}
    config["kind"] = kind
    config = _apply_overrides(config, args)
    config.pop("horizon", None)
    config.pop("epsilon", None)
    return _run_one(config, Path(args.out))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavetree",
        description="Wave-packet branching scenarios, overlap scoring, and "
                    "decoherence models.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario from a JSON config")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", default="out")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--tol-w", type=float, default=None, dest="tol_w")
    run_p.add_argument("--horizon", type=float, default=None)
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="run a parameter grid of scenarios")
    sweep_p.add_argument("--config", required=True, help="base scenario config")
    sweep_p.add_argument("--grid", required=True,
                         help="JSON object mapping parameter names to value lists")
    sweep_p.add_argument("--out", default="out")
    sweep_p.add_argument("--seed", type=int, default=None)
    sweep_p.add_argument("--tol-w", type=float, default=None, dest="tol_w")
    sweep_p.add_argument("--horizon", type=float, default=None)
    sweep_p.add_argument("--workers", type=int, default=4)
    sweep_p.set_defaults(func=cmd_sweep)

    verify_p = sub.add_parser("verify-tree",
                              help="re-verify the tree stored in a result JSON")
    verify_p.add_argument("--tree", required=True, help="scenario result JSON")
    verify_p.add_argument("--tol-w", type=float, default=None, dest="tol_w")
    verify_p.set_defaults(func=cmd_verify_tree)

    osc_p = sub.add_parser("oscillator", help="oscillator / ideal-model runs")
    osc_p.add_argument("model", choices=["decay", "compare", "ideal"])
    osc_p.add_argument("--config", default=None)
    osc_p.add_argument("--out", default="out")
    osc_p.add_argument("--seed", type=int, default=None)
    osc_p.set_defaults(func=cmd_oscillator)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WavetreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
