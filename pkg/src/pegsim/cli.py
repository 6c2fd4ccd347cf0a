"""Command-line scenario runner.

    pegsim run  [--scenario PATH] [--seed N] [--blocks N] [--out DIR]
    pegsim game --game {atomicity,solvency,manipulation} [--runs N] [--scenario PATH] [--seed N] [--out DIR]

Exit codes: 0 pass, 1 config error, 2 invariant breach, 3 game-bound breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, ScenarioConfig, baseline, load

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_GAME = 0, 1, 2, 3
GAMES = ("atomicity", "solvency", "manipulation")


def _config(args) -> ScenarioConfig:
    cfg = load(args.scenario) if args.scenario else baseline()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "blocks", None) is not None:
        changes["horizon"] = args.blocks
        changes["shocks"] = [
            {"block": s.block, "multiplier": s.multiplier} for s in cfg.shocks if s.block <= args.blocks
        ]
    return cfg.replace(**changes) if changes else cfg


def write_outputs(result, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    result.trace.write_csv(out / "trace.csv")
    (out / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    result.events.write(out / "events.jsonl")


def cmd_run(args) -> int:
    from .scenario import InvariantBreach, Scenario

    cfg = _config(args)
    try:
        result = Scenario(cfg).run()
        code = EXIT_OK
    except InvariantBreach as exc:
        result = exc.result
        code = EXIT_INVARIANT
        print(f"invariant breach at block {result.trace.rows[-1].block if result.trace.rows else 0}: {exc}",
              file=sys.stderr)
    out = Path(args.out)
    write_outputs(result, out)
    rec = result.summary.get("recovery", {})
    print(f"wrote {out}/trace.csv ({len(result.trace.rows)} rows), summary.json, events.jsonl")
    if rec:
        print(f"shock at {rec['shock_block']}: re-entered band after {rec['blocks_to_reenter']} blocks "
              f"(window {rec['window']}), monotone envelope {rec['monotone_envelope']}")
    return code


def _one_game(job: tuple) -> dict:
    game, seed, cfg, oracle_error = job
    if game == "atomicity":
        from .swap_engine import ADVERSARIAL, adversarial_atomicity_game

        r = adversarial_atomicity_game(ADVERSARIAL[seed % len(ADVERSARIAL)], seed)
        return {"seed": seed, "strategy": r.strategy, "outcome": r.outcome.value,
                "violation": r.outcome.value == "Violation"}
    if game == "solvency":
        from .vault import SOLVENCY_ADVERSARIES, solvency_game

        r = solvency_game(SOLVENCY_ADVERSARIES[seed % len(SOLVENCY_ADVERSARIES)], oracle_error, seed)
        return {"seed": seed, "adversary": r.adversary, "violation": r.violation,
                "breaches": r.breaches, "flagged": r.flagged_breaches, "min_ratio": r.min_ratio}
    from .scenario import manipulation_game

    ad = cfg.adversary
    r = manipulation_game(ad.kind, seed, horizon=cfg.horizon, capital=ad.capital, cfg=cfg)
    return {"seed": seed, "adversary": r.adversary, "violation": r.violation,
            "precondition_met": r.precondition_met, "longest_excursion": r.longest_excursion}


def cmd_game(args) -> int:
    cfg = _config(args)
    base = cfg.seed if args.seed is not None else 0
    jobs = [(args.game, base + i, cfg, args.oracle_error) for i in range(args.runs)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_one_game, jobs, chunksize=max(1, len(jobs) // (4 * args.jobs))))
    else:
        rows = [_one_game(j) for j in jobs]

    violations = sum(r["violation"] for r in rows)
    report = {"game": args.game, "runs": len(rows), "violations": violations}
    if args.game == "atomicity":
        outcomes = Counter(r["outcome"] for r in rows)
        report["outcomes"] = dict(sorted(outcomes.items()))
        report["both_refunded_fraction"] = outcomes.get("BothRefunded", 0) / max(1, len(rows))
        ok = violations == 0
    elif args.game == "solvency":
        report["oracle_error_rate"] = args.oracle_error
        report["flagged_breaches"] = sum(r["flagged"] for r in rows)
        # Violations count only breaches outside flagged oracle-error windows.
        ok = violations == 0
    else:
        unmet = [r for r in rows if not r["precondition_met"]]
        report["adversary"] = cfg.adversary.kind
        report["precondition_unmet_runs"] = len(unmet)
        report["violations_with_precondition_met"] = sum(r["violation"] for r in rows if r["precondition_met"])
        report["precondition_unmet"] = bool(unmet)
        ok = report["violations_with_precondition_met"] == 0
    report["bound_satisfied"] = ok
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.game}.json").write_text(text + "\n")
        with open(out / f"{args.game}_runs.jsonl", "w") as fh:
            for r in rows:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
    return EXIT_OK if ok else EXIT_GAME


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        # Usage errors share the config-error exit code; 2 means an invariant breach.
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pegsim", description="Seeded peg-stabilization simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write trace, summary and event log")
    run.add_argument("--scenario", help="YAML scenario (default: bundled baseline)")
    run.add_argument("--seed", type=int)
    run.add_argument("--blocks", type=int, help="override the horizon")
    run.add_argument("--out", default="out")
    run.set_defaults(func=cmd_run)

    game = sub.add_parser("game", help="run N seeded adversarial games and check the bound")
    game.add_argument("--game", required=True, choices=GAMES)
    game.add_argument("--runs", type=int, default=100)
    game.add_argument("--scenario", help="YAML scenario (manipulation game)")
    game.add_argument("--seed", type=int, help="first seed (default 0)")
    game.add_argument("--blocks", type=int, help="override the horizon (manipulation game)")
    game.add_argument("--oracle-error", type=float, default=0.0, help="solvency game oracle error rate")
    game.add_argument("--jobs", type=int, default=1, help="worker processes")
    game.add_argument("--out")
    game.set_defaults(func=cmd_game)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "runs", 1) < 1 or getattr(args, "jobs", 1) < 1:
        print("pegsim: --runs and --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "game" and not 0 <= args.oracle_error < 1:
        print("pegsim: --oracle-error must be in [0, 1)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"pegsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
