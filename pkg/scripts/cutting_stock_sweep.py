"""Relative gap of sampled cutting-stock LPs against the CG optimum, swept over K.

    python3 scripts/cutting_stock_sweep.py --K 250,1000,4000 --trials 20 --out results/cs
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

from colrand.cli import ExperimentConfig, cmd_generate, cmd_plotdata, cmd_run


@dataclass
class SweepConfig:
    m: int = 50
    W: int = 1000
    instance_seed: int = 1
    K: list[int] = field(default_factory=lambda: [250, 1000, 4000])
    trials: int = 20
    seed: int = 0
    threads: int = 4
    out: Path = Path("results/cutting_stock")


def run(cfg: SweepConfig) -> list[dict]:
    cfg.out.mkdir(parents=True, exist_ok=True)
    inst = cfg.out / "instance.json"
    cmd_generate("cutting_stock", {"m": cfg.m, "W": cfg.W}, cfg.instance_seed, inst)
    raw = cfg.out / "runs.csv"
    cmd_run(ExperimentConfig(method="cr", instance=str(inst), K=cfg.K, trials=cfg.trials,
                             seed=cfg.seed, threads=cfg.threads, out=str(raw)))
    warm = cfg.out / "warm.csv"
    cmd_run(ExperimentConfig(method="cg-warm", instance=str(inst), K=cfg.K, trials=min(cfg.trials, 5),
                             seed=cfg.seed, threads=cfg.threads, out=str(warm)))
    cold = cfg.out / "cold.csv"
    cmd_run(ExperimentConfig(method="cg", instance=str(inst), trials=1, out=str(cold)))
    return cmd_plotdata(raw, cfg.out / "gaps.csv")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--W", type=int, default=1000)
    p.add_argument("--instance-seed", type=int, default=1)
    p.add_argument("--K", default="250,1000,4000")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--out", type=Path, default=Path("results/cutting_stock"))
    a = p.parse_args(argv)
    cfg = SweepConfig(a.m, a.W, a.instance_seed, [int(k) for k in a.K.split(",")], a.trials, a.seed,
                      a.threads, a.out)
    rows = run(cfg)
    print(f"{'K':>6} {'n':>3} {'mean gap':>10} {'stderr':>10}")
    for r in rows:
        print(f"{r['K']:>6} {r['n']:>3} {r['mean_gap']:>10.4%} {r['stderr']:>10.4%}")
    with open(cfg.out / "cold.csv") as fh:
        cold = next(csv.DictReader(fh))
    print(f"cold-start CG: objective {float(cold['objective']):.4f}, "
          f"{cold['cg_iterations']} iterations, {float(cold['solve_ms']):.0f} ms")


if __name__ == "__main__":
    main()
