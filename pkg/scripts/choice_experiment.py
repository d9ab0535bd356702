"""Ranking-model estimation: sampled-column objective versus K, and CG to zero.

    python3 scripts/choice_experiment.py --N 5 --M 20 --K 200,800,3200 --trials 20
"""

from __future__ import annotations

import argparse
import statistics
import time
from dataclasses import dataclass, field

from colrand.colgen import cold_start, pricing_for, run_cg
from colrand.cr_solver import solve_cr
from colrand.oracles import choice_instance, generate_choice
from colrand.rng import derive_seed
from colrand.sampling import sample_iid


@dataclass
class ChoiceConfig:
    N: int = 5
    M: int = 20
    K: list[int] = field(default_factory=lambda: [200, 800, 3200])
    trials: int = 20
    instances: int = 10
    seed: int = 0


def run(cfg: ChoiceConfig) -> dict:
    out = {"cr": {}, "cg": []}
    for i in range(cfg.instances):
        inst = choice_instance(generate_choice(cfg.N, cfg.M, i))
        for K in cfg.K:
            for t in range(cfg.trials):
                t0 = time.perf_counter()
                r = solve_cr(inst, sample_iid(inst.oracle, K, derive_seed(cfg.seed, i, K, t)))
                out["cr"].setdefault(K, []).append((r.objective, 1e3 * (time.perf_counter() - t0)))
        t0 = time.perf_counter()
        cg = run_cg(inst, pricing_for(inst), cold_start(inst, cfg.seed))
        out["cg"].append((cg.objective, cg.iterations, 1e3 * (time.perf_counter() - t0)))
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, default=5)
    p.add_argument("--M", type=int, default=20)
    p.add_argument("--K", default="200,800,3200")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args(argv)
    cfg = ChoiceConfig(a.N, a.M, [int(k) for k in a.K.split(",")], a.trials, a.instances, a.seed)
    res = run(cfg)
    print(f"{'K':>6} {'mean obj':>12} {'max obj':>12} {'mean ms':>9}")
    for K, vals in res["cr"].items():
        objs = [v for v, _ in vals]
        print(f"{K:>6} {statistics.fmean(objs):>12.3e} {max(objs):>12.3e} "
              f"{statistics.fmean(ms for _, ms in vals):>9.1f}")
    objs = [o for o, _, _ in res["cg"]]
    its = [k for _, k, _ in res["cg"]]
    print(f"CG: max objective {max(objs):.2e}, iterations {min(its)}-{max(its)}, "
          f"mean {statistics.fmean(ms for _, _, ms in res['cg']):.0f} ms")


if __name__ == "__main__":
    main()
