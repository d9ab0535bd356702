"""Empirical violation rates of the sampling-error bounds over a grid of delta.

    python3 scripts/bound_validation.py --trials 200 --deltas 0.05,0.1,0.5
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field

from colrand import bounds as bd
from colrand.oracles import dense_instance, generate_mdp, generate_transport, mdp_instance


@dataclass
class ValidationConfig:
    trials: int = 200
    deltas: list[float] = field(default_factory=lambda: [0.05, 0.1, 0.5])
    K: int = 200
    n_r: int = 5
    seed: int = 0
    workers: int = 4


def run(cfg: ValidationConfig) -> list[tuple]:
    rows = []
    tp = generate_transport(3, 4, cfg.seed)
    tu = dense_instance(tp)
    mp = generate_mdp(4, 5, 0.9, cfg.seed)
    mdp = mdp_instance(mp)
    # the box must admit an occupancy measure of mass n_s / (1 - theta)
    C_mdp = mdp.oracle.n * mp.n_s / (1 - mp.theta)
    for d in cfg.deltas:
        r = bd.empirical_violation_rate("thm1", tu, tu.oracle.n, d, cfg.trials, cfg.seed, K=cfg.K,
                                        gamma=bd.gamma_tu(tp.c, tp.A.shape[0]), workers=cfg.workers)
        rows.append(("transport thm1", d, r))
        r = bd.empirical_violation_rate("thm5", mdp, C_mdp, d, cfg.trials, cfg.seed, n_r=cfg.n_r,
                                        gamma=bd.gamma_mdp(mp.costs, mp.theta), workers=cfg.workers)
        rows.append(("mdp thm5", d, r))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--deltas", default="0.05,0.1,0.5")
    p.add_argument("--K", type=int, default=200)
    p.add_argument("--n-r", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=4)
    a = p.parse_args(argv)
    cfg = ValidationConfig(a.trials, [float(x) for x in a.deltas.split(",")], a.K, a.n_r, a.seed,
                           a.workers)
    print(f"{'case':<16} {'delta':>6} {'rate':>6} {'max gap':>10} {'dv_distr':>10} {'term':>10}")
    for name, d, r in run(cfg):
        gmax = max((g for g in r.gaps if g == g), default=float("nan"))
        print(f"{name:<16} {d:>6.2f} {r.rate:>6.3f} {gmax:>10.4f} {r.delta_distr:>10.4f} {r.term:>10.2f}")


if __name__ == "__main__":
    main()
