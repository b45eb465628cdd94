"""Monte Carlo regularity of SLE traces near the origin for a range of kappa."""

from __future__ import annotations

from dataclasses import dataclass, field

from _common import parse_config, write_results
from singularpaths.grid import RngStream
from singularpaths.sle import TraceConfig, sle_regularity_experiment


@dataclass
class Config:
    kappas: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    reps: int = 50
    levels: int = 12
    per_level: int = 256
    c_tip: float = 0.25
    alpha: float = 0.65
    eta: float = 0.45
    seed: int = 0
    workers: int = 1
    out: str = "results/sle_regularity"


def main(argv=None):
    cfg = parse_config(Config, __doc__, argv)
    trace_cfg = TraceConfig(n=cfg.levels * cfg.per_level, c_tip=cfg.c_tip, geometric_levels=cfg.levels)
    reports = {}
    print(f"{'kappa':>6} {'alpha*':>7} {'median':>7} {'q25':>6} {'q75':>6} {'no-upward':>9}")
    for i, k in enumerate(cfg.kappas):
        rep = sle_regularity_experiment(k, trace_cfg, cfg.reps, RngStream(cfg.seed, i), alpha=cfg.alpha,
                                        eta=cfg.eta, workers=cfg.workers)
        q25, q75 = rep.alpha_hat_quartiles
        print(f"{k:6.3f} {rep.alpha_star:7.4f} {rep.alpha_hat_median:7.3f} {q25:6.3f} {q75:6.3f} "
              f"{rep.no_upward_fraction:9.2f}")
        reports[str(k)] = rep.to_dict()
    write_results(cfg.out, cfg, {"reports": reports})


if __name__ == "__main__":
    main()
