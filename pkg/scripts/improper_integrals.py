"""Improper Young integrals of power paths: measured Cauchy rate against min(eta1, 0) + eta2."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from _common import parse_config, write_results
from singularpaths.grid import SampledPath, make_geometric_grid
from singularpaths.integrate import improper_young


@dataclass
class Config:
    eta1: list = field(default_factory=lambda: [-0.6, -0.4, -0.2, 0.0, 0.2])
    eta2: list = field(default_factory=lambda: [0.4, 0.6, 0.8])
    levels: int = 20
    per_level: int = 256
    out: str = "results/improper_integrals"


def main(argv=None):
    cfg = parse_config(Config, __doc__, argv)
    g = make_geometric_grid(1.0, cfg.levels, cfg.per_level)
    t = g.points
    rows = []
    print(f"{'eta1':>6} {'eta2':>6} {'limit':>10} {'exact':>10} {'rate':>7} {'predicted':>9} {'diverged':>8}")
    for a in cfg.eta1:
        for b in cfg.eta2:
            rep = improper_young(SampledPath(g, t ** a), SampledPath(g, t ** b), eta1=a, eta2=b)
            exact = b / (a + b) if a + b > 0 else float("nan")
            rows.append({"eta1": a, "eta2": b, "limit": rep.limit, "exact": exact, "rate": rep.fitted_rate,
                         "predicted": rep.predicted_rate, "diverged": rep.diverged})
            print(f"{a:6.2f} {b:6.2f} {rep.limit:10.5f} {exact:10.5f} {rep.fitted_rate:7.3f} "
                  f"{rep.predicted_rate:9.3f} {str(rep.diverged):>8}")
    write_results(cfg.out, cfg, {"rows": rows})


if __name__ == "__main__":
    main()
