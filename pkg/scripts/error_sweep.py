#!/usr/bin/env python3
"""MWU discretisation error against its analytic bounds.

Writes two CSVs:
  local.csv   worst one-step error over random normalized games, per eta
  global.csv  error envelope over k steps for one game, with the Gronwall bound
"""
import argparse
from pathlib import Path

import numpy as np

from replicator_tc.game import MatrixGame
from replicator_tc.mwu import local_error_bound, measure_global_error, measure_local_error, normalize_game


def main():
    ap = argparse.ArgumentParser(description="MWU error sweep")
    ap.add_argument("--out-dir", default="out/error_sweep")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=int, default=5)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--eta-min", type=float, default=1e-4)
    ap.add_argument("--eta-max", type=float, default=0.5)
    ap.add_argument("--n-eta", type=int, default=15)
    ap.add_argument("--global-eta", type=float, default=0.02)
    ap.add_argument("--global-steps", type=int, default=1000)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    games = [normalize_game(MatrixGame(rng.uniform(-1, 1, size=(args.m, args.m)))) for _ in range(args.trials)]
    points = [rng.dirichlet(np.ones(args.m)) for _ in games]
    etas = np.geomspace(args.eta_min, args.eta_max, args.n_eta)
    worst = np.array([max(measure_local_error(g, x, e) for g, x in zip(games, points)) for e in etas])
    bounds = np.array([local_error_bound(e) for e in etas])
    np.savetxt(out / "local.csv", np.column_stack([etas, worst, bounds]), delimiter=",",
               header="eta,measured,bound", comments="")
    small = etas <= 1e-2
    slope = np.polyfit(np.log(etas[small]), np.log(worst[small]), 1)[0]
    print(f"local: violations {int(np.sum(worst > bounds))}/{len(etas)}, log-log slope {slope:.3f} on eta <= 1e-2")

    rep = measure_global_error(games[0], points[0], args.global_eta, args.global_steps)
    (out / "global.csv").write_text(rep.to_csv())
    meas, bd = np.array(rep.measured_global[1:]), np.array(rep.global_bounds[1:])
    print(f"global: L={rep.lipschitz_L:.3f}, ok={rep.global_ok}, max measured/bound {np.max(meas / bd):.2e}, "
          f"final error {meas[-1]:.2e} vs bound {bd[-1]:.2e}")


if __name__ == "__main__":
    main()
