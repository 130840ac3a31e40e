"""Exceedances of (1/n + eps) log k at integer times, per dyadic block, against the summable bound.

    python3 scripts/exceedance_blocks.py --eps 0.25 --horizon 1e5 --trials 200
"""

import argparse
import sys

from latlab.experiments import UPPER_HEADER, ExperimentConfig, persistent_exceeders, run_upper_bound, write_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, default=0.25)
    ap.add_argument("--horizon", type=float, default=1e5)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out")
    a = ap.parse_args(argv)
    cfg = ExperimentConfig(name="upper", n=2, sampler="exact_2d", flow="horocycle", eps=a.eps, trials=a.trials,
                           horizon=a.horizon, seed=a.seed, threads=a.threads)
    counts, rows = run_upper_bound(cfg)
    summary = [f"total_exceedances={int(counts.sum())}",
               f"lattices_exceeding_in_every_block_from_10={persistent_exceeders(counts, 10)}"]
    write_csv(a.out or sys.stdout, UPPER_HEADER, rows, cfg.metadata(), summary)


if __name__ == "__main__":
    main()
