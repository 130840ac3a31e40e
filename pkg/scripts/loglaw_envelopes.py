"""Envelope of log alpha1 / log t along horocycle or unipotent orbits of random lattices.

    python3 scripts/loglaw_envelopes.py --flow horocycle --horizon 1e6 --trials 50 --out loglaw.csv
"""

import argparse
import sys

from latlab.experiments import LOGLAW_HEADER, ExperimentConfig, run_loglaw, write_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--flow", default="horocycle", choices=["horocycle", "split", "regular"])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--horizon", type=float, default=1e6)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out")
    a = ap.parse_args(argv)
    planar = a.flow == "horocycle"
    cfg = ExperimentConfig(name="loglaw", n=2 if planar else a.n, sampler="exact_2d" if planar else "goldstein_mayer",
                           flow=a.flow, trials=a.trials, horizon=a.horizon, eps=0.1, seed=a.seed, threads=a.threads)
    _, rows, summary, target = run_loglaw(cfg, witness_k=1e3 if planar else 0.0)
    write_csv(a.out or sys.stdout, LOGLAW_HEADER, rows, cfg.metadata(), summary + [f"limsup_target={target:.6g}"])
    print("\n".join(summary + [f"limsup_target={target:.6g}"]), file=sys.stderr)


if __name__ == "__main__":
    main()
