"""``latlab`` command line.

Exit codes: 0 success, 2 invalid configuration, 3 enumeration guard tripped.
Options may also come from an INI file (``--config``): keys of the
``[global]`` section and of the section named after the subcommand, with
dashes or underscores; command-line flags win.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys

import numpy as np

from . import __version__
from .lattice import EnumerationLimitError, LatticeBasis, alpha1, shortest_vector

EXIT_OK, EXIT_CONFIG, EXIT_ENUMERATION = 0, 2, 3

# defaults shared by the subcommands; subcommand-specific ones live with their parser
GLOBAL_DEFAULTS = {"n": 3, "seed": 0, "trials": 100, "out": None, "threads": None}


def _floats(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


def _ints(text):
    return [int(x) for x in str(text).replace(",", " ").split()]


def _global_parser() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    g.add_argument("--n", type=int, default=s, help="dimension")
    g.add_argument("--seed", type=int, default=s)
    g.add_argument("--trials", type=int, default=s)
    g.add_argument("--out", default=s, help="CSV output path (default stdout)")
    g.add_argument("--config", default=s, help="INI file with defaults")
    g.add_argument("--threads", type=int, default=s, help="worker processes (default $LATLAB_THREADS or 1)")
    return g


def build_parser() -> argparse.ArgumentParser:
    glob = _global_parser()
    p = argparse.ArgumentParser(prog="latlab", parents=[glob],
                                description="Random lattices, cusp excursions and logarithm laws.")
    p.add_argument("--version", action="version", version=f"latlab {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True
    s = argparse.SUPPRESS

    def cmd(name, help_):
        return sub.add_parser(name, parents=[glob], help=help_, argument_default=s)

    c = cmd("sample", "draw random unimodular lattices")
    c.add_argument("--sampler", choices=["goldstein_mayer", "gm", "exact_2d"])
    c.add_argument("--p", type=int)

    c = cmd("svp", "shortest vector of a basis or of sampled lattices")
    c.add_argument("--basis", help="rows separated by ';', e.g. '1,0;0.5,1' (columns are basis vectors)")
    c.add_argument("--sampler", choices=["goldstein_mayer", "gm", "exact_2d"])

    c = cmd("siegel", "Siegel transform moments of a ball or box")
    c.add_argument("--volume", type=float)
    c.add_argument("--shape", choices=["ball", "box"])

    c = cmd("rogers", "the constant C_n = 8 zeta(n-1)/zeta(n)")
    c.add_argument("--K", type=int, help="also print the brute-force coprime sum up to K")

    c = cmd("minkowski", "probability of missing boxes of given volumes")
    c.add_argument("--volumes", "--volume", dest="volumes", type=_floats)
    c.add_argument("--anchor", choices=["corner", "center"])

    c = cmd("tail", "tail of log alpha1 against omega_n e^(-n r)")
    c.add_argument("--r", type=_floats, dest="r_values")

    c = cmd("theta2", "planar primitive-count deviation and emptiness")
    c.add_argument("--area", type=float)

    c = cmd("dioph", "continued fraction and approximation exponents of a real number")
    c.add_argument("real", help="rat:p/q | surd:a+b*sqrt(d) | surd:golden | rule:mu(3) | rule:split(3,2) | ...")
    c.add_argument("--depth", type=int)
    c.add_argument("--excursions", action="store_true", help="also list the excursion times")

    c = cmd("witness2d", "planar witness times from area-4 boxes")
    c.add_argument("--k-max", type=int, dest="k_max")
    c.add_argument("--real", help="use Lambda_s for this real instead of sampled lattices")

    c = cmd("witnessnd", "witness times from shrinking targets in dimension n")
    c.add_argument("--flow", choices=["split", "regular", "general"])
    c.add_argument("--blocks", type=_ints)
    c.add_argument("--eps", type=float)
    c.add_argument("--k-min", type=float, dest="k_min")
    c.add_argument("--k-max", type=float, dest="k_max")
    c.add_argument("--k-ratio", type=float, dest="k_ratio")
    c.add_argument("--sampler", choices=["goldstein_mayer", "gm", "exact_2d"])

    c = cmd("sharp", "rate-adapted targets and their witnesses")
    c.add_argument("--rate", help="power | log | logBETA")
    c.add_argument("--c", type=float)
    c.add_argument("--delta", type=float)
    c.add_argument("--k", type=float)

    c = cmd("loglaw", "envelope of log alpha1 / log t along orbits")
    c.add_argument("--flow", choices=["split", "regular", "general", "horocycle", "geodesic", "diagonal"])
    c.add_argument("--blocks", type=_ints)
    c.add_argument("--horizon", type=float)
    c.add_argument("--rho", type=float)
    c.add_argument("--t0", type=float)
    c.add_argument("--eps", type=float)
    c.add_argument("--witness-k", type=float, dest="witness_k")
    c.add_argument("--sampler", choices=["goldstein_mayer", "gm", "exact_2d"])

    c = cmd("upperbound", "exceedances of (1/n + eps) log k at integer times")
    c.add_argument("--flow", choices=["split", "regular", "general", "horocycle"])
    c.add_argument("--blocks", type=_ints)
    c.add_argument("--eps", type=float)
    c.add_argument("--horizon", type=float)
    c.add_argument("--sampler", choices=["goldstein_mayer", "gm", "exact_2d"])
    return p


CONVERTERS = {"n": int, "seed": int, "trials": int, "threads": int, "p": int, "K": int, "depth": int,
              "k_max": float, "k_min": float, "k_ratio": float, "eps": float, "delta": float, "c": float,
              "k": float, "horizon": float, "rho": float, "t0": float, "witness_k": float, "volume": float,
              "area": float, "volumes": _floats, "r_values": _floats, "blocks": _ints,
              "excursions": lambda s: s.strip().lower() in ("1", "true", "yes", "on")}


def _from_config(path: str, command: str) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep "K" distinct from "k"
    if not cp.read(path):
        raise ValueError(f"cannot read config file {path!r}")
    out = {}
    for section in ("global", command):
        if cp.has_section(section):
            for key, val in cp.items(section):
                key = key.replace("-", "_")
                out[key] = CONVERTERS.get(key, str)(val)
    return out


def resolve_options(args: argparse.Namespace) -> dict:
    opts = dict(GLOBAL_DEFAULTS)
    given = vars(args)
    if "config" in given:
        opts.update(_from_config(given["config"], given["command"]))
    opts.update({k: v for k, v in given.items() if k != "config"})
    return opts


def _sampler_name(o, default):
    name = o.get("sampler", default)
    return "goldstein_mayer" if name == "gm" else name


def _config(o, **defaults):
    from .experiments import ExperimentConfig

    fields = ExperimentConfig.__dataclass_fields__
    kw = dict(defaults)
    kw.update({k: v for k, v in o.items() if k in fields and v is not None})
    if "blocks" in kw:
        kw["blocks"] = tuple(kw["blocks"])
    return ExperimentConfig(name=o["command"], **kw)


def _emit(o, header, rows, metadata, summary=()):
    from .experiments import write_csv

    out = o.get("out")
    write_csv(out if out else sys.stdout, header, rows, metadata, summary)
    if out:
        for line in summary:
            print(line)


def _meta(o, extra=""):
    keys = sorted(k for k in o if k not in ("out", "threads", "command"))
    items = " ".join(f"{k}={o[k]}" for k in keys if o[k] is not None)
    return f"latlab {__version__} command={o['command']} {items} {extra}".strip()


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample(o):
    from .sampling import SamplerSpec, sample_many

    name = _sampler_name(o, "goldstein_mayer" if o["n"] != 2 else "exact_2d")
    kw = {"p": o["p"]} if "p" in o else {}
    spec = SamplerSpec(name, o["n"], seed=o["seed"], **kw)
    n = o["n"]
    header = ["trial"] + [f"b{i}{j}" for i in range(n) for j in range(n)] + ["alpha1"]
    rows = []
    for i, b in enumerate(sample_many(spec, o["trials"])):
        rows.append([i] + [float(x) for x in np.asarray(b.matrix).ravel()] + [alpha1(b)])
    _emit(o, header, rows, _meta(o))


def _parse_basis(text):
    rows = [[float(x) for x in r.replace(",", " ").split()] for r in text.split(";") if r.strip()]
    return LatticeBasis(rows)


def cmd_svp(o):
    header = ["trial", "norm", "alpha1", "coeffs", "coords"]
    if "basis" in o:
        bases = [_parse_basis(o["basis"])]
    else:
        from .sampling import SamplerSpec, sample_many

        name = _sampler_name(o, "goldstein_mayer" if o["n"] != 2 else "exact_2d")
        bases = sample_many(SamplerSpec(name, o["n"], seed=o["seed"]), o["trials"])
    rows = []
    for i, b in enumerate(bases):
        v = shortest_vector(b)
        rows.append([i, v.norm, 1.0 / v.norm, " ".join(map(str, v.coeffs)), " ".join(format(x, ".17g") for x in v.coords)])
    _emit(o, header, rows, _meta(o))


def _gm(o):
    from .sampling import SamplerSpec

    name = _sampler_name(o, "goldstein_mayer")
    return SamplerSpec(name, o["n"], seed=o["seed"])


def cmd_siegel(o):
    from .regions import Ball, Box
    from .transforms import siegel_moments

    vol = o.get("volume", 5.0)
    region = Ball.of_volume(o["n"], vol) if o.get("shape", "ball") == "ball" else Box.cube(o["n"], vol)
    rep = siegel_moments(region, _gm(o), o["trials"], o["threads"])
    header = ["volume", "samples", "mean", "mean_stderr", "mean_target", "second_moment", "second_stderr",
              "second_target"]
    rows = [[vol, rep.sample_count, rep.mean, rep.mean_stderr, rep.targets["mean"], rep.second_moment,
             rep.second_stderr, rep.targets.get("second", math.nan)]]
    _emit(o, header, rows, _meta(o))


def cmd_rogers(o):
    from .transforms import coprime_pair_sum, coprime_tail_bound, rogers_constant

    n = o["n"]
    print(f"{rogers_constant(n):.10f}")
    if "K" in o:
        K = o["K"]
        print(f"coprime sum K={K}: {coprime_pair_sum(n, K):.10f} (tail bound {coprime_tail_bound(n, K):.3g})")


def cmd_minkowski(o):
    from .regions import Box
    from .transforms import avoidance_probabilities

    vols = o.get("volumes") or ([o["volume"]] if "volume" in o else [10.0, 20.0, 50.0, 100.0])
    anchor = o.get("anchor", "corner")
    regions = [Box.cube(o["n"], a, anchor=anchor) for a in vols]
    reps = avoidance_probabilities(regions, _gm(o), o["trials"], o["threads"])
    rows = [[a, r.sample_count, r.mean, r.mean_stderr, r.targets["bound"]] for a, r in zip(vols, reps)]
    _emit(o, ["volume", "samples", "miss_probability", "stderr", "bound"], rows, _meta(o))


def cmd_tail(o):
    from .transforms import tail_bound_check

    rs = o.get("r_values", [0.5, 1.0, 2.0])
    name = _sampler_name(o, "goldstein_mayer" if o["n"] != 2 else "exact_2d")
    from .sampling import SamplerSpec

    res = tail_bound_check(rs, SamplerSpec(name, o["n"], seed=o["seed"]), o["trials"], o["threads"])
    rows = [[r, rep.sample_count, rep.mean, rep.mean_stderr, rep.targets["bound"]] for r, rep in res.items()]
    _emit(o, ["r", "samples", "probability", "stderr", "bound"], rows, _meta(o))


def cmd_theta2(o):
    from .sampling import SamplerSpec
    from .transforms import theta_deviation_check

    a = o.get("area", 200.0)
    rep = theta_deviation_check(a, SamplerSpec("exact_2d", 2, seed=o["seed"]), o["trials"], threads=o["threads"])
    e = rep.extra
    header = ["area", "samples", "mean", "mean_target", "deviation", "deviation_stderr", "deviation_bound",
              "p_empty", "p_empty_stderr", "p_empty_mass", "p_empty_bound"]
    rows = [[a, rep.sample_count, rep.mean, rep.targets["mean"], e["deviation"], e["deviation_stderr"],
             rep.targets["deviation"], e["p_empty"], e["p_empty_stderr"], e["p_empty_mass"], rep.targets["p_empty"]]]
    _emit(o, header, rows, _meta(o))


def cmd_dioph(o):
    from .diophantine import cf_expand, excursion_times, exponents, horocycle_envelope, parse_real

    s = parse_real(o["real"])
    default = 40 if s.kind != "cf_rule" else (10 if s.rule == "liouville" else 16)
    cf = cf_expand(s, o.get("depth", default))
    print(f"real = {s.description}")
    print(f"cf = {cf}")
    if cf.period:
        print(f"period = {list(cf.period)}")
    e = exponents(cf)
    for key in ("mu", "mu_plus", "mu_minus"):
        print(f"{key} = {_num(getattr(e, key))}")
    if not s.is_rational and cf.depth >= 4:
        ex = excursion_times(s, cf)
        print(f"horocycle_envelope = {_num(horocycle_envelope(ex))}")
        if o.get("excursions"):
            rows = [[x.index, x.q, x.sign, x.log_abs_t, x.log_alpha, x.ratio] for x in ex]
            _emit(o, ["index", "q", "sign", "log_abs_t", "log_alpha1", "ratio"], rows, _meta(o))


def _num(x):
    if isinstance(x, float) and x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".6g") if isinstance(x, float) else str(x)


def cmd_witness2d(o):
    from .experiments import run_witness_2d, witness_2d_lambda

    k_max = int(o.get("k_max", 1000))
    header = ["trial", "k", "x", "y", "t_k", "alpha1", "bound", "exponent"]
    if o.get("real"):
        from .diophantine import parse_real

        recs = witness_2d_lambda(parse_real(o["real"]), k_max)
        rows = [[0, r.k, r.coords[0], r.coords[1], r.t, r.alpha1, r.bound, r.exponent] for r in recs]
    else:
        cfg = _config(o, n=2, sampler=_sampler_name(o, "exact_2d"), flow="horocycle", eps=0.25)
        _, rows = run_witness_2d(cfg, k_max)
    _emit(o, header, rows, _meta(o), [f"records={len(rows)}"])


def cmd_witnessnd(o):
    from .experiments import WITNESS_ND_HEADER, certified_exponents, run_witness_nd

    cfg = _config(o, sampler=_sampler_name(o, "goldstein_mayer"), k_min=16.0, k_max=1e4)
    recs, rows, stats, summary = run_witness_nd(cfg)
    ex = certified_exponents(recs)
    frac = float(np.mean(ex >= 1.0 / cfg.n - 0.07))
    summary = summary + [f"fraction_exponent_at_least_1/n-0.07={frac:.6g}"]
    _emit(o, WITNESS_ND_HEADER, rows, cfg.metadata(), summary)


def cmd_sharp(o):
    from .experiments import sharp_regions, sharp_witness
    from .sampling import SamplerSpec, sample_trial

    n = o["n"]
    c = o.get("c", 1.0)
    params = {"rate": o.get("rate", "power"), "c": c, "delta": o.get("delta", 0.1)}
    region = sharp_regions(params, n, o.get("k", 1e3))
    spec = SamplerSpec("goldstein_mayer", n, seed=o["seed"])
    rows = []
    for i in range(o["trials"]):
        r = sharp_witness(region, sample_trial(spec, i), c)
        rows.append([i, region.k, int(r.found), r.t, r.alpha1, r.bound, r.extra.get("prop_bound", math.nan),
                     int(bool(r.extra.get("prop_holds", False)))])
    found = sum(r[2] for r in rows)
    _emit(o, ["trial", "k", "found", "t_k", "alpha1", "bound", "rate_bound", "rate_bound_holds"], rows, _meta(o),
          [f"measure={region.measure():.17g} found={found}/{len(rows)}"])


def cmd_loglaw(o):
    from .experiments import LOGLAW_HEADER, run_loglaw

    flow = o.get("flow", "horocycle" if o["n"] == 2 else "split")
    n = 2 if flow in ("horocycle", "geodesic") else o["n"]
    default_sampler = "exact_2d" if n == 2 else "goldstein_mayer"
    eps = o.get("eps", 0.25 if n == 2 else 0.1)
    cfg = _config({**o, "n": n, "flow": flow, "eps": eps}, sampler=_sampler_name(o, default_sampler))
    witness_k = o.get("witness_k", 1e3 if flow == "horocycle" else 0.0)
    _, rows, summary, target = run_loglaw(cfg, witness_k)
    _emit(o, LOGLAW_HEADER, rows, cfg.metadata(), summary + [f"limsup_target={target:.6g}"])


def cmd_upperbound(o):
    from .experiments import UPPER_HEADER, persistent_exceeders, run_upper_bound

    flow = o.get("flow", "horocycle" if o["n"] == 2 else "split")
    n = 2 if flow == "horocycle" else o["n"]
    default_sampler = "exact_2d" if n == 2 else "goldstein_mayer"
    eps = o.get("eps", 0.25 if n == 2 else 0.1)
    cfg = _config({**o, "n": n, "flow": flow, "eps": eps}, sampler=_sampler_name(o, default_sampler), horizon=1e5)
    counts, rows = run_upper_bound(cfg)
    summary = [f"total_exceedances={int(counts.sum())}",
               f"lattices_exceeding_in_every_block_from_10={persistent_exceeders(counts, 10)}"]
    _emit(o, UPPER_HEADER, rows, cfg.metadata(), summary)


COMMANDS = {"sample": cmd_sample, "svp": cmd_svp, "siegel": cmd_siegel, "rogers": cmd_rogers,
            "minkowski": cmd_minkowski, "tail": cmd_tail, "theta2": cmd_theta2, "dioph": cmd_dioph,
            "witness2d": cmd_witness2d, "witnessnd": cmd_witnessnd, "sharp": cmd_sharp, "loglaw": cmd_loglaw,
            "upperbound": cmd_upperbound}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        opts = resolve_options(args)
        COMMANDS[opts["command"]](opts)
    except EnumerationLimitError as e:
        print(f"latlab: enumeration guard: {e}", file=sys.stderr)
        return EXIT_ENUMERATION
    except (ValueError, configparser.Error) as e:
        print(f"latlab: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
