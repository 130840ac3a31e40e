"""Approximation exponents and excursion envelopes for golden, constructed and split numbers."""

from latlab.diophantine import (RealSpec, cf_expand, excursion_times, exponents, geodesic_envelope,
                                geodesic_excursion_times, horocycle_envelope, horocycle_prediction,
                                geodesic_prediction)


def main():
    cases = [("golden", RealSpec.golden(), 40, 2), ("mu(3)", RealSpec.from_rule("mu", 3), 16, 3),
             ("mu(4)", RealSpec.from_rule("mu", 4), 11, 4), ("split(3,2)", RealSpec.from_rule("split", 3, 2), 24, 3)]
    print(f"{'number':12s} {'depth':>5s} {'mu':>8s} {'mu+':>8s} {'mu-':>8s} {'horo':>7s} {'1-1/mu':>7s} "
          f"{'geo':>7s} {'1/2-1/mu':>8s}")
    for name, s, d, mu in cases:
        cf = cf_expand(s, d)
        e = exponents(cf)
        h = horocycle_envelope(excursion_times(s, cf))
        g = geodesic_envelope(geodesic_excursion_times(s, cf))
        print(f"{name:12s} {d:5d} {e.mu:8.4f} {e.mu_plus:8.4f} {e.mu_minus:8.4f} {h:7.4f} "
              f"{horocycle_prediction(mu):7.4f} {g:7.4f} {geodesic_prediction(mu):8.4f}")
    for d in (40, 80, 160, 320):
        print(f"golden depth {d}: mu estimate {exponents(cf_expand(RealSpec.golden(), d)).mu:.5f}")


if __name__ == "__main__":
    main()
