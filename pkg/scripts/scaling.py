"""N^-3/2 scaling of the rotation uncertainty from exact evolution.

Takes about a minute on one core; N = 24 dominates.
"""

import argparse
import warnings

import numpy as np

from fourwell import analytic, dynamics
from fourwell.model import ModelParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="8,12,16,20,24", help="comma-separated particle numbers")
    ap.add_argument("--u", type=float, default=6.01)
    ap.add_argument("--j", type=float, default=8.16)
    args = ap.parse_args()
    ns = [int(x) for x in args.n.split(",")]
    template = ModelParams(args.u, args.j, 0.0, ns[0])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = dynamics.scaling_exponent(template, ns, method="numeric")
    print("N,delta_alpha_numeric,delta_alpha_analytic,resonance_ratio")
    for n, da in zip(fit.n_values, fit.delta_alpha):
        p = template.with_n(n)
        ana = analytic.delta_alpha_analytic(p, 0.0)
        print(f"{n},{da:.6g},{ana:.6g},{analytic.resonant_constants(p).resonance_ratio:.4g}")
    print(f"# fitted slope {fit.slope:.4f} (intercept {fit.intercept:.4f})")
    print(f"# asymptotic analytic slope {analytic.log_log_slope([1000, 2000], [analytic.delta_alpha_analytic(template.with_n(n), 0.0) for n in (1000, 2000)]):.4f}")
    for w in caught:
        print(f"# warning: {w.message}")
    assert np.isfinite(fit.slope)


if __name__ == "__main__":
    main()
