"""log E[V_rho] per symbol for a guesser tuned to gamma, against rho."""
import argparse
import csv
from pathlib import Path

import numpy as np

from guesswork.analytics import mismatch_exponent, sync_exponent
from guesswork.probability import Pmf


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p0", type=float, default=0.2, help="P(0) of the binary source")
    ap.add_argument("--gammas", default="0.5,1,2")
    ap.add_argument("--rho-max", type=float, default=4.0)
    ap.add_argument("--out", type=Path, default=Path("out/mismatch_curve.csv"))
    args = ap.parse_args()

    p = Pmf.bernoulli(args.p0)
    gammas = [float(g) for g in args.gammas.split(",")]
    rhos = np.linspace(0.05, args.rho_max, 80)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["series", "rho", "exponent"])
        for r in rhos:
            w.writerow(["optimal", r, sync_exponent(p, r)])
        for g in gammas:
            for r in rhos:
                w.writerow([f"gamma={g:g}", r, mismatch_exponent(p, r, g)])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
