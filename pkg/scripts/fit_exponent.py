"""Fit the growth rate of E[G^rho] for A asynchronous tilted i.i.d. agents.

Compares the fitted slope with rho * H_{1/(1+rho)} for a binary source.
"""
import argparse

from guesswork import simulator as sim
from guesswork.analytics import sync_exponent
from guesswork.probability import Pmf, tilt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p0", type=float, default=0.2)
    ap.add_argument("--rho", type=float, default=1.0)
    ap.add_argument("--agents", type=int, default=3)
    ap.add_argument("--ns", default="8,10,12,14,16")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = Pmf.bernoulli(args.p0)
    q = tilt(p, 1.0 / (1.0 + args.rho))

    def plan(n):
        agents = tuple((f"a{i}", sim.IidSampler(q)) for i in range(args.agents))
        return sim.AttackPlan(agents, sim.IidSource(p, n))

    ns = [int(x) for x in args.ns.split(",")]
    fit = sim.estimate_exponent(plan, ns, sim.RoundRobin(), rho=args.rho, trials=args.trials, seed=args.seed)
    target = sync_exponent(p, args.rho)
    for n, e in zip(fit.ns, fit.per_n):
        print(f"n={n:3d}  (1/n) log E[G^rho] = {e:.4f}")
    print(f"slope {fit.slope:.4f}   predicted {target:.4f}   rel. error {abs(fit.slope - target) / target:.2%}")


if __name__ == "__main__":
    main()
