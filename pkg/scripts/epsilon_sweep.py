"""Shape-parameter sweeps on the analytic surfaces, one CSV plus a summary of best RMSEs.

    python3 scripts/epsilon_sweep.py [--surfaces f1 f2] [--sizes 1089 4225] [--kernel gaussian]
"""
import argparse
import time
from pathlib import Path

from rrbfpu.bench import epsilon_grid, epsilon_sweep
from rrbfpu.config import RunConfig


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--surfaces", nargs="+", default=["f1", "f2"])
    p.add_argument("--sizes", nargs="+", type=int, default=[1089, 4225])
    p.add_argument("--kernel", choices=("gaussian", "wendland"), default="gaussian")
    p.add_argument("--eps-count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="sweeps")
    args = p.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    eps = epsilon_grid(args.eps_count)
    for name in args.surfaces:
        for n in args.sizes:
            t0 = time.perf_counter()
            res = epsilon_sweep(name, n, kernel=args.kernel, epsilons=eps, seed=args.seed,
                                config=RunConfig(threads=1))
            res.to_csv(out / f"{name}_{n}_{args.kernel}.csv")
            best = {m: res.best(m) for m in ("rbf", "rrbf")}
            line = "  ".join(f"{m} " + ("none" if b is None else f"{b[1]:.3e} @ eps={b[0]:.3g}")
                             for m, b in best.items())
            print(f"{name} n={res.n}: {line}  ({time.perf_counter() - t0:.0f}s)", flush=True)


if __name__ == "__main__":
    main()
