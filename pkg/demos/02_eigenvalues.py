"""Lowest Laplace eigenvalue of the unit square by CR, ECR and P1.

The nonconforming elements approach 2 pi^2 from below and P1 from above, all
at second order.
"""
import math

from supereig.experiments import observed_orders
from supereig.mesh import build_domain
from supereig.solver import eigenpairs

LAM = 2 * math.pi**2


def main():
    levels = range(3, 8)
    errs = {k: [] for k in ("CR", "ECR", "P1")}
    for level in levels:
        t = build_domain("unit-square", level)
        for kind in errs:
            errs[kind].append(eigenpairs(t, kind).eigenvalues[0] - LAM)
    print(f"{'h':>7s}" + "".join(f"{k + ' error':>14s}{'order':>7s}" for k in errs))
    orders = {k: observed_orders(v) for k, v in errs.items()}
    for j, level in enumerate(levels):
        row = f"{'1/' + str(2 ** (level - 1)):>7s}"
        for kind in errs:
            o = orders[kind][j]
            row += f"{errs[kind][j]:14.4e}{'' if o is None else f'{o:7.2f}':>7s}"
        print(row)

    res = eigenpairs(build_domain("unit-square", 5), "CR", 6)
    print("\nsix lowest CR eigenvalues / pi^2 at h = 1/16:",
          " ".join(f"{v / math.pi**2:.4f}" for v in res.eigenvalues))
    print("clusters of (numerically) equal eigenvalues:", res.clusters)


if __name__ == "__main__":
    main()
