"""Error estimators and improved eigenvalues on the unit square.

F estimates lambda - lambda_h; adding it gives the recovered eigenvalue
(REA).  Combining the CR lower bound with the averaged P1 upper bound (CEA)
and Richardson extrapolation (EXP) are shown alongside.
"""
import math

from supereig.estimators import combining_eigenvalue, estimator_F, extrapolate
from supereig.mesh import build_domain
from supereig.recovery import project_p1star, recover_Kh
from supereig.solver import eigenpairs

LAM = 2 * math.pi**2


def main():
    print(f"{'h':>7s}{'lambda_h - lambda':>19s}{'effectivity':>13s}{'REA - lambda':>15s}"
          f"{'CEA - lambda':>15s}{'EXP - lambda':>15s}")
    prev = None
    for level in range(3, 9):
        res = eigenpairs(build_domain("unit-square", level), "CR")
        lam, u = res.eigenvalues[0], res.function(0)
        kq = recover_Kh(u)
        rep = estimator_F(u, lam, kq)
        p = project_p1star(u)
        f_p1 = estimator_F(p.u_p1star, p.lambda_p1star, kq, "P1").F
        cea = combining_eigenvalue(p.lambda_p1star, f_p1, lam, rep.F)
        exp = "" if prev is None else f"{extrapolate(lam, prev) - LAM:15.3e}"
        print(f"{'1/' + str(2 ** (level - 1)):>7s}{lam - LAM:19.3e}{rep.F / (LAM - lam):13.4f}"
              f"{rep.lambda_rea - LAM:15.3e}{cea - LAM:15.3e}{exp}")
        prev = lam


if __name__ == "__main__":
    main()
