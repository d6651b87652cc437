"""Gradient recovery: midpoint averaging for CR and polynomial preserving
recovery for P1 converge faster than the raw discrete gradients."""
import math

import numpy as np

from supereig.fespaces import build_dofmap
from supereig.mesh import build_domain
from supereig.quadrature import TRI_WEIGHTS, map_points
from supereig.recovery import recover_Kh, recover_ppr
from supereig.solver import solve_source


def f(x):
    return 2 * math.pi**2 * np.sin(math.pi * x[..., 0]) * np.sin(math.pi * x[..., 1])


def grad(x):
    s, c = np.sin(math.pi * x), np.cos(math.pi * x)
    return math.pi * np.stack([c[..., 0] * s[..., 1], s[..., 0] * c[..., 1]], axis=-1)


def l2(v, t):
    return math.sqrt(np.einsum("tqd,tqd,q->t", v, v, TRI_WEIGHTS) @ t.areas)


def main():
    print(f"{'h':>7s}{'|grad u - grad_h u_CR|':>24s}{'|grad u - K_h u_CR|':>22s}"
          f"{'|grad u - grad u_P1|':>22s}{'|grad u - PPR u_P1|':>22s}")
    for level in range(3, 8):
        t = build_domain("unit-square", level)
        g = grad(map_points(t.vertices[t.triangles]))
        cr = solve_source(t, build_dofmap(t, "CR"), f)
        p1 = solve_source(t, build_dofmap(t, "P1"), f)
        print(f"{'1/' + str(2 ** (level - 1)):>7s}{l2(g - cr.gradients(), t):24.3e}"
              f"{l2(g - recover_Kh(cr).values(), t):22.3e}{l2(g - p1.gradients(), t):22.3e}"
              f"{l2(g - recover_ppr(p1).values(), t):22.3e}")


if __name__ == "__main__":
    main()
