"""Benchmark meshes: counts, refinement, uniformity and text export."""
import tempfile
from pathlib import Path

from supereig.mesh import DOMAIN_KINDS, build_domain, check_uniform, element_geometry, read_mesh, write_mesh


def main():
    print(f"{'domain':22s} {'level':>5s} {'V':>6s} {'E':>6s} {'T':>6s} {'h':>8s}  uniform")
    for kind in DOMAIN_KINDS:
        for level in (1, 3, 5):
            t = build_domain(kind, level)
            print(f"{kind:22s} {level:5d} {t.n_vertices:6d} {t.n_edges:6d} {t.n_triangles:6d} "
                  f"{t.h:8.4f}  {check_uniform(t)}")

    g = element_geometry(build_domain("unit-square", 1), 0)
    print(f"\nfirst triangle of the unit square: area {g.area}, H {g.H}, A {g.A:+.1e}, B {g.B:+.3f}")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "lshape2.txt"
        write_mesh(build_domain("l-shape", 2), path)
        back = read_mesh(path, level=2)
        print(f"round trip through {path.name}: {back}")
        print("\n".join(path.read_text().splitlines()[:4]))


if __name__ == "__main__":
    main()
