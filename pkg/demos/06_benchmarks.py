"""The four benchmark studies through the experiment runner, written as CSV.

Same as ``supereig run --example N --format csv --out demo_results``.
"""
import sys
from pathlib import Path

from supereig.experiments import example_config, run_experiment


def main(out="demo_results"):
    for example, elements, post in ((1, ("CR", "ECR", "P1"), ("rea", "exp", "p1star", "cea")),
                                    (2, ("CR", "ECR"), ("rea", "exp")),
                                    (3, ("CR", "ECR", "P1"), ("rea",)),
                                    (4, ("CR",), ("rea", "p1star"))):
        rep = run_experiment(example_config(example, elements, levels=range(2, 7), post=post), out, "csv")
        print(f"example {example}: {len(rep['tables'])} tables")
    for path in sorted(Path(out).glob("example1_CR_eig1.csv")):
        print(f"\n{path}:\n{path.read_text()}")


if __name__ == "__main__":
    main(*sys.argv[1:])
