#!/usr/bin/env python3
"""Write the WDBC data bundled with scikit-learn in the headerless 32-column UCI layout.

The UCI file carries a patient id, the diagnosis (M/B) and 30 features. scikit-learn
drops the ids, so the row number stands in for them.
"""
import argparse
import sys

from sklearn.datasets import load_breast_cancer


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", help="output path")
    args = parser.parse_args()
    data = load_breast_cancer()
    if data.data.shape != (569, 30):
        sys.exit(f"unexpected shape {data.data.shape}")
    # target 0 is malignant in scikit-learn.
    with open(args.out, "w", encoding="utf-8") as out:
        for i, (row, target) in enumerate(zip(data.data, data.target)):
            fields = [str(i + 1), "M" if target == 0 else "B"] + [repr(float(v)) for v in row]
            out.write(",".join(fields) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
