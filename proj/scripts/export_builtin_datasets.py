#!/usr/bin/env python3
"""Export the scikit-learn bundled copies of iris, wine and the WDBC
breast-cancer data to data/uci/*.csv in the loader's format (features,
label string last, no header). These are verbatim copies of the UCI
datasets and let the desk-scale benchmark run without network access.
The remaining datasets must be fetched with scripts/fetch_uci.sh."""

import os
import sys

try:
    from sklearn import datasets
except ImportError:
    sys.exit("scikit-learn is required: pip install scikit-learn")


def write_csv(path, X, y, class_names):
    with open(path, "w") as f:
        for row, label in zip(X, y):
            cells = [repr(float(v)) for v in row]
            cells.append(str(class_names[label]))
            f.write(",".join(cells) + "\n")
    print(f"wrote {path}: {X.shape[0]} rows, {X.shape[1]} features")


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "uci")
    os.makedirs(out_dir, exist_ok=True)

    iris = datasets.load_iris()
    write_csv(os.path.join(out_dir, "iris.csv"), iris.data, iris.target,
              list(iris.target_names))

    wine = datasets.load_wine()
    write_csv(os.path.join(out_dir, "wine.csv"), wine.data, wine.target,
              list(wine.target_names))

    cancer = datasets.load_breast_cancer()
    write_csv(os.path.join(out_dir, "cancer.csv"), cancer.data, cancer.target,
              list(cancer.target_names))


if __name__ == "__main__":
    main()
