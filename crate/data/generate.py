"""Regenerates the bundled datasets. Run from this directory: python3 generate.py"""

import csv
import itertools
import json
import os

import numpy as np
from sklearn.datasets import load_iris


def write(name, header, rows, provenance):
    os.makedirs(name, exist_ok=True)
    with open(os.path.join(name, "data.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    manifest = {"name": name, "file": "data.csv", "label_column": "last", "header": True, "provenance": provenance}
    with open(os.path.join(name, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def iris():
    d = load_iris()
    rows = [[f"{v:g}" for v in x] + [d.target_names[t]] for x, t in zip(d.data, d.target)]
    header = ["sepal_length", "sepal_width", "petal_length", "petal_width", "species"]
    write("iris", header, rows, "Fisher's iris data (150 rows), copied from scikit-learn's bundled file")


def monk3(a1, a2, a3, a4, a5, a6):
    return int((a5 == 3 and a4 == 1) or (a5 != 4 and a2 != 3))


def monks_3():
    rng = np.random.RandomState(3)
    levels = [(1, 2, 3), (1, 2, 3), (1, 2), (1, 2, 3), (1, 2, 3, 4), (1, 2)]
    grid = list(itertools.product(*levels))
    picks = rng.choice(len(grid), size=122, replace=False)
    flipped = set(rng.choice(122, size=6, replace=False).tolist())
    rows = []
    for i, p in enumerate(picks):
        x = grid[p]
        y = monk3(*x)
        rows.append(list(x) + [1 - y if i in flipped else y])
    rows += [list(x) + [monk3(*x)] for x in grid]
    header = ["a1", "a2", "a3", "a4", "a5", "a6", "class"]
    write(
        "monks_3",
        header,
        rows,
        "reconstruction of MONK's problem 3: 122 training rows sampled without replacement from the "
        "432-point attribute grid with 6 labels flipped, followed by the full noise-free grid (554 rows); "
        "concept (a5=3 and a4=1) or (a5!=4 and a2!=3); seed 3",
    )


def acute_inflammation():
    rng = np.random.RandomState(11)
    rows = []
    for _ in range(120):
        temp = round(rng.uniform(35.5, 41.5), 1)
        nausea, lumbar, urine, mict, burning = (int(v) for v in rng.randint(0, 2, size=5))
        label = "yes" if urine and (mict or not lumbar) else "no"
        rows.append([temp, nausea, lumbar, urine, mict, burning, label])
    header = ["temperature", "nausea", "lumbar_pain", "urine_pushing", "micturition_pain", "urethra_burning",
              "bladder_inflammation"]
    write(
        "acute_inflammation",
        header,
        rows,
        "synthetic stand-in for the acute inflammations data: 120 rows, temperature in [35.5, 41.5] and five "
        "binary symptoms; label = urine_pushing and (micturition_pain or not lumbar_pain), which is linearly "
        "separable; seed 11",
    )


def thyroid_small():
    rng = np.random.RandomState(7)
    counts = {"hyper": 9, "hypo": 19, "normal": 332}
    rows = []
    for label, n in counts.items():
        for _ in range(n):
            age = rng.uniform(0.01, 0.95)
            binary = [int(rng.rand() < p) for p in
                      (0.3, 0.1, 0.02, 0.03, 0.04, 0.01, 0.02, 0.07, 0.07, 0.01, 0.01, 0.03, 0.0, 0.02, 0.05)]
            if label == "hyper":
                tsh, t3, tt4, fti = rng.uniform(0.0, 0.002), rng.normal(0.035, 0.008), rng.normal(0.16, 0.03), rng.normal(0.17, 0.03)
            elif label == "hypo":
                tsh, t3, tt4, fti = rng.uniform(0.01, 0.1), rng.normal(0.012, 0.004), rng.normal(0.06, 0.02), rng.normal(0.06, 0.02)
            else:
                tsh, t3, tt4, fti = abs(rng.normal(0.0025, 0.002)), rng.normal(0.02, 0.005), rng.normal(0.11, 0.02), rng.normal(0.11, 0.02)
            t4u = rng.normal(0.1, 0.015)
            cont = [age, tsh, max(t3, 0.0005), max(tt4, 0.002), t4u, max(fti, 0.002)]
            rows.append([round(v, 4) for v in cont[:1]] + binary + [round(v, 5) for v in cont[1:]] + [label])
    order = rng.permutation(len(rows))
    rows = [rows[i] for i in order]
    header = ["age"] + [f"b{i}" for i in range(1, 16)] + ["tsh", "t3", "tt4", "t4u", "fti", "class"]
    write(
        "thyroid_small",
        header,
        rows,
        "synthetic stand-in shaped like the thyroid disease data: 360 rows, 21 features (15 binary, 6 "
        "continuous), 3 imbalanced classes (9/19/332) separated mainly by tsh and fti; seed 7",
    )


if __name__ == "__main__":
    iris()
    monks_3()
    acute_inflammation()
    thyroid_small()
