#!/usr/bin/env python3
"""Train a small RBF SVM with scikit-learn and write it as an stst-model
container, with the solver's own decision values as verification rows.

    python3 tools/export_sklearn_svm.py OUT.model [--seed N]
"""
import argparse

import numpy as np
from sklearn.svm import SVC


def fmt(v):
    return repr(float(v))


def sparse_row(x):
    return " ".join(f"{i + 1}:{fmt(v)}" for i, v in enumerate(x) if v != 0.0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--sigma", type=float, default=1.5)
    ap.add_argument("--verify", type=int, default=40)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n, d = 120, 4
    y = np.where(rng.random(n) < 0.5, 1, -1)
    x = rng.normal(size=(n, d)) + 1.2 * y[:, None] * np.array([1.0, -0.5, 0.0, 0.25])
    gamma = 1.0 / (2.0 * args.sigma ** 2)
    svm = SVC(C=1.0, kernel="rbf", gamma=gamma, tol=1e-10).fit(x, y)

    xv = rng.normal(size=(args.verify, d)) * 1.5
    dv = svm.decision_function(xv)
    # decision = sum alpha_i K(sv_i, x) + b, so theta = -b.
    lines = ["stst-model 1", f"dim {d}", f"theta {fmt(-svm.intercept_[0])}",
             f"kernel rbf {fmt(args.sigma)}", f"terms {len(svm.support_)}"]
    for a, sv in zip(svm.dual_coef_[0], svm.support_vectors_):
        lines.append(f"{fmt(a)} 0 {sparse_row(sv)}".rstrip())
    lines.append(f"verify {len(xv)}")
    for dval, row in zip(dv, xv):
        lines.append(f"{fmt(dval)} {sparse_row(row)}".rstrip())
    lines.append("end")
    with open(args.out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
