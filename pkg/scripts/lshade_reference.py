"""Plain L-SHADE, written independently of the package, as a baseline oracle.

Used to calibrate the multimodal acceptance threshold: runs builtin
Rastrigin (or any builtin) at the given dimension and budget and prints
the per-run errors and their median. Only the objective functions are
imported from the package.

    python3 scripts/lshade_reference.py --problem rastrigin --dim 10 --runs 25
"""

import argparse

import numpy as np

from mlshade_rl.problem import builtin


def lshade(f, lo, hi, dim, budget, rng, H=6, p=0.11, arc_rate=2.6, r_init=18):
    n_init = r_init * dim
    n = n_init
    X = lo + (hi - lo) * rng.random((n, dim))
    fit = np.array([f(x) for x in X])
    nfes = n
    M_F = np.full(H, 0.5)
    M_CR = np.full(H, 0.5)
    k = 0
    A = np.empty((0, dim))
    while nfes < budget:
        r = rng.integers(H, size=n)
        CR = np.where(M_CR[r] < 0, 0.0, np.clip(rng.normal(M_CR[r], 0.1), 0, 1))
        F = M_F[r] + 0.1 * rng.standard_cauchy(n)
        while np.any(F <= 0):
            bad = F <= 0
            F[bad] = M_F[r[bad]] + 0.1 * rng.standard_cauchy(bad.sum())
        F = np.minimum(F, 1.0)
        order = np.argsort(fit)
        n_top = max(2, int(round(p * n)))
        U = np.empty_like(X)
        union = np.vstack([X, A]) if len(A) else X
        for i in range(n):
            pb = order[rng.integers(n_top)]
            r1 = i
            while r1 == i:
                r1 = rng.integers(n)
            r2 = i
            while r2 == i or r2 == r1:
                r2 = rng.integers(len(union))
            v = X[i] + F[i] * (X[pb] - X[i]) + F[i] * (X[r1] - union[r2])
            v = np.where(v < lo, (lo + X[i]) / 2, v)
            v = np.where(v > hi, (hi + X[i]) / 2, v)
            mask = rng.random(dim) < CR[i]
            mask[rng.integers(dim)] = True
            U[i] = np.where(mask, v, X[i])
        fu = np.array([f(u) for u in U])
        nfes += n
        better = fu < fit
        improved = fu <= fit
        if np.any(better):
            A = np.vstack([A, X[better]])
            d = fit[better] - fu[better]
            w = d / d.sum()
            sF, sCR = F[better], CR[better]
            M_F[k] = np.sum(w * sF ** 2) / np.sum(w * sF)
            M_CR[k] = -1.0 if M_CR[k] == -1.0 or sCR.max() == 0 else np.sum(w * sCR ** 2) / np.sum(w * sCR)
            k = (k + 1) % H
        X[improved] = U[improved]
        fit[improved] = fu[improved]
        new_n = int(round((4 - n_init) / budget * nfes + n_init))
        if new_n < n:
            keep = np.argsort(fit)[:new_n]
            X, fit, n = X[keep], fit[keep], new_n
        cap = int(round(arc_rate * n))
        if len(A) > cap:
            A = A[rng.choice(len(A), cap, replace=False)]
    return fit.min()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problem", default="rastrigin")
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--runs", type=int, default=25)
    ap.add_argument("--budget", type=int, default=None)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args()
    prob = builtin(args.problem, args.dim)
    budget = args.budget or 10000 * args.dim
    errors = []
    for k in range(args.runs):
        rng = np.random.default_rng(args.seed + k)
        best = lshade(prob, prob.bounds.lower, prob.bounds.upper, args.dim, budget, rng)
        err = abs(best - prob.known_optimum)
        errors.append(0.0 if err <= 1e-8 else err)
        print(f"run {k:2d}: error {errors[-1]:.6g}", flush=True)
    e = np.array(errors)
    print(f"median {np.median(e):.6g}  mean {e.mean():.6g}  worst {e.max():.6g}")


if __name__ == "__main__":
    main()
