"""
Averaging distributed Newton steps: plateau vs decay
====================================================

Each of m machines solves a Newton system against a Bernoulli-subsampled
Hessian and the exact global gradient.  Uniformly averaging the local
steps stalls at a bias floor no matter how many machines report, while
determinant-weighted averaging keeps improving at the 1/sqrt(m) rate.
The sweep below prints the median step error in the Hessian norm for
both schemes over a doubling grid of machine counts.
"""

import numpy as np

from detavg import (
    LossKind,
    Objective,
    Scheme,
    coherence,
    error_sweep,
    synth_regression,
)

# ## a small ridge-regression instance, many more rows than columns
data = synth_regression(n=800, d=6, noise_sd=1.0, seed=0)
obj = Objective(data=data, loss=LossKind.SQUARE, lam=1.0 / data.n)
w = np.zeros(obj.d)
print(f"instance: n={data.n}, d={data.d}, expected local rows k=80")
print(f"coherence at w: {coherence(obj, w):.2f}\n")

# ## sweep machine counts, 40 independent trials per count
m_grid = [8, 16, 32, 64, 128, 256, 512]
rows = error_sweep(
    obj, w, k=80, m_list=m_grid, trials=40,
    scheme=[Scheme.DETERMINANTAL, Scheme.UNIFORM], seed=0,
)


def med(scheme, m):
    errs = [r.err_hnorm for r in rows if r.scheme == scheme and r.m == m]
    return float(np.median(errs))


# ## uniform flattens out, determinantal keeps shrinking
print(f"{'m':>5} {'uniform':>10} {'determinantal':>14} {'ratio':>7}")
for m in m_grid:
    u, d = med("uniform", m), med("determinantal", m)
    print(f"{m:>5} {u:>10.4f} {d:>14.4f} {u / d:>7.2f}")

decay = med("determinantal", m_grid[-1]) / med("determinantal", m_grid[0])
flat = med("uniform", m_grid[-1]) / med("uniform", m_grid[0])
print(f"\ndeterminantal err({m_grid[-1]})/err({m_grid[0]}) = {decay:.3f}")
print(f"uniform       err({m_grid[-1]})/err({m_grid[0]}) = {flat:.3f}  (plateau)")
