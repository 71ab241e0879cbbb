"""
Distributed Newton iteration on a logistic regression
=====================================================

The merged determinant-weighted step is accurate enough to drive the full
iteration, not just a single update.  Starting from zero, both schemes
race through the early rounds, but near the optimum the inversion bias of
uniform averaging starts to bind and the determinant-weighted run pulls
an order of magnitude ahead at the same communication cost.
"""

import numpy as np

from detavg import (
    Dataset,
    LossKind,
    MachineConfig,
    Objective,
    Scheme,
    run_distributed_newton,
    synth_regression,
)

# ## binarize a planted regression instance into logistic labels
raw = synth_regression(n=1500, d=8, noise_sd=1.0, seed=1)
data = Dataset(X=raw.X, y=(raw.y > 0).astype(float))
obj = Objective(data=data, loss=LossKind.LOGISTIC, lam=1.0 / data.n)
w0 = np.zeros(obj.d)

# ## run both schemes with 128 machines of ~150 rows each
runs = {}
for scheme in (Scheme.DETERMINANTAL, Scheme.UNIFORM):
    cfg = MachineConfig(m=128, k=150, scheme=scheme)
    runs[scheme.value] = run_distributed_newton(obj, w0, iters=8, cfg=cfg, seed=0)

# ## distance to the exact minimizer after each round
print(f"{'iter':>4} {'determinantal':>15} {'uniform':>12}")
for i in range(9):
    det = runs["determinantal"].dist_to_opt[i]
    uni = runs["uniform"].dist_to_opt[i]
    print(f"{i:>4} {det:>15.3e} {uni:>12.3e}")

final = runs["determinantal"].dist_to_opt[-1] / runs["determinantal"].dist_to_opt[0]
print(f"\ndeterminantal final/initial distance: {final:.1e}")
print(f"loss along the way: {np.array2string(runs['determinantal'].losses, precision=6)}")
