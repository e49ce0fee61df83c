# coding: utf-8

# # Recovery under adversarial outliers
#
# Plant x0 = 0.1 e1. The adversary picks a tangent direction H_T and copies A(H_T)
# onto the s-fraction of measurements where it is largest, so that a wrong PSD matrix
# fits those entries. Then solve the PSD-constrained l1 program.

# In[1]:

import numpy as np

from robust_phaselift import experiments as ex
from robust_phaselift.robc import empirical_lower_bound


# Success rate and mean relative error at n = 5, m = 1500.

# In[2]:

cfg = ex.ExperimentConfig("phase-diagram", [5], [1500], [0.0, 0.05, 0.1, 0.2], trials=3, seed=0)
for n, m, s, rate, err, trials in ex.run_phase_diagram(cfg):
    print(f"s={s:.2f} success={rate:.2f} mean rel error={err:.3g}")


# The mechanism behind it: the worst-case ratio over sampled tangent directions stays
# positive without outliers and turns negative past the critical fraction.

# In[3]:

ens = ex.trial_ensemble(10, 2000, 0.0, 0, 0)
for s in (0.0, 0.1, 0.2):
    rep = empirical_lower_bound(ens, s, 100, seed=1)
    print(f"s={s:.1f} min ratio={rep.min_ratio:.3f} mean ratio={rep.mean_ratio:.3f}")
