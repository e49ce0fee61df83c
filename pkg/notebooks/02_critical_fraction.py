# coding: utf-8

# # Where the balance breaks
#
# Removing the largest s-fraction of |XY| and subtracting it from the rest gives a
# balance H(rho, s). Minimizing over rho (with a sqrt(1 + rho^2) weight) gives H*(s).
# The recoverable outlier fraction is the zero of H*.

# In[1]:

import numpy as np

from robust_phaselift import balance_h, compute_sstar, hstar


# H is positive for small s and negative once too much mass is flipped.

# In[2]:

for s in (0.0, 0.05, 0.1, 0.15, 0.3):
    print(s, [round(balance_h(r, s), 4) for r in (0.0, 0.5, 0.795, 1.0)])


# H* runs from 2 sqrt(2)/pi at s = 0 down to -1 at s = 1.

# In[3]:

print(hstar(0.0), 2 * np.sqrt(2) / np.pi, hstar(1.0))


# The full computation (about 15 seconds). Two routes to the critical fraction
# must agree: the minimum over rho of the balanced ratio and the root of H*.

# In[4]:

sol = compute_sstar()
print("s* =", sol.s_star, "at rho =", sol.rho_star)
print("root of H* =", sol.hstar_root)
print("slope of H* at the root =", sol.slope_at_root)
