# coding: utf-8

# # The absolute product of correlated Gaussians
#
# Every measurement residual in the tangent space looks like |XY| with X, Y standard
# normal and correlation rho. Here we look at its density, quantiles and mean.

# In[1]:

import math

import numpy as np

from robust_phaselift import cdf_abs, mean_abs, pdf_abs, quantile_abs
from robust_phaselift.sensing import make_rng


# The density has a log singularity at zero and an exponential tail whose rate
# depends on rho. At rho = 1 it reduces to a chi-square with one degree of freedom.

# In[2]:

z = np.array([0.01, 0.1, 0.5, 1.0, 2.0, 5.0])
for rho in (0.0, 0.5, 0.795, 1.0):
    print(rho, np.round(pdf_abs(rho, z), 5))


# The mean has a closed form, 2/pi (sqrt(1 - rho^2) + rho asin(rho)).

# In[3]:

for rho in (0.0, 0.5, 1.0):
    closed = 2 / math.pi * (math.sqrt(1 - rho * rho) + rho * math.asin(rho))
    print(rho, mean_abs(rho), closed)


# Compare the cdf with a simulation and invert it.

# In[4]:

rho = 0.795
rng = make_rng(0, 0)
x = rng.standard_normal(200_000)
y = rho * x + math.sqrt(1 - rho * rho) * rng.standard_normal(200_000)
sample = np.abs(x * y)
for t in (0.2, 1.0, 3.0):
    print(t, cdf_abs(rho, t), np.mean(sample <= t))
print("median", quantile_abs(rho, 0.5), np.median(sample))
