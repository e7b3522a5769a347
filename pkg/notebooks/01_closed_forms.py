# %% [markdown]
# # Closed forms of the square-root process
#
# Derived constants, the drift, eta and the two explicit densities, each
# checked against a direct numerical computation.

# %%
import numpy as np
from scipy import integrate

from affine_bernstein import ModelParams, derive
from affine_bernstein.analytics import EQUATIONS, pde_residual
from affine_bernstein.model import (action_s, bernstein_drift, density_delta1, density_delta3,
                                    eta)

# %%
for p in (ModelParams(2, 0, 1.5, 1, 0), ModelParams(1, 0, 0.25, 0, 1), ModelParams(1, 0, 0.5, 0, 1)):
    dp = derive(p)
    print(f"phi={p.phi:<5} delta={dp.delta:g}  C={dp.big_c:+.6f}  D={dp.big_d:.4f}  theta={dp.theta:g}")

# %% [markdown]
# C vanishes exactly at delta 1 and 3. At delta 1 the drift is linear, so z
# is an Ornstein-Uhlenbeck process until it first reaches 0.

# %%
dp1 = derive(ModelParams.from_delta(2.0, 1.0, 1.0, 1.0))
q = np.linspace(0.1, 3, 5)
print("drift at delta 1:", bernstein_drift(dp1, q), " -lambda q / 2:", -0.5 * q)

# %%
# S = -theta^2 log eta holds to rounding
dp = derive(ModelParams.from_delta(1.5, 0.8, 2.4, 1.0))
t, q = np.meshgrid(np.linspace(0, 2, 20), np.linspace(0.2, 3, 20))
print("max |exp(-S/theta^2) - eta|:", np.max(np.abs(np.exp(-action_s(dp, t, q) / dp.theta ** 2) - eta(dp, t, q))))

# %% [markdown]
# Densities integrate to one, and each closed form solves its equation to
# finite-difference accuracy.

# %%
dp3 = derive(ModelParams.from_delta(2.0, 1.0, 3.0, 0.0))
print("mass delta=1:", integrate.quad(lambda x: density_delta1(dp1, 1.0, x), -np.inf, np.inf)[0])
print("mass delta=3:", integrate.quad(lambda x: density_delta3(dp3, 1.0, x), 0, np.inf)[0])
for dp in (dp1, dp3):
    for eq in EQUATIONS:
        r = pde_residual(eq, dp)
        print(f"delta={dp.delta:g} {eq:<17} rel residual {r.max_rel_residual:.1e}  passed={r.passed}")
