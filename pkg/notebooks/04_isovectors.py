# %% [markdown]
# # Isovector dimension
#
# The symmetry algebra of the HJB equation with potential C/q^2 + D q^2 has
# dimension 6 when C = 0 and 4 otherwise. For the rate model C = 0 exactly
# when delta is 1 or 3.

# %%
import numpy as np

from affine_bernstein import ModelParams
from affine_bernstein.isovector import (auxiliary_residual, classify, dimension_table,
                                        model_isovector_dimension, solve_auxiliary)
from affine_bernstein.model import Potential

# %%
vals = [k / 2 for k in range(-2, 3)]
print("rows C, columns D:", vals)
print(dimension_table(vals, vals))

# %%
for delta in (0.5, 1.0, 2.0, 3.0, 4.0):
    print(f"delta={delta:g}: dimension {model_isovector_dimension(ModelParams.from_delta(2.0, 1.0, delta, 1.0))}")

# %%
# one random solution of the auxiliary system per case, with its residual
rng = np.random.default_rng(0)
for pot in (Potential(0.5, 0.25), Potential(0.5, 0.0), Potential(0.5, -0.25), Potential(0.0, 0.25)):
    case = classify(pot)
    sol = solve_auxiliary(pot, 0.8, rng.uniform(-1, 1, case.dimension))
    r = auxiliary_residual(sol, pot, 0.8, np.linspace(0, 2, 41), np.linspace(0.5, 3, 26))
    print(f"{case.tag.value:<18} residual {r.max_abs_residual:.1e}")
