# %% [markdown]
# # Is s(t) = exp(-lambda t / 2) / z(t) a martingale?
#
# For delta = 3, z(t) exp(lambda t / 2) is a 3-d Bessel process R run on the
# clock tau(t), so s(t) = 1 / R(tau(t)). Its expectation is known exactly and
# is not constant.

# %%
import numpy as np

from affine_bernstein import ModelParams
from affine_bernstein.analytics import s_expectation_study
from affine_bernstein.sde import Scheme, SimConfig

# %%
p = ModelParams.from_delta(2.0, 1.0, 3.0, 1.0)
rep = s_expectation_study(p, SimConfig(n_paths=20_000, t_max=2.0, dt=0.01, scheme=Scheme.EXACT))
for t, m, se, ex in zip(rep.checkpoints, rep.mean, rep.se, rep.bessel3_expectation):
    print(f"t={t:<4g} E[s] = {m:.4f} +- {se:.4f}   exact {ex:.4f}")
print(rep.statement)
