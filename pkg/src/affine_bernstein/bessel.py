"""Squared Bessel processes: exact transitions and the time change onto X.

``X_t = exp(-lambda t) * Y(tau(t))`` with ``Y`` a BESQ^delta started at X0 and
``tau(t) = alpha**2 (exp(lambda t) - 1) / (4 lambda)``.  Sampling ``Y`` exactly
on the time-changed grid gives an Euler-free route to the law of ``X``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ive

from .model import DerivedParams, DomainError
from .stats import KS_THRESHOLD, DistTestReport, ks_two_sample


@dataclass(frozen=True)
class BesqSpec:
    delta: float
    y0: float

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError(f"BESQ dimension must be >= 0, got {self.delta}")
        if not self.y0 >= 0:
            raise ValueError(f"BESQ initial value must be >= 0, got {self.y0}")


def time_change(dp: DerivedParams, t):
    """Deterministic clock ``tau(t)``; ``alpha**2 t / 4`` when lambda = 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time_change requires t >= 0")
    a2 = dp.alpha ** 2
    if dp.lam == 0:
        out = a2 * t / 4.0
    else:
        out = a2 * np.expm1(dp.lam * t) / (4.0 * dp.lam)
    return float(out) if out.ndim == 0 else out


def besq_step(delta: float, y, h: float, rng: np.random.Generator) -> np.ndarray:
    """Exact BESQ^delta transition over time ``h`` from each entry of ``y``.

    ``Y_h = 2h * Gamma(delta/2 + N)`` with ``N ~ Poisson(y / (2h))``; a zero
    shape (delta = 0, N = 0) yields the atom at 0.
    """
    y = np.asarray(y, dtype=float)
    n = rng.poisson(y / (2.0 * h))
    return 2.0 * h * rng.standard_gamma(0.5 * delta + n)


def besq_transition_sample(spec: BesqSpec, dt_internal: float, rng: np.random.Generator,
                           size: int | None = None):
    if not dt_internal > 0:
        raise ValueError("dt_internal must be positive")
    y = np.full(() if size is None else size, spec.y0)
    out = besq_step(spec.delta, y, dt_internal, rng)
    return float(out) if size is None else out


def besq_no_hit_probability(delta: float, x, y, h):
    """P(BESQ^delta bridge from x to y over time h avoids 0).

    For 0 < delta < 2 the killed semigroup is the h-transform of BESQ^(4-delta),
    which gives ``I_mu(u) / I_-mu(u)`` with ``mu = 1 - delta/2`` and
    ``u = sqrt(x y) / h``; delta = 1 reduces to ``tanh(u)``.  For delta >= 2
    the origin is polar and the probability is 1 whatever the endpoints (a
    zero endpoint can then only be a discretization artifact).  Otherwise an
    endpoint at 0 counts as a hit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if delta >= 2:
        return np.ones(np.broadcast(x, y).shape)
    if delta == 0:
        # BESQ^0 is absorbed at 0, so a positive endpoint rules out a hit
        return np.where(y > 0, 1.0, 0.0)
    u = np.sqrt(np.maximum(x * y, 0.0)) / h
    if delta == 1:
        return np.tanh(u)
    mu = 1.0 - 0.5 * delta
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        p = ive(mu, u) / ive(-mu, u)
    p = np.where(u > 0, p, 0.0)
    return np.clip(np.nan_to_num(p, nan=1.0), 0.0, 1.0)


@dataclass(frozen=True)
class ScalingReport:
    delta: float
    y0: float
    c: float
    t: float
    ks: DistTestReport

    @property
    def passed(self) -> bool:
        return self.ks.passed

    def to_dict(self) -> dict:
        return {"delta": self.delta, "y0": self.y0, "c": self.c, "t": self.t, "ks": self.ks.to_dict()}


def besq_scaling_check(spec: BesqSpec, c: float, t: float, n: int, seed: int = 0,
                       threshold: float = KS_THRESHOLD) -> ScalingReport:
    """Compare ``c * Y(t) | Y0 = y0`` with ``Y(c t) | Y0 = c y0`` by two-sample KS."""
    if n < 10_000:
        raise ValueError("scaling check needs n >= 10^4")
    if not c > 0:
        raise ValueError("scale factor must be positive")
    ss = np.random.SeedSequence(seed)
    ra, rb = (np.random.default_rng(s) for s in ss.spawn(2))
    a = c * besq_step(spec.delta, np.full(n, spec.y0), t, ra)
    b = besq_step(spec.delta, np.full(n, c * spec.y0), c * t, rb)
    return ScalingReport(spec.delta, spec.y0, c, t, ks_two_sample(a, b, threshold))


def sample_x_exact(dp: DerivedParams, t_grid, rng: np.random.Generator,
                   n_paths: int | None = None) -> np.ndarray:
    """Sample X on ``t_grid`` through exact BESQ transitions at the clock ``tau``.

    Returns shape ``(len(t_grid),)`` or ``(n_paths, len(t_grid))``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be a non-empty, strictly increasing grid starting >= 0")
    shape = () if n_paths is None else (n_paths,)
    taus = np.asarray(time_change(dp, t)).reshape(-1)
    out = np.empty(shape + (t.size,))
    y = np.full(shape, dp.x0)
    prev = 0.0
    for i, tau in enumerate(taus):
        if tau > prev:
            y = besq_step(dp.delta, y, tau - prev, rng)
        out[..., i] = np.exp(-dp.lam * t[i]) * y
        prev = tau
    return out
