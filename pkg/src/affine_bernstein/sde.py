"""Monte Carlo engine for X, z = sqrt(X), the delta = 1 OU process and s(t).

Paths are split into fixed blocks of ``BLOCK_SIZE``.  Block ``b`` draws from
its own stream ``SeedSequence(seed, spawn_key=(b,))``, so output depends only
on ``(params, config)`` and never on how many worker threads run the blocks.

Zero hitting is monitored on the simulation grid with a bridge correction:
between two grid points the probability that the underlying BESQ^delta
(for X) or Brownian motion (for the OU process) touched 0 is computed from the
endpoints in the time-changed clock, and a uniform draw decides.  Plain
"value <= 0" monitoring misses hits for delta < 2 and, on Euler grids,
reports spurious hits for delta >= 2.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .bessel import besq_no_hit_probability, besq_step, time_change
from .model import DerivedParams, ModelParams, derive

BLOCK_SIZE = 8192
GRID_RTOL = 1e-9
BRIDGE_CUTOFF = 20.0


class Scheme(str, Enum):
    EULER = "euler_full_truncation"
    EXACT = "exact_besq_timechange"


@dataclass(frozen=True)
class SimConfig:
    """Simulation grid, size and seed.

    ``record_every`` thins the stored grid (hitting is still monitored at every
    step); ``record_times`` adds specific grid times to the stored set.
    """
    n_paths: int
    t_max: float
    dt: float
    seed: int = 0
    scheme: Scheme = Scheme.EULER
    absorb: bool = True
    record_every: int = 1
    record_times: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "record_times", tuple(float(t) for t in self.record_times))
        if isinstance(self.n_paths, bool) or int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValueError(f"n_paths must be a positive integer, got {self.n_paths}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if not (self.dt > 0 and self.dt <= self.t_max * (1 + GRID_RTOL)):
            raise ValueError(f"dt must satisfy 0 < dt <= t_max, got {self.dt}")
        if not 0 <= int(self.seed) < 2 ** 64 or int(self.seed) != self.seed:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        grid = self.time_grid()
        for t in self.record_times:
            if np.min(np.abs(grid - t)) > GRID_RTOL * max(1.0, self.t_max):
                raise ValueError(f"record time {t} is not on the simulation grid")

    def time_grid(self) -> np.ndarray:
        n_full = int(math.floor(self.t_max / self.dt * (1 + GRID_RTOL)))
        grid = self.dt * np.arange(n_full + 1)
        if abs(grid[-1] - self.t_max) <= GRID_RTOL * self.t_max:
            grid[-1] = self.t_max
        else:
            grid = np.append(grid, self.t_max)
        return grid

    def record_indices(self) -> np.ndarray:
        grid = self.time_grid()
        idx = set(range(0, grid.size, self.record_every)) | {grid.size - 1}
        idx |= {int(np.argmin(np.abs(grid - t))) for t in self.record_times}
        return np.array(sorted(idx))

    def to_dict(self) -> dict:
        return {"n_paths": int(self.n_paths), "t_max": self.t_max, "dt": self.dt,
                "seed": int(self.seed), "scheme": self.scheme.value, "absorb": self.absorb,
                "record_every": int(self.record_every), "record_times": list(self.record_times)}

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(**{**d, "record_times": tuple(d.get("record_times", ()))})


@dataclass(frozen=True)
class PathSet:
    """Batch of trajectories on a common time grid.

    ``hit_time[i]`` is the first grid time at which a hit of 0 was detected on
    path ``i`` (NaN if none before ``t_max``).
    """
    kind: str
    times: np.ndarray
    values: np.ndarray
    hit_time: np.ndarray
    config: SimConfig
    derived: DerivedParams = field(repr=False)

    def __post_init__(self):
        for a in (self.times, self.values, self.hit_time):
            a.setflags(write=False)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def at(self, t: float) -> np.ndarray:
        """Values at a stored time (must be on the stored grid)."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > GRID_RTOL * max(1.0, self.config.t_max):
            raise ValueError(f"t = {t} is not on the stored grid")
        return self.values[:, i]

    def hit_by(self, t: float) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return self.hit_time <= t + GRID_RTOL * max(1.0, self.config.t_max)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(block,))))


def _run_blocks(cfg: SimConfig, fn, workers: int | None):
    """Run ``fn(rng, n)`` per block and stack the ``(values, hit_time)`` results."""
    sizes = [min(BLOCK_SIZE, cfg.n_paths - s) for s in range(0, cfg.n_paths, BLOCK_SIZE)]

    def task(b):
        return fn(_block_rng(cfg.seed, b), sizes[b])

    if workers is None or workers <= 1 or len(sizes) == 1:
        results = [task(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, range(len(sizes))))
    values = np.concatenate([r[0] for r in results], axis=0)
    hits = np.concatenate([r[1] for r in results])
    return values, hits


def _x_block(dp: DerivedParams, cfg: SimConfig, grid, rec, rng, n):
    scheme_exact = cfg.scheme is Scheme.EXACT
    taus = np.asarray(time_change(dp, grid))
    growth = np.exp(dp.lam * grid)  # Y = e^{lambda t} X
    monitor = dp.delta < 2
    drift_const = dp.alpha * dp.phi_tilde

    out = np.empty((n, rec.size))
    hit = np.full(n, np.nan)
    x = np.full(n, dp.x0)
    y = np.full(n, dp.x0)
    r = 0
    if rec[0] == 0:
        out[:, 0] = dp.x0
        r = 1
    for k in range(1, grid.size):
        h_tau = taus[k] - taus[k - 1]
        y_prev = y
        if scheme_exact:
            y = besq_step(dp.delta, y_prev, h_tau, rng)
            x = y / growth[k]
        else:
            h = grid[k] - grid[k - 1]
            noise = rng.standard_normal(n)
            x = x + (drift_const - dp.lam * x) * h + dp.alpha * np.sqrt(np.maximum(x, 0.0) * h) * noise
            np.maximum(x, 0.0, out=x)
            y = x * growth[k]
        if monitor:
            u = rng.random(n)
            # beyond sqrt(y_prev y)/h_tau = 20 the hit probability is below 1e-16
            cand = np.flatnonzero(np.isnan(hit) & (y_prev * y < (BRIDGE_CUTOFF * h_tau) ** 2))
            if cand.size:
                p_ok = besq_no_hit_probability(dp.delta, y_prev[cand], y[cand], h_tau)
                new = cand[u[cand] >= p_ok]
                hit[new] = grid[k]
        if cfg.absorb:
            dead = ~np.isnan(hit)
            if dead.any():
                x = np.where(dead, 0.0, x)
                y = np.where(dead, 0.0, y)
        if r < rec.size and rec[r] == k:
            out[:, r] = x
            r += 1
    return out, hit


def simulate_x(params: ModelParams, cfg: SimConfig, workers: int | None = None) -> PathSet:
    """Simulate ``dX = alpha sqrt(X) dw + (alpha phi_tilde - lambda X) dt``.

    Stored values are exact squares of their floating-point square roots, so
    ``sqrt`` of a stored X squares back to it bit for bit.
    """
    dp = derive(params)
    grid = cfg.time_grid()
    rec = cfg.record_indices()
    values, hits = _run_blocks(cfg, lambda rng, n: _x_block(dp, cfg, grid, rec, rng, n), workers)
    values = np.square(np.sqrt(values))
    return PathSet("x", grid[rec], values, hits, cfg, dp)


def simulate_z(params: ModelParams, cfg: SimConfig, workers: int | None = None) -> PathSet:
    """``z = sqrt(X)`` pathwise from :func:`simulate_x` with the same randomness."""
    xs = simulate_x(params, cfg, workers)
    return PathSet("z", xs.times.copy(), np.sqrt(xs.values), xs.hit_time.copy(), cfg, xs.derived)


def _ou_block(dp: DerivedParams, z0: float, cfg: SimConfig, grid, rec, rng, n):
    taus = np.asarray(time_change(dp, grid))
    half_growth = np.exp(0.5 * dp.lam * grid)
    out = np.empty((n, rec.size))
    hit = np.full(n, np.nan)
    y = np.full(n, float(z0))
    r = 0
    if rec[0] == 0:
        out[:, 0] = z0
        r = 1
    for k in range(1, grid.size):
        h = grid[k] - grid[k - 1]
        if dp.lam == 0:
            decay, var = 1.0, dp.alpha ** 2 * h / 4.0
        else:
            decay = math.exp(-0.5 * dp.lam * h)
            var = dp.alpha ** 2 * -math.expm1(-dp.lam * h) / (4.0 * dp.lam)
        y_prev = y
        y = decay * y_prev + math.sqrt(var) * rng.standard_normal(n)
        # z0 + w(tau) is a Brownian motion in the tau clock; bridge crossing test
        a = half_growth[k - 1] * y_prev
        b = half_growth[k] * y
        h_tau = taus[k] - taus[k - 1]
        with np.errstate(over="ignore"):
            p_hit = np.where((a > 0) & (b > 0), np.exp(-2.0 * a * b / h_tau), 1.0)
        u = rng.random(n)
        new = np.isnan(hit) & (u < p_hit)
        hit[new] = grid[k]
        if r < rec.size and rec[r] == k:
            out[:, r] = y
            r += 1
    return out, hit


def simulate_ou(dp: DerivedParams, z0: float, cfg: SimConfig, workers: int | None = None) -> PathSet:
    """Exact grid sampling of ``dy = (alpha/2) dw - (lambda/2) y dt`` from ``y(0) = z0``.

    Never absorbed; ``hit_time`` records the first detected visit to 0.
    """
    grid = cfg.time_grid()
    rec = cfg.record_indices()
    values, hits = _run_blocks(cfg, lambda rng, n: _ou_block(dp, z0, cfg, grid, rec, rng, n), workers)
    return PathSet("ou", grid[rec], values, hits, cfg, dp)


def simulate_s(params: ModelParams, cfg: SimConfig, workers: int | None = None) -> PathSet:
    """``s(t) = exp(-lambda t / 2) / z(t)`` for delta = 3 and X0 > 0."""
    dp = derive(params)
    if abs(dp.delta - 3.0) > 1e-9:
        raise ValueError(f"s(t) is defined for delta = 3, got delta = {dp.delta}")
    if dp.x0 <= 0:
        raise ValueError("s(t) requires X0 > 0 (s(0) = 1/z0 is infinite otherwise)")
    zs = simulate_z(params, cfg, workers)
    # an Euler clamp at 0 gives s = inf; the exact scheme never does
    with np.errstate(divide="ignore"):
        s = np.exp(-0.5 * dp.lam * zs.times) / zs.values
    return PathSet("s", zs.times.copy(), s, zs.hit_time.copy(), cfg, dp)


@dataclass(frozen=True)
class HittingStats:
    fraction_hit: float
    quantiles: dict  # {0.1: t, 0.5: t, 0.9: t}, empty without hitters
    n_hit: int
    n_paths: int

    def to_dict(self) -> dict:
        return {"fraction_hit": self.fraction_hit, "n_hit": self.n_hit, "n_paths": self.n_paths,
                "hit_time_quantiles": {str(k): v for k, v in self.quantiles.items()}}


def hitting_stats(paths: PathSet) -> HittingStats:
    hit = paths.hit_by(paths.config.t_max)
    times = paths.hit_time[hit]
    q = {}
    if times.size:
        q = {p: float(v) for p, v in zip((0.1, 0.5, 0.9), np.quantile(times, [0.1, 0.5, 0.9]))}
    return HittingStats(float(hit.mean()), q, int(hit.sum()), paths.n_paths)
