"""Named validation suites used by ``check`` and by the acceptance tests.

Each suite returns ``(report, passed, gating)``; a non-gating suite never
fails a run.
"""
from __future__ import annotations

import numpy as np

from . import analytics, isovector
from .bessel import BesqSpec, besq_scaling_check
from .config import Options
from .model import ModelParams, Potential, derive
from .sde import Scheme, SimConfig, hitting_stats, simulate_ou, simulate_x, simulate_z
from .stats import ks_two_sample

PDE_SETS = ((2.0, 1.0, 1.0), (2.0, 1.0, 3.0), (1.0, 0.5, 1.0), (1.0, 0.5, 3.0))


def _x0_for(delta):
    # eta_star for delta = 3 is the X0 = 0 law; delta = 1 uses X0 = 1
    return 0.0 if delta == 3 else 1.0


def suite_pde(opts: Options, seed: int, workers=None):
    grid = analytics.GridSpec(h=opts.fd_step)
    reports = []
    for alpha, lam, delta in PDE_SETS:
        dp = derive(ModelParams.from_delta(alpha, lam, delta, _x0_for(delta)))
        for eq in analytics.EQUATIONS:
            reports.append(analytics.pde_residual(eq, dp, grid, opts.pde_tolerance).to_dict())
    return {"reports": reports}, all(r["passed"] for r in reports), True


def timechange_samples(alpha, lam, delta, x0, n, euler_dt, seed, workers=None):
    """X_1 under Euler and under the exact time change, unabsorbed."""
    p = ModelParams.from_delta(alpha, lam, delta, x0)
    common = dict(n_paths=n, t_max=1.0, seed=seed, absorb=False, record_every=10 ** 9)
    eu = simulate_x(p, SimConfig(dt=euler_dt, scheme=Scheme.EULER, **common), workers)
    ex = simulate_x(p, SimConfig(dt=1.0, scheme=Scheme.EXACT, **{**common, "seed": (seed + 1) % 2 ** 64}), workers)
    return eu.at(1.0), ex.at(1.0)


def suite_timechange(opts: Options, seed: int, workers=None):
    reports = []
    for delta in (1.0, 3.0):
        for x0 in (0.0, 1.0):
            a, b = timechange_samples(2.0, 1.0, delta, x0, opts.check_n_paths, opts.euler_dt, seed, workers)
            r = ks_two_sample(a, b, opts.ks_threshold).to_dict()
            r.update(alpha=2.0, **{"lambda": 1.0}, delta=delta, x0=x0)
            reports.append(r)
    return {"reports": reports}, all(r["passed"] for r in reports), True


def density_samples(delta, n, seed, t=1.0, workers=None):
    if delta == 3:
        p = ModelParams.from_delta(2.0, 1.0, 3.0, 0.0)
        cfg = SimConfig(n_paths=n, t_max=t, dt=t, seed=seed, scheme=Scheme.EXACT)
        return derive(p), simulate_z(p, cfg, workers).at(t)
    p = ModelParams.from_delta(2.0, 1.0, 1.0, 1.0)
    dp = derive(p)
    cfg = SimConfig(n_paths=n, t_max=t, dt=t, seed=seed)
    return dp, simulate_ou(dp, dp.z0, cfg, workers).at(t)


def suite_density(opts: Options, seed: int, workers=None):
    delta = 3.0 if opts.delta is None else float(opts.delta)
    if delta not in (1.0, 3.0):
        raise ValueError("closed-form densities exist only for delta in {1, 3}")
    dp, s = density_samples(delta, opts.check_n_paths, seed, opts.t, workers)
    ks = analytics.density_ks(dp, s, opts.t, opts.ks_threshold)
    chi = analytics.density_chi2(dp, s, opts.t, opts.chi2_bins, opts.chi2_p_threshold)
    return ({"delta": delta, "t": opts.t, "ks_one_sample": ks.to_dict(), "chi_square_gof": chi.to_dict()},
            ks.passed and chi.passed, True)


def hitting_fraction(delta, x0, n, seed, dt=1e-3, t_max=10.0, scheme=Scheme.EULER, workers=None):
    p = ModelParams.from_delta(2.0, 1.0, delta, x0)
    cfg = SimConfig(n_paths=n, t_max=t_max, dt=dt, seed=seed, scheme=scheme, record_every=10 ** 9)
    return hitting_stats(simulate_x(p, cfg, workers))


def suite_hitting(opts: Options, seed: int, workers=None):
    n, dt = opts.hitting_n_paths, opts.euler_dt
    h3 = hitting_fraction(3.0, 1.0, n, seed, dt, workers=workers)
    h1 = hitting_fraction(1.0, 0.25, n, seed, dt, workers=workers)
    h05 = hitting_fraction(0.5, 0.25, n, seed, dt, workers=workers)
    h15 = hitting_fraction(1.5, 0.25, n, seed, dt, workers=workers)
    checks = {
        "delta3_never_hits": h3.fraction_hit == 0.0,
        "delta1_hits": h1.fraction_hit > 0.99,
        "monotone_in_delta": h05.fraction_hit >= h15.fraction_hit,
    }
    report = {"delta=3,X0=1": h3.to_dict(), "delta=1,X0=0.25": h1.to_dict(),
              "delta=0.5,X0=0.25": h05.to_dict(), "delta=1.5,X0=0.25": h15.to_dict(),
              "checks": checks}
    return report, all(checks.values()), True


def lattice(n=21):
    """``n`` evenly spaced values on [-1, 1]; the midpoint is exactly 0 for odd n."""
    half = (n - 1) // 2
    return [k / half for k in range(-half, half + 1)] if n % 2 else list(np.linspace(-1.0, 1.0, n))


def suite_isovector(opts: Options, seed: int, workers=None):
    cs = lattice()
    ds = lattice()
    table = isovector.dimension_table(cs, ds)
    expected = np.broadcast_to(np.where(np.array(cs)[:, None] == 0.0, 6, 4), table.shape)
    c_line = [isovector.classify(Potential(0.0, d)).dimension for d in ds]
    lattice_ok = bool(np.array_equal(table, expected)) and all(v == 6 for v in c_line)

    rng = np.random.default_rng(seed)
    tg, qg = np.linspace(0.0, 2.0, 41), np.linspace(0.5, 3.0, 26)
    aux = {}
    for name, pot in (("1a", Potential(0.5, 0.25)), ("1b", Potential(0.5, 0.0)),
                      ("1c", Potential(0.5, -0.25)), ("2", Potential(0.0, 0.25))):
        worst = 0.0
        ok = True
        for _ in range(50):
            theta = rng.uniform(0.1, 2.0)
            case = isovector.classify(pot)
            sol = isovector.solve_auxiliary(pot, theta, rng.uniform(-1, 1, case.dimension))
            r = isovector.auxiliary_residual(sol, pot, theta, tg, qg)
            worst = max(worst, r.max_abs_residual)
            ok &= r.passed
        aux[name] = {"max_abs_residual": worst, "passed": bool(ok)}
    models = {
        "alpha=2,phi=1.5,lambda=1": isovector.model_isovector_dimension(ModelParams(2, 0, 1.5, 1, 0)),
        "alpha=1,phi=0.25,lambda=0": isovector.model_isovector_dimension(ModelParams(1, 0, 0.25, 0, 1)),
        "alpha=1,phi=0.5,lambda=1": isovector.model_isovector_dimension(ModelParams(1, 0, 0.5, 1, 1)),
    }
    models_ok = list(models.values()) == [6, 6, 4]
    report = {"c_values": cs, "d_values": ds, "dimension_table": table.tolist(),
              "c_zero_line": c_line, "lattice_matches_classification": lattice_ok,
              "auxiliary": aux, "model_dimensions": models}
    return report, lattice_ok and models_ok and all(a["passed"] for a in aux.values()), True


def suite_ou_moments(opts: Options, seed: int, workers=None):
    dp = derive(ModelParams.from_delta(2.0, 1.0, 1.0, 1.0))
    cfg = SimConfig(n_paths=opts.check_n_paths, t_max=1.0, dt=0.5, seed=seed)
    ps = simulate_ou(dp, dp.z0, cfg, workers)
    reports = [analytics.moment_check_ou(ps, dp, t).to_dict() for t in (0.0, 0.5, 1.0)]
    return {"reports": reports}, all(r["passed"] for r in reports), True


def suite_s_study(opts: Options, seed: int, workers=None):
    p = ModelParams.from_delta(2.0, 1.0, 3.0, 1.0)
    cfg = SimConfig(n_paths=opts.check_n_paths, t_max=max(opts.checkpoints), dt=0.01, seed=seed,
                    scheme=Scheme.EXACT)
    rep = analytics.s_expectation_study(p, cfg, opts.checkpoints, workers=workers)
    return rep.to_dict(), True, False


def suite_scaling(opts: Options, seed: int, workers=None):
    cases = ((1.0, 1.0, 1.0), (3.0, 0.0, 4.0), (1.7, 2.0, 0.5))
    reports = [besq_scaling_check(BesqSpec(d, y0), c, 1.0, opts.check_n_paths, (seed + i) % 2 ** 64,
                                  opts.ks_threshold).to_dict()
               for i, (d, y0, c) in enumerate(cases)]
    return {"reports": reports}, all(r["ks"]["passed"] for r in reports), True


SUITES = {
    "pde": suite_pde,
    "timechange": suite_timechange,
    "density": suite_density,
    "hitting": suite_hitting,
    "isovector": suite_isovector,
    "ou-moments": suite_ou_moments,
    "s-study": suite_s_study,
    "scaling": suite_scaling,
}


def run_suite(name: str, opts: Options, seed: int, workers=None):
    if name not in SUITES:
        raise KeyError(f"unknown check suite {name!r}; choose from {', '.join(SUITES)}")
    report, passed, gating = SUITES[name](opts, seed, workers)
    return {"suite": name, "gating": gating, "passed": bool(passed), "report": report}
