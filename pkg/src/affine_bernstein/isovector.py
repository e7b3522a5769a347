"""Isovector algebra of the HJB equation with potential ``C/q**2 + D*q**2``.

Pure isovectors are parametrized by functions ``T_N(t)``, ``l(t)``,
``sigma(t)`` subject to

    2 C l = 0,   l'' = 2 D l,   sigma' = (theta**2 / 4) T_N'',   T_N''' = 8 D T_N'.

For ``C != 0`` this forces ``l = 0`` and leaves a 4-dimensional solution
space; for ``C = 0`` the free ``l`` adds two more dimensions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .analytics import ResidualReport
from .model import ZERO_TOL, ModelParams, Potential, derive

AUX_TOL = 1e-8


class CaseTag(str, Enum):
    C_NONZERO_D_POS = "c_nonzero_d_pos"    # 1a
    C_NONZERO_D_ZERO = "c_nonzero_d_zero"  # 1b
    C_NONZERO_D_NEG = "c_nonzero_d_neg"    # 1c
    C_ZERO = "c_zero"                      # 2


@dataclass(frozen=True)
class IsovectorCase:
    tag: CaseTag
    dimension: int
    epsilon: float | None = None

    @property
    def n_coefficients(self) -> int:
        return self.dimension


def classify(pot: Potential, zero_tol: float = ZERO_TOL) -> IsovectorCase:
    """Case split on the signs of C and D; dimension 6 exactly when C = 0."""
    if abs(pot.c) <= zero_tol:
        return IsovectorCase(CaseTag.C_ZERO, 6)
    if pot.d > zero_tol:
        return IsovectorCase(CaseTag.C_NONZERO_D_POS, 4, math.sqrt(8.0 * pot.d))
    if pot.d < -zero_tol:
        return IsovectorCase(CaseTag.C_NONZERO_D_NEG, 4, math.sqrt(-8.0 * pot.d))
    return IsovectorCase(CaseTag.C_NONZERO_D_ZERO, 4)


def _tn_family(d: float, zero_tol: float):
    """Return ``T_N^{(k)}(t)`` for the 3-parameter family of ``T''' = 8 D T'``."""
    if d > zero_tol:
        e = math.sqrt(8.0 * d)

        def tn(c1, c2, c3, t, k):
            # T = (c1/e) e^{et} - (c2/e) e^{-et} + c3
            ep, em = np.exp(e * t), np.exp(-e * t)
            if k == 0:
                return c1 / e * ep - c2 / e * em + c3
            return c1 * e ** (k - 1) * ep + c2 * (-e) ** (k - 1) * em
    elif d < -zero_tol:
        e = math.sqrt(-8.0 * d)

        def tn(c1, c2, c3, t, k):
            # T = (c1/e) sin(et) - (c2/e) cos(et) + c3; T' = c1 cos + c2 sin
            if k == 0:
                return c1 / e * np.sin(e * t) - c2 / e * np.cos(e * t) + c3
            # d^{k-1}/dt^{k-1} of (c1 cos(et) + c2 sin(et))
            ph = (k - 1) * math.pi / 2
            return e ** (k - 1) * (c1 * np.cos(e * t + ph) + c2 * np.sin(e * t + ph))
    else:
        def tn(c1, c2, c3, t, k):
            if k == 0:
                return c1 * t ** 2 + c2 * t + c3
            if k == 1:
                return 2 * c1 * t + c2
            if k == 2:
                return 2 * c1 * np.ones_like(t)
            return np.zeros_like(t)
    return tn


def _l_family(d: float, zero_tol: float):
    """``l^{(k)}(t)`` for ``l'' = 2 D l``."""
    if d > zero_tol:
        w = math.sqrt(2.0 * d)
        return lambda l1, l2, t, k: w ** k * (l1 * np.exp(w * t) + (-1) ** k * l2 * np.exp(-w * t))
    if d < -zero_tol:
        w = math.sqrt(-2.0 * d)
        return lambda l1, l2, t, k: w ** k * (l1 * np.cos(w * t + k * math.pi / 2)
                                              + l2 * np.sin(w * t + k * math.pi / 2))

    def lin(l1, l2, t, k):
        if k == 0:
            return l1 * t + l2
        if k == 1:
            return l1 * np.ones_like(t)
        return np.zeros_like(t)
    return lin


@dataclass(frozen=True)
class IsovectorSolution:
    """Closed-form ``(T_N, l, sigma)`` for one coefficient tuple.

    ``coefficients`` is ``(C1, C2, C3, C4)``; ``l_coefficients`` is
    ``(L1, L2)`` in the C = 0 case and ``()`` otherwise.
    """
    case: IsovectorCase
    coefficients: tuple
    l_coefficients: tuple
    theta: float
    d: float
    zero_tol: float = ZERO_TOL

    def tn(self, t, order: int = 0):
        c1, c2, c3, _ = self.coefficients
        return _tn_family(self.d, self.zero_tol)(c1, c2, c3, np.asarray(t, dtype=float), order)

    def sigma(self, t, order: int = 0):
        # D != 0: sigma = (theta^2/4) T_N' + C4;  D = 0: sigma = (theta^2 C1/2) t + C4
        c4 = self.coefficients[3]
        th = self.theta ** 2 / 4.0
        if abs(self.d) <= self.zero_tol:
            c1 = self.coefficients[0]
            t = np.asarray(t, dtype=float)
            if order == 0:
                return self.theta ** 2 * c1 / 2.0 * t + c4
            if order == 1:
                return self.theta ** 2 * c1 / 2.0 * np.ones_like(t)
            return np.zeros_like(t)
        base = th * self.tn(t, order + 1)
        return base + c4 if order == 0 else base

    def l(self, t, order: int = 0):
        t = np.asarray(t, dtype=float)
        if not self.l_coefficients:
            return np.zeros_like(t)
        l1, l2 = self.l_coefficients
        return _l_family(self.d, self.zero_tol)(l1, l2, t, order)


def solve_auxiliary(pot: Potential, theta: float, coeffs, zero_tol: float = ZERO_TOL) -> IsovectorSolution:
    """Closed-form solution of the auxiliary system for the case of ``pot``.

    ``coeffs`` has 4 entries ``(C1..C4)`` when C != 0 and 6 entries
    ``(C1..C4, L1, L2)`` when C = 0.
    """
    case = classify(pot, zero_tol)
    coeffs = tuple(float(c) for c in coeffs)
    if len(coeffs) != case.dimension:
        raise ValueError(f"case {case.tag.value} takes {case.dimension} coefficients, got {len(coeffs)}")
    return IsovectorSolution(case, coeffs[:4], coeffs[4:], theta, pot.d, zero_tol)


def auxiliary_terms(sol: IsovectorSolution, pot: Potential, theta: float, t, q):
    """Terms of ``q^2 (2D T' - T'''/4) + q (-l'' + 2D l) + sigma' - (theta^2/4) T'' - 2 C l / q^3``."""
    t, q = np.meshgrid(np.asarray(t, dtype=float), np.asarray(q, dtype=float), indexing="ij")
    d, c = pot.d, pot.c
    t1, t2, t3 = sol.tn(t, 1), sol.tn(t, 2), sol.tn(t, 3)
    l0, l2 = sol.l(t), sol.l(t, 2)
    return (
        q ** 2 * 2 * d * t1, -q ** 2 * t3 / 4.0,
        -q * l2, q * 2 * d * l0,
        sol.sigma(t, 1), -theta ** 2 / 4.0 * t2,
        -2.0 * c * l0 / q ** 3,
    )


def auxiliary_residual(sol: IsovectorSolution, pot: Potential, theta: float, t_grid, q_grid,
                       tol: float = AUX_TOL) -> ResidualReport:
    """Max residual of the full auxiliary equation with analytic derivatives.

    Passes iff ``max |residual| <= tol * (1 + max |coefficient|)``.
    """
    q = np.asarray(q_grid, dtype=float)
    if np.size(t_grid) == 0 or q.size == 0:
        raise ValueError("grids must be non-empty")
    if np.any(q == 0):
        raise ValueError("q grid must exclude 0")
    terms = auxiliary_terms(sol, pot, theta, t_grid, q)
    res = sum(terms)
    max_abs = float(np.max(np.abs(res)))
    scale = max(float(np.max(np.abs(term))) for term in terms)
    max_rel = max_abs / scale if scale > 0 else max_abs
    cmax = max((abs(c) for c in sol.coefficients + sol.l_coefficients), default=0.0)
    tolerance = tol * (1.0 + cmax)
    grid = {"t_range": [float(np.min(t_grid)), float(np.max(t_grid))],
            "q_range": [float(q.min()), float(q.max())], "n_t": int(np.size(t_grid)), "n_q": int(q.size)}
    return ResidualReport("auxiliary", grid, max_abs, max_rel, tolerance, bool(max_abs <= tolerance),
                          norm="absolute", params={"C": pot.c, "D": pot.d, "theta": theta,
                                                   "case": sol.case.tag.value})


@dataclass(frozen=True)
class CanonicalIsovectorD0:
    """Generator ``M_i`` of the algebra for D = 0, C != 0 (``C_j = delta_ij``)."""
    index: int
    nt: Callable
    nq: Callable
    ns: Callable


def _generator(i: int, theta: float) -> CanonicalIsovectorD0:
    c1, c2, c3, c4 = (1.0 if j == i else 0.0 for j in range(1, 5))
    th2 = theta * theta

    def nt(t, q):
        t = np.asarray(t, dtype=float)
        return c1 * t ** 2 + c2 * t + c3 + 0 * np.asarray(q, dtype=float)

    def nq(t, q):
        return c1 * np.asarray(t, dtype=float) * q + c2 * np.asarray(q, dtype=float) / 2.0

    def ns(t, q):
        t = np.asarray(t, dtype=float)
        q = np.asarray(q, dtype=float)
        return c1 / 2.0 * (th2 * t - q ** 2) + c4

    return CanonicalIsovectorD0(i, nt, nq, ns)


def canonical_basis_d0(pot: Potential, theta: float, zero_tol: float = ZERO_TOL) -> list:
    """The four generators ``M_1..M_4`` in the case C != 0, D = 0."""
    case = classify(pot, zero_tol)
    if case.tag is not CaseTag.C_NONZERO_D_ZERO:
        raise ValueError(f"canonical basis is given for case c_nonzero_d_zero only, got {case.tag.value}")
    return [_generator(i, theta) for i in range(1, 5)]


def model_isovector_dimension(params: ModelParams) -> int:
    """Dimension of the algebra for the model's potential: 6 iff delta in {1, 3}."""
    dp = derive(params)
    scaled = Potential(0.0 if dp.c_is_zero else dp.big_c, dp.big_d)
    return classify(scaled).dimension


def dimension_table(c_values, d_values, zero_tol: float = ZERO_TOL) -> np.ndarray:
    return np.array([[classify(Potential(c, d), zero_tol).dimension for d in d_values] for c in c_values])
