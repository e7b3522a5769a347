"""Model parameters and closed-form functions of the affine short-rate model.

The short rate follows ``dr = sqrt(alpha*r + beta) dw + (phi - lambda*r) dt``.
With ``X = alpha*r + beta`` and ``z = sqrt(X)``, the square-root process ``z``
is a Bernstein diffusion for ``theta = alpha/2`` and the potential
``V(q) = C/q**2 + D*q**2``.  Every scalar formula needed to check that
statement lives here: the drift, the forward solution ``eta``, the action
``S = -theta**2 * log(eta)``, and for ``delta`` in {1, 3} the explicit
densities and the adjoint solutions ``eta_star``.

All functions accept scalars or numpy arrays and return the same kind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

ZERO_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when model parameters violate a hypothesis of the model."""


class DomainError(ValueError):
    """Raised when a closed form is evaluated outside its domain."""


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    phi: float
    lam: float
    r0: float

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "phi": self.phi,
                "lambda": self.lam, "r0": self.r0}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(alpha=float(d["alpha"]), beta=float(d["beta"]), phi=float(d["phi"]),
                   lam=float(d["lambda"]), r0=float(d["r0"]))

    @classmethod
    def from_delta(cls, alpha: float, lam: float, delta: float, x0: float = 0.0) -> "ModelParams":
        """CIR parametrization (beta = 0) hitting a target Bessel dimension and X0."""
        return cls(alpha=alpha, beta=0.0, phi=alpha * delta / 4.0, lam=lam, r0=x0 / alpha)


@dataclass(frozen=True)
class Potential:
    """``V(q) = c/q**2 + d*q**2``."""
    c: float
    d: float

    def __call__(self, q):
        return potential_eval(self, q)


@dataclass(frozen=True)
class DerivedParams:
    alpha: float
    lam: float
    phi_tilde: float
    delta: float
    big_c: float
    big_d: float
    theta: float
    x0: float
    z0: float

    @property
    def potential(self) -> Potential:
        return Potential(self.big_c, self.big_d)

    @property
    def c_is_zero(self) -> bool:
        return abs(self.big_c) <= ZERO_TOL * max(1.0, self.alpha ** 4)

    def to_dict(self) -> dict:
        return {"phi_tilde": self.phi_tilde, "delta": self.delta, "C": self.big_c,
                "D": self.big_d, "theta": self.theta, "x0": self.x0, "z0": self.z0}


def _c_from_phi_tilde(alpha: float, phi_tilde: float) -> float:
    return alpha ** 2 / 8.0 * (phi_tilde - alpha / 4.0) * (phi_tilde - 3.0 * alpha / 4.0)


def _c_from_delta(alpha: float, delta: float) -> float:
    return alpha ** 4 / 128.0 * (delta - 1.0) * (delta - 3.0)


def derive(params: ModelParams) -> DerivedParams:
    """Compute phi_tilde, delta, C, D, theta, X0 and z0 from raw parameters."""
    alpha, beta, phi, lam, r0 = params.alpha, params.beta, params.phi, params.lam, params.r0
    for name, v in params.to_dict().items():
        if not math.isfinite(v):
            raise ParameterError(f"{name} must be finite, got {v}")
    if alpha <= 0:
        raise ParameterError(f"Assuming α>0: alpha must be positive, got {alpha}")
    x0 = alpha * r0 + beta
    if x0 < 0:
        raise ParameterError(
            f"positivity requires α r0 + β ≥ 0 (strong-solution hypothesis), got {x0}")
    phi_tilde = phi + lam * beta / alpha
    if phi_tilde < 0:
        raise ParameterError(f"assume that φ̃ ≥ 0: phi + lambda*beta/alpha = {phi_tilde}")
    delta = 4.0 * phi_tilde / alpha
    big_c = _c_from_delta(alpha, delta)
    alt = _c_from_phi_tilde(alpha, phi_tilde)
    scale = max(abs(big_c), abs(alt), ZERO_TOL * alpha ** 4, 1e-300)
    if abs(big_c - alt) > 1e-12 * scale:
        raise ArithmeticError(f"inconsistent C forms: {big_c} vs {alt}")
    # snap C to exactly 0 on the delta in {1, 3} lines so downstream case splits agree
    if abs(big_c) <= ZERO_TOL * max(1.0, alpha ** 4):
        big_c = 0.0
    return DerivedParams(alpha=alpha, lam=lam, phi_tilde=phi_tilde, delta=delta,
                         big_c=big_c, big_d=lam * lam / 8.0, theta=alpha / 2.0,
                         x0=x0, z0=math.sqrt(x0))


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _require_positive_q(q, what):
    q = np.asarray(q, dtype=float)
    if np.any(~(q > 0)):
        raise DomainError(f"{what} requires q > 0")
    return q


def potential_eval(pot: Potential, q):
    q = np.asarray(q, dtype=float)
    if np.any(q == 0):
        raise DomainError("potential is singular at q = 0")
    return _out(pot.c / q ** 2 + pot.d * q ** 2)


def bernstein_drift(dp: DerivedParams, q):
    """Drift ``(alpha**2*delta - alpha**2 - 4*lambda*q**2) / (8q)`` of the z-diffusion."""
    q = _require_positive_q(q, "bernstein_drift")
    a2 = dp.alpha ** 2
    return _out(-0.5 * dp.lam * q + a2 * (dp.delta - 1.0) / (8.0 * q))


def log_eta(dp: DerivedParams, t, q):
    t = np.asarray(t, dtype=float)
    q = np.asarray(q, dtype=float)
    power = 0.5 * (dp.delta - 1.0)
    if power == 0.0:
        log_q_term = np.zeros_like(q)
    else:
        q = _require_positive_q(q, "eta with delta != 1")
        log_q_term = power * np.log(q)
    return dp.lam * dp.delta * t / 4.0 - dp.lam * q ** 2 / dp.alpha ** 2 + log_q_term


def eta(dp: DerivedParams, t, q):
    """Positive solution ``exp(lambda*delta*t/4 - lambda*q**2/alpha**2) * q**((delta-1)/2)``."""
    return _out(np.exp(log_eta(dp, t, q)))


def action_s(dp: DerivedParams, t, q):
    """``S = -theta**2 log(eta)``, the solution of the HJB equation."""
    q = _require_positive_q(q, "action_s")
    t = np.asarray(t, dtype=float)
    a2 = dp.alpha ** 2
    return _out(-a2 * dp.lam * dp.delta * t / 16.0 + dp.lam * q ** 2 / 4.0
                - a2 * (dp.delta - 1.0) / 8.0 * np.log(q))


def _check_delta(dp: DerivedParams, target: float):
    if abs(dp.delta - target) > 1e-9:
        raise ValueError(f"closed form requires delta = {target:g}, got {dp.delta}")


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("closed-form density requires t > 0")
    return t


def _log_sinh(x):
    # x > 0
    return x + np.log1p(-np.exp(-2.0 * x)) - math.log(2.0)


def ou_mean(dp: DerivedParams, t):
    return _out(np.exp(-0.5 * dp.lam * np.asarray(t, dtype=float)) * dp.z0)


def ou_variance(dp: DerivedParams, t):
    """``alpha**2 (1 - exp(-lambda t)) / (4 lambda)``, or ``alpha**2 t / 4`` at lambda = 0."""
    t = np.asarray(t, dtype=float)
    if dp.lam == 0:
        return _out(dp.alpha ** 2 * t / 4.0)
    return _out(dp.alpha ** 2 * -np.expm1(-dp.lam * t) / (4.0 * dp.lam))


def density_delta1(dp: DerivedParams, t, q):
    """Normal density of the Ornstein-Uhlenbeck process y(t) (delta = 1)."""
    _check_delta(dp, 1.0)
    t = _check_t(t)
    q = np.asarray(q, dtype=float)
    m = np.asarray(ou_mean(dp, t))
    v = np.asarray(ou_variance(dp, t))
    return _out(np.exp(-0.5 * (q - m) ** 2 / v) / np.sqrt(2.0 * np.pi * v))


def cdf_delta1(dp: DerivedParams, t, q):
    _check_delta(dp, 1.0)
    t = _check_t(t)
    q = np.asarray(q, dtype=float)
    m = np.asarray(ou_mean(dp, t))
    v = np.asarray(ou_variance(dp, t))
    return _out(0.5 * (1.0 + erf((q - m) / np.sqrt(2.0 * v))))


def eta_star_delta1(dp: DerivedParams, t, q):
    """Adjoint solution ``rho_t / eta`` for delta = 1."""
    _check_delta(dp, 1.0)
    if dp.lam <= 0:
        raise DomainError("eta_star for delta = 1 requires lambda > 0")
    t = _check_t(t)
    q = np.asarray(q, dtype=float)
    lam, a2, z0 = dp.lam, dp.alpha ** 2, dp.z0
    log_pref = -math.log(dp.alpha) + 0.5 * (math.log(lam) - math.log(math.pi) - _log_sinh(0.5 * lam * t))
    e1 = np.exp(-lam * t)
    num = -lam * q ** 2 - lam * q ** 2 * e1 + 4.0 * lam * q * z0 * np.exp(-0.5 * lam * t) - 2.0 * lam * z0 ** 2 * e1
    return _out(np.exp(log_pref + num / (a2 * -np.expm1(-lam * t))))


def _delta3_scale(dp: DerivedParams, t):
    # lambda / (1 - exp(-lambda t)), positive for any lambda != 0
    return dp.lam / -np.expm1(-dp.lam * t)


def _check_delta3(dp: DerivedParams):
    _check_delta(dp, 3.0)
    if dp.lam == 0:
        raise DomainError("delta = 3 closed forms require lambda != 0")
    if dp.x0 != 0:
        raise ValueError("delta = 3 closed forms require X0 = 0")


def density_delta3(dp: DerivedParams, t, q):
    """Density of z(t) for delta = 3 started at X0 = 0 (zero for q < 0)."""
    _check_delta3(dp)
    t = _check_t(t)
    q = np.asarray(q, dtype=float)
    k = _delta3_scale(dp, t)
    a2 = dp.alpha ** 2
    log_rho = (math.log(16.0) - 0.5 * math.log(2.0 * math.pi) - 3.0 * math.log(dp.alpha)
               + 1.5 * np.log(k) - 2.0 * k * q ** 2 / a2)
    return _out(np.where(q >= 0, q ** 2 * np.exp(log_rho), 0.0))


def delta3_sigma(dp: DerivedParams, t):
    """Scale of the Maxwell law of z(t): ``sigma**2 = alpha**2 (1 - e^{-lambda t}) / (4 lambda)``."""
    return _out(np.sqrt(dp.alpha ** 2 / (4.0 * _delta3_scale(dp, np.asarray(t, dtype=float)))))


def cdf_delta3(dp: DerivedParams, t, q):
    _check_delta3(dp)
    t = _check_t(t)
    q = np.maximum(np.asarray(q, dtype=float), 0.0)
    x = q / np.asarray(delta3_sigma(dp, t))
    return _out(erf(x / math.sqrt(2.0)) - math.sqrt(2.0 / math.pi) * x * np.exp(-0.5 * x * x))


def eta_star_delta3(dp: DerivedParams, t, q):
    """Adjoint solution ``rho_t / eta`` for delta = 3, X0 = 0."""
    _check_delta3(dp)
    t = _check_t(t)
    q = _require_positive_q(q, "eta_star_delta3")
    lam, a2 = dp.lam, dp.alpha ** 2
    k = _delta3_scale(dp, t)
    log_v = (math.log(16.0) - 3.0 * math.log(dp.alpha) - 0.5 * math.log(2.0 * math.pi)
             + 1.5 * np.log(k) - 0.75 * lam * t - lam * q ** 2 / (a2 * np.tanh(0.5 * lam * t)))
    return _out(q * np.exp(log_v))
