"""Exponential families on a product space and their KL natural gradients.

A family is ``G(theta) = exp(theta . T - psi(theta)) * p1 (x) p2`` with
statistics T_j centered under the base product density, so the whole of
R^d is a valid parameter domain and ``psi`` is the base cumulant of
``theta . T``.  Consequences used throughout:

* psi(theta) = D(p1 (x) p2 || G(theta)) and grad psi(theta) = E_G[T];
* the model velocity is (T - E_G[T]) . thetadot, its margin the
  conditional expectation of the same, its conditional the centered
  x-section;
* for a fixed margin r1, the parameter gradients of D(r1 || G1(theta))
  and D(G1(theta) || r1) are integrals of the conditional expectation
  E_G[T - E_G[T] | X] against r1*mu1 and against log(r1/G1)*G1*mu1.

The second integrand admits a weightless reading (``log(r1/G1)*mu1``);
direct differentiation and the finite-difference oracle both select the
G1-weighted one, which is the default.  :func:`natural_gradient_flow` runs
plain Euler descent on either objective with backtracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import (
    Density,
    FiberVector,
    MismatchError,
    ProductSpace,
    StatBundleError,
    _as_float_array,
    product_density,
)
from .charts import exp_chart_inv, cumulant
from .divergence import kl
from .bayes import condition, marginal_derivative, marginalize

GRAM_EIGENVALUE_FLOOR = 1e-10
MAX_BACKTRACK_HALVINGS = 30


class IdentifiabilityError(StatBundleError):
    """The sufficient statistics are linearly dependent."""


@dataclass(frozen=True, eq=False)
class ExpFamily:
    """Base product density plus centered, independent sufficient statistics."""

    base1: Density
    base2: Density
    stats: np.ndarray  # (d, n1, n2), centered under base1 (x) base2
    base12: Density

    @property
    def dim(self) -> int:
        return self.stats.shape[0]

    @property
    def space(self) -> ProductSpace:
        return self.base12.space

    def __repr__(self) -> str:
        return f"ExpFamily(dim={self.dim}, shape={self.space.shape})"


def make_expfam(p1: Density, p2: Density, raw_stats) -> ExpFamily:
    """Center the raw statistics under p1 (x) p2 and check identifiability.

    Raises :class:`IdentifiabilityError` when the Gram matrix of the
    centered statistics under the base pairing has an eigenvalue at or
    below 1e-10.
    """
    p12 = product_density(p1, p2)
    arr = _as_float_array(np.asarray(raw_stats, dtype=float), "statistics")
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1:] != p12.space.shape:
        raise MismatchError(
            f"statistics shape {arr.shape} does not match product shape "
            f"{p12.space.shape}"
        )
    w = (p12.values * p12.space.weights).ravel()
    flat = arr.reshape(arr.shape[0], -1)
    centered = flat - (flat @ w)[:, None]
    gram = (centered * w) @ centered.T
    smallest = float(np.linalg.eigvalsh(gram)[0])
    if smallest <= GRAM_EIGENVALUE_FLOOR:
        raise IdentifiabilityError(
            f"statistics are linearly dependent: smallest Gram eigenvalue "
            f"{smallest:.3e} <= {GRAM_EIGENVALUE_FLOOR:.0e}"
        )
    stats = centered.reshape(arr.shape)
    stats.flags.writeable = False
    return ExpFamily(base1=p1, base2=p2, stats=stats, base12=p12)


def _check_theta(family: ExpFamily, theta) -> np.ndarray:
    arr = np.atleast_1d(_as_float_array(theta, "theta"))
    if arr.shape != (family.dim,):
        raise MismatchError(
            f"parameter shape {arr.shape} does not match family dimension "
            f"{family.dim}"
        )
    return arr


def _natural_statistic(family: ExpFamily, theta: np.ndarray) -> FiberVector:
    return FiberVector(
        family.base12, K.lincomb(family.stats, theta), "exponential"
    )


def psi(family: ExpFamily, theta) -> float:
    """Cumulant psi(theta) = log E_base[exp(theta . T)]; convex, psi(0) = 0.

    Equals D(p1 (x) p2 || G(theta)) because the statistics are centered.
    """
    theta = _check_theta(family, theta)
    return cumulant(family.base12, _natural_statistic(family, theta))


def density(family: ExpFamily, theta) -> Density:
    """The family member G(theta) = exp(theta . T - psi(theta)) * base."""
    theta = _check_theta(family, theta)
    return exp_chart_inv(family.base12, _natural_statistic(family, theta))


def grad_psi(family: ExpFamily, theta) -> np.ndarray:
    """grad psi(theta) = E_{G(theta)}[T], one entry per statistic."""
    theta = _check_theta(family, theta)
    g = density(family, theta)
    return K.stats_expect(family.stats, g.values * g.space.weights)


def joint_velocity(family: ExpFamily, theta, thetadot) -> FiberVector:
    """Velocity of theta -> G(theta): (T - E_{G(theta)}[T]) . thetadot."""
    theta = _check_theta(family, theta)
    thetadot = _check_theta(family, thetadot)
    g = density(family, theta)
    vals = K.lincomb(family.stats, thetadot) - float(
        thetadot @ grad_psi(family, theta)
    )
    return FiberVector(g, vals, "exponential")


def marginal_velocity(family: ExpFamily, theta, thetadot) -> FiberVector:
    """Velocity of the first margin: the marginalization derivative applied
    to the joint velocity, i.e. E_G[T - E_G[T] | X] . thetadot."""
    g = density(family, _check_theta(family, theta))
    return marginal_derivative(g, joint_velocity(family, theta, thetadot))


def conditional_velocity(family: ExpFamily, theta, thetadot, x: int) -> FiberVector:
    """Velocity of the conditional at outcome x: the centered x-section
    (T(x, .) - E[T(x, .) | X = x]) . thetadot."""
    theta = _check_theta(family, theta)
    thetadot = _check_theta(family, thetadot)
    g = density(family, theta)
    cond = condition(g, x)
    section = family.stats[:, int(x), :]
    mu2 = cond.space.weights
    means = (section * (cond.values * mu2)).sum(axis=1)
    vals = thetadot @ (section - means[:, None])
    return FiberVector(cond, vals, "exponential")


def _centered_conditional_stats(family: ExpFamily, g: Density) -> np.ndarray:
    """E_G[T_j - E_G[T_j] | X = x] as a (d, n1) table."""
    raw = K.cond_expect_stats(family.stats, g.values, family.space.right.weights)
    totals = K.stats_expect(family.stats, g.values * g.space.weights)
    return raw - totals[:, None]


def _check_margin(family: ExpFamily, r1: Density) -> Density:
    if r1.space != family.space.left:
        raise MismatchError("target margin lives on a different space")
    return r1


def kl_theta_gradient_left(family: ExpFamily, theta, r1: Density) -> np.ndarray:
    """Gradient of theta -> D(r1 || G1(theta)).

    g_j = -sum_x E_G[T_j - E_G[T_j] | X = x] * r1(x) * mu1(x).
    """
    theta = _check_theta(family, theta)
    r1 = _check_margin(family, r1)
    g = density(family, theta)
    table = _centered_conditional_stats(family, g)
    return -table @ (r1.values * family.space.left.weights)


def kl_theta_gradient_right(
    family: ExpFamily, theta, r1: Density, literal_weighting: bool = False
) -> np.ndarray:
    """Gradient of theta -> D(G1(theta) || r1).

    g_j = -sum_x E_G[T_j - E_G[T_j] | X = x] * log(r1/G1)(x) * G1(x) * mu1(x).

    ``literal_weighting`` drops the G1 factor from the integrand; that
    reading fails the finite-difference check and is kept only for
    comparison.
    """
    theta = _check_theta(family, theta)
    r1 = _check_margin(family, r1)
    g = density(family, theta)
    g1 = marginalize(g)
    table = _centered_conditional_stats(family, g)
    logratio = np.log(r1.values) - np.log(g1.values)
    weight = family.space.left.weights.copy()
    if not literal_weighting:
        weight *= g1.values
    return -table @ (logratio * weight)


@dataclass(frozen=True)
class FlowRecord:
    """One accepted state of a natural-gradient flow."""

    iteration: int
    theta: np.ndarray
    objective: float
    grad_norm: float
    step: float


@dataclass(frozen=True)
class FlowTrace:
    """Euler-descent trajectory; records carry strictly increasing iterations."""

    records: list[FlowRecord]
    converged: bool
    mode: str

    @property
    def final(self) -> FlowRecord:
        return self.records[-1]


def natural_gradient_flow(
    family: ExpFamily,
    theta0,
    r1: Density,
    mode: str = "left",
    step: float = 0.5,
    iters: int = 100,
    tol: float = 1e-8,
) -> FlowTrace:
    """Euler descent of a parameterized KL objective.

    ``mode="left"`` descends D(r1 || G1(theta)); ``mode="right"`` descends
    D(G1(theta) || r1).  Each iteration backtracks (halving the step, at
    most 30 times) until the objective does not increase, so the recorded
    objectives are non-increasing; stalling out of halvings stops the flow
    unconverged.  Stops when the gradient norm drops below ``tol``.
    """
    if mode == "left":
        grad_fn = lambda th: kl_theta_gradient_left(family, th, r1)
        obj_fn = lambda th: kl(r1, marginalize(density(family, th)))
    elif mode == "right":
        grad_fn = lambda th: kl_theta_gradient_right(family, th, r1)
        obj_fn = lambda th: kl(marginalize(density(family, th)), r1)
    else:
        raise StatBundleError(f"unknown flow mode {mode!r}")
    if not step > 0.0:
        raise StatBundleError("step must be positive")
    if iters < 1:
        raise StatBundleError("iters must be at least 1")
    _check_margin(family, r1)

    theta = _check_theta(family, theta0).copy()
    objective = obj_fn(theta)
    if not math.isfinite(objective):
        raise ArithmeticError(f"non-finite objective {objective!r} at theta0")
    grad = grad_fn(theta)
    grad_norm = float(np.linalg.norm(grad))
    records = [FlowRecord(0, theta.copy(), objective, grad_norm, step)]
    if grad_norm < tol:
        return FlowTrace(records, True, mode)

    converged = False
    for iteration in range(1, iters + 1):
        trial_step = step
        accepted = False
        for _ in range(MAX_BACKTRACK_HALVINGS + 1):
            candidate = theta - trial_step * grad
            cand_obj = obj_fn(candidate)
            if not math.isfinite(cand_obj):
                raise ArithmeticError(
                    f"non-finite objective {cand_obj!r} at iteration {iteration}"
                )
            if cand_obj <= objective:
                accepted = True
                break
            trial_step *= 0.5
        if not accepted:
            break
        theta, objective = candidate, cand_obj
        grad = grad_fn(theta)
        grad_norm = float(np.linalg.norm(grad))
        records.append(
            FlowRecord(iteration, theta.copy(), objective, grad_norm, trial_step)
        )
        if grad_norm < tol:
            converged = True
            break
    return FlowTrace(records, converged, mode)
