"""Gauss-Jacobi quadrature through the Golub-Welsch eigenproblem.

Nodes are the eigenvalues of the symmetric tridiagonal recurrence matrix of the
measure; weights are the total mass times the squared first eigenvector
components. A Q-point rule integrates polynomials up to degree 2Q-1 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import JacobiParams, coeff_a, coeff_b, ortho_table
from .errors import ConvergenceFailure, NumericFailure

__all__ = [
    "QuadratureRule",
    "total_mass",
    "build_rule",
    "integrate",
    "moments",
    "auto_order",
]

MAX_ORDER = 2 ** 16


def total_mass(params: JacobiParams) -> float:
    """mu((-1,1)) = 2^(alpha+beta+1) B(alpha+1, beta+1), via log-gamma."""
    a, b = params.alpha, params.beta
    log_m = (a + b + 1.0) * math.log(2.0) + math.lgamma(a + 1.0) \
        + math.lgamma(b + 1.0) - math.lgamma(a + b + 2.0)
    return math.exp(log_m)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for the Jacobi measure: strictly increasing nodes in (-1,1), positive weights."""

    params: JacobiParams
    order: int
    nodes: np.ndarray
    weights: np.ndarray


def build_rule(params: JacobiParams, order: int) -> QuadratureRule:
    """Golub-Welsch construction of the Gauss-Jacobi rule with `order` points."""
    if order < 1:
        raise ValueError("order must be positive")
    if order > MAX_ORDER:
        raise ConvergenceFailure(f"quadrature order {order} exceeds cap {MAX_ORDER}")
    mass = total_mass(params)
    if order == 1:
        nodes = np.array([coeff_b(params, 0) + 1.0])
        weights = np.array([mass])
        return QuadratureRule(params=params, order=1, nodes=nodes, weights=weights)
    diag = np.array([coeff_b(params, n) + 1.0 for n in range(order)])
    off = np.array([coeff_a(params, n) for n in range(order - 1)])
    try:
        nodes, vectors = scipy.linalg.eigh_tridiagonal(diag, off)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(f"tridiagonal eigensolver failed at order {order}") from exc
    weights = mass * vectors[0, :] ** 2
    if not (np.all(np.diff(nodes) > 0.0) and nodes[0] > -1.0 and nodes[-1] < 1.0):
        raise NumericFailure("quadrature nodes left (-1, 1) or lost strict ordering")
    if np.any(weights <= 0.0):
        raise NumericFailure("nonpositive quadrature weight")
    if abs(weights.sum() - mass) > 1e-12 * mass:
        raise NumericFailure("quadrature weights do not sum to the total mass")
    return QuadratureRule(params=params, order=order, nodes=nodes, weights=weights)


def integrate(rule: QuadratureRule, f) -> float:
    """Apply the rule to a function or to an array of node values."""
    vals = np.asarray(f(rule.nodes) if callable(f) else f, dtype=float)
    if vals.shape != rule.nodes.shape:
        raise ValueError("integrand values must match the node count")
    if not np.all(np.isfinite(vals)):
        raise NumericFailure("integrand is not finite at a quadrature node")
    return float(rule.weights @ vals)


def moments(params: JacobiParams, k_max: int) -> np.ndarray:
    """Monomial moments m_k = int x^k dmu for k = 0..k_max.

    Integration by parts of d/dx [x^k (1-x)^(a+1) (1+x)^(b+1)] gives the
    two-term recursion m_{k+1} = (k m_{k-1} + (b - a) m_k) / (k + a + b + 2),
    seeded by the Beta-function value of m_0. Independent of the quadrature path.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    a, b = params.alpha, params.beta
    out = np.empty(k_max + 1)
    out[0] = total_mass(params)
    if k_max == 0:
        return out
    out[1] = (b - a) * out[0] / (a + b + 2.0)
    for k in range(1, k_max):
        out[k + 1] = (k * out[k - 1] + (b - a) * out[k]) / (k + a + b + 2.0)
    return out


def _diag_entry(params: JacobiParams, order: int, n: int, t: float) -> float:
    rule = build_rule(params, order)
    p_row = ortho_table(params, n, rule.nodes)[n]
    return float(rule.weights @ (np.exp(-t * (1.0 - rule.nodes)) * p_row * p_row))


def auto_order(params: JacobiParams, n_max: int, t_max: float, tol: float) -> int:
    """Smallest doubling-tested order whose stiffest kernel entry has converged.

    Starts at n_max + 16 and doubles until the diagonal entry at index n_max,
    probed at t in {t_max, 1e-3}, moves by less than tol between order Q and 2Q.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    probes = (t_max, 1e-3)
    order = n_max + 16
    if order > MAX_ORDER:
        raise ConvergenceFailure(f"starting order {order} exceeds cap {MAX_ORDER}")
    cur = [_diag_entry(params, order, n_max, t) for t in probes]
    while True:
        if 2 * order > MAX_ORDER:
            raise ConvergenceFailure(
                f"kernel quadrature did not converge below order cap {MAX_ORDER}"
            )
        nxt = [_diag_entry(params, 2 * order, n_max, t) for t in probes]
        if max(abs(c - n) for c, n in zip(cur, nxt)) < tol:
            return order
        order *= 2
        cur = nxt
