"""Heat kernel of the Jacobi difference operator, by quadrature and by spectral truncation.

K_t(n, m) = int_{-1}^{1} e^{-t(1-x)} p_n(x) p_m(x) dmu(x) realizes e^{tJ}. The
quadrature route evaluates this integral with a Gauss-Jacobi rule; the spectral
route diagonalizes a 4N truncation of the operator and exponentiates. Both are
cached per (params, t, N, method).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import JacobiParams, generator_coefficients, ortho_poly_at_one, ortho_table
from .errors import ConvergenceFailure, NumericFailure
from .quadrature import QuadratureRule, auto_order, build_rule

__all__ = [
    "HeatKernel",
    "kernel_entry",
    "kernel_dt_entry",
    "kernel_matrix",
    "kernel_tensor",
    "kernel_dt_tensor",
    "apply_heat",
    "apply_heat_tilde",
    "markov_defect",
    "semigroup_defect",
    "fourier_transform",
    "parseval_defect",
    "weight_at_one",
    "clear_caches",
]

DEFAULT_QUAD_TOL = 1e-12
POSITIVITY_FLOOR = -1e-12

_lock = threading.Lock()
_rule_cache: dict = {}
_order_cache: dict = {}
_table_cache: dict = {}
_eig_cache: dict = {}
_kernel_cache: dict = {}
_tensor_cache: dict = {}


def clear_caches() -> None:
    with _lock:
        for cache in (_rule_cache, _order_cache, _table_cache, _eig_cache,
                      _kernel_cache, _tensor_cache):
            cache.clear()


def _cached_order(params: JacobiParams, n_max: int, t_max: float, tol: float) -> int:
    key = (params.alpha, params.beta, n_max, t_max, tol)
    hit = _order_cache.get(key)
    if hit is None:
        hit = auto_order(params, n_max, t_max, tol)
        with _lock:
            _order_cache[key] = hit
    return hit


def _cached_rule(params: JacobiParams, order: int) -> QuadratureRule:
    key = (params.alpha, params.beta, order)
    hit = _rule_cache.get(key)
    if hit is None:
        hit = build_rule(params, order)
        with _lock:
            _rule_cache[key] = hit
    return hit


def _cached_table(params: JacobiParams, n_max: int, rule: QuadratureRule) -> np.ndarray:
    key = (params.alpha, params.beta, n_max, rule.order)
    hit = _table_cache.get(key)
    if hit is None:
        hit = ortho_table(params, n_max, rule.nodes)
        with _lock:
            _table_cache[key] = hit
    return hit


def _cached_eig(params: JacobiParams, size: int) -> tuple[np.ndarray, np.ndarray]:
    key = (params.alpha, params.beta, size)
    hit = _eig_cache.get(key)
    if hit is None:
        diag, off = generator_coefficients(params, size)
        try:
            lam, vec = scipy.linalg.eigh_tridiagonal(diag, off)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            raise NumericFailure(f"generator eigensolver failed at size {size}") from exc
        hit = (lam, vec)
        with _lock:
            _eig_cache[key] = hit
    return hit


@dataclass(frozen=True)
class HeatKernel:
    """Dense truncated heat kernel at one time, tagged with how it was computed."""

    params: JacobiParams
    t: float
    size: int
    entries: np.ndarray
    method: str
    order_info: int


def _require_time(t: float) -> None:
    if not np.isfinite(t) or t < 0.0:
        raise ValueError("time t must be finite and nonnegative")


def kernel_entry(params: JacobiParams, t: float, n: int, m: int,
                 rule: QuadratureRule) -> float:
    """Quadrature value of K_t(n, m); symmetric in (n, m) exactly."""
    _require_time(t)
    if t == 0.0:
        raise ValueError("t = 0 is the identity and is not computed by quadrature")
    if n < 0 or m < 0:
        raise ValueError("kernel indices must be nonnegative")
    if 2 * rule.order - 1 < n + m:
        raise ConvergenceFailure(
            f"rule of order {rule.order} cannot integrate the degree {n + m} polynomial part"
        )
    table = _cached_table(params, max(n, m), rule)
    # table[n] * table[m] first: IEEE multiplication commutes, so the value
    # is bitwise symmetric in (n, m), which grouping exp * p_n * p_m is not.
    integrand = (table[n] * table[m]) * np.exp(-t * (1.0 - rule.nodes))
    return float(rule.weights @ integrand)


def kernel_dt_entry(params: JacobiParams, t: float, n: int, m: int,
                    rule: QuadratureRule) -> float:
    """Time derivative d/dt K_t(n, m) = -int (1-x) e^{-t(1-x)} p_n p_m dmu."""
    _require_time(t)
    if t == 0.0:
        raise ValueError("t = 0 is the identity and is not computed by quadrature")
    if n < 0 or m < 0:
        raise ValueError("kernel indices must be nonnegative")
    if 2 * rule.order - 1 < n + m + 1:
        raise ConvergenceFailure(
            f"rule of order {rule.order} cannot integrate the degree {n + m + 1} polynomial part"
        )
    table = _cached_table(params, max(n, m), rule)
    g = 1.0 - rule.nodes
    integrand = (table[n] * table[m]) * (-g * np.exp(-t * g))
    return float(rule.weights @ integrand)


def _identity_kernel(params: JacobiParams, size: int, method: str) -> HeatKernel:
    entries = np.eye(size)
    entries.setflags(write=False)
    return HeatKernel(params=params, t=0.0, size=size, entries=entries,
                      method=method, order_info=0)


def _check_positivity(params: JacobiParams, entries: np.ndarray) -> None:
    if params.positivity_regime:
        low = float(entries.min())
        if low < POSITIVITY_FLOOR:
            raise NumericFailure(
                f"kernel entry {low} below positivity floor in the alpha >= beta >= -1/2 regime"
            )


def _quad_pieces(params: JacobiParams, size: int, t_max: float,
                 tol: float) -> tuple[QuadratureRule, np.ndarray]:
    order = _cached_order(params, size - 1, max(t_max, 1e-3), tol)
    rule = _cached_rule(params, order)
    table = _cached_table(params, size - 1, rule)
    return rule, table


def kernel_matrix(params: JacobiParams, t: float, size: int, method: str = "quadrature",
                  quad_tol: float = DEFAULT_QUAD_TOL) -> HeatKernel:
    """Truncated kernel matrix (K_t(n, m))_{n,m < size} by the requested method.

    t = 0 returns the exact identity. The spectral method diagonalizes the
    4*size truncation of the operator and keeps the leading block.
    """
    _require_time(t)
    if size < 1:
        raise ValueError("size must be positive")
    if method not in ("quadrature", "spectral"):
        raise ValueError(f"unknown kernel method {method!r}")
    key = (params.alpha, params.beta, t, size, method, quad_tol)
    hit = _kernel_cache.get(key)
    if hit is not None:
        return hit
    if t == 0.0:
        out = _identity_kernel(params, size, method)
    elif method == "quadrature":
        rule, table = _quad_pieces(params, size, t, quad_tol)
        scale = rule.weights * np.exp(-t * (1.0 - rule.nodes))
        raw = (table * scale) @ table.T
        entries = 0.5 * (raw + raw.T)
        _check_positivity(params, entries)
        entries.setflags(write=False)  # cached object is shared across callers
        out = HeatKernel(params=params, t=t, size=size, entries=entries,
                         method="quadrature", order_info=rule.order)
    else:
        big = 4 * size
        lam, vec = _cached_eig(params, big)
        block = vec[:size, :]
        raw = (block * np.exp(t * lam)) @ block.T
        entries = 0.5 * (raw + raw.T)
        _check_positivity(params, entries)
        entries.setflags(write=False)
        out = HeatKernel(params=params, t=t, size=size, entries=entries,
                         method="spectral", order_info=big)
    with _lock:
        _kernel_cache[key] = out
    return out


def _times_key(times: np.ndarray) -> tuple:
    return tuple(float(t) for t in times)


def kernel_tensor(params: JacobiParams, times: np.ndarray, size: int,
                  quad_tol: float = DEFAULT_QUAD_TOL) -> np.ndarray:
    """Stack of quadrature kernel matrices over a time grid, shape (len(times), size, size)."""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times <= 0.0):
        raise ValueError("time grid must be nonempty with positive entries")
    key = ("K", params.alpha, params.beta, size, _times_key(times), quad_tol)
    hit = _tensor_cache.get(key)
    if hit is not None:
        return hit
    rule, table = _quad_pieces(params, size, float(times.max()), quad_tol)
    out = np.empty((times.size, size, size))
    for i, t in enumerate(times):
        scale = rule.weights * np.exp(-t * (1.0 - rule.nodes))
        raw = (table * scale) @ table.T
        out[i] = 0.5 * (raw + raw.T)
    _check_positivity(params, out)
    out.setflags(write=False)
    with _lock:
        _tensor_cache[key] = out
    return out


def kernel_dt_tensor(params: JacobiParams, times: np.ndarray, size: int,
                     quad_tol: float = DEFAULT_QUAD_TOL) -> np.ndarray:
    """Stack of d/dt kernel matrices over a time grid."""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times <= 0.0):
        raise ValueError("time grid must be nonempty with positive entries")
    key = ("dK", params.alpha, params.beta, size, _times_key(times), quad_tol)
    hit = _tensor_cache.get(key)
    if hit is not None:
        return hit
    rule, table = _quad_pieces(params, size, float(times.max()), quad_tol)
    g = 1.0 - rule.nodes
    out = np.empty((times.size, size, size))
    for i, t in enumerate(times):
        scale = -rule.weights * g * np.exp(-t * g)
        raw = (table * scale) @ table.T
        out[i] = 0.5 * (raw + raw.T)
    out.setflags(write=False)
    with _lock:
        _tensor_cache[key] = out
    return out


def _fit_signal(f: np.ndarray, size: int) -> np.ndarray:
    fv = np.asarray(f, dtype=float)
    if fv.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if fv.size > size:
        raise ValueError(f"signal support {fv.size} exceeds truncation {size}")
    if fv.size < size:
        fv = np.pad(fv, (0, size - fv.size))
    return fv


def apply_heat(params: JacobiParams, t: float, f: np.ndarray, size: int,
               method: str = "quadrature") -> np.ndarray:
    """W_t f on the truncated range, a kernel-matrix product."""
    fv = _fit_signal(f, size)
    if t == 0.0:
        return fv.copy()
    return kernel_matrix(params, t, size, method).entries @ fv


def weight_at_one(params: JacobiParams, size: int) -> np.ndarray:
    """The positive sequence p_n(1), n < size."""
    return np.array([ortho_poly_at_one(params, n) for n in range(size)])


def apply_heat_tilde(params: JacobiParams, t: float, f: np.ndarray, size: int,
                     method: str = "quadrature") -> np.ndarray:
    """Conjugated semigroup W_t(p_.(1) f) / p_.(1); Markovian on the full lattice."""
    fv = _fit_signal(f, size)
    v = weight_at_one(params, size)
    return apply_heat(params, t, v * fv, size, method) / v


def markov_defect(params: JacobiParams, t: float, n: int, size: int) -> float:
    """Relative defect |sum_m K_t(n,m) p_m(1) - p_n(1)| / p_n(1) on the truncation.

    Meaningful only well inside the truncation, so n must stay below size/4.
    """
    if n < 0:
        raise ValueError("index n must be nonnegative")
    if n > size // 4:
        raise ValueError("markov defect requires n <= size/4, away from the truncation edge")
    if t == 0.0:
        return 0.0
    kern = kernel_matrix(params, t, size)
    v = weight_at_one(params, size)
    return float(abs(kern.entries[n] @ v - v[n]) / v[n])


def semigroup_defect(params: JacobiParams, t: float, s: float, size: int) -> float:
    """Max-entry defect of K_t K_s = K_{t+s} on the leading size/4 block."""
    _require_time(t)
    _require_time(s)
    if t == 0.0 or s == 0.0:
        return 0.0
    block = max(1, size // 4)
    kt = kernel_matrix(params, t, size).entries
    ks = kernel_matrix(params, s, size).entries
    kts = kernel_matrix(params, t + s, size).entries
    prod = kt[:block] @ ks
    return float(np.abs(prod[:, :block] - kts[:block, :block]).max())


def fourier_transform(params: JacobiParams, f: np.ndarray, x):
    """Transform F(f)(x) = sum_n f(n) p_n(x), an isometry onto L^2(dmu)."""
    fv = np.asarray(f, dtype=float)
    if fv.ndim != 1 or fv.size == 0:
        raise ValueError("signal must be a nonempty one-dimensional array")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    table = ortho_table(params, fv.size - 1, xv)
    vals = fv @ table
    return vals if np.ndim(x) else float(vals[0])


def parseval_defect(params: JacobiParams, f: np.ndarray, rule: QuadratureRule) -> float:
    """|  ||f||^2_{l^2} - int |F(f)|^2 dmu  | under the given rule."""
    fv = np.asarray(f, dtype=float)
    vals = fourier_transform(params, fv, rule.nodes)
    return float(abs(fv @ fv - rule.weights @ (vals * vals)))
