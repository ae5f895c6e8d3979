"""Jacobi polynomials, their orthonormalization, and the tridiagonal difference operator.

The measure on (-1, 1) is dmu(x) = (1-x)^alpha (1+x)^beta dx with alpha, beta > -1.
The orthonormal family p_n = w_n P_n diagonalizes the difference operator J whose
action is J(f)(n) = a_{n-1} f(n-1) + b_n f(n) + a_n f(n+1), with the two-term
boundary row J(f)(0) = b_0 f(0) + a_0 f(1); the eigenrelation reads
J(p_.(x))(n) = (x - 1) p_n(x), so the spectrum of J sits in [-2, 0].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "JacobiParams",
    "TridiagonalGenerator",
    "jacobi_poly",
    "normalization",
    "ortho_poly",
    "ortho_poly_at_one",
    "ortho_table",
    "coeff_a",
    "coeff_b",
    "generator_coefficients",
    "build_generator",
    "apply_generator",
]


@dataclass(frozen=True)
class JacobiParams:
    """Parameter pair (alpha, beta) of the Jacobi measure, each > -1."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")
        if self.alpha <= -1.0:
            raise ValueError("alpha must exceed -1")
        if self.beta <= -1.0:
            raise ValueError("beta must exceed -1")

    @property
    def positivity_regime(self) -> bool:
        """True when alpha >= beta >= -1/2, the range with nonnegative heat kernels."""
        return self.alpha >= self.beta >= -0.5

    def tag(self) -> str:
        return f"alpha{self.alpha:g}_beta{self.beta:g}"


def jacobi_poly(params: JacobiParams, n: int, x):
    """Evaluate the Jacobi polynomial P_n^(alpha,beta) at x by the three-term recurrence.

    Accepts scalar or array x; the recurrence is run in degree, which is
    backward-stable on [-1, 1] for the degrees used here (n up to ~1e4).
    """
    if n < 0:
        raise ValueError("degree n must be nonnegative")
    a, b = params.alpha, params.beta
    xv = np.asanyarray(x, dtype=float)
    p_prev = np.ones_like(xv)
    if n == 0:
        return p_prev if xv.ndim else float(p_prev)
    p_cur = 0.5 * (a + b + 2.0) * xv + 0.5 * (a - b)
    for k in range(2, n + 1):
        s = 2.0 * k + a + b
        c0 = 2.0 * k * (k + a + b) * (s - 2.0)
        c1 = (s - 1.0) * (a * a - b * b)
        c2 = (s - 1.0) * s * (s - 2.0)
        c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
        p_prev, p_cur = p_cur, ((c2 * xv + c1) * p_cur - c3 * p_prev) / c0
    return p_cur if xv.ndim else float(p_cur)


def normalization(params: JacobiParams, n: int) -> float:
    """Constant w_n with w_n P_n of unit norm in L^2(dmu), computed in log space.

    w_n^2 = (2n+a+b+1) G(n+1) G(n+a+b+1) / (2^(a+b+1) G(n+a+1) G(n+b+1)) for n >= 1
    and w_0^2 = G(a+b+2) / (2^(a+b+1) G(a+1) G(b+1)), G the Gamma function.
    """
    if n < 0:
        raise ValueError("degree n must be nonnegative")
    a, b = params.alpha, params.beta
    ab = a + b
    if n == 0:
        log_sq = math.lgamma(ab + 2.0) - (ab + 1.0) * math.log(2.0) \
            - math.lgamma(a + 1.0) - math.lgamma(b + 1.0)
    else:
        log_sq = math.log(2.0 * n + ab + 1.0) + math.lgamma(n + 1.0) \
            + math.lgamma(n + ab + 1.0) - (ab + 1.0) * math.log(2.0) \
            - math.lgamma(n + a + 1.0) - math.lgamma(n + b + 1.0)
    return math.exp(0.5 * log_sq)


def ortho_poly(params: JacobiParams, n: int, x):
    """Orthonormal polynomial p_n(x) = normalization(n) * P_n(x)."""
    return normalization(params, n) * jacobi_poly(params, n, x)


def ortho_poly_at_one(params: JacobiParams, n: int) -> float:
    """p_n(1) = w_n * binom(n+alpha, n), strictly positive, grows like n^(alpha+1/2)."""
    if n < 0:
        raise ValueError("degree n must be nonnegative")
    a = params.alpha
    log_binom = math.lgamma(n + a + 1.0) - math.lgamma(a + 1.0) - math.lgamma(n + 1.0)
    if n == 0:
        return normalization(params, 0)
    log_w = math.log(normalization(params, n))
    return math.exp(log_w + log_binom)


def ortho_table(params: JacobiParams, n_max: int, x: np.ndarray) -> np.ndarray:
    """Table p_n(x_k) for n = 0..n_max, shape (n_max+1, len(x)).

    Built from the orthonormal three-term recurrence
    x p_n = a_n p_{n+1} + (b_n + 1) p_n + a_{n-1} p_{n-1},
    which shares its coefficients with the difference operator.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((n_max + 1, xv.size))
    out[0] = normalization(params, 0)
    if n_max == 0:
        return out
    a0 = coeff_a(params, 0)
    out[1] = (xv - (coeff_b(params, 0) + 1.0)) * out[0] / a0
    a_prev = a0
    for k in range(1, n_max):
        a_k = coeff_a(params, k)
        out[k + 1] = ((xv - (coeff_b(params, k) + 1.0)) * out[k] - a_prev * out[k - 1]) / a_k
        a_prev = a_k
    return out


def coeff_a(params: JacobiParams, n: int) -> float:
    """Off-diagonal coefficient a_n of the difference operator."""
    if n < 0:
        raise ValueError("index n must be nonnegative")
    a, b = params.alpha, params.beta
    ab = a + b
    if n == 0:
        return 2.0 / (ab + 2.0) * math.sqrt((a + 1.0) * (b + 1.0) / (ab + 3.0))
    s = 2.0 * n + ab + 2.0
    inner = (n + 1.0) * (n + a + 1.0) * (n + b + 1.0) * (n + ab + 1.0) / ((s - 1.0) * (s + 1.0))
    return 2.0 / s * math.sqrt(inner)


def coeff_b(params: JacobiParams, n: int) -> float:
    """Diagonal coefficient b_n of the difference operator, always in [-2, 0]."""
    if n < 0:
        raise ValueError("index n must be nonnegative")
    a, b = params.alpha, params.beta
    if n == 0:
        return -(2.0 * a + 2.0) / (a + b + 2.0)
    s = 2.0 * n + a + b
    return (b * b - a * a) / (s * (s + 2.0)) - 1.0


def generator_coefficients(params: JacobiParams, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectors (b_0..b_{size-1}, a_0..a_{size-2}) filling the truncated operator."""
    if size < 1:
        raise ValueError("size must be positive")
    diag = np.array([coeff_b(params, n) for n in range(size)])
    off = np.array([coeff_a(params, n) for n in range(size - 1)])
    return diag, off


@dataclass(frozen=True)
class TridiagonalGenerator:
    """Truncation of the difference operator to indices 0..size-1."""

    params: JacobiParams
    size: int
    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def to_matrix(self) -> np.ndarray:
        m = np.diag(self.diagonal)
        idx = np.arange(self.size - 1)
        m[idx, idx + 1] = self.offdiagonal
        m[idx + 1, idx] = self.offdiagonal
        return m


def build_generator(params: JacobiParams, size: int) -> TridiagonalGenerator:
    """Assemble the size x size truncation of the difference operator."""
    if size < 2:
        raise ValueError("size must be at least 2")
    diag, off = generator_coefficients(params, size)
    return TridiagonalGenerator(params=params, size=size, diagonal=diag, offdiagonal=off)


def apply_generator(gen: TridiagonalGenerator, f: np.ndarray) -> np.ndarray:
    """Matrix-vector product of the truncated operator with f.

    f must be supported on 0..size-1. The last entry of the result omits the
    a_{size-1} f(size) term lost to truncation, so eigenrelation checks should
    stop at index size-2.
    """
    fv = np.asarray(f, dtype=float)
    if fv.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if fv.size > gen.size:
        raise ValueError(
            f"signal support {fv.size} exceeds generator truncation {gen.size}"
        )
    if fv.size < gen.size:
        fv = np.pad(fv, (0, gen.size - fv.size))
    out = gen.diagonal * fv
    out[:-1] += gen.offdiagonal * fv[1:]
    out[1:] += gen.offdiagonal * fv[:-1]
    return out
