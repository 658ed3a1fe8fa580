"""Toeplitz and circulant objects, Fourier diagonals, projection kernels.

The central identity: an ``n x n`` symmetric Toeplitz matrix ``T`` is the
top-left corner of a ``2n x 2n`` circulant, so the nonzero spectrum of
``n**-0.5 T`` equals ``sqrt(2)`` times the nonzero spectrum of ``P D P``,
where ``D`` carries the circulant eigenvalues (the Fourier diagonal) and
``P`` is the DFT-conjugated projection onto the first ``n`` frequencies.
Everything here is matrix-free where it matters, with dense
materializations (capped at side 1024) kept as oracles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

DENSE_CAP = 1024

VARIANTS = ("standard", "circle_adjusted")


@dataclass(frozen=True)
class ToeplitzSym:
    """Symmetric Toeplitz matrix generated by ``first_row``.

    With the ``circle_adjusted`` variant the diagonal holds
    ``sqrt(2) * first_row[0]`` instead of ``first_row[0]``; this is the
    variance change that makes the Fourier diagonal uncorrelated.
    """

    n: int
    first_row: np.ndarray
    diagonal_variant: str = "standard"

    def __post_init__(self):
        if self.n < 1 or len(self.first_row) != self.n:
            raise ValueError("first_row must have length n >= 1")
        if self.diagonal_variant not in VARIANTS:
            raise ValueError(f"bad variant {self.diagonal_variant!r}")

    def effective_row(self) -> np.ndarray:
        row = np.asarray(self.first_row, dtype=float).copy()
        if self.diagonal_variant == "circle_adjusted":
            row[0] *= math.sqrt(2.0)
        return row

    def dense(self) -> np.ndarray:
        if self.n > DENSE_CAP:
            raise ValueError(f"dense materialization capped at n = {DENSE_CAP}")
        row = self.effective_row()
        idx = np.abs(np.subtract.outer(np.arange(self.n), np.arange(self.n)))
        return row[idx]


@dataclass(frozen=True)
class CirculantCoeffs:
    """First row ``b_0 .. b_{2n-1}`` of the embedding circulant.

    Palindromic except for the free wrap slot: ``b_j = b_{2n-j}`` for
    ``0 < j < 2n``, with ``b_n`` unconstrained.
    """

    two_n: int
    b: np.ndarray

    def __post_init__(self):
        if self.two_n % 2 or self.two_n < 2 or len(self.b) != self.two_n:
            raise ValueError("b must have even length two_n")

    def dense(self) -> np.ndarray:
        if self.two_n > DENSE_CAP:
            raise ValueError(f"dense materialization capped at side {DENSE_CAP}")
        i = np.arange(self.two_n)
        col_minus_row = i[None, :] - i[:, None]
        return np.asarray(self.b, float)[col_minus_row % self.two_n]


@dataclass(frozen=True)
class FourierDiagonal:
    """Eigenvalues ``d_0 .. d_{2n-1}`` of the normalized circulant."""

    two_n: int
    d: np.ndarray
    variant: str = "standard"

    def __post_init__(self):
        if len(self.d) != self.two_n:
            raise ValueError("d must have length two_n")
        if self.variant not in VARIANTS:
            raise ValueError(f"bad variant {self.variant!r}")

    @property
    def n(self) -> int:
        return self.two_n // 2


def embed_circulant(T: ToeplitzSym, wrap_coeff: float) -> CirculantCoeffs:
    """Coefficients of the ``2n x 2n`` circulant whose corner is ``T``.

    ``wrap_coeff`` fills the one slot (index ``n``) that the corner does
    not constrain; projected quantities downstream are invariant to it.
    """
    row = T.effective_row()
    n = T.n
    b = np.empty(2 * n)
    b[:n] = row
    b[n] = wrap_coeff
    b[n + 1:] = row[:0:-1]
    return CirculantCoeffs(two_n=2 * n, b=b)


def fourier_diagonal(C: CirculantCoeffs, variant: str = "standard") -> FourierDiagonal:
    """Normalized DFT of the circulant coefficients.

    ``d_j = (2n)**-0.5 * sum_k b_k exp(2 pi i j k / 2n)``; the palindromic
    symmetry of ``b`` makes this real, which is asserted rather than
    assumed.
    """
    two_n = C.two_n
    d = math.sqrt(two_n) * np.fft.ifft(np.asarray(C.b, dtype=complex))
    scale = np.linalg.norm(C.b)
    if np.abs(d.imag).max() > 1e-10 * max(scale, 1.0):
        raise ValueError("imaginary part of Fourier diagonal exceeds tolerance")
    return FourierDiagonal(two_n=two_n, d=d.real.copy(), variant=variant)


def circle_adjusted_diagonal(entries) -> FourierDiagonal:
    """Fourier diagonal of the adjusted ensemble row.

    Uses ``sqrt(2) a_0`` on the diagonal slot and wrap coefficient
    ``sqrt(2) a_n``; with unit-variance entries the resulting ``d_j``,
    ``0 <= j <= n``, are uncorrelated with variance 1 (2 at ``j in {0, n}``).
    """
    vals = np.asarray(entries.values, float)
    n = entries.n
    T = ToeplitzSym(n=n, first_row=vals[:n], diagonal_variant="circle_adjusted")
    C = embed_circulant(T, wrap_coeff=math.sqrt(2.0) * vals[n])
    return fourier_diagonal(C, variant="circle_adjusted")


# -- projection kernels ------------------------------------------------------


def projection_entry(k: int, l: int, two_n: int) -> complex:
    """Entry ``(k, l)`` of the rank-``n`` projection ``U* Q U``.

    Closed form: 1/2 on the diagonal, 0 for even nonzero ``k - l``, and
    ``(1/n) / (1 - exp(-2 pi i (k-l) / 2n))`` for odd ``k - l``.
    """
    m = k - l
    if m == 0:
        return 0.5 + 0.0j
    if m % 2 == 0:
        return 0.0 + 0.0j
    n = two_n // 2
    return (1.0 / n) / (1.0 - cmath.exp(-2j * math.pi * m / two_n))


def limit_projection_entry(k: int, l: int) -> complex:
    """Entry ``(k, l)`` of the infinite-volume limit kernel.

    1/2 on the diagonal, 0 for even nonzero differences, and
    ``-i / (pi (k - l))`` for odd differences.
    """
    m = k - l
    if m == 0:
        return 0.5 + 0.0j
    if m % 2 == 0:
        return 0.0 + 0.0j
    return -1j / (math.pi * m)


def projection_row(two_n: int) -> np.ndarray:
    """``P(0, l)`` for ``l = 0 .. 2n-1`` (P is circulant: row k is a roll)."""
    n = two_n // 2
    l = np.arange(two_n)
    row = np.zeros(two_n, dtype=complex)
    odd = l % 2 == 1
    row[0] = 0.5
    row[odd] = (1.0 / n) / (1.0 - np.exp(2j * np.pi * l[odd] / two_n))
    return row


def projection_dense(two_n: int) -> np.ndarray:
    """Dense ``P`` from the closed-form entries (capped)."""
    if two_n > DENSE_CAP:
        raise ValueError(f"dense materialization capped at side {DENSE_CAP}")
    row = projection_row(two_n)
    i = np.arange(two_n)
    # P is circulant: P(k, l) = P(0, (l - k) mod 2n)
    return row[(i[None, :] - i[:, None]) % two_n]


def projection_dense_oracle(two_n: int) -> np.ndarray:
    """Independent materialization ``U* Q U`` from the DFT matrix."""
    if two_n > DENSE_CAP:
        raise ValueError(f"dense materialization capped at side {DENSE_CAP}")
    j, k = np.meshgrid(np.arange(two_n), np.arange(two_n), indexing="ij")
    U = np.exp(2j * np.pi * j * k / two_n) / math.sqrt(two_n)
    Q = np.zeros((two_n, two_n))
    Q[np.arange(two_n // 2), np.arange(two_n // 2)] = 1.0
    return U.conj().T @ Q @ U


def kernel_convergence_gap(two_n: int, window: int) -> float:
    """``max |P(k,l) - limit(k,l)|`` over ``0 < |k - l| <= window`` plus diagonal."""
    n = two_n // 2
    if window >= n:
        raise ValueError("window must stay well below n")
    gap = 0.0
    for m in range(1, window + 1):
        gap = max(gap, abs(projection_entry(m, 0, two_n) - limit_projection_entry(m, 0)))
    return gap


def project_low(v: np.ndarray) -> np.ndarray:
    """Apply ``P = U* Q U`` matrix-free: DFT, drop frequencies >= n, invert."""
    two_n = len(v)
    spec = np.fft.ifft(v)
    spec[two_n // 2:] = 0.0
    return np.fft.fft(spec)


def apply_projected_diagonal(d: FourierDiagonal, v: np.ndarray) -> np.ndarray:
    """Matrix-free ``P diag(d) P v`` in O(n log n)."""
    if len(v) != d.two_n:
        raise ValueError(f"vector length {len(v)} != {d.two_n}")
    return project_low(d.d * project_low(np.asarray(v, dtype=complex)))


def projected_diagonal_dense(d: FourierDiagonal) -> np.ndarray:
    """Dense ``P diag(d) P`` oracle (capped)."""
    P = projection_dense(d.two_n)
    return P @ (d.d[:, None] * P)


def toeplitz_matvec(T: ToeplitzSym, v: np.ndarray) -> np.ndarray:
    """``T v`` by circulant embedding, O(n log n); wrap slot set to 0."""
    if len(v) != T.n:
        raise ValueError(f"vector length {len(v)} != {T.n}")
    b = embed_circulant(T, wrap_coeff=0.0).b
    x = np.zeros(2 * T.n)
    x[:T.n] = v
    # first circulant column equals b because b is palindromic in its wrap-free slots
    out = np.fft.ifft(np.fft.fft(b) * np.fft.fft(x))
    return out.real[:T.n].copy()


# -- second moments of the Fourier diagonal ----------------------------------


def diagonal_covariance(j: int, k: int, n: int) -> float:
    """Covariance of ``d_j`` and ``d_k`` (adjusted variant), ``0 <= j, k <= n``.

    2 when ``j = k`` is 0 or n, 1 when ``0 < j = k < n``, else 0.
    """
    if not (0 <= j <= n and 0 <= k <= n):
        raise ValueError("indices must lie in [0, n]")
    if j != k:
        return 0.0
    return 2.0 if j in (0, n) else 1.0


def diagonal_covariance_direct(j: int, k: int, n: int) -> float:
    """Same covariance via the defining trigonometric sum (oracle)."""
    if not (0 <= j <= n and 0 <= k <= n):
        raise ValueError("indices must lie in [0, n]")
    ell = np.arange(1, n)
    s = np.cos(2 * np.pi * j * ell / (2 * n)) @ np.cos(2 * np.pi * k * ell / (2 * n))
    return float(2.0 + 2.0 * (-1.0) ** (j + k) + 4.0 * s) / (2 * n)


def cosine_sum(m: int, n: int) -> float:
    """Closed form of ``sum_{l=1}^{n-1} cos(2 pi m l / 2n)`` for ``0 <= m <= 2n``.

    Equals ``n - 1`` at ``m in {0, 2n}`` and ``-(1 + (-1)**m) / 2`` otherwise
    (folded Dirichlet kernel at the half-integer grid).
    """
    if not 0 <= m <= 2 * n:
        raise ValueError("m must lie in [0, 2n]")
    if m in (0, 2 * n):
        return float(n - 1)
    return -(1.0 + (-1.0) ** m) / 2.0


def cosine_sum_direct(m: int, n: int) -> float:
    ell = np.arange(1, n)
    return float(np.cos(2 * np.pi * m * ell / (2 * n)).sum())
