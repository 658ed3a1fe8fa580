"""Threshold sets, bricks, random partitions, and the block reduction.

Large entries of the Fourier diagonal are isolated by thresholding at
``epsilon * sqrt(2 log n)``; the index circle ``{0 .. 2n-1}`` is cut into
deterministic symmetric bricks of length between ``r`` and ``4r`` with
``r = ceil(log n)**3``, and cutting between consecutive invisible bricks
(bricks missing the threshold set) yields the partition whose blocks
carry the top eigenvalue.

Note the asymptotics built into these definitions: bricks only exist
once ``n >= 2 r``, i.e. ``n >= 686`` (``n = 2**10`` for powers of two),
and at laboratory sizes the threshold set is typically dense enough that
every brick is visible and the partition degenerates to a single block.
The admissibility statistics report exactly this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectra import HermitianOp, top_eig_lanczos, dense_sym_eig, DENSE_EIG_CAP
from .toeplitz import FourierDiagonal, apply_projected_diagonal, project_low


@dataclass(frozen=True)
class ThresholdSet:
    epsilon: float
    n: int
    indices: np.ndarray  # sorted, subset of {0 .. 2n-1}

    @property
    def level(self) -> float:
        return self.epsilon * math.sqrt(2.0 * math.log(self.n))

    def member_mask(self, two_n: int) -> np.ndarray:
        mask = np.zeros(two_n, dtype=bool)
        mask[self.indices] = True
        return mask


@dataclass(frozen=True)
class BrickLayout:
    """2m + 1 consecutive bricks covering {0 .. 2n-1}, symmetric under
    ``j -> 2n - 1 - j``; ``bounds[i] .. bounds[i+1]-1`` is brick ``i - m``."""

    n: int
    r: int
    m: int
    bounds: np.ndarray  # length 2m + 2, bounds[0] = 0, bounds[-1] = 2n

    def brick(self, i: int) -> range:
        """Brick with signed index ``i`` in ``[-m, m]``."""
        a = self.bounds[i + self.m]
        return range(int(a), int(self.bounds[i + self.m + 1]))

    @property
    def count(self) -> int:
        return 2 * self.m + 1

    def lengths(self) -> np.ndarray:
        return np.diff(self.bounds)


@dataclass(frozen=True)
class PartitionLayout:
    layout: BrickLayout
    threshold: ThresholdSet
    visible: np.ndarray          # bool per brick, ordered L_{-m} .. L_m
    parts: tuple[range, ...]     # disjoint intervals covering {0 .. 2n-1}
    M: int

    def touching_parts(self) -> list[range]:
        mask = self.threshold.member_mask(2 * self.layout.n)
        return [J for J in self.parts if mask[J.start:J.stop].any()]


def brick_length_floor(n: int) -> int:
    return math.ceil(math.log(n)) ** 3


def threshold_set(d: FourierDiagonal, epsilon: float) -> ThresholdSet:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = d.n
    if n < 3:
        raise ValueError("need n >= 3 for a meaningful threshold")
    level = epsilon * math.sqrt(2.0 * math.log(n))
    idx = np.flatnonzero(np.abs(d.d) >= level)
    return ThresholdSet(epsilon=epsilon, n=n, indices=idx)


def sparse_diag(d: FourierDiagonal, S: ThresholdSet) -> FourierDiagonal:
    """Zero the diagonal outside the threshold set."""
    if S.n != d.n:
        raise ValueError("threshold set built for a different size")
    mask = S.member_mask(d.two_n)
    return FourierDiagonal(two_n=d.two_n, d=np.where(mask, d.d, 0.0), variant=d.variant)


def eps_truncation_gap(d: FourierDiagonal, epsilon: float, tol: float = 1e-9,
                       seed: int = 0) -> tuple[float, float]:
    """``(|lam1(PDP) - lam1(P D_eps P)|, epsilon * sqrt(2 log n))``.

    The first never exceeds the second (up to solver residuals): dropping
    sub-threshold diagonal entries moves the top eigenvalue by at most
    the operator norm of the dropped part.
    """
    S = threshold_set(d, epsilon)
    d_eps = sparse_diag(d, S)
    lam = []
    for dd in (d, d_eps):
        op = HermitianOp(d.two_n, lambda v, dd=dd: apply_projected_diagonal(dd, v))
        lam.append(top_eig_lanczos(op, tol=tol, seed=seed).lambda_max)
    return abs(lam[0] - lam[1]), S.level


def build_bricks(n: int) -> BrickLayout:
    """Deterministic symmetric brick layout.

    The outer ``2m`` bricks all have length exactly ``r``; the centered
    brick absorbs the remainder, with length ``2 (r + n mod r)`` in
    ``[2r, 4r)``.  Requires ``m = floor(n / r) - 1 >= 1``.
    """
    if n < 3:
        raise ValueError("n too small")
    r = brick_length_floor(n)
    m = n // r - 1
    if m < 1:
        raise ValueError(
            f"brick scheme undefined: need n >= 2 * ceil(log n)^3 = {2 * r}, got n = {n}")
    bounds = np.empty(2 * m + 2, dtype=np.int64)
    bounds[:m + 1] = np.arange(m + 1) * r
    bounds[m + 1:] = 2 * n - (np.arange(m, -1, -1) * r)
    layout = BrickLayout(n=n, r=r, m=m, bounds=bounds)
    lengths = layout.lengths()
    assert lengths.min() >= r and lengths.max() <= 4 * r and lengths.sum() == 2 * n
    return layout


def admissible_count(epsilon: float) -> int:
    """Maximum brick count / threshold hits per block, ``4 + ceil(12 / eps^2)``."""
    return 4 + math.ceil(12.0 / epsilon**2)


def partition(layout: BrickLayout, S: ThresholdSet) -> PartitionLayout:
    """Cut between every pair of consecutive invisible bricks."""
    two_n = 2 * layout.n
    mask = S.member_mask(two_n)
    hits = np.add.reduceat(mask.astype(np.int64), layout.bounds[:-1])
    visible = hits > 0
    parts: list[range] = []
    start = 0
    for i in range(layout.count - 1):
        if not visible[i] and not visible[i + 1]:
            parts.append(range(start, int(layout.bounds[i + 1])))
            start = int(layout.bounds[i + 1])
    parts.append(range(start, two_n))
    p = PartitionLayout(layout=layout, threshold=S, visible=visible,
                        parts=tuple(parts), M=admissible_count(S.epsilon))
    _assert_gap_property(p, mask)
    return p


def _assert_gap_property(p: PartitionLayout, mask: np.ndarray) -> None:
    # interior part boundaries sit between invisible bricks, so each part
    # opens and closes with a threshold-free run of at least (log n)^3
    gap = int(math.log(p.layout.n) ** 3)
    for J in p.parts:
        if J.start != 0 and mask[J.start:J.start + gap].any():
            raise AssertionError("partition part opens without a threshold-free gap")
        if J.stop != len(mask) and mask[J.stop - gap:J.stop].any():
            raise AssertionError("partition part closes without a threshold-free gap")


@dataclass(frozen=True)
class AdmissibilityReport:
    blocks_within_one_side: bool   # no threshold-touching part straddles the
                                   # center brick or touches the outermost ones
    brick_count_ok: bool           # every touching part is <= M consecutive bricks
    hits_within_windows: bool      # every window of <= M consecutive one-side
                                   # interior bricks carries <= M threshold points
    condition_1: bool
    condition_2: bool

    @property
    def admissible(self) -> bool:
        return self.condition_1 and self.condition_2


def check_admissibility(p: PartitionLayout) -> AdmissibilityReport:
    """Prospective block conditions evaluated on one realized partition.

    Condition 1: every part meeting the threshold set is a union of at
    most M consecutive bricks drawn from the interior bricks of a single
    half of the circle.  Condition 2: no window of up to M consecutive
    interior bricks (either half) carries more than M threshold points.
    """
    layout, S, M = p.layout, p.threshold, p.M
    two_n = 2 * layout.n
    mask = S.member_mask(two_n)
    b = layout.bounds
    m = layout.m
    # brick index span of each part (parts align with brick boundaries)
    one_side = True
    count_ok = True
    for J in p.touching_parts():
        first = int(np.searchsorted(b, J.start, side="right")) - 1
        last = int(np.searchsorted(b, J.stop, side="left")) - 1
        nbricks = last - first + 1
        count_ok &= nbricks <= M
        # signed brick indices: interior-left is [-m+1, -1], interior-right [1, m-1]
        lo, hi = first - m, last - m
        one_side &= (-m + 1 <= lo and hi <= -1) or (1 <= lo and hi <= m - 1)
    hits = np.add.reduceat(mask.astype(np.int64), b[:-1])
    window_ok = True
    for side in (hits[1:m], hits[m + 1:2 * m]):   # interior halves
        w = min(M, len(side))
        if w:
            sums = np.convolve(side, np.ones(w, dtype=np.int64), mode="valid")
            window_ok &= bool(sums.max() <= M)
    cond1 = one_side and count_ok
    return AdmissibilityReport(
        blocks_within_one_side=bool(one_side),
        brick_count_ok=bool(count_ok),
        hits_within_windows=bool(window_ok),
        condition_1=bool(cond1),
        condition_2=bool(window_ok),
    )


def principal_projected_diagonal(d: FourierDiagonal, J: range) -> np.ndarray:
    """Dense principal submatrix ``P[J] diag(d[J]) P[J]``."""
    idx = np.arange(J.start, J.stop)
    diff = idx[:, None] - idx[None, :]
    n = d.n
    PJ = np.zeros(diff.shape, dtype=complex)
    odd = diff % 2 != 0
    PJ[odd] = (1.0 / n) / (1.0 - np.exp(-1j * np.pi * diff[odd] / n))
    np.fill_diagonal(PJ, 0.5)
    return PJ @ (d.d[idx][:, None] * PJ)


def block_eig_max(d: FourierDiagonal, p: PartitionLayout,
                  allow_iterative: bool = False, seed: int = 0) -> float:
    """Max top eigenvalue of ``P[J] D_eps[J] P[J]`` over threshold-touching parts.

    Empty maximum is 0 by convention (top eigenvalue of the zero
    operator).  Parts larger than the dense cap are an error unless
    ``allow_iterative`` engages the matrix-free solver; at laboratory
    sizes the partition frequently degenerates to one full-circle block.
    """
    d_eps = sparse_diag(d, p.threshold)
    best = 0.0
    touching = p.touching_parts()
    if not touching:
        return 0.0
    for J in touching:
        size = J.stop - J.start
        if size <= DENSE_EIG_CAP:
            vals = dense_sym_eig(principal_projected_diagonal(d_eps, J))
            lam = float(vals[-1])
        elif allow_iterative:
            op = _restricted_op(d_eps, J)
            lam = top_eig_lanczos(op, tol=1e-9, seed=seed).lambda_max
        else:
            raise ValueError(
                f"part {J.start}..{J.stop - 1} has size {size} > dense cap {DENSE_EIG_CAP}")
        best = max(best, lam)
    return best


def _project_restricted(two_n: int, J: range, v: np.ndarray) -> np.ndarray:
    """``P[J] v`` for ``v`` of length ``|J|`` (embed, project, restrict)."""
    full = np.zeros(two_n, dtype=complex)
    full[J.start:J.stop] = v
    return project_low(full)[J.start:J.stop]


def _restricted_op(d: FourierDiagonal, J: range) -> HermitianOp:
    # P[J] diag(d[J]) P[J]; note the middle contraction is confined to J,
    # so this is not a principal submatrix of P D P
    dJ = d.d[J.start:J.stop]

    def apply(v: np.ndarray) -> np.ndarray:
        w = dJ * _project_restricted(d.two_n, J, v)
        return _project_restricted(d.two_n, J, w)

    return HermitianOp(J.stop - J.start, apply)


def blockdiag_deviation_op(d_eps: FourierDiagonal, p: PartitionLayout) -> HermitianOp:
    """Operator ``P D_eps P - B D_eps B`` with ``B`` the block-diagonal cut of P."""
    two_n = d_eps.two_n

    def apply(v: np.ndarray) -> np.ndarray:
        out = apply_projected_diagonal(d_eps, v)
        for J in p.parts:
            w = d_eps.d[J.start:J.stop] * _project_restricted(two_n, J, v[J.start:J.stop])
            out[J.start:J.stop] -= _project_restricted(two_n, J, w)
        return out

    return HermitianOp(two_n, apply)
