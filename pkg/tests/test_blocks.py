import math

import numpy as np
import pytest

from toeplab.blocks import (admissible_count, block_eig_max,
                            blockdiag_deviation_op, build_bricks,
                            check_admissibility, eps_truncation_gap,
                            partition, principal_projected_diagonal,
                            sparse_diag, threshold_set)
from toeplab.ensemble import EntrySpec, sample_entries
from toeplab.seeding import derive_seed
from toeplab.spectra import HermitianOp, top_eig_lanczos
from toeplab.toeplitz import (FourierDiagonal, apply_projected_diagonal,
                              circle_adjusted_diagonal, projection_dense)


def _sampled_diag(n, seed):
    return circle_adjusted_diagonal(sample_entries(EntrySpec("gaussian"), n, seed))


def _spiked_diag(n, spikes, epsilon=0.5):
    """Symmetric diagonal with chosen indices pushed above the threshold."""
    two_n = 2 * n
    level = epsilon * math.sqrt(2 * math.log(n))
    d = np.zeros(two_n)
    for j, scale in spikes:
        d[j] = scale * level
        d[(two_n - j) % two_n] = scale * level
    return FourierDiagonal(two_n, d)


# -- threshold set -------------------------------------------------------------


def test_threshold_empty_and_full():
    d = _sampled_diag(64, seed=1)
    huge = threshold_set(d, epsilon=1e6)
    assert len(huge.indices) == 0
    tiny = threshold_set(d, epsilon=1e-12)
    assert len(tiny.indices) == np.count_nonzero(d.d)


def test_threshold_matches_brute_scan():
    d = _sampled_diag(2**10, seed=2)
    S = threshold_set(d, epsilon=0.5)
    level = 0.5 * math.sqrt(2 * math.log(2**10))
    brute = {j for j in range(d.two_n) if abs(d.d[j]) >= level}
    assert set(S.indices.tolist()) == brute


def test_sparse_diag_cases():
    d = _sampled_diag(64, seed=3)
    S_all = threshold_set(d, 1e-12)
    assert np.array_equal(sparse_diag(d, S_all).d, d.d)
    S_none = threshold_set(d, 1e6)
    assert np.all(sparse_diag(d, S_none).d == 0.0)
    S = threshold_set(d, 0.5)
    mask = S.member_mask(d.two_n)
    assert np.array_equal(sparse_diag(d, S).d, np.where(mask, d.d, 0.0))


# -- bricks ----------------------------------------------------------------------


def test_bricks_at_n_1024():
    L = build_bricks(2**10)
    assert L.r == 343 and L.m == 1 and L.count == 3
    lengths = L.lengths()
    assert lengths.sum() == 2**11
    assert lengths.min() >= L.r and lengths.max() <= 4 * L.r


@pytest.mark.parametrize("n", [700, 1024, 2048, 4096, 8192])
def test_brick_invariants(n):
    L = build_bricks(n)
    lengths = L.lengths()
    assert lengths.sum() == 2 * n
    assert lengths.min() >= L.r and lengths.max() <= 4 * L.r
    # symmetry under index reflection, and exact coverage
    seen = set()
    for i in range(-L.m, L.m + 1):
        brick = set(L.brick(i))
        assert brick.isdisjoint(seen)
        seen |= brick
        assert {2 * n - 1 - j for j in brick} == set(L.brick(-i))
    assert seen == set(range(2 * n))


def test_bricks_too_small_reports_minimum():
    with pytest.raises(ValueError, match="686"):
        build_bricks(512)


# -- partition -------------------------------------------------------------------


def test_all_invisible_gives_one_part_per_brick():
    n = 4096
    L = build_bricks(n)
    d = _spiked_diag(n, spikes=[])
    S = threshold_set(d, 0.5)
    p = partition(L, S)
    assert len(p.parts) == L.count
    assert [J.stop - J.start for J in p.parts] == list(L.lengths())
    assert check_admissibility(p).admissible  # vacuously


def test_single_visible_brick_flanked_by_invisible():
    n = 4096
    L = build_bricks(n)
    j = L.brick(2).start + 11
    d = _spiked_diag(n, spikes=[(j, 2.0)])
    S = threshold_set(d, 0.5)
    p = partition(L, S)
    touching = p.touching_parts()
    assert len(touching) == 2  # the spike and its mirror
    for J in touching:
        first = set(J).issuperset(set(L.brick(2))) or set(J).issuperset(set(L.brick(-2)))
        assert first
    rep = check_admissibility(p)
    assert rep.admissible


def test_adversarial_everything_visible_is_inadmissible():
    n = 4096
    L = build_bricks(n)
    two_n = 2 * n
    d = FourierDiagonal(two_n, np.full(two_n, 10.0 * math.sqrt(2 * math.log(n))))
    S = threshold_set(d, 0.5)
    assert len(S.indices) == two_n
    p = partition(L, S)
    assert len(p.parts) == 1
    rep = check_admissibility(p)
    assert not rep.admissible
    assert not rep.condition_1
    assert not rep.condition_2


def test_partition_gap_property_on_random_trials():
    n = 2**12
    L = build_bricks(n)
    gap = int(math.log(n) ** 3)
    for t in range(25):
        d = _sampled_diag(n, seed=derive_seed(77, t))
        S = threshold_set(d, 0.9)
        p = partition(L, S)  # raises internally if the gap property breaks
        mask = S.member_mask(2 * n)
        for J in p.parts:
            if J.start != 0:
                assert not mask[J.start:J.start + gap].any()
            if J.stop != 2 * n:
                assert not mask[J.stop - gap:J.stop].any()
        covered = sum(J.stop - J.start for J in p.parts)
        assert covered == 2 * n


def test_visibility_symmetry_on_random_trials():
    n = 2**12
    L = build_bricks(n)
    for t in range(25):
        d = _sampled_diag(n, seed=derive_seed(78, t))
        p = partition(L, threshold_set(d, 0.5))
        for k in range(1, L.m + 1):
            assert bool(p.visible[L.m + k]) == bool(p.visible[L.m - k])


def test_admissible_count_rounding():
    assert admissible_count(0.5) == 4 + 48
    assert admissible_count(0.3) == 4 + math.ceil(12 / 0.09)


# -- epsilon truncation gap ------------------------------------------------------


def test_eps_gap_zero_when_nothing_dropped():
    d = _sampled_diag(256, seed=5)
    lhs, bound = eps_truncation_gap(d, epsilon=1e-9, tol=1e-10, seed=1)
    assert lhs <= 1e-9
    assert bound > 0


def test_eps_gap_total_drop_bounded():
    d = _sampled_diag(256, seed=6)
    eps = (np.abs(d.d).max() / math.sqrt(2 * math.log(256))) * 1.01
    lhs, bound = eps_truncation_gap(d, epsilon=eps, tol=1e-10, seed=1)
    # everything dropped: lhs = lam1(PDP) <= max |d| < bound
    assert lhs <= bound


def test_eps_gap_random_trials_hold_inequality():
    tol = 1e-9
    for t in range(10):
        d = _sampled_diag(2**10, seed=derive_seed(79, t))
        for eps in (0.2, 0.5):
            lhs, bound = eps_truncation_gap(d, eps, tol=tol, seed=t)
            assert lhs <= bound + 2 * tol


# -- block reduction -------------------------------------------------------------


def test_principal_block_matches_dense_projection():
    rng = np.random.default_rng(0)
    d = FourierDiagonal(64, np.concatenate([[rng.standard_normal()],
                                            rng.standard_normal(31),
                                            [rng.standard_normal()],
                                            np.zeros(31)]))
    # symmetrize
    arr = d.d.copy()
    arr[33:] = arr[31:0:-1]
    d = FourierDiagonal(64, arr)
    J = range(12, 40)
    idx = np.arange(12, 40)
    P = projection_dense(64)
    ref = P[np.ix_(idx, idx)] @ (d.d[idx, None] * P[np.ix_(idx, idx)])
    assert np.abs(principal_projected_diagonal(d, J) - ref).max() < 1e-12


def test_block_eig_max_degenerate_partitions():
    n = 4096
    L = build_bricks(n)
    d = _spiked_diag(n, spikes=[])
    S = threshold_set(d, 0.5)
    p = partition(L, S)
    assert block_eig_max(d, p) == 0.0  # empty maximum convention


def test_block_eig_max_single_full_block_equals_global():
    # all-visible degenerate partition: the one block is the whole circle,
    # so the block maximum is exactly the global top eigenvalue
    n = 1024
    d = _sampled_diag(n, seed=9)
    L = build_bricks(n)
    S = threshold_set(d, 0.3)
    p = partition(L, S)
    assert len(p.parts) == 1
    with pytest.raises(ValueError):
        block_eig_max(d, p)  # dense cap
    lam_blocks = block_eig_max(d, p, allow_iterative=True, seed=2)
    d_eps = sparse_diag(d, S)
    op = HermitianOp(2 * n, lambda v: apply_projected_diagonal(d_eps, v))
    lam = top_eig_lanczos(op, tol=1e-9, seed=3).lambda_max
    assert abs(lam_blocks - lam) < 1e-7


def test_block_reduction_spiked_instance():
    n = 4096
    L = build_bricks(n)
    j = L.brick(2).start + 20
    spikes = [(j, 1.7), (j + 9, 1.4), (j + 31, -1.6)]
    d = _spiked_diag(n, spikes)
    S = threshold_set(d, 0.5)
    p = partition(L, S)
    lam_blocks = block_eig_max(d, p, allow_iterative=True, seed=4)
    op = HermitianOp(2 * n, lambda v: apply_projected_diagonal(sparse_diag(d, S), v))
    lam = top_eig_lanczos(op, tol=1e-10, seed=5).lambda_max
    gap = abs(lam - lam_blocks)
    dev = blockdiag_deviation_op(sparse_diag(d, S), p)
    dev_norm = max(top_eig_lanczos(dev, tol=1e-8, seed=6).lambda_max,
                   top_eig_lanczos(HermitianOp(dev.dim, lambda v: -dev.apply(v)),
                                   tol=1e-8, seed=7).lambda_max)
    assert gap <= dev_norm + 1e-7
    assert gap < 0.05  # strong locality for isolated spikes
