import cmath
import math

import numpy as np
import pytest

from toeplab.ensemble import EntrySpec, sample_entries
from toeplab.seeding import derive_seed
from toeplab.toeplitz import (CirculantCoeffs, ToeplitzSym,
                              apply_projected_diagonal,
                              circle_adjusted_diagonal, cosine_sum,
                              cosine_sum_direct, diagonal_covariance,
                              diagonal_covariance_direct, embed_circulant,
                              fourier_diagonal, kernel_convergence_gap,
                              limit_projection_entry, projected_diagonal_dense,
                              projection_dense, projection_dense_oracle,
                              projection_entry, toeplitz_matvec)

RNG = np.random.default_rng(20260809)


def test_embed_small_examples():
    C = embed_circulant(ToeplitzSym(2, np.array([1.0, 5.0])), wrap_coeff=9.0)
    assert np.array_equal(C.b, [1.0, 5.0, 9.0, 5.0])
    C = embed_circulant(ToeplitzSym(3, np.array([1.0, 2.0, 3.0])), wrap_coeff=0.0)
    assert np.array_equal(C.b, [1.0, 2.0, 3.0, 0.0, 3.0, 2.0])


@pytest.mark.parametrize("n", [2, 5, 17, 64])
def test_toeplitz_is_circulant_corner(n):
    row = RNG.standard_normal(n)
    for variant in ("standard", "circle_adjusted"):
        T = ToeplitzSym(n, row, variant)
        C = embed_circulant(T, wrap_coeff=0.3)
        assert np.allclose(C.dense()[:n, :n], T.dense(), atol=1e-14)


def test_circle_adjusted_diagonal_entry():
    T = ToeplitzSym(4, np.array([1.0, 0, 0, 0]), "circle_adjusted")
    assert T.dense()[0, 0] == pytest.approx(math.sqrt(2.0))
    assert T.dense()[0, 1] == 0.0


def test_fourier_diagonal_delta_gives_constant():
    d = fourier_diagonal(CirculantCoeffs(4, np.array([1.0, 0, 0, 0])))
    assert np.allclose(d.d, 0.5)


def test_fourier_diagonal_closed_form_n2():
    a0, a1, wrap = 0.7, -1.3, 0.4
    d = fourier_diagonal(CirculantCoeffs(4, np.array([a0, a1, wrap, a1])))
    expected = [(a0 + wrap + 2 * a1) / 2, (a0 - wrap) / 2,
                (a0 + wrap - 2 * a1) / 2, (a0 - wrap) / 2]
    assert np.allclose(d.d, expected, atol=1e-14)
    assert d.d[1] == d.d[3]


def test_fourier_diagonal_reflection_symmetry():
    arr = sample_entries(EntrySpec("gaussian"), 32, seed=3)
    d = circle_adjusted_diagonal(arr).d
    assert np.allclose(d[1:], d[:0:-1], atol=1e-12)


def test_fourier_diagonal_parseval():
    b = RNG.standard_normal(16)
    b[9:] = b[7:0:-1]
    d = fourier_diagonal(CirculantCoeffs(16, b))
    assert abs((d.d**2).sum() - (b**2).sum()) < 1e-10


def test_fourier_diagonal_matches_direct_dft_odd_size():
    # non power of two goes through the same exact-DFT semantics
    b = RNG.standard_normal(12)
    b[7:] = b[5:0:-1]
    d = fourier_diagonal(CirculantCoeffs(12, b))
    j = np.arange(12)
    direct = np.array([(b * np.exp(2j * np.pi * jj * j / 12)).sum().real
                       for jj in j]) / math.sqrt(12)
    assert np.allclose(d.d, direct, atol=1e-12)


# -- projection kernels -------------------------------------------------------


def test_projection_entry_against_materialized_oracle():
    for two_n in (4, 8, 64):
        P = projection_dense(two_n)
        oracle = projection_dense_oracle(two_n)
        assert np.abs(P - oracle).max() < 1e-13


def test_projection_entry_values():
    assert projection_entry(5, 5, 64) == 0.5
    assert projection_entry(7, 5, 64) == 0.0          # even difference
    val = projection_entry(0, 1, 4)
    assert val == pytest.approx((1 + 1j) / 4)
    # decay bound with circular distance
    two_n = 64
    for k in range(two_n):
        for l in range(two_n):
            if k != l:
                dist = min(abs(k - l), two_n - abs(k - l))
                assert abs(projection_entry(k, l, two_n)) <= 1.0 / dist


def test_projection_is_hermitian_idempotent():
    for two_n in (16, 256):
        P = projection_dense(two_n)
        assert np.abs(P @ P - P).max() < 1e-10
        assert np.abs(P - P.conj().T).max() < 1e-12


def test_limit_entries():
    assert limit_projection_entry(5, 5) == 0.5
    assert limit_projection_entry(0, 2) == 0.0
    assert limit_projection_entry(1, 0) == pytest.approx(-1j / math.pi)
    assert limit_projection_entry(0, 1) == pytest.approx(1j / math.pi)
    # hermitian pairing
    assert limit_projection_entry(3, 8) == np.conj(limit_projection_entry(8, 3))


def test_kernel_gap_halves_when_size_doubles():
    gaps = {two_n: kernel_convergence_gap(two_n, window=32)
            for two_n in (2**8, 2**9, 2**10, 2**11)}
    for two_n in (2**8, 2**9, 2**10):
        ratio = gaps[two_n] / gaps[2 * two_n]
        assert 1.7 < ratio < 2.3
    # fitted C over the stated range: gap * n stays bounded
    for two_n, g in gaps.items():
        assert g * (two_n // 2) < 1.0


def test_row_l1_bound_logarithmic():
    for two_n in (2**6, 2**8, 2**10, 2**12):
        P = np.abs(projection_dense(two_n)) if two_n <= 1024 else None
        if P is not None:
            rowsum = P.sum(axis=1).max()
        else:
            from toeplab.toeplitz import projection_row
            rowsum = np.abs(projection_row(two_n)).sum()
        assert rowsum <= 0.55 * math.log(two_n)


def test_apply_projected_diagonal_matches_dense():
    two_n = 64
    d = fourier_diagonal(CirculantCoeffs(two_n, _sym_coeffs(two_n)))
    M = projected_diagonal_dense(d)
    v = RNG.standard_normal(two_n) + 1j * RNG.standard_normal(two_n)
    assert np.abs(M @ v - apply_projected_diagonal(d, v)).max() < 1e-10


def test_apply_projected_diagonal_trivial_diagonals():
    two_n = 32
    v = RNG.standard_normal(two_n) + 1j * RNG.standard_normal(two_n)
    from toeplab.toeplitz import FourierDiagonal
    ones = FourierDiagonal(two_n, np.ones(two_n))
    P = projection_dense(two_n)
    assert np.abs(apply_projected_diagonal(ones, v) - P @ v).max() < 1e-12
    zero = FourierDiagonal(two_n, np.zeros(two_n))
    assert np.abs(apply_projected_diagonal(zero, v)).max() == 0.0


def test_apply_projected_diagonal_rejects_bad_length():
    from toeplab.toeplitz import FourierDiagonal
    d = FourierDiagonal(8, np.ones(8))
    with pytest.raises(ValueError):
        apply_projected_diagonal(d, np.ones(7))


def _sym_coeffs(two_n):
    b = RNG.standard_normal(two_n)
    b[two_n // 2 + 1:] = b[two_n // 2 - 1:0:-1]
    return b


def test_toeplitz_matvec_identity_and_shift():
    T = ToeplitzSym(3, np.array([1.0, 0.0, 0.0]))
    v = np.array([2.0, -1.0, 0.5])
    assert np.allclose(toeplitz_matvec(T, v), v)
    S = ToeplitzSym(3, np.array([0.0, 1.0, 0.0]))
    assert np.allclose(toeplitz_matvec(S, np.array([1.0, 0, 0])), [0.0, 1.0, 0.0])


def test_toeplitz_matvec_matches_dense():
    n = 300
    T = ToeplitzSym(n, RNG.standard_normal(n), "circle_adjusted")
    v = RNG.standard_normal(n)
    ref = T.dense() @ v
    assert np.abs(ref - toeplitz_matvec(T, v)).max() < 1e-10 * np.abs(ref).max()


# -- spectral identity and wrap independence ----------------------------------


@pytest.mark.parametrize("n", [4, 16, 128])
def test_nonzero_spectra_match(n):
    arr = sample_entries(EntrySpec("uniform"), n, seed=derive_seed(0, n))
    d = circle_adjusted_diagonal(arr)
    T = ToeplitzSym(n, arr.values[:n], "circle_adjusted")
    eig_t = np.linalg.eigvalsh(T.dense() / math.sqrt(n))
    eig_pdp = np.linalg.eigvalsh(projected_diagonal_dense(d))
    combined = np.sort(np.concatenate([eig_t, np.zeros(n)]))
    assert np.abs(np.sort(math.sqrt(2.0) * eig_pdp) - combined).max() < 1e-8


def test_wrap_coefficient_invariance():
    n = 32
    arr = sample_entries(EntrySpec("gaussian"), n, seed=11)
    T = ToeplitzSym(n, arr.values[:n], "circle_adjusted")
    v = RNG.standard_normal(2 * n) + 1j * RNG.standard_normal(2 * n)
    outs = [apply_projected_diagonal(fourier_diagonal(embed_circulant(T, w)), v)
            for w in (0.0, 123.0)]
    assert np.abs(outs[0] - outs[1]).max() < 1e-10


# -- covariance lemma ----------------------------------------------------------


def test_covariance_values():
    assert diagonal_covariance(0, 0, 8) == 2.0
    assert diagonal_covariance(8, 8, 8) == 2.0
    assert diagonal_covariance(3, 3, 8) == 1.0
    assert diagonal_covariance(2, 5, 8) == 0.0


def test_covariance_direct_sum_agrees():
    for n in (3, 16, 64):
        for j in range(n + 1):
            for k in range(n + 1):
                assert abs(diagonal_covariance(j, k, n)
                           - diagonal_covariance_direct(j, k, n)) < 1e-12


def test_cosine_sum_closed_form():
    assert cosine_sum(0, 10) == 9.0
    assert cosine_sum(20, 10) == 9.0
    assert cosine_sum(7, 10) == 0.0           # odd
    assert cosine_sum(4, 10) == -1.0
    for n in (5, 10, 33):
        for m in range(2 * n + 1):
            assert abs(cosine_sum(m, n) - cosine_sum_direct(m, n)) < 1e-12


def test_fourier_diagonal_rejects_asymmetric_coeffs():
    b = np.arange(8.0)
    with pytest.raises(ValueError):
        fourier_diagonal(CirculantCoeffs(8, b))
