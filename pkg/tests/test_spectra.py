import numpy as np
import pytest

from toeplab.spectra import (EigReport, HermitianOp, LanczosError,
                             dense_sym_eig, specnorm_row_bound,
                             top_eig_lanczos)

RNG = np.random.default_rng(7)


def _random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (A + A.conj().T) / 2.0


def test_identity_operator():
    rep = top_eig_lanczos(HermitianOp(40, lambda v: v), tol=1e-12, seed=1)
    assert rep.lambda_max == pytest.approx(1.0, abs=1e-12)
    assert rep.residual <= 1e-12


def test_small_diagonal():
    D = np.diag([1.0, 2.0, 3.0])
    rep = top_eig_lanczos(HermitianOp(3, lambda v: D @ v), tol=1e-12, seed=0)
    assert rep.lambda_max == pytest.approx(3.0, abs=1e-10)


def test_dim_one():
    rep = top_eig_lanczos(HermitianOp(1, lambda v: -4.0 * v), tol=1e-12, seed=0)
    assert rep.lambda_max == pytest.approx(-4.0)


def test_zero_operator():
    rep = top_eig_lanczos(HermitianOp(16, lambda v: 0.0 * v), tol=1e-12, seed=0)
    assert rep.lambda_max == pytest.approx(0.0, abs=1e-13)


@pytest.mark.parametrize("dim", [64, 256, 512])
def test_matches_dense_oracle(dim):
    A = _random_hermitian(dim, dim)
    rep = top_eig_lanczos(HermitianOp(dim, lambda v: A @ v), tol=1e-10, seed=2)
    top = dense_sym_eig(A)[-1]
    assert abs(rep.lambda_max - top) <= 1e-8 * max(1.0, abs(top))
    assert rep.vector is not None
    assert np.linalg.norm(A @ rep.vector - rep.lambda_max * rep.vector) <= 1e-9 * max(1, top)


def test_ritz_history_nondecreasing():
    A = _random_hermitian(128, 5)
    rep = top_eig_lanczos(HermitianOp(128, lambda v: A @ v), tol=1e-11, seed=3)
    hist = rep.ritz_history
    assert all(b >= a - 1e-10 for a, b in zip(hist, hist[1:]))


def test_negative_definite_top():
    A = -np.eye(10) - np.diag(np.arange(10.0))
    rep = top_eig_lanczos(HermitianOp(10, lambda v: A @ v), tol=1e-12, seed=0)
    assert rep.lambda_max == pytest.approx(-1.0, abs=1e-10)


def test_nonconvergence_carries_best_estimate():
    A = _random_hermitian(256, 9)
    with pytest.raises(LanczosError) as err:
        top_eig_lanczos(HermitianOp(256, lambda v: A @ v), tol=1e-14, max_iter=5, seed=0)
    assert isinstance(err.value.report, EigReport)
    assert err.value.report.residual > 0


def test_hermitian_probe_rejects_nonhermitian():
    B = np.triu(np.ones((8, 8)))
    with pytest.raises(ValueError):
        HermitianOp(8, lambda v: B @ v).check_hermitian(seed=0)
    # and passes on an honest operator
    A = _random_hermitian(8, 1)
    HermitianOp(8, lambda v: A @ v).check_hermitian(seed=0)


def test_dense_eig_two_by_two_closed_form():
    a, b = 0.3, -1.7
    vals = dense_sym_eig(np.array([[a, b], [b, a]]))
    assert vals == pytest.approx([a - abs(b), a + abs(b)])
    assert np.all(dense_sym_eig(np.zeros((5, 5))) == 0.0)


def test_dense_eig_cap():
    with pytest.raises(ValueError):
        dense_sym_eig(np.eye(1025))


def test_row_bound_identity_and_hermitian_reduction():
    assert specnorm_row_bound(np.eye(7)) == 1.0
    A = _random_hermitian(30, 3)
    rows = np.abs(A).sum(axis=1).max()
    assert specnorm_row_bound(A) == pytest.approx(rows)  # hermitian: row = col


def test_row_bound_dominates_spectral_norm():
    for seed in range(200):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((50, 50))
        A = (A + A.T) / 2
        assert specnorm_row_bound(A) >= np.abs(np.linalg.eigvalsh(A)).max() - 1e-10


def test_interlacing_of_principal_submatrices():
    for seed in range(20):
        A = _random_hermitian(40, seed)
        lam = dense_sym_eig(A)[-1]
        idx = np.random.default_rng(seed).choice(40, size=17, replace=False)
        sub = A[np.ix_(idx, idx)]
        assert dense_sym_eig(sub)[-1] <= lam + 1e-10
