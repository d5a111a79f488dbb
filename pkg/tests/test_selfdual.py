"""Self-duality, Gale duality, stability, and normal form tests.

The golden values (witness diagonal, orthogonal block, skew matrix) come
from the integer fixture; displayed-decimal references are compared at 1e-3
and exact integer ones at full precision.
"""

import itertools

import numpy as np
import pytest

from fixture_config14 import A_REAL, GAMMA14, GAMMA_SNF, P_BLOCK, SKEW7, WITNESS_DIAG
from mukailift import linalg, selfdual as sd
from mukailift.errors import (
    CayleySingular,
    DegenerateConfig,
    NotSelfDual,
    RankDeficient,
    SingularMatrix,
)

RNG = np.random.default_rng(11)


def random_config():
    return RNG.standard_normal((7, 14)) + 1j * RNG.standard_normal((7, 14))


def random_skew_params(scale=1.0):
    return scale * (RNG.standard_normal(21) + 1j * RNG.standard_normal(21))


def assert_proportional(v, w, tol):
    v = np.asarray(v)
    w = np.asarray(w)
    j = int(np.argmax(np.abs(w)))
    c = v[j] / w[j]
    assert np.abs(v - c * w).max() < tol


# ---------- witness ----------------------------------------------------------


def test_witness_identity_pair():
    # the witness space of [I | I] is diag(v, -v): symmetry forces the
    # pairing of diagonal entries, not a unique vector
    gamma = np.concatenate([np.eye(7), np.eye(7)], axis=1).astype(complex)
    lam = sd.self_dual_witness(gamma)
    assert np.abs(lam[7:] + lam[:7]).max() < 1e-10
    assert np.abs(lam).min() > 1e-9
    assert sd.witness_residual(gamma, lam) < 1e-12


def test_witness_golden_configuration():
    lam = sd.self_dual_witness(GAMMA14)
    assert_proportional(lam, WITNESS_DIAG, 1e-10)
    assert sd.witness_residual(GAMMA14, lam) < 1e-10


def test_witness_rejects_random_configs():
    for _ in range(50):
        with pytest.raises(NotSelfDual):
            sd.self_dual_witness(random_config())


def test_witness_accepts_skew_configurations():
    for _ in range(50):
        gamma = sd.config_from_skew(random_skew_params())
        lam = sd.self_dual_witness(gamma)
        assert sd.witness_residual(gamma, lam) < 1e-10


# ---------- Gale transform ---------------------------------------------------


def test_gale_of_identity_block_form():
    b = RNG.standard_normal((7, 7)) + 1j * RNG.standard_normal((7, 7))
    gamma = np.concatenate([np.eye(7), b], axis=1)
    dual = sd.gale_transform(gamma)
    reference = np.concatenate([b.T, np.eye(7)], axis=1)
    ok, _ = sd.projective_equivalent(dual, reference)
    assert ok


def test_gale_is_involution_up_to_equivalence():
    for _ in range(20):
        gamma = random_config()
        ok, _ = sd.projective_equivalent(
            sd.gale_transform(sd.gale_transform(gamma)), gamma
        )
        assert ok


def test_gale_fixes_self_dual_configuration():
    ok, _ = sd.projective_equivalent(sd.gale_transform(GAMMA14), GAMMA14)
    assert ok


def test_gale_rank_deficient():
    gamma = np.ones((7, 14), dtype=complex)
    with pytest.raises(RankDeficient):
        sd.gale_transform(gamma)


# ---------- general position and stability ----------------------------------


def test_linearly_general_rejects_repeated_point():
    gamma = np.concatenate([np.eye(7), np.eye(7)], axis=1).astype(complex)
    assert not sd.is_linearly_general(gamma)


def test_linearly_general_random_and_skew():
    assert sd.is_linearly_general(random_config())
    for _ in range(20):
        assert sd.is_linearly_general(sd.config_from_skew(random_skew_params()))


def semistable_oracle(gamma, strict):
    """Direct definition: rank of every column subset via SVD.

    Strictness applies to proper subsets; the full configuration meets the
    bound with equality for any rank-7 matrix.
    """
    for size in range(1, 14 if strict else 15):
        for cols in itertools.combinations(range(14), size):
            rank = np.linalg.matrix_rank(gamma[:, cols], tol=1e-8)
            bound = 7 * size / 14
            if strict:
                if not rank > bound:
                    return False
            else:
                if not rank >= bound:
                    return False
    return True


def test_semistable_coincident_points_fail():
    gamma = random_config()
    gamma[:, 1:8] = gamma[:, [0]] * (1.0 + 0.1 * np.arange(1, 8))
    semistable, _ = sd.is_semistable(gamma)
    assert not semistable


def test_semistable_random_config_stable():
    gamma = random_config()
    semistable, stable = sd.is_semistable(gamma)
    assert semistable and stable


def test_semistable_identity_pair_matches_bruteforce_oracle():
    gamma = np.concatenate([np.eye(7), np.eye(7)], axis=1).astype(complex)
    semistable, stable = sd.is_semistable(gamma)
    assert semistable == semistable_oracle(gamma, strict=False)
    assert stable == semistable_oracle(gamma, strict=True)
    assert semistable and not stable


# ---------- orthogonal normal form -------------------------------------------


def cert_errors(gamma, cert):
    eye = np.eye(7, dtype=complex)
    left = cert.a @ np.concatenate([eye, cert.p], axis=1)
    right = gamma * cert.lambda_scale
    e_cert = np.abs(left - right).max() / max(1.0, np.abs(gamma).max())
    e_orth = np.abs(cert.p @ cert.p.T - eye).max()
    e_det = abs(linalg.lu_det(cert.p) - 1.0)
    return e_cert, e_orth, e_det


def test_onf_golden_configuration():
    cert = sd.orthogonal_normal_form(GAMMA14)
    # displayed reference is rounded to 4 decimals
    assert np.abs(cert.p.real - P_BLOCK).max() < 1e-3
    assert np.abs(cert.p.imag).max() < 1e-9
    ref = 1j * A_REAL
    j = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
    scalar = cert.a[j] / ref[j]
    assert np.abs(cert.a - scalar * ref).max() < 1e-3 * np.abs(scalar)
    e_cert, e_orth, e_det = cert_errors(GAMMA14, cert)
    assert e_cert < 1e-9 and e_orth < 1e-9 and e_det < 1e-9


def test_onf_recovers_special_orthogonal_block():
    # gamma = [I | P0] for real special orthogonal P0
    q, _ = np.linalg.qr(RNG.standard_normal((7, 7)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    gamma = np.concatenate([np.eye(7), q], axis=1).astype(complex)
    cert = sd.orthogonal_normal_form(gamma)
    flips = []
    for col in range(7):
        d_plus = np.abs(cert.p[:, col] - q[:, col]).max()
        d_minus = np.abs(cert.p[:, col] + q[:, col]).max()
        assert min(d_plus, d_minus) < 1e-9
        flips.append(1.0 if d_plus <= d_minus else -1.0)
    assert np.prod(flips) == 1.0


def test_onf_cert_identities_on_sampled_configs():
    for _ in range(20):
        gamma = sd.config_from_skew(random_skew_params())
        cert = sd.orthogonal_normal_form(gamma)
        e_cert, e_orth, e_det = cert_errors(gamma, cert)
        assert e_cert < 1e-9
        assert e_orth < 1e-9
        assert e_det < 1e-9


def test_onf_requires_invertible_leading_block():
    gamma = sd.config_from_skew(random_skew_params())
    gamma = gamma.copy()
    gamma[:, 0] = gamma[:, 1]  # leading block singular, still "self-dual-ish"
    with pytest.raises((SingularMatrix, NotSelfDual)):
        sd.orthogonal_normal_form(gamma)


# ---------- Cayley transform -------------------------------------------------


def test_cayley_of_zero_is_identity():
    assert np.abs(sd.cayley(np.zeros((7, 7))) - np.eye(7)).max() == 0.0


def test_cayley_involution():
    for _ in range(20):
        m = RNG.standard_normal((7, 7)) + 1j * RNG.standard_normal((7, 7))
        m *= 0.4 / max(1.0, np.abs(m).max())
        assert np.abs(sd.cayley(sd.cayley(m)) - m).max() < 1e-10


def test_cayley_maps_skew_to_orthogonal():
    for _ in range(20):
        s = sd.skew_from_params(random_skew_params())
        c = sd.cayley(s)
        assert np.abs(c @ c.T - np.eye(7)).max() < 1e-10


def test_cayley_golden_orthogonal_block():
    cert = sd.orthogonal_normal_form(GAMMA14)
    s = sd.cayley(cert.p)
    assert np.abs(s - SKEW7).max() < 1e-3


def test_cayley_singular_at_minus_one_eigenvalue():
    with pytest.raises(SingularMatrix):
        sd.cayley(np.diag([-1.0, -1.0, 1, 1, 1, 1, 1]).astype(complex))


# ---------- skew normal form -------------------------------------------------


def test_snf_golden_configuration():
    s, cert = sd.skew_normal_form(GAMMA14)
    assert np.abs(sd.skew_from_params(s) - SKEW7).max() < 1e-3
    assert cert.s is s


def test_snf_round_trip_recovers_parameters():
    for _ in range(20):
        s0 = random_skew_params()
        gamma = sd.config_from_skew(s0)
        s1, _ = sd.skew_normal_form(gamma)
        rebuilt = sd.config_from_skew(s1)
        ok, _ = sd.projective_equivalent(rebuilt, gamma)
        assert ok


def test_snf_cayley_singular_configuration():
    # orthogonal factor diag(-1,-1,1,...,1) has eigenvalue -1
    p = np.diag([-1.0, -1.0, 1, 1, 1, 1, 1]).astype(complex)
    gamma = np.concatenate([np.eye(7), p], axis=1)
    with pytest.raises(CayleySingular):
        sd.skew_normal_form(gamma)


def test_config_from_skew_golden_integer_matrix():
    g = sd.config_from_skew(sd.params_from_skew(SKEW7))
    assert np.array_equal(g, GAMMA_SNF)


def test_config_from_skew_zero_degenerate():
    with pytest.raises(DegenerateConfig):
        sd.config_from_skew(np.zeros(21))


def test_skew_params_round_trip():
    s = random_skew_params()
    assert np.array_equal(sd.params_from_skew(sd.skew_from_params(s)), s)
    m = sd.skew_from_params(s)
    assert np.abs(m + m.T).max() == 0.0


# ---------- projective equivalence -------------------------------------------


def test_projective_equivalent_constructed():
    g1 = random_config()
    m = RNG.standard_normal((7, 7)) + 1j * RNG.standard_normal((7, 7))
    d = RNG.standard_normal(14) + 1j * RNG.standard_normal(14)
    ok, witness = sd.projective_equivalent(g1, m @ g1 * d)
    assert ok
    a, dd = witness
    assert np.abs(a @ g1 - (m @ g1 * d) * dd).max() < 1e-6


def test_projective_equivalent_rejects_independent():
    for _ in range(5):
        assert sd.projective_equivalent(random_config(), random_config())[0] is False


def test_projective_equivalent_rejects_nontrivial_permutation():
    for _ in range(5):
        g1 = random_config()
        perm = np.roll(np.arange(14), 3)
        assert sd.projective_equivalent(g1, g1[:, perm])[0] is False
