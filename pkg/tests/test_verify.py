import math
from functools import reduce
from itertools import permutations

import numpy as np
import pytest

from tdesigncap import (
    DesignSpec,
    MomentVector,
    bell_polynomial,
    build,
    certify,
    depolarize,
    gamma_empirical,
    gamma_predicted,
    moments,
)
from tdesigncap.core import haar_random_states
from tdesigncap.verify import (
    ResourceGuardError,
    _cycle_type,
    _permutation_basis,
    gamma_from_bell,
    symmetric_projector,
)


class TestMoments:
    def test_projective_moments_are_one(self, icosahedron):
        mv = moments(icosahedron, 5)
        assert np.allclose(mv.values, 1.0, atol=1e-12)

    def test_flat_moments(self, qutrit_sic):
        mv = moments(depolarize(qutrit_sic, 0.0), 4)
        assert mv.values == pytest.approx([3.0 ** (1 - k) for k in (1, 2, 3, 4)], abs=1e-12)

    def test_half_depolarized_qubit_sic(self, qubit_sic):
        # cross-module oracle: the depolarized-moment binomial identity gives
        # mu_2 = 0.625 for a half-depolarized pure qubit state
        mv = moments(depolarize(qubit_sic, 0.5), 2)
        assert mv[2] == pytest.approx(0.625, abs=1e-12)

    def test_moment_vector_invariants(self):
        with pytest.raises(ValueError):
            MomentVector(values=(0.9, 0.8), mu0=2)  # mu_1 != 1
        with pytest.raises(ValueError):
            MomentVector(values=(1.0, 0.5, 0.6), mu0=2)  # increasing


class TestBellPolynomial:
    def test_first_three(self):
        x1, x2, x3 = 1.7, -0.3, 2.2
        assert bell_polynomial([x1]) == pytest.approx(x1, abs=1e-12)
        assert bell_polynomial([x1, x2]) == pytest.approx(x1 ** 2 + x2, abs=1e-12)
        assert bell_polynomial([x1, x2, x3]) == pytest.approx(
            x1 ** 3 + 3 * x1 * x2 + x3, abs=1e-12)

    def test_fourth_and_fifth(self, rng):
        # independently transcribed complete Bell polynomials
        for _ in range(20):
            x = rng.uniform(-2, 2, size=5)
            b4 = (x[0] ** 4 + 6 * x[0] ** 2 * x[1] + 4 * x[0] * x[2] + 3 * x[1] ** 2 + x[3])
            b5 = (x[0] ** 5 + 10 * x[0] ** 3 * x[1] + 10 * x[0] ** 2 * x[2]
                  + 15 * x[0] * x[1] ** 2 + 5 * x[0] * x[3] + 10 * x[1] * x[2] + x[4])
            assert bell_polynomial(list(x[:4])) == pytest.approx(b4, rel=1e-12, abs=1e-12)
            assert bell_polynomial(list(x)) == pytest.approx(b5, rel=1e-12, abs=1e-12)

    def test_k_cap(self):
        with pytest.raises(ValueError):
            bell_polynomial([1.0] * 6)


class TestGamma:
    def test_projective_k2(self):
        mv = MomentVector(values=(1.0, 1.0), mu0=2)
        assert gamma_predicted(mv, 2, 2) == pytest.approx(1 / 3, abs=1e-15)
        for d in (2, 3, 5, 8):
            mv = MomentVector(values=(1.0, 1.0), mu0=d)
            assert gamma_predicted(mv, d, 2) == pytest.approx(2 / (d * (d + 1)), abs=1e-15)

    def test_fully_depolarized(self):
        for d in (2, 3):
            mv = MomentVector(values=tuple(d ** (1 - k) for k in range(1, 6)), mu0=d)
            for k in range(1, 6):
                assert gamma_predicted(mv, d, k) == pytest.approx(d ** (-k), abs=1e-14)

    def test_bell_form_agreement_random(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 7))
            vals = [1.0]
            for _ in range(4):
                vals.append(vals[-1] * rng.uniform(0.2, 1.0))
            mv = MomentVector(values=tuple(vals), mu0=d)
            for k in range(1, 6):
                assert abs(gamma_predicted(mv, d, k) - gamma_from_bell(mv, d, k)) < 1e-12

    def test_k_out_of_range(self):
        mv = MomentVector(values=(1.0,), mu0=2)
        with pytest.raises(ValueError):
            gamma_predicted(mv, 2, 6)
        with pytest.raises(ValueError):
            gamma_predicted(mv, 2, 2)  # moments too short

    def test_empirical_sic_own_state(self, qubit_sic):
        w, v = np.linalg.eigh(qubit_sic.ops[0])
        phi = v[:, -1]
        # overlap table of the tetrahedron: (1/4)(1 + 3*(1/9)) = 1/3
        assert gamma_empirical(qubit_sic, phi, 2) == pytest.approx(1 / 3, abs=1e-12)

    def test_empirical_k1_is_inverse_dim(self, qutrit_mub):
        for phi in haar_random_states(3, 5, seed=11):
            assert gamma_empirical(qutrit_mub, phi, 1) == pytest.approx(1 / 3, abs=1e-12)

    def test_empirical_flat(self, qubit_sic):
        flat = depolarize(qubit_sic, 0.0)
        for phi in haar_random_states(2, 3, seed=5):
            for k in (1, 2, 3):
                assert gamma_empirical(flat, phi, k) == pytest.approx(2.0 ** -k, abs=1e-12)


class TestPermutationMachinery:
    def test_trace_cycle_identity(self, rng):
        # Tr[W_sigma (A ot ... ot A)] = prod over cycles Tr[A^len]
        d, t = 3, 4
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        a = a + a.conj().T
        kron = reduce(np.kron, [a] * t)
        basis = _permutation_basis(d, t)
        cols = np.arange(d ** t)
        for sigma, idx in zip(basis.perms, basis.index_maps):
            tr = kron[cols, idx].sum()
            expected = np.prod([np.trace(np.linalg.matrix_power(a, l))
                                for l in _cycle_type(sigma)])
            assert abs(tr - expected) < 1e-8 * max(1.0, abs(expected))

    def test_gram_entries(self):
        # Tr[W_sigma^dag W_tau] = d^{cycles(sigma^-1 tau)}
        basis = _permutation_basis(2, 3)
        assert basis.gram[0, 0] == 2 ** 3  # identity vs identity
        total = sum(len(list(permutations(range(3)))) for _ in range(1))
        assert basis.gram.shape == (6, 6)

    def test_symmetric_projector(self):
        p = symmetric_projector(2, 3)
        assert np.allclose(p @ p, p, atol=1e-12)
        assert np.trace(p) == pytest.approx(math.comb(2 + 3 - 1, 3), abs=1e-9)


class TestCertify:
    def test_qubit_sic_pass_fail(self, qubit_sic):
        assert certify(qubit_sic, 2, n_spotchecks=0).passed
        cert = certify(qubit_sic, 3, n_spotchecks=0)
        assert not cert.passed
        assert cert.span_residual > 1e-4  # decisively above threshold

    def test_icosahedron_downward_closure(self, icosahedron):
        for t in range(1, 6):
            assert certify(icosahedron, t, n_spotchecks=0).passed

    def test_projective_m_t_is_normalized_symmetric_projector(self, qubit_mub):
        d, t = 2, 3
        m = np.zeros((d ** t, d ** t), dtype=complex)
        for w, op in zip(qubit_mub.weights, qubit_mub.ops):
            m += w * reduce(np.kron, [op] * t)
        p = symmetric_projector(d, t) / math.comb(d + t - 1, t)
        assert np.abs(m - p).max() < 1e-8

    def test_transpose_closure(self, qutrit_sic):
        assert certify(qutrit_sic.transposed(), 2, n_spotchecks=0).passed

    def test_depolarization_preserves_verdicts(self, qubit_mub):
        for lam in (0.25, 0.6):
            dep = depolarize(qubit_mub, lam)
            assert certify(dep, 3, n_spotchecks=0).passed
            assert not certify(dep, 4, n_spotchecks=0).passed

    def test_phi_independence_on_passing_sets(self, icosahedron):
        cert = certify(icosahedron, 5, n_spotchecks=0)
        mv = cert.moments
        for phi in haar_random_states(2, 50, seed=17):
            for k in range(1, 6):
                err = abs(gamma_empirical(icosahedron, phi, k) - gamma_predicted(mv, 2, k))
                assert err < 1e-9

    def test_spotchecks_recorded(self, qubit_sic):
        cert = certify(qubit_sic, 2, n_spotchecks=7, seed=3)
        assert len(cert.gamma_spotchecks) == 7 * 2
        assert max(err for _, _, err in cert.gamma_spotchecks) < 1e-9

    def test_deterministic_given_seed(self, qubit_sic):
        a = certify(qubit_sic, 2, n_spotchecks=5, seed=42)
        b = certify(qubit_sic, 2, n_spotchecks=5, seed=42)
        assert a.gamma_spotchecks == b.gamma_spotchecks

    def test_resource_guard(self, hoggar):
        with pytest.raises(ResourceGuardError):
            certify(hoggar, 5, n_spotchecks=0)

    def test_mu_consistency_reported(self, qutrit_mub):
        cert = certify(qutrit_mub, 2, n_spotchecks=0)
        assert cert.mu_consistent
        assert cert.mu_spread < 1e-12

    def test_certificate_serializes(self, qubit_sic):
        import json
        cert = certify(qubit_sic, 2, n_spotchecks=2, seed=1)
        payload = json.dumps(cert.to_json_dict())
        assert "span_residual" in payload
