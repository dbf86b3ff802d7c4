import itertools
import math

import numpy as np
import pytest
import scipy.linalg

from stellarwitness.fock_gaussian import GaussianUnitaryParams, gaussian_block
from stellarwitness.multimode import (
    MultimodeGaussianParams,
    MultimodeWitness,
    apply_passive,
    compress_conjugated_multimode,
    conjugate_multimode_witness,
    enumerate_subspace,
    multimode_fock_projector,
    multimode_gaussian_block,
    multimode_objective,
    multimode_result_to_json,
    multimode_threshold,
    sector_indices,
)
from stellarwitness.threshold import OptimizerConfig, compute_threshold
from stellarwitness.witness import fock_diagonal_witness, fock_pair_witness

FAST = OptimizerConfig(starts=16, max_iterations=400, seed=23)


def identity_params(modes):
    return MultimodeGaussianParams.from_generator(
        np.zeros((modes, modes), dtype=complex), (0.0,) * modes, (0.0,) * modes
    )


def product_index(occ, dim):
    idx = 0
    for o in occ:
        idx = idx * dim + o
    return idx


def product_space_unitary(params, cutoff):
    """Full product-space oracle: exponentials of kron'd truncated generators."""
    modes = params.modes
    dim = cutoff + 1
    a_single = np.diag(np.sqrt(np.arange(1.0, dim)), 1).astype(complex)
    mode_ops = []
    for k in range(modes):
        factors = [np.eye(dim, dtype=complex)] * modes
        factors[k] = a_single
        full = factors[0]
        for factor in factors[1:]:
            full = np.kron(full, factor)
        mode_ops.append(full)
    X = params.generator
    passive_gen = sum(
        X[j, k] * (mode_ops[j].conj().T @ mode_ops[k])
        for j in range(modes)
        for k in range(modes)
    )
    total = scipy.linalg.expm(passive_gen)
    for k in range(modes):
        a = mode_ops[k]
        ad = a.conj().T
        squeeze = scipy.linalg.expm(0.5 * params.squeezings[k] * (ad @ ad - a @ a))
        alpha = params.displacements[k]
        displace = scipy.linalg.expm(alpha * ad - np.conjugate(alpha) * a)
        total = displace @ squeeze @ total
    return total


class TestEnumeration:
    def test_single_mode(self):
        assert enumerate_subspace(1, 2) == [(0,), (1,), (2,)]

    def test_two_modes_one_photon(self):
        assert enumerate_subspace(2, 1) == [(0, 0), (1, 0), (0, 1)]

    def test_three_modes_count(self):
        assert len(enumerate_subspace(3, 4)) == 35  # C(7, 3)

    def test_totals_and_ordering(self):
        out = enumerate_subspace(3, 3)
        totals = [sum(occ) for occ in out]
        assert totals == sorted(totals)
        assert len(set(out)) == len(out)

    def test_sector_sizes(self):
        assert len(sector_indices(3, 2)) == 6  # C(4, 2)


class TestParams:
    def test_unitarity_enforced(self):
        bad = np.array([[1.0, 0.1], [0.0, 1.0]], dtype=complex)
        with pytest.raises(ValueError):
            MultimodeGaussianParams(bad, (0.0, 0.0), (0.0, 0.0))

    def test_from_generator_round_trip(self):
        H = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, -0.4]])
        params = MultimodeGaussianParams.from_generator(1j * H, (0.1, 0.2), (1j, 0.5))
        again = MultimodeGaussianParams.from_json(params.to_json())
        assert np.max(np.abs(again.interferometer - params.interferometer)) < 1e-12


class TestPassiveAction:
    def test_photon_number_preserved(self):
        X = 1j * np.array([[0.2, 0.5 - 0.3j], [0.5 + 0.3j, -0.1]])
        out = apply_passive(X, {(2, 0): 1.0 + 0j})
        assert set(map(sum, out)) == {2}
        assert abs(sum(abs(v) ** 2 for v in out.values()) - 1.0) < 1e-12

    def test_beamsplitter_on_single_photon(self):
        # 50:50 coupler: |1,0> -> (|1,0> - i|0,1>)/sqrt(2) for X = -i(pi/4)(sigma_x)
        X = -1j * (math.pi / 4) * np.array([[0.0, 1.0], [1.0, 0.0]])
        out = apply_passive(X, {(1, 0): 1.0 + 0j})
        assert abs(abs(out[(1, 0)]) - 1 / math.sqrt(2)) < 1e-12
        assert abs(abs(out[(0, 1)]) - 1 / math.sqrt(2)) < 1e-12


class TestBlocks:
    def test_identity_params(self):
        params = identity_params(2)
        block = multimode_gaussian_block(params, 1, 1)
        rows = enumerate_subspace(2, 1)
        cols = list(itertools.product(range(2), repeat=2))
        for i, occ_row in enumerate(rows):
            for j, occ_col in enumerate(cols):
                expected = 1.0 if occ_row == occ_col else 0.0
                assert abs(block[i, j] - expected) < 1e-12

    def test_beamsplitter_block_matches_oracle(self):
        X = -1j * (math.pi / 4) * np.array([[0.0, 1.0], [1.0, 0.0]])
        params = MultimodeGaussianParams.from_generator(X, (0.0, 0.0), (0.0, 0.0))
        cutoff = 3
        block = multimode_gaussian_block(params, 2, cutoff)
        oracle = product_space_unitary(params, cutoff + 6)
        rows = enumerate_subspace(2, 2)
        cols = list(itertools.product(range(cutoff + 1), repeat=2))
        for i, occ_row in enumerate(rows):
            for j, occ_col in enumerate(cols):
                expected = oracle[
                    product_index(occ_row, cutoff + 7), product_index(occ_col, cutoff + 7)
                ]
                assert abs(block[i, j] - expected) < 1e-8

    def test_product_params_factorize(self):
        params = MultimodeGaussianParams.from_generator(
            np.zeros((2, 2), dtype=complex), (0.4, 0.1), (0.5 + 0.2j, -0.3j)
        )
        cutoff = 3
        block = multimode_gaussian_block(params, 2, cutoff)
        singles = [
            gaussian_block(GaussianUnitaryParams(r=params.squeezings[k], alpha=params.displacements[k]), 2, cutoff)
            for k in range(2)
        ]
        rows = enumerate_subspace(2, 2)
        cols = list(itertools.product(range(cutoff + 1), repeat=2))
        for i, occ_row in enumerate(rows):
            for j, occ_col in enumerate(cols):
                expected = singles[0][occ_row[0], occ_col[0]] * singles[1][occ_row[1], occ_col[1]]
                assert abs(block[i, j] - expected) < 1e-8

    def test_general_params_match_oracle(self):
        H = np.array([[0.4, 0.3 - 0.2j], [0.3 + 0.2j, -0.5]])
        params = MultimodeGaussianParams.from_generator(
            1j * H, (0.3, 0.5), (0.4 - 0.1j, 0.2 + 0.3j)
        )
        cutoff = 2
        block = multimode_gaussian_block(params, 2, cutoff)
        dim = 26  # per-mode oracle truncation covering the r=0.5 spread
        oracle = product_space_unitary(params, dim - 1)
        rows = enumerate_subspace(2, 2)
        cols = list(itertools.product(range(cutoff + 1), repeat=2))
        worst = max(
            abs(block[i, j] - oracle[product_index(r, dim), product_index(c, dim)])
            for i, r in enumerate(rows)
            for j, c in enumerate(cols)
        )
        assert worst < 1e-8

    def test_block_isometry_on_low_columns(self):
        H = np.array([[0.2, 0.1j], [-0.1j, 0.1]])
        params = MultimodeGaussianParams.from_generator(1j * H, (0.2, 0.3), (0.3, 0.1j))
        block = multimode_gaussian_block(params, 10, 1)
        norms = np.linalg.norm(block, axis=0)
        assert np.all(norms <= 1.0 + 1e-9)
        # the vacuum column must be nearly complete at these mild parameters
        assert abs(norms[0] - 1.0) < 1e-6


class TestThreshold:
    def test_two_mode_vacuum(self):
        result = multimode_threshold(multimode_fock_projector((0, 0)), 2, 1, FAST)
        assert abs(result.value - 1.0) <= 1e-5

    def test_single_photon_mode_matches_single_mode(self):
        single = compute_threshold(fock_diagonal_witness([0.0, 1.0]), 1, FAST)
        embedded = np.zeros(10)
        embedded[5] = single.params.r
        embedded[8] = single.params.alpha.real
        embedded[9] = single.params.alpha.imag
        config = OptimizerConfig(
            starts=16, max_iterations=400, seed=23, initial_points=(tuple(embedded),)
        )
        result = multimode_threshold(multimode_fock_projector((0, 1)), 2, 1, config)
        assert result.value >= single.value - 1e-6

    def test_two_photon_pair_monotone(self):
        witness = multimode_fock_projector((1, 1))
        r1 = multimode_threshold(witness, 2, 1, FAST)
        r2 = multimode_threshold(witness, 2, 2, FAST)
        assert 0.0 < r1.value <= r2.value + 1e-7
        assert r2.value <= 1.0 + 1e-9

    def test_single_mode_reduction(self):
        witness = MultimodeWitness(
            modes=1,
            terms=(
                (math.cos(0.7), {(0,): 1.0 + 0j}),
                (math.sin(0.7), {(2,): 1.0 + 0j}),
            ),
        )
        reduced = multimode_threshold(witness, 1, 1, OptimizerConfig(starts=24, max_iterations=500, seed=7))
        single = compute_threshold(fock_pair_witness(0, 2, 0.7), 1, OptimizerConfig(starts=24, max_iterations=500, seed=7))
        assert abs(reduced.value - single.value) <= 1e-6

    def test_subspace_dimension(self):
        witness = multimode_fock_projector((1, 1))
        params = identity_params(2)
        for n in (1, 2, 3):
            out = compress_conjugated_multimode(witness, params, n)
            expected = len(enumerate_subspace(2, n - 1))
            assert out.shape == (expected, expected)

    def test_passive_conjugation_invariance(self):
        # trailing interferometers cannot change thresholds
        witness = multimode_fock_projector((0, 1))
        X = 1j * np.array([[0.15, 0.3 - 0.2j], [0.3 + 0.2j, -0.25]])
        conjugated = conjugate_multimode_witness(witness, X)
        cfg = OptimizerConfig(starts=24, max_iterations=500, seed=31)
        base = multimode_threshold(witness, 2, 1, cfg)
        moved = multimode_threshold(conjugated, 2, 1, cfg)
        assert abs(base.value - moved.value) <= 2e-5

    def test_mode_count_guard(self):
        with pytest.raises(ValueError):
            multimode_threshold(multimode_fock_projector((0, 0, 0, 0)), 4, 1, FAST)

    def test_objective_at_identity(self):
        witness = multimode_fock_projector((0, 0))
        assert multimode_objective(witness, 1, identity_params(2)) == 1.0


class TestFiles:
    def test_witness_round_trip(self):
        witness = MultimodeWitness(
            modes=2,
            terms=((0.6, {(0, 1): 1.0 + 0j, (1, 0): 0.5j}),),
            identity_weight=0.25,
        )
        again = MultimodeWitness.from_json(witness.to_json())
        assert again.modes == 2
        assert again.identity_weight == 0.25
        assert again.terms[0][1][(1, 0)] == 0.5j

    def test_result_payload(self):
        result = multimode_threshold(multimode_fock_projector((0, 0)), 2, 1, FAST)
        payload = multimode_result_to_json(multimode_fock_projector((0, 0)), result)
        assert payload["modes"] == 2
        assert payload["rank"] == 1
        assert "interferometer" in payload["params"]
