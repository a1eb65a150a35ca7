import numpy as np
import pytest

from conftest import random_valid_genome
from qkdisc.genome import GateSpec, KernelGenome, default_bandwidths, identity_genome
from qkdisc.kernels import gram, overlap_kernel, projected_kernel, save_gram_csv
from qkdisc.simulator import encode, reduced_density


def single_x_gate_genome(bandwidth_slot=9, b=10):
    return KernelGenome(2, 1, (GateSpec(1, 0, 0, 0, 0, bandwidth_slot),), 0b11,
                        default_bandwidths(b))


class TestOverlapKernel:
    def test_self_similarity_is_one(self, rng):
        for _ in range(10):
            g = random_valid_genome(rng, n=3)
            x = rng.uniform(-1, 1, g.d)
            assert abs(overlap_kernel(g, x, x) - 1.0) < 1e-10

    def test_single_gate_closed_form(self):
        g = single_x_gate_genome()
        assert abs(overlap_kernel(g, [0.0], [np.pi / 2]) - 0.5) < 1e-12
        for x, xp in [(0.3, -0.8), (1.0, 1.0), (-0.5, 0.25)]:
            expected = np.cos((x - xp) / 2) ** 2
            assert abs(overlap_kernel(g, [x], [xp]) - expected) < 1e-12

    def test_identity_genome_all_one(self, rng):
        g = identity_genome(3, 3, 4, 10)
        for _ in range(5):
            x, xp = rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 4)
            assert abs(overlap_kernel(g, x, xp) - 1.0) < 1e-10

    def test_symmetry(self, rng):
        g = random_valid_genome(rng, n=3)
        x, xp = rng.uniform(-1, 1, g.d), rng.uniform(-1, 1, g.d)
        assert abs(overlap_kernel(g, x, xp) - overlap_kernel(g, xp, x)) < 1e-12

    def test_bandwidth_concentration(self):
        # single-gate kernels: shrinking the bandwidth moves entries toward 1
        full = single_x_gate_genome(bandwidth_slot=9)   # beta = 1.0
        half = single_x_gate_genome(bandwidth_slot=4)   # beta = 0.5
        for delta in (0.4, 1.2, 2.9):
            assert overlap_kernel(half, [0.0], [delta]) >= \
                overlap_kernel(full, [0.0], [delta])


class TestProjectedKernel:
    def test_full_mask_equals_overlap(self, rng):
        for _ in range(10):
            g = random_valid_genome(rng, n=3)
            g = KernelGenome(g.n, g.d, g.gates, 0b111, g.bandwidths)
            x, xp = rng.uniform(-1, 1, g.d), rng.uniform(-1, 1, g.d)
            assert abs(projected_kernel(g, x, xp) - overlap_kernel(g, x, xp)) < 1e-10

    def test_rxx_one_qubit_mask_closed_form(self):
        g = KernelGenome(2, 1, (GateSpec(1, 1, 0, 0, 0, 9),), 0b01,
                         default_bandwidths(10))
        for x, xp in [(np.pi / 2, np.pi / 2), (0.3, 1.1), (-0.7, 0.2)]:
            expected = (np.cos(x / 2) ** 2 * np.cos(xp / 2) ** 2
                        + np.sin(x / 2) ** 2 * np.sin(xp / 2) ** 2)
            assert abs(projected_kernel(g, [x], [xp]) - expected) < 1e-12
        assert abs(projected_kernel(g, [np.pi / 2], [np.pi / 2]) - 0.5) < 1e-12

    def test_swap_test_identity(self, rng):
        # p0 = (1 + tr[rho rho'])/2 and 2 p0 - 1 recovers the kernel
        for _ in range(20):
            g = random_valid_genome(rng, n=3)
            x, xp = rng.uniform(-1, 1, g.d), rng.uniform(-1, 1, g.d)
            rho = reduced_density(encode(g, x), g.measure_mask)
            rho_p = reduced_density(encode(g, xp), g.measure_mask)
            p0 = (1.0 + np.trace(rho @ rho_p).real) / 2.0
            assert abs(2.0 * p0 - 1.0 - projected_kernel(g, x, xp)) < 1e-12


class TestGram:
    def test_identity_genome_all_ones(self, rng):
        g = identity_genome(2, 2, 3, 10)
        K = gram(g, rng.uniform(-1, 1, (5, 3)))
        assert np.max(np.abs(K - 1.0)) < 1e-10

    def test_one_sample_full_mask(self, rng):
        g = random_valid_genome(rng, n=2, d=2)
        K = gram(g, rng.uniform(-1, 1, (1, 2)))
        assert K.shape == (1, 1)
        assert abs(K[0, 0] - 1.0) < 1e-10

    def test_matches_entrywise_loop(self, rng):
        g = random_valid_genome(rng, n=3, d=2)
        X = rng.uniform(-1, 1, (5, 2))
        K = gram(g, X)
        for i in range(5):
            for j in range(5):
                assert abs(K[i, j] - overlap_kernel(g, X[i], X[j])) < 1e-12
        Kp = gram(g, X, projected=True)
        for i in range(5):
            for j in range(5):
                assert abs(Kp[i, j] - projected_kernel(g, X[i], X[j])) < 1e-12

    def test_rectangular(self, rng):
        g = random_valid_genome(rng, n=2, d=2)
        X, Z = rng.uniform(-1, 1, (4, 2)), rng.uniform(-1, 1, (3, 2))
        K = gram(g, X, Z)
        assert K.shape == (4, 3)
        for i in range(4):
            for j in range(3):
                assert abs(K[i, j] - overlap_kernel(g, X[i], Z[j])) < 1e-12

    def test_empty_dataset(self, rng):
        g = random_valid_genome(rng, d=2)
        assert gram(g, np.zeros((0, 2))).shape == (0, 0)

    def test_psd_and_symmetric(self, rng):
        for _ in range(25):
            g = random_valid_genome(rng, n=int(rng.integers(2, 5)))
            X = rng.uniform(-1, 1, (6, g.d))
            for projected in (False, True):
                K = gram(g, X, projected=projected)
                assert np.max(np.abs(K - K.T)) <= 1e-12
                assert np.linalg.eigvalsh(K).min() >= -1e-8
                assert K.min() >= -1e-12 and K.max() <= 1.0 + 1e-12

    def test_projected_diagonal_is_purity(self, rng):
        g = KernelGenome(2, 1, (GateSpec(1, 1, 0, 0, 0, 9),), 0b01,
                         default_bandwidths(10))
        X = np.array([[np.pi / 2]])
        K = gram(g, X, projected=True)
        assert abs(K[0, 0] - 0.5) < 1e-12  # maximally mixed qubit

    def test_csv_export(self, rng, tmp_path):
        g = random_valid_genome(rng, n=2, d=2)
        K = gram(g, rng.uniform(-1, 1, (3, 2)))
        path = tmp_path / "gram.csv"
        save_gram_csv(K, path)
        loaded = np.loadtxt(path, delimiter=",")
        assert np.allclose(loaded, K, atol=1e-15)
