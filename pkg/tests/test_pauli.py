import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pauli_word_matrix
from qkdisc.pauli import (
    DlaClosureResult,
    PauliDimensionError,
    PauliString,
    anticommutes,
    default_rank_threshold,
    dla_closure,
    pauli_product,
)

P = PauliString.from_label


def brute_force_closure(generators):
    """Matrix-commutator closure oracle over explicit 2^n x 2^n matrices.

    Keeps a list of dense matrices, adds every commutator that is linearly
    independent of the current span (checked by least squares on the
    vectorized matrices), and reads the resulting words back by projecting
    onto the full Pauli-word basis.
    """
    gens = [g for g in generators if not g.is_identity]
    if not gens:
        return set()
    n = gens[0].n
    mats = []
    for g in gens:
        M = pauli_word_matrix(g)
        if not _in_span(mats, M):
            mats.append(M)
    changed = True
    while changed:
        changed = False
        for A in list(mats):
            for B in list(mats):
                C = A @ B - B @ A
                if np.max(np.abs(C)) < 1e-9:
                    continue
                if not _in_span(mats, C):
                    mats.append(C)
                    changed = True
    # read off which Pauli words live in the span
    words = set()
    for x_mask in range(1 << n):
        for z_mask in range(1 << n):
            if x_mask == 0 and z_mask == 0:
                continue
            word = PauliString(n, x_mask, z_mask)
            if _in_span(mats, pauli_word_matrix(word)):
                words.add(word)
    assert len(words) == len(mats)
    return words


def _in_span(mats, M):
    if not mats:
        return False
    A = np.column_stack([m.ravel() for m in mats])
    coef, *_ = np.linalg.lstsq(A, M.ravel(), rcond=None)
    return np.max(np.abs(A @ coef - M.ravel())) < 1e-7


def random_pauli(rng, n):
    while True:
        x, z = int(rng.integers(1 << n)), int(rng.integers(1 << n))
        if x or z:
            return PauliString(n, x, z)


class TestAnticommutes:
    def test_single_qubit_x_z(self):
        assert anticommutes(P("XI"), P("ZI"))

    def test_two_sign_flips_cancel(self):
        assert not anticommutes(P("XX"), P("ZZ"))

    def test_yz_zz(self):
        # oracle: explicit 4x4 commutator is nonzero
        a, b = P("YZ"), P("ZZ")
        A, B = pauli_word_matrix(a), pauli_word_matrix(b)
        assert np.max(np.abs(A @ B - B @ A)) > 1e-9
        assert anticommutes(a, b)

    def test_dimension_mismatch(self):
        with pytest.raises(PauliDimensionError):
            anticommutes(P("X"), P("XX"))

    @given(st.integers(1, 4), st.data())
    def test_symmetric_and_never_self(self, n, data):
        x1 = data.draw(st.integers(0, (1 << n) - 1))
        z1 = data.draw(st.integers(0, (1 << n) - 1))
        x2 = data.draw(st.integers(0, (1 << n) - 1))
        z2 = data.draw(st.integers(0, (1 << n) - 1))
        a, b = PauliString(n, x1, z1), PauliString(n, x2, z2)
        assert anticommutes(a, b) == anticommutes(b, a)
        assert not anticommutes(a, a)


class TestPauliProduct:
    def test_zz_times_yz(self):
        # matrix oracle: (Z@Z)(Y@Z) = -i X@I, phase dropped
        prod = pauli_word_matrix(P("ZZ")) @ pauli_word_matrix(P("YZ"))
        assert np.allclose(prod, -1j * pauli_word_matrix(P("XI")))
        assert pauli_product(P("ZZ"), P("YZ")) == P("XI")

    def test_involution(self):
        a = P("XYZ")
        assert pauli_product(a, a).is_identity

    def test_disjoint_supports(self):
        assert pauli_product(P("XI"), P("IZ")) == P("XZ")

    @given(st.integers(1, 4), st.data())
    def test_associative_on_masks(self, n, data):
        words = [
            PauliString(n, data.draw(st.integers(0, (1 << n) - 1)),
                        data.draw(st.integers(0, (1 << n) - 1)))
            for _ in range(3)
        ]
        a, b, c = words
        assert pauli_product(pauli_product(a, b), c) == \
            pauli_product(a, pauli_product(b, c))


class TestLabels:
    def test_round_trip(self):
        for label in ("XZI", "Y", "IIII", "XYZI"):
            assert P(label).to_label() == label

    def test_bad_label(self):
        with pytest.raises(ValueError):
            P("XQ")


class TestDlaClosure:
    def test_su2(self):
        result = dla_closure({P("X"), P("Z")}, 10)
        assert {w.to_label() for w in result.basis} == {"X", "Y", "Z"}
        assert result.rank == 3
        assert not result.truncated

    def test_two_qubit_example(self):
        result = dla_closure({P("XI"), P("ZZ")}, 10)
        assert {w.to_label() for w in result.basis} == {"XI", "ZZ", "YZ"}
        assert result.rank == 3

    def test_threshold_truncates(self):
        result = dla_closure({P("XI"), P("ZZ")}, 2)
        assert result.truncated
        assert result.rank >= 2

    def test_empty_generators(self):
        result = dla_closure([], 5)
        assert result == DlaClosureResult(basis=(), rank=0, truncated=False)

    def test_identity_excluded(self):
        result = dla_closure({P("II"), P("XI")}, 10)
        assert result.rank == 1

    def test_default_threshold(self):
        assert default_rank_threshold(3) == 63
        with pytest.raises(ValueError):
            default_rank_threshold(7)

    def test_closed_under_commutation(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 4))
            gens = {random_pauli(rng, n) for _ in range(int(rng.integers(1, 4)))}
            result = dla_closure(gens)
            assert not result.truncated or result.rank >= 4**n - 1
            basis = set(result.basis)
            if not result.truncated:
                for a in basis:
                    for b in basis:
                        if anticommutes(a, b):
                            assert pauli_product(a, b) in basis

    def test_rank_bound(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 4))
            gens = {random_pauli(rng, n) for _ in range(3)}
            assert dla_closure(gens).rank <= 4**n - 1

    def test_matches_matrix_oracle(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 4))
            gens = {random_pauli(rng, n)
                    for _ in range(int(rng.integers(1, 5)))}
            mine = set(dla_closure(gens).basis)
            assert mine == brute_force_closure(gens)

    def test_deterministic_order(self):
        r1 = dla_closure({P("XI"), P("ZZ"), P("YI")})
        r2 = dla_closure([P("YI"), P("XI"), P("ZZ")])
        assert r1.basis == r2.basis
