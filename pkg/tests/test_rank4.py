import numpy as np
import pytest

from entcert.certificates import (
    Distillable,
    PptEntangled,
    Separable,
    validate_witness,
)
from entcert.criteria import is_ppt
from entcert.families import make_tiles_upb, make_shifts_upb, shifts_bipartite_cut
from entcert.linalg import rel_residual
from entcert.random_states import (
    complex_gaussian,
    random_invertible,
    random_product_sum,
    random_rank_r_state,
)
from entcert.rank4 import (
    decide_rank4,
    separable_decomposition,
    separable_decomposition_rank_n,
)
from entcert.states import BipartiteState, apply_local

from conftest import ppt_rank_n_state


def npt_rank4_with_product(rng):
    while True:
        prod = np.kron(complex_gaussian(rng, 3), complex_gaussian(rng, 3))
        vecs = [prod] + [complex_gaussian(rng, 9) for _ in range(3)]
        state = BipartiteState.from_vectors(3, 3, vecs)
        if not is_ppt(state)[0] and state.rank() == 4:
            return state


def test_decide_rank4_tiles_ppt_entangled(rng):
    verdict = decide_rank4(make_tiles_upb(), rng=rng)
    assert isinstance(verdict.outcome, PptEntangled)
    assert "no-product-in-range" in verdict.trail


def test_decide_rank4_separable_products(rng):
    for _ in range(5):
        state = random_product_sum(3, 3, 4, rng)
        verdict = decide_rank4(state, rng=rng)
        assert isinstance(verdict.outcome, Separable)
        rec = verdict.outcome.reconstruct(3, 3)
        assert rel_residual(rec, state.matrix) < 1e-8
        assert len(verdict.outcome.products) == 4


def test_decide_rank4_npt_with_product_distillable(rng):
    for _ in range(5):
        state = npt_rank4_with_product(rng)
        verdict = decide_rank4(state, rng=rng)
        assert isinstance(verdict.outcome, Distillable)
        assert validate_witness(state, verdict.outcome.witness) < -1e-10


def test_decide_rank4_shifts_cut_separable(rng):
    rho8, _ = make_shifts_upb()
    for cut in "ABC":
        state = shifts_bipartite_cut(rho8, cut)
        verdict = decide_rank4(state, rng=rng)
        assert isinstance(verdict.outcome, Separable)
        rec = verdict.outcome.reconstruct(2, 4)
        assert rel_residual(rec, state.matrix) < 1e-8


def test_decide_rank4_rejects_wrong_rank(rng):
    state = random_rank_r_state(3, 3, 3, rng)
    with pytest.raises(ValueError, match="rank"):
        decide_rank4(state, rng=rng)


def test_decide_rank4_never_crosses_ppt(rng):
    # Separable only for PPT inputs, Distillable only for NPT inputs
    for _ in range(8):
        state = random_product_sum(3, 3, 4, rng)
        ppt, _ = is_ppt(state)
        verdict = decide_rank4(state, rng=rng)
        if isinstance(verdict.outcome, Separable):
            assert ppt
        if isinstance(verdict.outcome, Distillable):
            assert not ppt


def test_decide_rank4_verdict_ilo_invariant(rng):
    state = random_product_sum(3, 3, 4, rng)
    for _ in range(5):
        conj = apply_local(state, random_invertible(3, rng),
                           random_invertible(3, rng))
        verdict = decide_rank4(conj, rng=rng)
        assert isinstance(verdict.outcome, Separable)
    state = npt_rank4_with_product(rng)
    for _ in range(5):
        conj = apply_local(state, random_invertible(3, rng),
                           random_invertible(3, rng))
        verdict = decide_rank4(conj, rng=rng)
        assert isinstance(verdict.outcome, Distillable)


def test_decide_rank4_reducible_route(rng):
    # B-direct sum: an entangled pair on B-levels {0,1} plus a product
    # on B-level 2, conjugated; NPT component makes the sum distillable
    bell = np.zeros(9, dtype=complex)
    bell[0] = bell[4] = 1.0
    prod = np.kron(complex_gaussian(rng, 3), np.array([0, 0, 1.0]))
    extra = np.kron(complex_gaussian(rng, 3), np.array([0.3, 1.0, 0]))
    state = BipartiteState.from_vectors(3, 3, [bell, prod, extra])
    state = apply_local(state, random_invertible(3, rng), random_invertible(3, rng))
    assert state.rank() == 3 or state.rank() == 4
    if state.rank() == 4:
        verdict = decide_rank4(state, rng=rng)
        assert isinstance(verdict.outcome, Distillable)
        assert verdict.trail[0].startswith("reducible")


def test_product_in_range_never_ppt_entangled(rng):
    # rank-4 3x3 states with a product vector in range are never
    # classified PPT entangled
    for _ in range(10):
        prod = np.kron(complex_gaussian(rng, 3), complex_gaussian(rng, 3))
        vecs = [prod] + [complex_gaussian(rng, 9) for _ in range(3)]
        state = BipartiteState.from_vectors(3, 3, vecs)
        verdict = decide_rank4(state, rng=rng)
        assert not isinstance(verdict.outcome, PptEntangled)


def test_separable_decomposition_rank_n_diagonal(rng):
    diag = np.zeros(9)
    diag[[0, 4, 8]] = [1.0, 2.0, 0.5]
    state = BipartiteState(3, 3, np.diag(diag).astype(complex))
    products = separable_decomposition_rank_n(state, rng=rng)
    assert len(products) == 3
    cert = Separable(products=tuple(products))
    assert rel_residual(cert.reconstruct(3, 3), state.matrix) < 1e-10


def test_separable_decomposition_rank_n_commuting_blocks(rng):
    for dims in ((3, 3), (2, 3), (3, 4)):
        state = ppt_rank_n_state(*dims, rng)
        products = separable_decomposition_rank_n(state, rng=rng)
        assert len(products) == max(dims)
        cert = Separable(products=tuple(products))
        assert rel_residual(cert.reconstruct(*dims), state.matrix) < 1e-8


def test_separable_decomposition_rank_n_rejects_npt(rng):
    while True:
        state = random_rank_r_state(3, 3, 3, rng)
        if not is_ppt(state)[0]:
            break
    with pytest.raises((ValueError, RuntimeError)):
        separable_decomposition_rank_n(state, rng=rng)


def test_peeling_2x2_full_rank(rng):
    state = random_product_sum(2, 2, 6, rng)
    assert state.rank() == 4
    products = separable_decomposition(state, rng=rng)
    cert = Separable(products=tuple(products))
    assert rel_residual(cert.reconstruct(2, 2), state.matrix) < 1e-7


def test_peeling_2x3_rank4(rng):
    hits = 0
    while hits < 3:
        state = random_product_sum(2, 3, 4, rng)
        if state.rank() != 4:
            continue
        products = separable_decomposition(state, rng=rng)
        cert = Separable(products=tuple(products))
        assert rel_residual(cert.reconstruct(2, 3), state.matrix) < 1e-7
        hits += 1


def test_simultaneous_diagonalization_residual(rng):
    from entcert.linalg import dagger
    from entcert.rank4 import _simultaneous_diagonalize
    from entcert.random_states import random_unitary

    u = random_unitary(4, rng)
    mats = [u @ np.diag(complex_gaussian(rng, 4)) @ dagger(u) for _ in range(3)]
    basis = _simultaneous_diagonalize(mats, None)
    for m in mats:
        conj = dagger(basis) @ m @ basis
        off = np.linalg.norm(conj - np.diag(np.diag(conj)))
        assert off <= 1e-8 * np.linalg.norm(m)


def test_simultaneous_diagonalization_degenerate(rng):
    from entcert.linalg import dagger
    from entcert.rank4 import _simultaneous_diagonalize
    from entcert.random_states import random_unitary

    u = random_unitary(4, rng)
    d1 = np.diag([1.0, 1.0, 2.0, 2.0]).astype(complex)   # degenerate
    d2 = np.diag([3.0, 4.0, 5.0, 5.0]).astype(complex)   # splits the first pair
    mats = [u @ d1 @ dagger(u), u @ d2 @ dagger(u)]
    basis = _simultaneous_diagonalize(mats, None)
    for m in mats:
        conj = dagger(basis) @ m @ basis
        off = np.linalg.norm(conj - np.diag(np.diag(conj)))
        assert off <= 1e-8 * np.linalg.norm(m)


def test_decide_rank4_ilo_invariance_100_fixtures(rng):
    # verdict class is stable under random invertible local conjugation
    fixtures = []
    for _ in range(10):
        fixtures.append((random_product_sum(3, 3, 4, rng), Separable))
    for _ in range(10):
        fixtures.append((npt_rank4_with_product(rng), Distillable))
    checked = 0
    for state, expected in fixtures:
        for _ in range(5):
            conj = apply_local(state, random_invertible(3, rng),
                               random_invertible(3, rng))
            verdict = decide_rank4(conj, rng=rng)
            assert isinstance(verdict.outcome, expected)
            checked += 1
    assert checked == 100


def test_decide_rank4_padded_dimensions(rng):
    # input dimensions exceeding the local ranks are compressed away
    tiles = make_tiles_upb()
    pad = np.zeros((16, 16), dtype=complex)
    emb_a = np.zeros((4, 3), dtype=complex)
    emb_a[:3, :] = np.eye(3)
    emb_b = np.zeros((4, 3), dtype=complex)
    emb_b[1:, :] = np.eye(3)
    op = np.kron(emb_a, emb_b)
    padded = BipartiteState(4, 4, op @ tiles.matrix @ op.conj().T)
    verdict = decide_rank4(padded, rng=rng)
    assert isinstance(verdict.outcome, PptEntangled)
