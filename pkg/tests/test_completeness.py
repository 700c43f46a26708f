"""Honest runs of every protocol on random seeded instances always accept with the right output."""
import pytest

from vermat.dotprod import chunked_dp, chunked_keygen, gen_dp, gen_keygen, rank1_dp, rank1_keygen
from vermat.fg_baseline import fg_run
from vermat.fplinalg import FieldVector, matvec, matvec_integer, random_dense, random_vector
from vermat.freivalds import challenge_private, freivalds_compute, verify_one
from vermat.pvmat import pvmat_run
from vermat.schemas import ChunkParams, DotProductDims
from vermat.smallfield import sf_verify_flow
from vermat.spmv_interactive import spmv_run

RUNS = 200


@pytest.fixture(params=["toy101", "toy2503"])
def suite(request):
    return request.getfixturevalue(request.param)


def _shape(rng, largest=5):
    return rng.randrange(1, largest + 1), rng.randrange(1, largest + 1)


def _matrix_instance(suite, rng):
    m, n = _shape(rng)
    return random_dense(m, n, suite.p, rng), random_vector(n, suite.p, rng)


def test_freivalds(suite, rng):
    for _ in range(RUNS):
        A, x = _matrix_instance(suite, rng)
        y = freivalds_compute(A, x)
        verdict = verify_one(challenge_private(A, rng), x, y)
        assert verdict.accepted
        assert verdict.y == matvec(A, x)


def test_fg(suite, rng):
    for _ in range(RUNS):
        A, x = _matrix_instance(suite, rng)
        assert fg_run(A, x, suite, rng).y == matvec(A, x)


def test_spmv(suite, rng):
    for _ in range(RUNS):
        A, x = _matrix_instance(suite, rng)
        assert spmv_run(A, x, suite, rng).y == matvec(A, x)


def test_pvmat(suite, rng):
    for _ in range(RUNS):
        A, x = _matrix_instance(suite, rng)
        assert pvmat_run(A, x, suite, rng).y == matvec(A, x)


def test_rank1_dot_product(suite, rng):
    for _ in range(RUNS):
        m = rng.randrange(1, 20)
        keys = rank1_keygen(suite, DotProductDims.unbalanced(m, ratio=4), rng)
        y = random_vector(m, suite.p, rng)
        assert rank1_dp(keys, y, suite, rng).value == suite.gT ** keys.u.dot(y)


def test_general_dot_product(suite, rng):
    for _ in range(RUNS):
        m = rng.randrange(1, 20)
        u, y = random_vector(m, suite.p, rng), random_vector(m, suite.p, rng)
        keys = gen_keygen(suite, u, DotProductDims.cube_root(m), rng)
        assert gen_dp(keys, y, suite, rng).value == suite.g1 ** u.dot(y)


def test_chunked_dot_product(suite, rng):
    for _ in range(RUNS):
        m = rng.randrange(1, 20)
        params = ChunkParams.for_length(m, 0.5)
        u, y = random_vector(m, suite.p, rng), random_vector(m, suite.p, rng)
        keys = chunked_keygen(suite, u, params, rng)
        assert chunked_dp(params, keys, y, suite, rng).value == suite.g1 ** u.dot(y)


# m n p^4 must stay below q
@pytest.mark.parametrize("suite_name, p, largest", [("toy101", 2, 6), ("toy2503", 3, 30)])
def test_small_field(request, rng, suite_name, p, largest):
    suite = request.getfixturevalue(suite_name)
    for _ in range(RUNS):
        m, n = _shape(rng)
        while m * n > largest:
            m, n = _shape(rng)
        A = random_dense(m, n, p, rng)
        x = [rng.randrange(p) for _ in range(n)]
        verdict = sf_verify_flow(A, x, suite, rng)
        assert verdict.accepted
        assert verdict.y == FieldVector(matvec_integer(A, x), p)


# ============================================================================
# BN254
# ============================================================================

REAL_RUNS = 20


@pytest.mark.real
@pytest.mark.slow
@pytest.mark.parametrize("run", [fg_run, spmv_run, pvmat_run], ids=["fg", "spmv", "pvmat"])
def test_real_matrix_protocols(real, rng, run):
    for _ in range(REAL_RUNS):
        A = random_dense(2, 2, real.p, rng)
        x = random_vector(2, real.p, rng)
        assert run(A, x, real, rng).y == matvec(A, x)


@pytest.mark.real
@pytest.mark.slow
def test_real_dot_products(real, rng):
    dims = DotProductDims(m=4, b1=2, b2=2)
    for _ in range(REAL_RUNS):
        y = random_vector(4, real.p, rng)
        r1 = rank1_keygen(real, dims, rng)
        assert rank1_dp(r1, y, real, rng).value == real.gT ** r1.u.dot(y)
        gen = gen_keygen(real, r1.u, dims, rng)
        assert gen_dp(gen, y, real, rng).value == real.g1 ** r1.u.dot(y)


@pytest.mark.real
@pytest.mark.slow
def test_real_small_field(real, rng):
    for _ in range(REAL_RUNS):
        A = random_dense(2, 2, 5, rng)
        x = [rng.randrange(5) for _ in range(2)]
        assert sf_verify_flow(A, x, real, rng).y == FieldVector(matvec_integer(A, x), 5)
