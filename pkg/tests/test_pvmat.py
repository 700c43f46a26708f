import math

import pytest

from vermat.errors import DimensionError
from vermat.fplinalg import FieldMatrix, FieldVector, matvec, random_dense, random_sparse, random_vector
from vermat.pairing_core import op_scope
from vermat.pvmat import (PvmatProof, PvmatSecrets, PvmatVerificationKey, pvmat_compute, pvmat_keygen,
                          pvmat_probgen, pvmat_run, pvmat_verify)
from vermat.schemas import PvmatParams, VerifyMode

P = 101
SQUARE = PvmatParams(m=4, n=4, b1=2, b2=2, c1=2, c2=2, d1=2, d2=2)


def _instance(suite, rng, params=SQUARE):
    A = random_dense(params.m, params.n, suite.p, rng)
    x = random_vector(params.n, suite.p, rng)
    keys = pvmat_keygen(A, params, suite, rng)
    return A, x, keys


def _replace(proof, **changes):
    fields = dict(y=proof.y, zeta=proof.zeta, s1=proof.s1, s2=proof.s2, z=proof.z, C=proof.C)
    fields.update(changes)
    return PvmatProof(**fields)


# ============================================================================
# KEYS
# ============================================================================

def test_omega_logs(toy101, rng):
    A, _, keys = _instance(toy101, rng)
    sec = keys.secrets
    uA = [sum(keys.u[i] * A.entry(i, j) for i in range(4)) for j in range(4)]
    expected = [(uA[j] + keys.t[j] + sec.gamma * sec.delta * sec.v[j]) % P for j in range(4)]
    assert [w.value for w in keys.ek.omega] == expected


def test_structured_secrets(toy101, rng):
    _, _, keys = _instance(toy101, rng)
    sec = keys.secrets
    assert list(keys.u) == [sec.mu[l // 2] * sec.eta[l % 2] % P for l in range(4)]
    assert list(keys.t) == [(sec.rho1[l // 2] * sec.tau1[l % 2] + sec.rho2[l // 2] * sec.tau2[l % 2]) % P
                            for l in range(4)]


def test_zero_matrix_leaves_only_masks(toy101, rng):
    A = FieldMatrix.zeros(4, 4, P)
    keys = pvmat_keygen(A, SQUARE, toy101, rng)
    sec = keys.secrets
    assert [w.value for w in keys.ek.omega] == [
        (keys.t[j] + sec.gamma * sec.delta * sec.v[j]) % P for j in range(4)
    ]


def test_verification_key_holds_no_field_vectors():
    assert "A" not in PvmatVerificationKey.model_fields
    assert all(name == "params" or name.startswith(("g1_", "g2_"))
               for name in PvmatVerificationKey.model_fields)


def test_keygen_checks_dimensions(toy101, rng):
    with pytest.raises(DimensionError):
        pvmat_keygen(random_dense(3, 4, P, rng), SQUARE, toy101, rng)


def test_default_params_cover_lengths():
    for m, n in [(1, 1), (7, 13), (64, 64), (100, 30)]:
        params = PvmatParams.defaults(m, n)
        assert params.b1 * params.b2 >= m
        assert params.c1 * params.c2 >= n
        assert params.d1 * params.d2 >= n
    params = PvmatParams.defaults(100, 100)
    assert (params.b1, params.b2) == (1, 100)
    assert params.d2 == math.ceil(3 * 100 ** (2 / 3))


# ============================================================================
# PROBGEN AND COMPUTE
# ============================================================================

def test_probgen_is_identity_and_free():
    with op_scope("trustee") as counters:
        sigma = pvmat_probgen([1, 2, 3], P)
    assert sigma.x == FieldVector([1, 2, 3], P)
    assert pvmat_probgen([1, 2, 3], P) == sigma
    assert counters.as_dict() == {"field_ops": 0, "g1_exp": 0, "g2_exp": 0, "gt_exp": 0, "pairings": 0}


def test_compute_matches_straight_line_evaluation(toy101, rng):
    A, x, keys = _instance(toy101, rng)
    sec = keys.secrets
    proof = pvmat_compute(keys.ek, x)
    y = [sum(A.entry(i, j) * x[j] for j in range(4)) % P for i in range(4)]
    assert list(proof.y) == y
    omega_logs = [w.value for w in keys.ek.omega]
    assert proof.zeta.value == sum(w * xj for w, xj in zip(omega_logs, x)) % P
    # every reshape is 2x2 column-major: column k holds entries 2k, 2k+1
    for s, tau in ((proof.s1, sec.tau1), (proof.s2, sec.tau2)):
        assert [e.value for e in s] == [(tau[0] * x[2 * k] + tau[1] * x[2 * k + 1]) % P for k in range(2)]
    assert [e.value for e in proof.z] == [(sec.eta[0] * y[2 * k] + sec.eta[1] * y[2 * k + 1]) % P
                                         for k in range(2)]
    V = [[sec.v[2 * i + j] for j in range(2)] for i in range(2)]
    assert [[c.value for c in row] for row in proof.C] == [
        [sec.delta * (V[i][0] * x[2 * k] + V[i][1] * x[2 * k + 1]) % P for k in range(2)]
        for i in range(2)
    ]


def test_compute_on_zero_input(toy101, rng):
    _, _, keys = _instance(toy101, rng)
    proof = pvmat_compute(keys.ek, [0, 0, 0, 0])
    assert proof.y == FieldVector.zeros(4, P)
    elements = [proof.zeta, *proof.s1, *proof.s2, *proof.z, *[c for row in proof.C for c in row]]
    assert all(e.is_identity() for e in elements)


def test_unit_input_selects_omega(toy101, rng):
    _, _, keys = _instance(toy101, rng)
    assert pvmat_compute(keys.ek, FieldVector.unit(4, 2, P)).zeta == keys.ek.omega[2]


def test_compute_on_worker_threads(toy101, rng):
    _, x, keys = _instance(toy101, rng)
    assert pvmat_compute(keys.ek, x, workers=4) == pvmat_compute(keys.ek, x)


# ============================================================================
# VERIFY
# ============================================================================

def test_honest_runs_always_accept(toy101, rng):
    for _ in range(200):
        A, x, keys = _instance(toy101, rng)
        verdict = pvmat_verify(keys.vk, x, pvmat_compute(keys.ek, x), toy101, rng)
        assert verdict.accepted
        assert verdict.y == matvec(A, x)
        assert verdict.checks == {name: True for name in ("s1", "s2", "z", "C", "final")}


def test_honest_run_with_default_params(toy2503, rng):
    A = random_dense(9, 13, toy2503.p, rng)
    x = random_vector(13, toy2503.p, rng)
    assert pvmat_run(A, x, toy2503, rng).y == matvec(A, x)


def test_mask_algebra(toy101, rng):
    A, x, keys = _instance(toy101, rng)
    sec = keys.secrets
    proof = pvmat_compute(keys.ek, x)
    gamma_delta_vx = sec.gamma * sec.delta * sum(v * xj for v, xj in zip(sec.v, x))
    expected = (keys.u.dot(proof.y) + keys.t.dot(x) + gamma_delta_vx) % P
    assert toy101.pair(proof.zeta, toy101.g2).value == expected

    vk = keys.vk
    H = toy101.pairing_product(proof.z, vk.g2_mu)
    D1 = toy101.pairing_product(proof.s1, vk.g2_rho1)
    D2 = toy101.pairing_product(proof.s2, vk.g2_rho2)
    trace = proof.C[0][0] * proof.C[1][1]
    assert H.value == keys.u.dot(proof.y)
    assert (D1 * D2).value == keys.t.dot(x)
    assert toy101.pair(trace, vk.g2_gamma).value == gamma_delta_vx % P


def test_zero_gamma_seam_still_verifies(toy101, rng, caplog):
    A = random_dense(4, 4, P, rng)
    x = random_vector(4, P, rng)
    sampled = PvmatSecrets.sample(SQUARE, toy101, rng)
    keys = pvmat_keygen(A, SQUARE, toy101, rng, secrets_override=sampled.model_copy(update={"gamma": 0}))
    assert "zero mask" in caplog.text
    assert pvmat_verify(keys.vk, x, pvmat_compute(keys.ek, x), toy101, rng).accepted


def _tamper(proof, component, suite, rng):
    g1 = suite.g1
    k = rng.randrange(1, suite.p)
    if component == "y":
        i = rng.randrange(len(proof.y))
        return _replace(proof, y=proof.y.with_entry(i, proof.y[i] + k))
    if component == "zeta":
        return _replace(proof, zeta=proof.zeta * g1 ** k)
    if component == "C":
        C = [list(row) for row in proof.C]
        C[0][0] = C[0][0] * g1 ** k
        return _replace(proof, C=C)
    elements = list(getattr(proof, component))
    i = rng.randrange(len(elements))
    elements[i] = elements[i] * g1 ** k
    return _replace(proof, **{component: elements})


@pytest.mark.parametrize("component", ["y", "zeta", "s1", "s2", "z", "C"])
def test_tampered_component_is_rejected(toy101, rng, component):
    trials, accepted = 2000, 0
    for _ in range(trials):
        _, x, keys = _instance(toy101, rng)
        forged = _tamper(pvmat_compute(keys.ek, x), component, toy101, rng)
        accepted += pvmat_verify(keys.vk, x, forged, toy101, rng).accepted
    assert accepted / trials <= 0.05


def test_first_failed_check_is_reported(toy2503, rng):
    _, x, keys = _instance(toy2503, rng)
    proof = pvmat_compute(keys.ek, x)
    forged = _replace(proof, zeta=proof.zeta * toy2503.g1)
    verdict = pvmat_verify(keys.vk, x, forged, toy2503, rng)
    assert verdict.reason == "final"
    assert verdict.checks["s1"] and not verdict.checks["final"]


def test_production_mode_stops_early_testing_mode_does_not(toy2503, rng):
    _, x, keys = _instance(toy2503, rng)
    proof = pvmat_compute(keys.ek, x)
    s1 = list(proof.s1)
    s1[0] = s1[0] * toy2503.g1
    s1[1] = s1[1] * toy2503.g1 ** 2
    forged = _replace(proof, s1=s1)

    production = pvmat_verify(keys.vk, x, forged, toy2503, rng, mode=VerifyMode.PRODUCTION)
    testing = pvmat_verify(keys.vk, x, forged, toy2503, rng, mode=VerifyMode.TESTING)
    assert not production.accepted and not testing.accepted
    assert set(production.checks) == {"s1"}
    assert set(testing.checks) == {"s1", "s2", "z", "C", "final"}
    assert testing.checks["s2"] and testing.checks["z"] and testing.checks["C"]
    assert not testing.checks["final"]


def test_shape_and_dimension_errors(toy101, rng):
    _, x, keys = _instance(toy101, rng)
    proof = pvmat_compute(keys.ek, x)
    assert pvmat_verify(keys.vk, x, _replace(proof, z=proof.z[:1]), toy101, rng).reason == "shape"
    with pytest.raises(DimensionError):
        pvmat_verify(keys.vk, [1, 2, 3], proof, toy101, rng)
    with pytest.raises(DimensionError):
        pvmat_compute(keys.ek, [1, 2, 3])


def test_verifier_pairing_count(toy101, rng):
    params = PvmatParams.defaults(64, 64)
    _, x, keys = _instance(toy101, rng, params)
    proof = pvmat_compute(keys.ek, x)
    with op_scope("verifier") as counters:
        assert pvmat_verify(keys.vk, x, proof, toy101, rng).accepted
    assert counters.pairings == params.b1 + 2 * params.c1 + params.d1 + 3


def test_prover_group_cost_is_subquadratic(toy101, rng):
    params = PvmatParams.defaults(64, 64)
    _, x, keys = _instance(toy101, rng, params)
    with op_scope("prover") as counters:
        pvmat_compute(keys.ek, x)
    assert counters.field_ops == 2 * 64 * 64
    assert counters.group_exps <= 2 * 64 ** (4 / 3) + 64 + 2 * 64



@pytest.mark.parametrize("size", [64, 256, pytest.param(1024, marks=pytest.mark.slow),
                                  pytest.param(4096, marks=pytest.mark.slow)])
def test_default_params_stay_under_cost_ceilings(toy101, rng, size):
    m = n = size
    A = random_sparse(m, n, 8 * n, 101, rng)
    x = random_vector(n, 101, rng)
    keys = pvmat_keygen(A, PvmatParams.defaults(m, n), toy101, rng)
    with op_scope("prover") as prover:
        proof = pvmat_compute(keys.ek, x)
    with op_scope("verifier") as verifier:
        assert pvmat_verify(keys.vk, x, proof, toy101, rng).accepted
    assert prover.group_exps <= 4 * (2 * n ** (4 / 3) + m)
    assert verifier.group_exps <= 4 * (6 * math.sqrt(m) + 2 * n ** (2 / 3))
    assert verifier.pairings <= 4 * (math.sqrt(m) + math.sqrt(n))


@pytest.mark.slow
def test_sparse_matrix_saves_prover_field_work(toy101, rng):
    n = 4096
    params = PvmatParams.defaults(n, n)
    x = random_vector(n, 101, rng)
    row = [1] * n
    dense = FieldMatrix(n, n, 101, rows=[row] * n)
    sparse = random_sparse(n, n, 8 * n, 101, rng)
    work = []
    for A in (dense, sparse):
        with op_scope("prover") as counters:
            keys = pvmat_keygen(A, params, toy101, rng)
            pvmat_compute(keys.ek, x)
        work.append(counters.field_ops)
    assert work[0] / work[1] >= 100

@pytest.mark.real
@pytest.mark.slow
def test_real_backend_round(real, rng):
    params = PvmatParams(m=2, n=2, b1=1, b2=2, c1=1, c2=2, d1=1, d2=2)
    A = random_dense(2, 2, real.p, rng)
    x = random_vector(2, real.p, rng)
    keys = pvmat_keygen(A, params, real, rng)
    proof = pvmat_compute(keys.ek, x)
    assert pvmat_verify(keys.vk, x, proof, real, rng).y == matvec(A, x)
    forged = _replace(proof, zeta=proof.zeta * real.g1)
    assert not pvmat_verify(keys.vk, x, forged, real, rng).accepted
