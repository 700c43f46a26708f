import pytest

from vermat.errors import DimensionError, ParameterError
from vermat.fplinalg import FieldMatrix, random_dense
from vermat.freivalds import FreivaldsMode
from vermat.protocol_contract import ProtocolContract
from vermat.protocol_service import PROTOCOLS, get_protocol
from vermat.schemas import ProtocolTag, RoleTag

Request = ProtocolContract.KeygenRequestDTO


def test_every_tag_has_an_adapter():
    assert set(PROTOCOLS) == set(ProtocolTag)
    for tag, adapter in PROTOCOLS.items():
        assert adapter.tag is tag
        assert RoleTag.EK in adapter.bundles and RoleTag.PROOF in adapter.bundles


def test_unknown_protocol():
    with pytest.raises(ParameterError, match="pvmat"):
        get_protocol("bogus")


def test_missing_role_container():
    with pytest.raises(ParameterError):
        get_protocol("freivalds").bundle_type(RoleTag.TRUSTEE)


def test_steps_a_protocol_does_not_have(toy101, rng):
    adapter = get_protocol("freivalds")
    keys = adapter.keygen(Request(suite=toy101, matrix=FieldMatrix.identity(2, 101), rng=rng))
    with pytest.raises(ParameterError):
        adapter.probgen(keys.ek, [1, 1], toy101)
    with pytest.raises(ParameterError):
        adapter.trustee(keys.ek, [1, 1], None, toy101)


def test_keygen_inputs_are_required(toy101):
    with pytest.raises(ParameterError):
        get_protocol("spmv").keygen(Request(suite=toy101))
    with pytest.raises(ParameterError):
        get_protocol("rank1dp").keygen(Request(suite=toy101, length=0))


def test_request_drops_unset_dims(toy101):
    request = Request(suite=toy101, dims={"b1": 2, "b2": None})
    assert request.dims == {"b1": 2}


def test_fiat_shamir_keys_keep_the_matrix(toy101, rng):
    A = random_dense(3, 3, 101, rng)
    adapter = get_protocol("freivalds")
    keys = adapter.keygen(Request(suite=toy101, matrix=A, fiat_shamir=True))
    assert keys.vk.mode is FreivaldsMode.FIAT_SHAMIR
    assert keys.meta == {"mode": "fiat_shamir"}
    x = [1, 2, 3]
    assert adapter.verify(keys.vk, x, adapter.compute(keys.ek, x, toy101), toy101).accepted


def test_explicit_dot_product_dims(toy101, rng):
    keys = get_protocol("rank1dp").keygen(Request(suite=toy101, length=10, rng=rng, dims={"b1": 2}))
    assert keys.dims == {"m": 10, "b1": 2, "b2": 5}


def test_chunked_dot_product_keys(toy101, rng):
    keys = get_protocol("gendp").keygen(Request(suite=toy101, length=8, rng=rng, chunk_a=0.5))
    assert keys.dims == {"n": 8, "k": 3, "chunks": 3}
    assert len(keys.ek.chunks) == 3


def test_pvmat_dim_overrides(toy101, rng):
    A = random_dense(4, 4, 101, rng)
    keys = get_protocol("pvmat").keygen(Request(suite=toy101, matrix=A, rng=rng,
                                                dims={"b1": 2, "b2": 2, "d1": 2, "d2": 2}))
    assert (keys.vk.params.b1, keys.vk.params.b2, keys.vk.params.d1) == (2, 2, 2)


def test_verifier_aux_is_required(toy101, rng):
    A = random_dense(2, 2, 101, rng)
    for tag in ("fg", "spmv"):
        adapter = get_protocol(tag)
        keys = adapter.keygen(Request(suite=toy101, matrix=A, rng=rng))
        proof = adapter.compute(keys.ek, [1, 1], toy101)
        with pytest.raises(ParameterError):
            adapter.verify(keys.vk, [1, 1], proof, toy101)


def test_pvmat_probgen_must_match_input(toy101, rng):
    adapter = get_protocol("pvmat")
    keys = adapter.keygen(Request(suite=toy101, matrix=random_dense(3, 3, 101, rng), rng=rng))
    proof = adapter.compute(keys.ek, [1, 2, 3], toy101)
    sigma = adapter.probgen(keys.vk, [1, 2, 4], toy101)
    with pytest.raises(ParameterError):
        adapter.verify(keys.vk, [1, 2, 3], proof, toy101, sigma, rng)


def test_wrong_input_length(toy101, rng):
    adapter = get_protocol("spmv")
    keys = adapter.keygen(Request(suite=toy101, matrix=random_dense(2, 3, 101, rng), rng=rng))
    with pytest.raises(DimensionError):
        adapter.compute(keys.ek, [1, 2], toy101)


def test_small_field_trustee_checks_range(toy2503, rng):
    adapter = get_protocol("smallfield")
    keys = adapter.keygen(Request(suite=toy2503, matrix=FieldMatrix.dense([[1, 2], [3, 4]], 5), rng=rng))
    proof = adapter.compute(keys.ek, [1, 1], toy2503)
    with pytest.raises(ParameterError):
        adapter.trustee(keys.trustee, [1, 7], proof, toy2503)
    assert keys.meta["bound_ok"] is True


def test_fg_probgen_must_match_input(toy101, rng):
    adapter = get_protocol("fg")
    keys = adapter.keygen(Request(suite=toy101, matrix=random_dense(2, 2, 101, rng), rng=rng))
    proof = adapter.compute(keys.ek, [2, 1], toy101)
    probgen = adapter.probgen(keys.trustee, [1, 1], toy101)
    with pytest.raises(ParameterError):
        adapter.verify(keys.vk, [2, 1], proof, toy101, probgen)


@pytest.mark.parametrize("tag, suite_name, p", [("spmv", "toy101", 101), ("smallfield", "toy2503", 5)])
def test_trustee_response_is_tied_to_its_pair(request, rng, tag, suite_name, p):
    suite = request.getfixturevalue(suite_name)
    adapter = get_protocol(tag)
    keys = adapter.keygen(Request(suite=suite, matrix=FieldMatrix.dense([[1, 2], [3, 4]], p), rng=rng))
    first = adapter.compute(keys.ek, [1, 1], suite)
    second = adapter.compute(keys.ek, [2, 1], suite)
    response = adapter.trustee(keys.trustee, [1, 1], first, suite)
    assert adapter.verify(keys.vk, [1, 1], first, suite, response).accepted
    assert adapter.verify(keys.vk, [2, 1], first, suite, response).reason == "response"
    assert adapter.verify(keys.vk, [1, 1], second, suite, response).reason == "response"
