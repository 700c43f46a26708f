"""
One adapter per protocol tag, mapping the role operations onto container bundles.
"""
import logging
import secrets
from typing import Any, Dict, List, Optional

from pydantic import BaseModel

from vermat.config import config
from vermat.dotprod import (ChunkedEvaluationKey, ChunkedProof, ChunkedVerificationKey, Rank1EvaluationKey,
                            Rank1Proof, Rank1VerificationKey, chunked_compute, chunked_keygen, chunked_verify,
                            gen_keygen, rank1_compute, rank1_keygen, rank1_probgen, rank1_verify)
from vermat.errors import DimensionError, ParameterError
from vermat.fg_baseline import (FgEvaluationKey, FgProbGen, FgProof, FgTrusteeKey, FgVerificationKey,
                                fg_compute, fg_keygen, fg_probgen, fg_verify)
from vermat.fplinalg import FieldMatrix, FieldVector, random_vector
from vermat.freivalds import (FreivaldsEvaluationKey, FreivaldsMode, FreivaldsProof, FreivaldsVerificationKey,
                              challenge_private, freivalds_compute, verify_one)
from vermat.pairing_core import PairingSuite
from vermat.protocol_contract import ProtocolContract
from vermat.pvmat import (PvmatEvaluationKey, PvmatProbGen, PvmatProof, PvmatVerificationKey, pvmat_compute,
                          pvmat_keygen, pvmat_probgen, pvmat_verify)
from vermat.schemas import ChunkParams, DotProductDims, ProtocolTag, PvmatParams, RoleTag, Verdict
from vermat.smallfield import (SmallFieldEvaluationKey, SmallFieldProof, SmallFieldResponse,
                               SmallFieldTrusteeKey, SmallFieldVerificationKey, check_range, sf_compute,
                               sf_keygen, sf_trustee, sf_verify)
from vermat.spmv_interactive import (SpmvEvaluationKey, SpmvProof, SpmvTrusteeKey, SpmvVerificationKey,
                                     TrusteeResponse, spmv_compute, spmv_keygen, spmv_trustee, spmv_verify)

logger = logging.getLogger(__name__)


def _require_matrix(request: ProtocolContract.KeygenRequestDTO, tag: ProtocolTag) -> FieldMatrix:
    if request.matrix is None:
        raise ParameterError(f"{tag.value} keygen needs a matrix")
    return request.matrix


def _require_length(request: ProtocolContract.KeygenRequestDTO, tag: ProtocolTag) -> int:
    if request.length is None or request.length < 1:
        raise ParameterError(f"{tag.value} keygen needs a positive vector length")
    return request.length


def _require_aux(aux: Optional[BaseModel], kind: type, what: str) -> Any:
    if not isinstance(aux, kind):
        raise ParameterError(f"verification needs the {what} container")
    return aux


def _dot_dims(m: int, request: ProtocolContract.KeygenRequestDTO) -> DotProductDims:
    """Explicit --b1/--b2, else the unbalanced default."""
    if "b1" in request.dims or "b2" in request.dims:
        b1 = request.dims.get("b1", 1)
        return DotProductDims(m=m, b1=b1, b2=request.dims.get("b2", -(-m // b1)))
    return DotProductDims.unbalanced(m, config.DIM_RATIO)


def _input(x: List[int], n: int, p: int) -> FieldVector:
    if len(x) != n:
        raise DimensionError(f"input has length {len(x)}, keys expect {n}")
    return FieldVector(x, p)


class FreivaldsProtocol(ProtocolContract):
    tag = ProtocolTag.FREIVALDS
    bundles = {
        RoleTag.EK: FreivaldsEvaluationKey,
        RoleTag.VK: FreivaldsVerificationKey,
        RoleTag.PROOF: FreivaldsProof,
    }

    def keygen(self, request):
        A = _require_matrix(request, self.tag)
        if request.fiat_shamir:
            vk = FreivaldsVerificationKey(mode=FreivaldsMode.FIAT_SHAMIR, A=A)
        else:
            ch = challenge_private(A, request.rng)
            vk = FreivaldsVerificationKey(mode=FreivaldsMode.PRIVATE, u=ch.u, w=ch.w)
        return self.KeyBundleDTO(ek=FreivaldsEvaluationKey(A=A), vk=vk, dims={"m": A.m, "n": A.n},
                                 meta={"mode": vk.mode.value})

    def compute(self, ek, x, suite):
        return FreivaldsProof(y=freivalds_compute(ek.A, _input(x, ek.A.n, ek.A.p)))

    def verify(self, vk, x, proof, suite, aux=None, rng=None):
        m = vk.A.m if vk.A is not None else len(vk.u)
        n = vk.A.n if vk.A is not None else len(vk.w)
        xv = _input(x, n, suite.p)
        if len(proof.y) != m:
            return Verdict.reject("shape")
        return verify_one(vk.challenge(xv, proof.y), xv, proof.y)


class FgProtocol(ProtocolContract):
    tag = ProtocolTag.FG
    bundles = {
        RoleTag.EK: FgEvaluationKey,
        RoleTag.VK: FgVerificationKey,
        RoleTag.TRUSTEE: FgTrusteeKey,
        RoleTag.PROBGEN: FgProbGen,
        RoleTag.PROOF: FgProof,
    }

    def keygen(self, request):
        A = _require_matrix(request, self.tag)
        keys = fg_keygen(A, request.suite, request.rng)
        return self.KeyBundleDTO(ek=keys.evaluation_key(), vk=keys.verification_key(),
                                 trustee=keys.trustee_key(), dims={"m": A.m, "n": A.n})

    def probgen(self, key, x, suite):
        if not isinstance(key, FgTrusteeKey):
            raise ParameterError("fg probgen needs the trustee container")
        return fg_probgen(key, _input(x, len(key.t), suite.p), suite)

    def compute(self, ek, x, suite):
        return fg_compute(ek, _input(x, ek.A.n, ek.A.p))

    def verify(self, vk, x, proof, suite, aux=None, rng=None):
        xv = _input(x, vk.n, suite.p)
        probgen = _require_aux(aux, FgProbGen, "probgen")
        if probgen.x != xv:
            raise ParameterError("probgen container was made for a different input")
        return fg_verify(vk, probgen, proof, suite)


class SpmvProtocol(ProtocolContract):
    tag = ProtocolTag.SPMV
    bundles = {
        RoleTag.EK: SpmvEvaluationKey,
        RoleTag.VK: SpmvVerificationKey,
        RoleTag.TRUSTEE: SpmvTrusteeKey,
        RoleTag.PROOF: SpmvProof,
        RoleTag.RESPONSE: TrusteeResponse,
    }

    def keygen(self, request):
        A = _require_matrix(request, self.tag)
        keys = spmv_keygen(A, request.suite, request.rng)
        return self.KeyBundleDTO(ek=keys.evaluation_key(), vk=keys.verification_key(),
                                 trustee=keys.trustee_key(), dims={"m": A.m, "n": A.n})

    def compute(self, ek, x, suite):
        return spmv_compute(ek, _input(x, ek.A.n, ek.A.p))

    def trustee(self, key, x, proof, suite):
        if len(proof.y) != len(key.u):
            raise DimensionError(f"proof output has length {len(proof.y)}, keys expect {len(key.u)}")
        return spmv_trustee(key, _input(x, len(key.t), suite.p), proof.y, suite)

    def verify(self, vk, x, proof, suite, aux=None, rng=None):
        xv = _input(x, vk.n, suite.p)
        if len(proof.y) != vk.m:
            return Verdict.reject("shape")
        response = _require_aux(aux, TrusteeResponse, "trustee response")
        if response.x != xv:
            logger.warning("spmv trustee response was made for a different input")
            return Verdict.reject("response")
        return spmv_verify(proof, response, suite)


class Rank1DPProtocol(ProtocolContract):
    tag = ProtocolTag.RANK1DP
    needs_matrix = False
    bundles = {
        RoleTag.EK: Rank1EvaluationKey,
        RoleTag.VK: Rank1VerificationKey,
        RoleTag.PROOF: Rank1Proof,
    }

    def keygen(self, request):
        m = _require_length(request, self.tag)
        dims = _dot_dims(m, request)
        keys = rank1_keygen(request.suite, dims, request.rng)
        return self.KeyBundleDTO(ek=keys.evaluation_key(), vk=keys.verification_key(),
                                 dims=dims.model_dump())

    def compute(self, ek, x, suite):
        return rank1_compute(ek, rank1_probgen(_input(x, ek.dims.m, suite.p), ek.dims))

    def verify(self, vk, x, proof, suite, aux=None, rng=None):
        Y = rank1_probgen(_input(x, vk.dims.m, suite.p), vk.dims)
        return rank1_verify(vk, Y, proof, suite, rng)


class GenDPProtocol(ProtocolContract):
    tag = ProtocolTag.GENDP
    needs_matrix = False
    bundles = {
        RoleTag.EK: ChunkedEvaluationKey,
        RoleTag.VK: ChunkedVerificationKey,
        RoleTag.PROOF: ChunkedProof,
    }

    def keygen(self, request):
        m = _require_length(request, self.tag)
        suite = request.suite
        rng = request.rng or secrets.SystemRandom()
        u = random_vector(m, suite.p, rng)
        if request.chunk_a is not None:
            params = ChunkParams.for_length(m, request.chunk_a)
            keys = chunked_keygen(suite, u, params, rng)
        else:
            params = ChunkParams(n=m, k=m)
            keys = [gen_keygen(suite, u, _dot_dims(m, request), rng)]
        ek = ChunkedEvaluationKey(n=params.n, k=params.k, chunks=[k.evaluation_key() for k in keys])
        vk = ChunkedVerificationKey(n=params.n, k=params.k, chunks=[k.verification_key() for k in keys])
        return self.KeyBundleDTO(ek=ek, vk=vk, dims={"n": params.n, "k": params.k, "chunks": params.chunks})

    def compute(self, ek, x, suite):
        return chunked_compute(ek, _input(x, ek.n, suite.p))

    def verify(self, vk, x, proof, suite, aux=None, rng=None):
        return chunked_verify(vk, _input(x, vk.n, suite.p), proof, suite, rng)


class PvmatProtocol(ProtocolContract):
    tag = ProtocolTag.PVMAT
    bundles = {
        RoleTag.EK: PvmatEvaluationKey,
        RoleTag.VK: PvmatVerificationKey,
        RoleTag.PROBGEN: PvmatProbGen,
        RoleTag.PROOF: PvmatProof,
    }

    def keygen(self, request):
        A = _require_matrix(request, self.tag)
        params = PvmatParams.defaults(A.m, A.n, **request.dims)
        keys = pvmat_keygen(A, params, request.suite, request.rng)
        return self.KeyBundleDTO(ek=keys.ek, vk=keys.vk, dims=params.model_dump())

    def probgen(self, key, x, suite):
        return pvmat_probgen(_input(x, key.params.n, suite.p), suite.p)

    def compute(self, ek, x, suite):
        return pvmat_compute(ek, _input(x, ek.params.n, ek.A.p))

    def verify(self, vk, x, proof, suite, aux=None, rng=None):
        xv = _input(x, vk.params.n, suite.p)
        if aux is not None and _require_aux(aux, PvmatProbGen, "probgen").x != xv:
            raise ParameterError("probgen container was made for a different input")
        return pvmat_verify(vk, xv, proof, suite, rng)


class SmallFieldProtocol(ProtocolContract):
    tag = ProtocolTag.SMALLFIELD
    small_field = True
    bundles = {
        RoleTag.EK: SmallFieldEvaluationKey,
        RoleTag.VK: SmallFieldVerificationKey,
        RoleTag.TRUSTEE: SmallFieldTrusteeKey,
        RoleTag.PROOF: SmallFieldProof,
        RoleTag.RESPONSE: SmallFieldResponse,
    }

    def keygen(self, request):
        A = _require_matrix(request, self.tag)
        keys = sf_keygen(A, request.suite, request.rng)
        return self.KeyBundleDTO(ek=keys.evaluation_key(), vk=keys.verification_key(),
                                 trustee=keys.trustee_key(), dims={"m": A.m, "n": A.n},
                                 meta=keys.metadata())

    def compute(self, ek, x, suite):
        return sf_compute(ek, x)

    def trustee(self, key, x, proof, suite):
        check_range(x, key.p, "x")
        return sf_trustee(key, x, proof.y, suite)

    def verify(self, vk, x, proof, suite, aux=None, rng=None):
        if len(x) != vk.n:
            raise DimensionError(f"input has length {len(x)}, keys expect {vk.n}")
        response = _require_aux(aux, SmallFieldResponse, "trustee response")
        if list(response.x) != list(x):
            logger.warning("small-field trustee response was made for a different input")
            return Verdict.reject("response")
        return sf_verify(vk, proof, response, suite)


PROTOCOLS: Dict[ProtocolTag, ProtocolContract] = {
    adapter.tag: adapter
    for adapter in (FreivaldsProtocol(), FgProtocol(), SpmvProtocol(), Rank1DPProtocol(),
                    GenDPProtocol(), PvmatProtocol(), SmallFieldProtocol())
}


def get_protocol(tag: str) -> ProtocolContract:
    try:
        return PROTOCOLS[ProtocolTag(tag)]
    except ValueError:
        known = ", ".join(t.value for t in ProtocolTag)
        raise ParameterError(f"unknown protocol '{tag}', expected one of: {known}")
