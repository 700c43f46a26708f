"""
Verifiable dot products u^T y with a secret u, computed in the exponent.

y is reshaped into Y in F_p^{b2 x b1} (column-major) so that u^T y becomes a
trace of a small matrix product:

- rank-1: u = vec(mu eta^T). The prover returns z^T = g1^(eta^T) * Y and the
  verifier, after a Freivalds check on z, outputs prod_i e(z[i], g2^mu[i]),
  which is gT^(u^T y).
- general: U = reshape(u). The prover returns C = g1^U * Y and the verifier,
  after a paired Freivalds check with a secret w, outputs Trace(C) = g1^(u^T y).
- chunked: y is split into chunks of size k, each verified with the general
  protocol, and the G1 results are multiplied.
"""
import logging
import random
import secrets
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from vermat.config import config
from vermat.errors import DimensionError
from vermat.fplinalg import (FieldMatrix, FieldVector, group_matvec, matvec, reshape_lhs, reshape_rhs,
                             star_matrix, star_rows, star_vector, trace_group)
from vermat.pairing_core import GroupElement, PairingSuite, count_field, exp_all, run_scoped
from vermat.schemas import ChunkParams, DotProductDims, Verdict

logger = logging.getLogger(__name__)


def _random_challenge(suite: PairingSuite, n: int, rng) -> List[int]:
    rng = rng or secrets.SystemRandom()
    return suite.random_scalars(rng, n)


# ============================================================================
# RANK-1 LEFT-HAND SIDE
# ============================================================================

class Rank1EvaluationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: DotProductDims
    g1_eta: List[GroupElement]


class Rank1VerificationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: DotProductDims
    g1_eta: List[GroupElement]
    g2_mu: List[GroupElement]


class Rank1DPKeys(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: DotProductDims
    mu: FieldVector
    eta: FieldVector
    g1_eta: List[GroupElement]
    g2_mu: List[GroupElement]

    @property
    def u(self) -> FieldVector:
        """vec(mu eta^T) truncated to m."""
        p = self.mu.p
        full = [a * b for a in self.mu for b in self.eta]
        return FieldVector(full[:self.dims.m], p)

    def evaluation_key(self) -> Rank1EvaluationKey:
        return Rank1EvaluationKey(dims=self.dims, g1_eta=self.g1_eta)

    def verification_key(self) -> Rank1VerificationKey:
        return Rank1VerificationKey(dims=self.dims, g1_eta=self.g1_eta, g2_mu=self.g2_mu)


class Rank1Proof(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    z: List[GroupElement]


def rank1_keygen(suite: PairingSuite, dims: DotProductDims, rng=None, *,
                 mu: Optional[Sequence[int]] = None, eta: Optional[Sequence[int]] = None) -> Rank1DPKeys:
    rng = rng or secrets.SystemRandom()
    p = suite.p
    mu = FieldVector(mu if mu is not None else suite.random_scalars(rng, dims.b1), p)
    eta = FieldVector(eta if eta is not None else suite.random_scalars(rng, dims.b2), p)
    if len(mu) != dims.b1 or len(eta) != dims.b2:
        raise DimensionError(f"mu, eta must have lengths {dims.b1}, {dims.b2}")
    return Rank1DPKeys(dims=dims, mu=mu, eta=eta,
                       g1_eta=exp_all(suite.g1, eta), g2_mu=exp_all(suite.g2, mu))


def rank1_probgen(y: FieldVector, dims: DotProductDims) -> FieldMatrix:
    if len(y) > dims.padded:
        raise DimensionError(f"vector of length {len(y)} exceeds {dims.b1}x{dims.b2} block")
    return reshape_rhs(y, dims.b2, dims.b1)


def rank1_compute(ek: Rank1EvaluationKey, Y: FieldMatrix) -> Rank1Proof:
    """z^T = g1^(eta^T) * Y."""
    return Rank1Proof(z=star_rows(ek.g1_eta, Y))


def rank1_verify(vk: Rank1VerificationKey, Y: FieldMatrix, proof: Rank1Proof,
                 suite: PairingSuite, rng=None) -> Verdict:
    """Freivalds check z^T * v = g1^(eta^T) * (Y v), then prod_i e(z[i], g2^mu[i])."""
    b1 = vk.dims.b1
    if len(proof.z) != b1 or Y.shape != (vk.dims.b2, b1):
        return Verdict.reject("shape")
    v = _random_challenge(suite, b1, rng)
    lhs = star_vector(proof.z, v)
    rhs = star_vector(vk.g1_eta, matvec(Y, v))
    if lhs != rhs:
        logger.warning("rank-1 dot product: Freivalds check on z failed")
        return Verdict.reject("freivalds", {"freivalds": False})
    value = suite.pairing_product(proof.z, vk.g2_mu)
    return Verdict.accept(value=value, checks={"freivalds": True})


def rank1_dp(keys: Rank1DPKeys, y: FieldVector, suite: PairingSuite, rng=None) -> Verdict:
    """ProbGen, Compute and Verify in a row; on success ``value`` is gT^(u^T y)."""
    Y = rank1_probgen(y, keys.dims)
    proof = rank1_compute(keys.evaluation_key(), Y)
    return rank1_verify(keys.verification_key(), Y, proof, suite, rng)


# ============================================================================
# GENERAL LEFT-HAND SIDE
# ============================================================================

class GenEvaluationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: DotProductDims
    g1_U: List[List[GroupElement]]


class GenVerificationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: DotProductDims
    g1_wU: List[GroupElement]
    g2_w: List[GroupElement]


class GenDPKeys(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: DotProductDims
    u: FieldVector
    w: FieldVector
    g1_U: List[List[GroupElement]]
    g1_wU: List[GroupElement]
    g2_w: List[GroupElement]

    def evaluation_key(self) -> GenEvaluationKey:
        return GenEvaluationKey(dims=self.dims, g1_U=self.g1_U)

    def verification_key(self) -> GenVerificationKey:
        return GenVerificationKey(dims=self.dims, g1_wU=self.g1_wU, g2_w=self.g2_w)


class GenProof(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    C: List[List[GroupElement]]


def gen_keygen(suite: PairingSuite, u: FieldVector, dims: DotProductDims, rng=None, *,
               w: Optional[Sequence[int]] = None) -> GenDPKeys:
    rng = rng or secrets.SystemRandom()
    if len(u) > dims.padded:
        raise DimensionError(f"vector of length {len(u)} exceeds {dims.b1}x{dims.b2} block")
    p = suite.p
    w = FieldVector(w if w is not None else suite.random_scalars(rng, dims.b1), p)
    if len(w) != dims.b1:
        raise DimensionError(f"w must have length {dims.b1}")
    U = reshape_lhs(u, dims.b1, dims.b2, p)
    rows = U.rows()
    count_field(2 * dims.b1 * dims.b2)
    wU = [sum(w[i] * rows[i][j] for i in range(dims.b1)) % p for j in range(dims.b2)]
    return GenDPKeys(
        dims=dims, u=FieldVector(u, p), w=w,
        g1_U=[exp_all(suite.g1, row) for row in rows],
        g1_wU=exp_all(suite.g1, wU),
        g2_w=exp_all(suite.g2, w),
    )


def gen_compute(ek: GenEvaluationKey, Y: FieldMatrix) -> GenProof:
    """C = g1^U * Y, a b1 x b1 matrix over G1."""
    return GenProof(C=star_matrix(ek.g1_U, Y))


def gen_verify(vk: GenVerificationKey, Y: FieldMatrix, proof: GenProof,
               suite: PairingSuite, rng=None) -> Verdict:
    """
    theta = C * v, then prod_i e(theta[i], g2^w[i]) = e(g1^(w^T U) * (Y v), g2);
    on success ``value`` is Trace(C).
    """
    b1 = vk.dims.b1
    if len(proof.C) != b1 or any(len(row) != b1 for row in proof.C) or Y.shape != (vk.dims.b2, b1):
        return Verdict.reject("shape")
    v = _random_challenge(suite, b1, rng)
    theta = group_matvec(proof.C, v)
    lhs = suite.pairing_product(theta, vk.g2_w)
    rhs = suite.pair(star_vector(vk.g1_wU, matvec(Y, v)), suite.g2)
    if lhs != rhs:
        logger.warning("general dot product: pairing check on C failed")
        return Verdict.reject("pairing", {"pairing": False})
    return Verdict.accept(value=trace_group(proof.C), checks={"pairing": True})


def gen_dp(keys: GenDPKeys, y: FieldVector, suite: PairingSuite, rng=None) -> Verdict:
    """ProbGen, Compute and Verify in a row; on success ``value`` is g1^(u^T y)."""
    Y = rank1_probgen(y, keys.dims)
    proof = gen_compute(keys.evaluation_key(), Y)
    return gen_verify(keys.verification_key(), Y, proof, suite, rng)


# ============================================================================
# CHUNKED
# ============================================================================

def chunked_keygen(suite: PairingSuite, u: FieldVector, params: ChunkParams, rng=None) -> List[GenDPKeys]:
    if len(u) != params.n:
        raise DimensionError(f"u has length {len(u)}, chunking expects {params.n}")
    keys = []
    for bounds in params.bounds():
        part = FieldVector(u.entries[bounds.start:bounds.stop], u.p)
        keys.append(gen_keygen(suite, part, params.dims(len(part)), rng))
    logger.info(f"chunked dot-product keys: {params.chunks} chunks of size {params.k}")
    return keys


def split_chunks(y: FieldVector, params: ChunkParams) -> List[FieldVector]:
    if len(y) != params.n:
        raise DimensionError(f"y has length {len(y)}, chunking expects {params.n}")
    return [FieldVector(y.entries[b.start:b.stop], y.p) for b in params.bounds()]


def chunked_dp(params: ChunkParams, keys: Sequence[GenDPKeys], y: FieldVector,
               suite: PairingSuite, rng=None, workers: Optional[int] = None) -> Verdict:
    """Runs gen_dp per chunk; rejects if any chunk rejects, else multiplies the traces."""
    if len(keys) != params.chunks:
        raise DimensionError(f"{len(keys)} chunk keys for {params.chunks} chunks")
    parts = split_chunks(y, params)
    # one generator per chunk task
    rngs = [random.Random(rng.getrandbits(64)) if rng is not None else None for _ in parts]
    tasks = [
        (lambda k=k, part=part, chunk_rng=chunk_rng: gen_dp(k, part, suite, chunk_rng))
        for k, part, chunk_rng in zip(keys, parts, rngs)
    ]
    verdicts = run_scoped(tasks, workers or config.WORKERS)
    for index, verdict in enumerate(verdicts):
        if not verdict.accepted:
            logger.warning(f"chunked dot product: chunk {index} rejected ({verdict.reason})")
            return Verdict.reject(f"chunk {index}: {verdict.reason}")
    acc = verdicts[0].value
    for verdict in verdicts[1:]:
        acc = acc * verdict.value
    return Verdict.accept(value=acc)


class ChunkedEvaluationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int
    k: int
    chunks: List[GenEvaluationKey]


class ChunkedVerificationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int
    k: int
    chunks: List[GenVerificationKey]


class ChunkedProof(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    chunks: List[GenProof]


def chunked_compute(ek: ChunkedEvaluationKey, y: FieldVector) -> ChunkedProof:
    params = ChunkParams(n=ek.n, k=ek.k)
    proofs = [
        gen_compute(key, rank1_probgen(part, key.dims))
        for key, part in zip(ek.chunks, split_chunks(y, params))
    ]
    return ChunkedProof(chunks=proofs)


def chunked_verify(vk: ChunkedVerificationKey, y: FieldVector, proof: ChunkedProof,
                   suite: PairingSuite, rng=None) -> Verdict:
    params = ChunkParams(n=vk.n, k=vk.k)
    if len(proof.chunks) != len(vk.chunks) or len(vk.chunks) != params.chunks:
        return Verdict.reject("shape")
    acc = None
    for index, (key, part, chunk) in enumerate(zip(vk.chunks, split_chunks(y, params), proof.chunks)):
        verdict = gen_verify(key, rank1_probgen(part, key.dims), chunk, suite, rng)
        if not verdict.accepted:
            logger.warning(f"chunked dot product: chunk {index} rejected ({verdict.reason})")
            return Verdict.reject(f"chunk {index}: {verdict.reason}")
        acc = verdict.value if acc is None else acc * verdict.value
    return Verdict.accept(value=acc)
