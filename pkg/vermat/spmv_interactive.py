"""
Trustee-assisted publicly verifiable sparse matrix-vector product.

Preparator: secret u, t; publishes omega^T = g1^(u^T A + t^T) for the prover
and hands (u, t) to the trustee. Prover: y = A x and zeta = omega^T * x.
Trustee: eta = gT^(u^T y + t^T x). Anyone: accept y iff e(zeta, g2) = eta.
"""
import logging
import secrets
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from vermat.errors import DimensionError
from vermat.fplinalg import FieldMatrix, FieldVector, matvec, rmatvec, star_vector
from vermat.pairing_core import GroupElement, PairingSuite, count_field, exp_all, op_scope
from vermat.schemas import Verdict

logger = logging.getLogger(__name__)


class SpmvEvaluationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: FieldMatrix
    omega: List[GroupElement]


class SpmvTrusteeKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    u: FieldVector
    t: FieldVector


class SpmvVerificationKey(BaseModel):
    m: int
    n: int


class SpmvKeys(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    u: FieldVector
    t: FieldVector
    omega: List[GroupElement]
    A: FieldMatrix

    def evaluation_key(self) -> SpmvEvaluationKey:
        return SpmvEvaluationKey(A=self.A, omega=self.omega)

    def trustee_key(self) -> SpmvTrusteeKey:
        return SpmvTrusteeKey(u=self.u, t=self.t)

    def verification_key(self) -> SpmvVerificationKey:
        return SpmvVerificationKey(m=self.A.m, n=self.A.n)


class SpmvProof(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y: FieldVector
    zeta: GroupElement


class TrusteeResponse(BaseModel):
    """The (x, y) the trustee answered for travel with the response."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: FieldVector
    y: FieldVector
    h: int
    d: int
    eta: GroupElement


def spmv_keygen(A: FieldMatrix, suite: PairingSuite, rng=None, *,
                u: Optional[Sequence[int]] = None, t: Optional[Sequence[int]] = None) -> SpmvKeys:
    """Costs mu(A) + n field operations and n exponentiations."""
    rng = rng or secrets.SystemRandom()
    p = suite.p
    u = FieldVector(u if u is not None else suite.random_scalars(rng, A.m), p)
    t = FieldVector(t if t is not None else suite.random_scalars(rng, A.n), p)
    if len(u) != A.m or len(t) != A.n:
        raise DimensionError(f"secrets do not match the {A.m}x{A.n} matrix")
    exponents = rmatvec(A, u) + t
    omega = exp_all(suite.g1, exponents)
    logger.info(f"spmv keys generated for a {A.m}x{A.n} matrix with mu(A) = {A.mu}")
    return SpmvKeys(u=u, t=t, omega=omega, A=A)


def spmv_compute(ek: SpmvEvaluationKey, x: Sequence[int], y: Optional[FieldVector] = None) -> SpmvProof:
    if len(x) != ek.A.n:
        raise DimensionError(f"input has length {len(x)}, matrix has {ek.A.n} columns")
    y = matvec(ek.A, x) if y is None else y
    zeta = star_vector(ek.omega, x)
    return SpmvProof(y=y, zeta=zeta)


def spmv_trustee(trustee: SpmvTrusteeKey, x: Sequence[int], y: Sequence[int], suite: PairingSuite) -> TrusteeResponse:
    if len(x) != len(trustee.t) or len(y) != len(trustee.u):
        raise DimensionError(f"trustee expects x of length {len(trustee.t)} and y of length {len(trustee.u)}")
    h = trustee.u.dot(y)
    d = trustee.t.dot(x)
    count_field(1)
    p = trustee.u.p
    return TrusteeResponse(x=FieldVector(x, p), y=FieldVector(y, p), h=h, d=d, eta=suite.gT ** (h + d))


def spmv_verify(proof: SpmvProof, response: TrusteeResponse, suite: PairingSuite) -> Verdict:
    if response.y != proof.y:
        logger.warning("spmv trustee response was made for a different output")
        return Verdict.reject("response")
    if suite.pair(proof.zeta, suite.g2) != response.eta:
        logger.warning("spmv verification failed: e(zeta, g2) != eta")
        return Verdict.reject("pairing")
    return Verdict.accept(y=proof.y)


def spmv_run(A: FieldMatrix, x: Sequence[int], suite: PairingSuite, rng=None) -> Verdict:
    with op_scope("preparator"):
        keys = spmv_keygen(A, suite, rng)
    with op_scope("prover"):
        proof = spmv_compute(keys.evaluation_key(), x)
    with op_scope("trustee"):
        response = spmv_trustee(keys.trustee_key(), x, proof.y, suite)
    with op_scope("verifier"):
        return spmv_verify(proof, response, suite)
