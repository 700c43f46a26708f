"""
Matrix-vector verification with per-entry group keys (the quadratic baseline).

The preparator publishes W[i][j] = g1^(alpha A[i][j] + s[i] t[j] + rho[i] tau[j])
and a = e(g1^alpha, g2). For each input the trustee hands out
VK_x[i] = gT^(s[i] d + rho[i] delta) with d = t^T x and delta = tau^T x. The
prover returns y = A x and z = W * x, and the verifier checks
e(z[i], g2) = a^y[i] * VK_x[i] for every row.
"""
import logging
import secrets
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from vermat.errors import DimensionError
from vermat.fplinalg import FieldMatrix, FieldVector, group_matvec, matvec
from vermat.pairing_core import PairingSuite, GroupElement, count_field, op_scope
from vermat.schemas import Verdict

logger = logging.getLogger(__name__)


class FgEvaluationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: FieldMatrix
    W: List[List[GroupElement]]


class FgVerificationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    m: int
    n: int
    a: GroupElement


class FgTrusteeKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    s: FieldVector
    t: FieldVector
    rho: FieldVector
    tau: FieldVector


class FgKeys(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    alpha: int
    s: FieldVector
    t: FieldVector
    rho: FieldVector
    tau: FieldVector
    W: List[List[GroupElement]]
    a: GroupElement
    A: FieldMatrix

    def evaluation_key(self) -> FgEvaluationKey:
        return FgEvaluationKey(A=self.A, W=self.W)

    def verification_key(self) -> FgVerificationKey:
        return FgVerificationKey(m=self.A.m, n=self.A.n, a=self.a)

    def trustee_key(self) -> FgTrusteeKey:
        return FgTrusteeKey(s=self.s, t=self.t, rho=self.rho, tau=self.tau)


class FgProof(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y: FieldVector
    z: List[GroupElement]


class FgProbGen(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: FieldVector
    vk_x: List[GroupElement]


def fg_keygen(A: FieldMatrix, suite: PairingSuite, rng=None, *,
              alpha: Optional[int] = None,
              s: Optional[Sequence[int]] = None, t: Optional[Sequence[int]] = None,
              rho: Optional[Sequence[int]] = None, tau: Optional[Sequence[int]] = None) -> FgKeys:
    """Keyword secrets override sampling and exist for worked examples."""
    rng = rng or secrets.SystemRandom()
    p, m, n = suite.p, A.m, A.n
    alpha = suite.random_scalar(rng) if alpha is None else alpha
    s = FieldVector(s if s is not None else suite.random_scalars(rng, m), p)
    t = FieldVector(t if t is not None else suite.random_scalars(rng, n), p)
    rho = FieldVector(rho if rho is not None else suite.random_scalars(rng, m), p)
    tau = FieldVector(tau if tau is not None else suite.random_scalars(rng, n), p)
    if (len(s), len(rho), len(t), len(tau)) != (m, m, n, n):
        raise DimensionError(f"secret vectors do not match the {m}x{n} matrix")

    rows = A.rows()
    count_field(5 * m * n)
    W = [
        [suite.g1 ** (alpha * rows[i][j] + s[i] * t[j] + rho[i] * tau[j]) for j in range(n)]
        for i in range(m)
    ]
    a = suite.pair(suite.g1 ** alpha, suite.g2)
    logger.info(f"fg keys generated for a {m}x{n} matrix")
    return FgKeys(alpha=alpha % p, s=s, t=t, rho=rho, tau=tau, W=W, a=a, A=A)


def fg_probgen(trustee: FgTrusteeKey, x: Sequence[int], suite: PairingSuite,
               use_pairing: bool = False) -> FgProbGen:
    """
    VK_x[i] = gT^(s[i] d + rho[i] delta). With ``use_pairing`` each entry is
    computed as e(g1^(s[i] d + rho[i] delta), g2) instead; both agree by bilinearity.
    """
    if len(x) != len(trustee.t):
        raise DimensionError(f"input has length {len(x)}, keys expect {len(trustee.t)}")
    d = trustee.t.dot(x)
    delta = trustee.tau.dot(x)
    count_field(3 * len(trustee.s))
    exponents = [si * d + ri * delta for si, ri in zip(trustee.s, trustee.rho)]
    if use_pairing:
        vk_x = [suite.pair(suite.g1 ** e, suite.g2) for e in exponents]
    else:
        vk_x = [suite.gT ** e for e in exponents]
    return FgProbGen(x=FieldVector(x, suite.p), vk_x=vk_x)


def fg_compute(ek: FgEvaluationKey, x: Sequence[int], y: Optional[FieldVector] = None) -> FgProof:
    if len(x) != ek.A.n:
        raise DimensionError(f"input has length {len(x)}, matrix has {ek.A.n} columns")
    y = matvec(ek.A, x) if y is None else y
    z = group_matvec(ek.W, list(x))
    return FgProof(y=y, z=z)


def fg_verify(vk: FgVerificationKey, probgen: FgProbGen, proof: FgProof, suite: PairingSuite) -> Verdict:
    if len(proof.y) != vk.m or len(proof.z) != vk.m or len(probgen.vk_x) != vk.m:
        return Verdict.reject("shape")
    for i in range(vk.m):
        lhs = suite.pair(proof.z[i], suite.g2)
        rhs = (vk.a ** proof.y[i]) * probgen.vk_x[i]
        if lhs != rhs:
            logger.warning(f"fg verification failed at equation {i}")
            return Verdict.reject(f"equation {i}")
    return Verdict.accept(y=proof.y)


def fg_run(A: FieldMatrix, x: Sequence[int], suite: PairingSuite, rng=None) -> Verdict:
    """Every role in turn, each under its own counter scope."""
    with op_scope("preparator"):
        keys = fg_keygen(A, suite, rng)
    with op_scope("trustee"):
        probgen = fg_probgen(keys.trustee_key(), x, suite)
    with op_scope("prover"):
        proof = fg_compute(keys.evaluation_key(), x)
    with op_scope("verifier"):
        return fg_verify(keys.verification_key(), probgen, proof, suite)
