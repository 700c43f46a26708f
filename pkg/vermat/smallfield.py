"""
Trustee-assisted verification for small data fields.

A and x live in F_p with a small p, while the pairing group has a large
order q > m n p^4. The prover returns y = A x over the integers, the check
e(zeta, g2) = gT^(u^T y + t^T x) runs with integer exponents that never wrap
around q, and the verifier finally reduces y mod p.

The secret projection is structured, u_l = alpha r_i s_j for l = i k + j with
k = ceil(sqrt(m)), so u^T A is obtained from small-value products:
P_i = sum_j s_j A[i k + j, :], then Q = sum_i r_i P_i, then alpha Q.
"""
import logging
import math
import secrets
from typing import Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict

from vermat.errors import DimensionError, ParameterError
from vermat.fplinalg import FieldMatrix, FieldVector, matvec_integer, star_vector
from vermat.pairing_core import GroupElement, PairingSuite, count_field, count_small, exp_all, op_scope
from vermat.schemas import Verdict

logger = logging.getLogger(__name__)

MAX_DATA_MODULUS = 2 ** 16


class SmallFieldEvaluationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: FieldMatrix
    omega: List[GroupElement]


class SmallFieldTrusteeKey(BaseModel):
    p: int
    u: List[int]
    t: List[int]


class SmallFieldVerificationKey(BaseModel):
    p: int
    q: int
    m: int
    n: int


class SmallFieldKeys(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: int
    q: int
    alpha: int
    r: List[int]
    s: List[int]
    u: List[int]
    t: List[int]
    omega: List[GroupElement]
    A: FieldMatrix
    bound: int
    alpha_max: int
    t_max: int

    @property
    def security_alpha_bits(self) -> float:
        """Half the bit size of the room left above m n p^4."""
        return (self.q.bit_length() - self.bound.bit_length()) / 2

    @property
    def security_t_bits(self) -> float:
        """Half the bit size of the set t is drawn from."""
        return (self.t_max + 1).bit_length() / 2

    def metadata(self) -> Dict[str, Union[int, float, bool]]:
        return {
            "data_modulus": self.p,
            "group_order": self.q,
            "bound": self.bound,
            "bound_ok": self.q > self.bound,
            "security_alpha_bits": self.security_alpha_bits,
            "security_t_bits": self.security_t_bits,
        }

    def evaluation_key(self) -> SmallFieldEvaluationKey:
        return SmallFieldEvaluationKey(A=self.A, omega=self.omega)

    def trustee_key(self) -> SmallFieldTrusteeKey:
        return SmallFieldTrusteeKey(p=self.p, u=self.u, t=self.t)

    def verification_key(self) -> SmallFieldVerificationKey:
        return SmallFieldVerificationKey(p=self.p, q=self.q, m=self.A.m, n=self.A.n)


class SmallFieldProof(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y: List[int]
    zeta: GroupElement


class SmallFieldResponse(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: List[int]
    y: List[int]
    h: int
    d: int
    eta: GroupElement


def side_length(m: int) -> int:
    return math.isqrt(m - 1) + 1 if m > 0 else 0


def required_bound(m: int, n: int, p: int) -> int:
    return m * n * p ** 4


def check_range(values: Sequence[int], p: int, name: str) -> None:
    for index, value in enumerate(values):
        if not 0 <= value < p:
            raise ParameterError(f"{name}[{index}] = {value} is outside [0, {p})")


def sf_keygen(A: FieldMatrix, suite: PairingSuite, rng=None, *,
              alpha: Optional[int] = None, r: Optional[Sequence[int]] = None,
              s: Optional[Sequence[int]] = None) -> SmallFieldKeys:
    rng = rng or secrets.SystemRandom()
    p, q, m, n = A.p, suite.p, A.m, A.n
    if p > MAX_DATA_MODULUS:
        raise ParameterError(f"data modulus {p} exceeds the small-field limit {MAX_DATA_MODULUS}")
    bound = required_bound(m, n, p)
    if q <= bound:
        raise ParameterError(f"group order {q} must exceed m*n*p^4 = {bound}")

    # exponent budget: alpha m n (p-1)^4 + n (p-1) t_max < q
    top = m * n * (p - 1) ** 4
    alpha_max = max(1, (q - 1) // (2 * top)) if top else q - 1
    room = q - 1 - alpha_max * top
    t_max = room // (n * (p - 1)) if n and p > 1 else 0

    k = side_length(m)
    alpha = rng.randrange(1, alpha_max + 1) if alpha is None else alpha
    r = list(r) if r is not None else [rng.randrange(1, p) for _ in range(k)]
    s = list(s) if s is not None else [rng.randrange(1, p) for _ in range(k)]
    if len(r) != k or len(s) != k:
        raise DimensionError(f"r and s must have length ceil(sqrt(m)) = {k}")

    # P_i[c] = sum_j s_j A[i k + j, c]
    partial = [[0] * n for _ in range(k)]
    triples = A.triples()
    for row, col, value in triples:
        i, j = divmod(row, k)
        partial[i][col] += s[j] * value
    count_small(2 * len(triples) if A.is_sparse else 2 * m * n)
    combined = [sum(r[i] * partial[i][c] for i in range(k)) for c in range(n)]
    count_small(2 * k * n)
    uA = [alpha * value for value in combined]
    u = [alpha * r[l // k] * s[l % k] for l in range(m)]
    count_field(n + m)

    t = [rng.randrange(0, t_max + 1) for _ in range(n)]
    omega = exp_all(suite.g1, [a + b for a, b in zip(uA, t)])
    keys = SmallFieldKeys(p=p, q=q, alpha=alpha, r=r, s=s, u=u, t=t, omega=omega, A=A,
                          bound=bound, alpha_max=alpha_max, t_max=t_max)
    logger.info(f"small-field keys: p={p}, q has {q.bit_length()} bits, bound {bound}, "
                f"security estimates {keys.security_alpha_bits} / {keys.security_t_bits} bits")
    return keys


def sf_compute(ek: SmallFieldEvaluationKey, x: Sequence[int], y: Optional[List[int]] = None) -> SmallFieldProof:
    if len(x) != ek.A.n:
        raise DimensionError(f"input has length {len(x)}, matrix has {ek.A.n} columns")
    check_range(x, ek.A.p, "x")
    y = matvec_integer(ek.A, x) if y is None else y
    return SmallFieldProof(y=y, zeta=star_vector(ek.omega, list(x)))


def sf_trustee(trustee: SmallFieldTrusteeKey, x: Sequence[int], y: Sequence[int],
               suite: PairingSuite) -> SmallFieldResponse:
    if len(x) != len(trustee.t) or len(y) != len(trustee.u):
        raise DimensionError(f"trustee expects x of length {len(trustee.t)} and y of length {len(trustee.u)}")
    h = sum(a * b for a, b in zip(trustee.u, y))
    d = sum(a * b for a, b in zip(trustee.t, x))
    count_field(2 * (len(y) + len(x)) + 1)
    return SmallFieldResponse(x=list(x), y=list(y), h=h, d=d, eta=suite.gT ** (h + d))


def sf_verify(vk: SmallFieldVerificationKey, proof: SmallFieldProof, response: SmallFieldResponse,
              suite: PairingSuite) -> Verdict:
    """Range-checks y over the integers, checks the pairing, and outputs y mod p."""
    if len(proof.y) != vk.m:
        return Verdict.reject("shape")
    if list(response.y) != list(proof.y):
        logger.warning("small-field trustee response was made for a different output")
        return Verdict.reject("response")
    ceiling = vk.n * (vk.p - 1) ** 2
    if any(not 0 <= value <= ceiling for value in proof.y):
        logger.warning("small-field proof has an output outside the integer range")
        return Verdict.reject("range")
    if suite.pair(proof.zeta, suite.g2) != response.eta:
        logger.warning("small-field verification failed: e(zeta, g2) != eta")
        return Verdict.reject("pairing")
    return Verdict.accept(y=FieldVector(proof.y, vk.p))


def sf_verify_flow(A: FieldMatrix, x: Sequence[int], suite: PairingSuite, rng=None,
                   keys: Optional[SmallFieldKeys] = None) -> Verdict:
    with op_scope("preparator"):
        keys = keys or sf_keygen(A, suite, rng)
    with op_scope("prover"):
        proof = sf_compute(keys.evaluation_key(), x)
    with op_scope("trustee"):
        response = sf_trustee(keys.trustee_key(), x, proof.y, suite)
    with op_scope("verifier"):
        return sf_verify(keys.verification_key(), proof, response, suite)
