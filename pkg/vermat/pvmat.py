"""
Publicly delegatable verifiable matrix-vector product.

KeyGen masks the projection u^T A with t^T + gamma delta v^T:

    omega^T = g1^(u^T A + t^T + gamma delta v^T),
    u = vec(mu eta^T),  t = vec(rho1 tau1^T + rho2 tau2^T),  v ~ V (d1 x d2).

The prover returns sigma_y = {y, zeta = omega^T * x, s1, s2, z, C}, where s_i,
z and C are exponent-side products against x (or y) reshaped column-major.
The verifier checks s1, s2, z with Freivalds projections, C with a paired
projection, and finally

    e(zeta, g2) = H * D1 * D2 * e(Trace(C), g2^gamma),

H = prod e(z[i], g2^mu[i]) = gT^(u^T y), D_i = prod e(s_i[j], g2^rho_i[j])
and Trace(C) = g1^(delta v^T x). No trustee is needed: ProbGen is the identity.
"""
import logging
import secrets
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from vermat.config import config
from vermat.errors import DimensionError
from vermat.fplinalg import (FieldMatrix, FieldVector, group_matvec, matvec, reshape_lhs, reshape_rhs,
                             rmatvec, star_matrix, star_rows, star_vector, trace_group)
from vermat.pairing_core import (GroupElement, PairingSuite, count_field, exp_all, op_scope,
                                 run_scoped)
from vermat.schemas import PvmatParams, Verdict, VerifyMode

logger = logging.getLogger(__name__)

CHECKS = ("s1", "s2", "z", "C", "final")


class PvmatSecrets(BaseModel):
    model_config = ConfigDict(frozen=True)

    mu: List[int]
    eta: List[int]
    rho1: List[int]
    rho2: List[int]
    tau1: List[int]
    tau2: List[int]
    varpi: List[int]
    gamma: int
    delta: int
    v: List[int]

    @classmethod
    def sample(cls, params: PvmatParams, suite: PairingSuite, rng) -> "PvmatSecrets":
        draw = suite.random_scalars
        return cls(
            mu=draw(rng, params.b1), eta=draw(rng, params.b2),
            rho1=draw(rng, params.c1), rho2=draw(rng, params.c1),
            tau1=draw(rng, params.c2), tau2=draw(rng, params.c2),
            varpi=draw(rng, params.d1),
            gamma=suite.random_scalar(rng, nonzero=True),
            delta=suite.random_scalar(rng, nonzero=True),
            v=draw(rng, params.n),
        )

    def check_shapes(self, params: PvmatParams) -> None:
        expected = {
            "mu": params.b1, "eta": params.b2, "rho1": params.c1, "rho2": params.c1,
            "tau1": params.c2, "tau2": params.c2, "varpi": params.d1, "v": params.n,
        }
        for name, length in expected.items():
            if len(getattr(self, name)) != length:
                raise DimensionError(f"secret {name} must have length {length}")


class PvmatEvaluationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: PvmatParams
    A: FieldMatrix
    omega: List[GroupElement]
    g1_tau1: List[GroupElement]
    g1_tau2: List[GroupElement]
    g1_eta: List[GroupElement]
    g1_delta_V: List[List[GroupElement]]


class PvmatVerificationKey(BaseModel):
    """Group elements and dims only."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: PvmatParams
    g1_tau1: List[GroupElement]
    g1_tau2: List[GroupElement]
    g2_rho1: List[GroupElement]
    g2_rho2: List[GroupElement]
    g1_eta: List[GroupElement]
    g2_mu: List[GroupElement]
    g1_delta_varpi_V: List[GroupElement]
    g2_gamma_varpi: List[GroupElement]
    g2_gamma: GroupElement


class PvmatKeys(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    secrets: PvmatSecrets
    u: FieldVector
    t: FieldVector
    ek: PvmatEvaluationKey
    vk: PvmatVerificationKey


class PvmatProof(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y: FieldVector
    zeta: GroupElement
    s1: List[GroupElement]
    s2: List[GroupElement]
    z: List[GroupElement]
    C: List[List[GroupElement]]


class PvmatProbGen(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: FieldVector


def _outer_vec(left: Sequence[int], right: Sequence[int], length: int, p: int) -> List[int]:
    """First ``length`` entries of vec(left right^T), row-major."""
    width = len(right)
    count_field(length)
    return [left[k // width] * right[k % width] % p for k in range(length)]


def pvmat_keygen(A: FieldMatrix, params: PvmatParams, suite: PairingSuite, rng=None,
                 secrets_override: Optional[PvmatSecrets] = None) -> PvmatKeys:
    """
    Costs mu(A) + O(m + n) field operations and about 2n exponentiations.
    ``secrets_override`` replaces sampling; a zero gamma or delta is accepted
    there only for algebra tests.
    """
    if (A.m, A.n) != (params.m, params.n):
        raise DimensionError(f"matrix is {A.m}x{A.n} but params describe {params.m}x{params.n}")
    rng = rng or secrets.SystemRandom()
    p = suite.p
    sec = secrets_override or PvmatSecrets.sample(params, suite, rng)
    sec.check_shapes(params)
    if sec.gamma % p == 0 or sec.delta % p == 0:
        logger.warning("pvmat keys generated with a zero mask; never use them outside tests")

    u = FieldVector(_outer_vec(sec.mu, sec.eta, params.m, p), p)
    t1 = _outer_vec(sec.rho1, sec.tau1, params.n, p)
    t2 = _outer_vec(sec.rho2, sec.tau2, params.n, p)
    t = FieldVector(t1, p) + FieldVector(t2, p)

    gamma_delta = sec.gamma * sec.delta % p
    count_field(1)
    mask = FieldVector(sec.v, p).scale(gamma_delta)
    exponents = rmatvec(A, u) + t + mask
    omega = exp_all(suite.g1, exponents)

    V = reshape_lhs(sec.v, params.d1, params.d2, p)
    V_rows = V.rows()
    count_field(params.n + 2 * params.d1 * params.d2 + params.d1)
    delta_V = [[sec.delta * e % p for e in row] for row in V_rows]
    varpi_V = [sum(sec.varpi[i] * V_rows[i][j] for i in range(params.d1)) for j in range(params.d2)]

    g1_tau1 = exp_all(suite.g1, sec.tau1)
    g1_tau2 = exp_all(suite.g1, sec.tau2)
    g1_eta = exp_all(suite.g1, sec.eta)
    ek = PvmatEvaluationKey(
        params=params, A=A, omega=omega,
        g1_tau1=g1_tau1, g1_tau2=g1_tau2, g1_eta=g1_eta,
        g1_delta_V=[exp_all(suite.g1, row) for row in delta_V],
    )
    vk = PvmatVerificationKey(
        params=params, g1_tau1=g1_tau1, g1_tau2=g1_tau2,
        g2_rho1=exp_all(suite.g2, sec.rho1), g2_rho2=exp_all(suite.g2, sec.rho2),
        g1_eta=g1_eta, g2_mu=exp_all(suite.g2, sec.mu),
        g1_delta_varpi_V=exp_all(suite.g1, [sec.delta * e for e in varpi_V]),
        g2_gamma_varpi=exp_all(suite.g2, [sec.gamma * e for e in sec.varpi]),
        g2_gamma=suite.g2 ** sec.gamma,
    )
    logger.info(f"pvmat keys generated for a {params.m}x{params.n} matrix "
                f"(b={params.b1}x{params.b2}, c={params.c1}x{params.c2}, d={params.d1}x{params.d2})")
    return PvmatKeys(secrets=sec, u=u, t=t, ek=ek, vk=vk)


def pvmat_probgen(x: Sequence[int], p: int) -> PvmatProbGen:
    """sigma_x = x; nothing secret is involved."""
    return PvmatProbGen(x=x if isinstance(x, FieldVector) else FieldVector(x, p))


def pvmat_compute(ek: PvmatEvaluationKey, x: Sequence[int], y: Optional[FieldVector] = None,
                  workers: Optional[int] = None) -> PvmatProof:
    params = ek.params
    if len(x) != params.n:
        raise DimensionError(f"input has length {len(x)}, matrix has {params.n} columns")
    p = ek.A.p
    y = matvec(ek.A, x) if y is None else y
    Xc = reshape_rhs(list(x), params.c2, params.c1, p)
    Y = reshape_rhs(list(y), params.b2, params.b1, p)
    Xd = reshape_rhs(list(x), params.d2, params.d1, p)

    zeta, s1, s2, z, C = run_scoped([
        lambda: star_vector(ek.omega, x),
        lambda: star_rows(ek.g1_tau1, Xc),
        lambda: star_rows(ek.g1_tau2, Xc),
        lambda: star_rows(ek.g1_eta, Y),
        lambda: star_matrix(ek.g1_delta_V, Xd),
    ], workers or config.WORKERS)
    return PvmatProof(y=y, zeta=zeta, s1=s1, s2=s2, z=z, C=C)


def _proof_shape_ok(params: PvmatParams, proof: PvmatProof) -> bool:
    return (
        len(proof.y) == params.m
        and len(proof.s1) == params.c1
        and len(proof.s2) == params.c1
        and len(proof.z) == params.b1
        and len(proof.C) == params.d1
        and all(len(row) == params.d1 for row in proof.C)
    )


def pvmat_verify(vk: PvmatVerificationKey, x: Sequence[int], proof: PvmatProof,
                 suite: PairingSuite, rng=None, mode: Optional[VerifyMode] = None) -> Verdict:
    """
    Runs the five checks in order. Production mode stops at the first failure;
    testing mode evaluates all of them and records each result. Both modes
    reach the same decision.
    """
    params = vk.params
    if len(x) != params.n:
        raise DimensionError(f"input has length {len(x)}, keys expect {params.n}")
    if not _proof_shape_ok(params, proof):
        logger.warning("pvmat proof has the wrong shape")
        return Verdict.reject("shape")
    mode = mode or (VerifyMode.TESTING if config.TESTING_MODE else VerifyMode.PRODUCTION)
    rng = rng or secrets.SystemRandom()
    p = suite.p

    v1 = suite.random_scalars(rng, params.c1)
    v2 = suite.random_scalars(rng, params.c1)
    v3 = suite.random_scalars(rng, params.b1)
    v4 = suite.random_scalars(rng, params.d1)
    Xc = reshape_rhs(list(x), params.c2, params.c1, p)
    Y = reshape_rhs(list(proof.y), params.b2, params.b1, p)
    Xd = reshape_rhs(list(x), params.d2, params.d1, p)

    def check_s(s: List[GroupElement], g1_tau: List[GroupElement], v: List[int]) -> bool:
        return star_vector(s, v) == star_vector(g1_tau, matvec(Xc, v))

    def check_z() -> bool:
        return star_vector(proof.z, v3) == star_vector(vk.g1_eta, matvec(Y, v3))

    def check_C() -> bool:
        theta = group_matvec(proof.C, v4)
        lhs = suite.pairing_product(theta, vk.g2_gamma_varpi)
        rhs = suite.pair(star_vector(vk.g1_delta_varpi_V, matvec(Xd, v4)), vk.g2_gamma)
        return lhs == rhs

    def check_final() -> bool:
        H = suite.pairing_product(proof.z, vk.g2_mu)
        D1 = suite.pairing_product(proof.s1, vk.g2_rho1)
        D2 = suite.pairing_product(proof.s2, vk.g2_rho2)
        masked = suite.pair(trace_group(proof.C), vk.g2_gamma)
        return suite.pair(proof.zeta, suite.g2) == H * D1 * D2 * masked

    checks: List[Tuple[str, Callable[[], bool]]] = [
        ("s1", lambda: check_s(proof.s1, vk.g1_tau1, v1)),
        ("s2", lambda: check_s(proof.s2, vk.g1_tau2, v2)),
        ("z", check_z),
        ("C", check_C),
        ("final", check_final),
    ]

    results: Dict[str, bool] = {}
    if mode is VerifyMode.TESTING:
        outcomes = run_scoped([fn for _, fn in checks], config.WORKERS)
        results = {name: ok for (name, _), ok in zip(checks, outcomes)}
    else:
        for name, fn in checks:
            results[name] = fn()
            if not results[name]:
                break

    failed = [name for name in CHECKS if name in results and not results[name]]
    if failed:
        logger.warning(f"pvmat verification failed at check '{failed[0]}'")
        return Verdict.reject(failed[0], results)
    logger.debug("pvmat verification passed all checks")
    return Verdict.accept(y=proof.y, checks=results)


def pvmat_run(A: FieldMatrix, x: Sequence[int], suite: PairingSuite, rng=None,
              params: Optional[PvmatParams] = None) -> Verdict:
    params = params or PvmatParams.defaults(A.m, A.n)
    with op_scope("preparator"):
        keys = pvmat_keygen(A, params, suite, rng)
    with op_scope("trustee"):
        sigma = pvmat_probgen(x, suite.p)
    with op_scope("prover"):
        proof = pvmat_compute(keys.ek, sigma.x)
    with op_scope("verifier"):
        return pvmat_verify(keys.vk, sigma.x, proof, suite, rng)
