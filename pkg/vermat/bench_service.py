"""
Benchmark harness: times every role phase on seeded random instances and
records the op counters next to the leading-term cost formulas.

Compute is always reported as the plain y = A x time plus the remaining
proof work, so ``overhead_ratio`` compares like with like.
"""
import logging
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel

from vermat.config import config
from vermat.dotprod import (ChunkedEvaluationKey, ChunkedVerificationKey, chunked_compute, chunked_keygen,
                            chunked_verify, rank1_compute, rank1_keygen, rank1_probgen, rank1_verify)
from vermat.errors import ParameterError, VermatError
from vermat.fg_baseline import fg_compute, fg_keygen, fg_probgen, fg_verify
from vermat.fplinalg import FieldMatrix, FieldVector, matvec, matvec_integer, random_dense, random_sparse, random_vector
from vermat.freivalds import challenge_private, verify_one
from vermat.pairing_core import OpCounters, PairingSuite, op_scope, suite_for
from vermat.protocol_service import get_protocol
from vermat.pvmat import pvmat_compute, pvmat_keygen, pvmat_probgen, pvmat_verify
from vermat.schemas import BenchReport, BenchRow, ChunkParams, DotProductDims, ProtocolTag, PvmatParams
from vermat.smallfield import sf_compute, sf_keygen, sf_trustee, sf_verify
from vermat.spmv_interactive import spmv_compute, spmv_keygen, spmv_trustee, spmv_verify

logger = logging.getLogger(__name__)

DEFAULT_DATA_MODULUS = 251


# ==================================================
#              LEADING TERMS
# ==================================================

def leading_terms(protocol: str, phase: str, m: int, n: int, mu: int) -> Tuple[float, float]:
    """(field operations, group operations) predicted for one phase."""
    if phase == "matvec":
        return float(mu), 0.0
    dims = DotProductDims.unbalanced(n, config.DIM_RATIO)
    b1, b2 = dims.b1, dims.b2
    table: Dict[str, Dict[str, Tuple[float, float]]] = {
        "freivalds": {
            "keygen": (mu, 0), "compute": (mu, 0), "verify": (2 * (m + n), 0),
        },
        "fg": {
            "keygen": (2 * m * n, m * n), "probgen": (2 * (m + n), 2 * m),
            "compute": (mu, 2 * m * n), "verify": (0, 2 * m),
        },
        "spmv": {
            "keygen": (mu + n, n), "trustee": (2 * (m + n + 1), 1),
            "compute": (mu, 2 * n), "verify": (0, 1),
        },
        "smallfield": {
            "keygen": (mu + n, n), "trustee": (2 * (m + n + 1), 1),
            "compute": (mu, 2 * n), "verify": (0, 1),
        },
        "pvmat": {
            "keygen": (mu + m + 5 * n, 2 * n), "probgen": (0, 0),
            "compute": (mu, 2 * n ** (4 / 3) + m),
            "verify": (2 * m + 4 * n, 6 * math.sqrt(m) + 2 * n ** (2 / 3)),
        },
        "rank1dp": {
            "keygen": (0, b1 + b2), "probgen": (0, 0),
            "compute": (0, n), "verify": (n, b1 + b2),
        },
        "gendp": {
            "keygen": (2 * n, n + 2 * b1), "compute": (0, n * b1), "verify": (n, b1 * b1 + b2),
        },
    }
    field_ops, group_ops = table.get(protocol, {}).get(phase, (0, 0))
    return float(field_ops), float(group_ops)


# ==================================================
#              PHASE TIMING
# ==================================================

class BenchJob(BaseModel):
    protocol: ProtocolTag
    size: int
    repetitions: int = 1
    seed: int = 0
    backend: str = "toy"
    modulus: Optional[int] = None
    nnz_per_row: Optional[int] = None
    data_modulus: int = DEFAULT_DATA_MODULUS


class PhaseTimer:
    """Accumulates wall time per phase; keeps the counters of the last run."""

    def __init__(self):
        self.total_ms: Dict[str, float] = {}
        self.runs: Dict[str, int] = {}
        self.counters: Dict[str, OpCounters] = {}
        self.last_ms: Dict[str, float] = {}

    def run(self, phase: str, fn: Callable[[], object]) -> object:
        with op_scope(phase) as counters:
            start = time.perf_counter()
            result = fn()
            elapsed = (time.perf_counter() - start) * 1000
        self.total_ms[phase] = self.total_ms.get(phase, 0.0) + elapsed
        self.runs[phase] = self.runs.get(phase, 0) + 1
        self.last_ms[phase] = elapsed
        self.counters[phase] = counters
        return result

    def compute(self, fn: Callable[[], object]) -> object:
        """Compute = last matvec run plus the proof remainder."""
        result = self.run("compute", fn)
        self.total_ms["compute"] += self.last_ms["matvec"]
        remainder = self.counters["compute"]
        merged = OpCounters()
        merged.merge(self.counters["matvec"])
        merged.merge(remainder)
        self.counters["compute"] = merged
        return result

    def mean_ms(self, phase: str) -> float:
        return self.total_ms[phase] / self.runs[phase]


def _accepted(verdict, protocol: str) -> None:
    if not verdict.accepted:
        logger.error(f"honest {protocol} run rejected ({verdict.reason})")
        raise VermatError(f"honest {protocol} run was rejected: {verdict.reason}", exit_code=1)


def _pipeline(protocol: ProtocolTag, A: Optional[FieldMatrix], x: FieldVector, suite: PairingSuite,
              rng: random.Random, timer: PhaseTimer) -> None:
    if protocol is ProtocolTag.FREIVALDS:
        ch = timer.run("keygen", lambda: challenge_private(A, rng))
        y = timer.run("matvec", lambda: matvec(A, x))
        timer.compute(lambda: y)
        _accepted(timer.run("verify", lambda: verify_one(ch, x, y)), protocol.value)

    elif protocol is ProtocolTag.FG:
        keys = timer.run("keygen", lambda: fg_keygen(A, suite, rng))
        vk_x = timer.run("probgen", lambda: fg_probgen(keys.trustee_key(), x, suite))
        y = timer.run("matvec", lambda: matvec(A, x))
        proof = timer.compute(lambda: fg_compute(keys.evaluation_key(), x, y))
        _accepted(timer.run("verify", lambda: fg_verify(keys.verification_key(), vk_x, proof, suite)),
                  protocol.value)

    elif protocol is ProtocolTag.SPMV:
        keys = timer.run("keygen", lambda: spmv_keygen(A, suite, rng))
        y = timer.run("matvec", lambda: matvec(A, x))
        proof = timer.compute(lambda: spmv_compute(keys.evaluation_key(), x, y))
        response = timer.run("trustee", lambda: spmv_trustee(keys.trustee_key(), x, proof.y, suite))
        _accepted(timer.run("verify", lambda: spmv_verify(proof, response, suite)), protocol.value)

    elif protocol is ProtocolTag.SMALLFIELD:
        keys = timer.run("keygen", lambda: sf_keygen(A, suite, rng))
        xs = list(x)
        y = timer.run("matvec", lambda: matvec_integer(A, xs))
        proof = timer.compute(lambda: sf_compute(keys.evaluation_key(), xs, y))
        response = timer.run("trustee", lambda: sf_trustee(keys.trustee_key(), xs, proof.y, suite))
        _accepted(timer.run("verify", lambda: sf_verify(keys.verification_key(), proof, response, suite)),
                  protocol.value)

    elif protocol is ProtocolTag.PVMAT:
        params = PvmatParams.defaults(A.m, A.n)
        keys = timer.run("keygen", lambda: pvmat_keygen(A, params, suite, rng))
        sigma = timer.run("probgen", lambda: pvmat_probgen(x, suite.p))
        y = timer.run("matvec", lambda: matvec(A, sigma.x))
        proof = timer.compute(lambda: pvmat_compute(keys.ek, sigma.x, y))
        _accepted(timer.run("verify", lambda: pvmat_verify(keys.vk, sigma.x, proof, suite, rng)), protocol.value)

    elif protocol is ProtocolTag.RANK1DP:
        dims = DotProductDims.unbalanced(len(x), config.DIM_RATIO)
        keys = timer.run("keygen", lambda: rank1_keygen(suite, dims, rng))
        Y = timer.run("probgen", lambda: rank1_probgen(x, dims))
        proof = timer.run("compute", lambda: rank1_compute(keys.evaluation_key(), Y))
        _accepted(timer.run("verify", lambda: rank1_verify(keys.verification_key(), Y, proof, suite, rng)),
                  protocol.value)

    elif protocol is ProtocolTag.GENDP:
        params = ChunkParams.for_length(len(x), config.CHUNK_A)
        u = random_vector(len(x), suite.p, rng)
        keys = timer.run("keygen", lambda: chunked_keygen(suite, u, params, rng))
        ek = ChunkedEvaluationKey(n=params.n, k=params.k, chunks=[k.evaluation_key() for k in keys])
        vk = ChunkedVerificationKey(n=params.n, k=params.k, chunks=[k.verification_key() for k in keys])
        proof = timer.run("compute", lambda: chunked_compute(ek, x))
        _accepted(timer.run("verify", lambda: chunked_verify(vk, x, proof, suite, rng)), protocol.value)


def _instance(job: BenchJob, suite: PairingSuite) -> Tuple[Optional[FieldMatrix], FieldVector, random.Random]:
    """Same seed and size give the same instance for every protocol; dot products get no matrix."""
    rng = random.Random(f"{job.seed}:{job.size}")
    p = job.data_modulus if job.protocol is ProtocolTag.SMALLFIELD else suite.p
    n = job.size
    if not get_protocol(job.protocol.value).needs_matrix:
        A = None
    elif job.nnz_per_row:
        A = random_sparse(n, n, min(n * n, job.nnz_per_row * n), p, rng)
    else:
        A = random_dense(n, n, p, rng)
    x = random_vector(n, p, rng, nonzero=True)
    return A, x, rng


def run_job(job: BenchJob) -> List[BenchRow]:
    suite = suite_for(job.backend, job.modulus)
    A, x, rng = _instance(job, suite)
    timer = PhaseTimer()
    for _ in range(job.repetitions):
        _pipeline(job.protocol, A, x, suite, rng, timer)

    m, n, mu = (A.m, A.n, A.mu) if A is not None else (job.size, job.size, 0)
    rows = []
    for phase in ("keygen", "probgen", "trustee", "matvec", "compute", "verify"):
        if phase not in timer.runs:
            continue
        counters = timer.counters[phase]
        expected_field, expected_group = leading_terms(job.protocol.value, phase, m, n, mu)
        rows.append(BenchRow(
            protocol=job.protocol.value, m=m, n=n, phase=phase,
            wall_ms=timer.mean_ms(phase),
            field_ops=counters.field_ops + counters.small_ops,
            g1_exp=counters.g1_exp, g2_exp=counters.g2_exp, gt_exp=counters.gt_exp,
            pairings=counters.pairings,
            expected_field_ops=expected_field, expected_group_ops=expected_group,
        ))
    logger.info(f"bench {job.protocol.value} at {job.size}: "
                + ", ".join(f"{r.phase}={r.wall_ms:.1f}ms" for r in rows))
    return rows


# ==================================================
#              REPORT
# ==================================================

class BenchService:
    """Runs the benchmark grid and derives the ratio columns"""

    def _with_ratios(self, rows: List[BenchRow]) -> List[BenchRow]:
        by_key = {(r.protocol, r.n, r.phase): r for r in rows}
        result = []
        for row in rows:
            updates = {}
            if row.phase == "compute":
                matvec_row = by_key.get((row.protocol, row.n, "matvec"))
                if matvec_row is not None and matvec_row.wall_ms > 0:
                    updates["overhead_ratio"] = row.wall_ms / matvec_row.wall_ms
                fg_row = by_key.get(("fg", row.n, "compute"))
                if row.protocol == "pvmat" and fg_row is not None and row.wall_ms > 0:
                    updates["speedup_vs_fg"] = fg_row.wall_ms / row.wall_ms
            result.append(row.model_copy(update=updates) if updates else row)
        return result

    def run(self, protocols: List[str], sizes: List[int], repetitions: int = 1, seed: int = 0,
            backend: str = "toy", modulus: Optional[int] = None, nnz_per_row: Optional[int] = None,
            data_modulus: int = DEFAULT_DATA_MODULUS, parallel: int = 0) -> BenchReport:
        if not sizes or any(s < 1 for s in sizes):
            raise ParameterError(f"bench sizes must be positive, got {sizes}")
        if repetitions < 1:
            raise ParameterError(f"repetitions must be positive, got {repetitions}")
        tags = [get_protocol(name).tag for name in protocols]
        jobs = [
            BenchJob(protocol=tag, size=size, repetitions=repetitions, seed=seed, backend=backend,
                     modulus=modulus, nnz_per_row=nnz_per_row, data_modulus=data_modulus)
            for tag in tags for size in sizes
        ]
        if parallel and parallel > 1:
            logger.warning(f"running {len(jobs)} bench jobs on {parallel} processes; wall times are unreliable")
            with ProcessPoolExecutor(max_workers=parallel) as pool:
                batches = list(pool.map(run_job, jobs))
        else:
            batches = [run_job(job) for job in jobs]
        rows = [row for batch in batches for row in batch]
        return BenchReport(rows=self._with_ratios(rows))


bench_service = BenchService()
