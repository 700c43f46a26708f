"""
Freivalds verification of batched products y_i = A x_i.

The verifier keeps a challenge u and its projection w^T = u^T A, and accepts a
pair iff w^T x = u^T y. In private mode u is random and must stay secret; in
Fiat-Shamir mode u is derived from a SHAKE-128 transcript of (A, xs, ys) and
only the pairs bound into the transcript can be checked.
"""
import hashlib
import logging
import secrets
from enum import Enum
from typing import FrozenSet, Iterator, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field

from vermat.config import config
from vermat.errors import ChallengeBindingError, DimensionError
from vermat.fplinalg import FieldMatrix, FieldVector, matvec, rmatvec
from vermat.schemas import Verdict

logger = logging.getLogger(__name__)


class FreivaldsMode(str, Enum):
    PRIVATE = "private"
    FIAT_SHAMIR = "fiat_shamir"


class FreivaldsChallenge(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    u: FieldVector
    w: FieldVector
    mode: FreivaldsMode = FreivaldsMode.PRIVATE
    digest: Optional[bytes] = None
    bound_pairs: FrozenSet[bytes] = Field(default_factory=frozenset)

    @property
    def m(self) -> int:
        return len(self.u)

    @property
    def n(self) -> int:
        return len(self.w)


# ============================================================================
# CANONICAL TRANSCRIPT
# ============================================================================

def _width(p: int) -> int:
    return max(1, (p.bit_length() + 7) // 8)


def _vector_bytes(v: Sequence[int], p: int) -> bytes:
    width = _width(p)
    return len(v).to_bytes(8, "little") + b"".join(int(e).to_bytes(width, "little") for e in v)


def _matrix_bytes(A: FieldMatrix) -> bytes:
    # storage independent: shape, then the nonzero entries in (row, col) order
    width = _width(A.p)
    triples = A.triples()
    out = [A.m.to_bytes(8, "little"), A.n.to_bytes(8, "little"), len(triples).to_bytes(8, "little")]
    out.extend(i.to_bytes(8, "little") + j.to_bytes(8, "little") + v.to_bytes(width, "little")
               for i, j, v in triples)
    return b"".join(out)


def _pair_key(x: Sequence[int], y: Sequence[int], p: int) -> bytes:
    return hashlib.shake_128(_vector_bytes(x, p) + _vector_bytes(y, p)).digest(32)


def _field_stream(seed: bytes, p: int) -> Iterator[int]:
    """Uniform elements of F_p from SHAKE-128(seed): 256-bit blocks masked to bit_length(p), rejecting >= p."""
    xof = hashlib.shake_128(seed)
    mask = (1 << p.bit_length()) - 1
    size = 32 * 64
    offset = 0
    buffer = xof.digest(size)
    while True:
        if offset + 32 > len(buffer):
            size *= 2
            buffer = xof.digest(size)
        candidate = int.from_bytes(buffer[offset:offset + 32], "little") & mask
        offset += 32
        if candidate < p:
            yield candidate


# ============================================================================
# CHALLENGES
# ============================================================================

def challenge_private(A: FieldMatrix, rng=None) -> FreivaldsChallenge:
    rng = rng or secrets.SystemRandom()
    u = FieldVector([rng.randrange(A.p) for _ in range(A.m)], A.p)
    w = rmatvec(A, u)
    return FreivaldsChallenge(u=u, w=w, mode=FreivaldsMode.PRIVATE)


def challenge_fs(A: FieldMatrix, xs: Sequence[Sequence[int]], ys: Sequence[Sequence[int]]) -> FreivaldsChallenge:
    if len(xs) != len(ys):
        raise DimensionError(f"{len(xs)} inputs but {len(ys)} outputs")
    if not xs:
        raise DimensionError("Fiat-Shamir challenge needs at least one pair")
    for x, y in zip(xs, ys):
        _check_dims(A.m, A.n, x, y)

    p = A.p
    transcript = [config.FS_DOMAIN, p.to_bytes(_width(p), "little"), _matrix_bytes(A),
                  len(xs).to_bytes(8, "little")]
    transcript.extend(_vector_bytes(x, p) for x in xs)
    transcript.extend(_vector_bytes(y, p) for y in ys)
    seed = b"".join(transcript)
    digest = hashlib.shake_128(seed).digest(32)

    stream = _field_stream(seed, p)
    u = FieldVector([next(stream) for _ in range(A.m)], p)
    w = rmatvec(A, u)
    bound = frozenset(_pair_key(x, y, p) for x, y in zip(xs, ys))
    logger.debug(f"Fiat-Shamir challenge bound to {len(xs)} pairs, digest {digest.hex()[:16]}")
    return FreivaldsChallenge(u=u, w=w, mode=FreivaldsMode.FIAT_SHAMIR, digest=digest, bound_pairs=bound)


# ============================================================================
# VERIFICATION
# ============================================================================

def _check_dims(m: int, n: int, x: Sequence[int], y: Sequence[int]) -> None:
    if len(x) != n or len(y) != m:
        raise DimensionError(f"expected x of length {n} and y of length {m}, got {len(x)} and {len(y)}")


def verify_one(ch: FreivaldsChallenge, x: Sequence[int], y: Sequence[int]) -> Verdict:
    """Accept iff w^T x = u^T y; costs 2n + 2m field operations."""
    _check_dims(ch.m, ch.n, x, y)
    p = ch.u.p
    if ch.mode is FreivaldsMode.FIAT_SHAMIR and _pair_key(x, y, p) not in ch.bound_pairs:
        raise ChallengeBindingError("pair was not bound into the Fiat-Shamir challenge")
    lhs = ch.w.dot(list(x))
    rhs = ch.u.dot(list(y))
    if lhs != rhs:
        logger.warning("Freivalds check failed: w^T x != u^T y")
        return Verdict.reject("freivalds", {"freivalds": False})
    y = y if isinstance(y, FieldVector) else FieldVector(y, p)
    return Verdict.accept(y=y, checks={"freivalds": True})


def verify_batch(ch: FreivaldsChallenge, xs: Sequence[Sequence[int]], ys: Sequence[Sequence[int]]) -> List[Verdict]:
    if len(xs) != len(ys):
        raise DimensionError(f"{len(xs)} inputs but {len(ys)} outputs")
    return [verify_one(ch, x, y) for x, y in zip(xs, ys)]


def freivalds_compute(A: FieldMatrix, x: Sequence[int]) -> FieldVector:
    """The prover's side is the plain product."""
    return matvec(A, x)


# ============================================================================
# ROLE BUNDLES
# ============================================================================

class FreivaldsEvaluationKey(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: FieldMatrix


class FreivaldsVerificationKey(BaseModel):
    """Private mode keeps (u, w); Fiat-Shamir mode keeps A and derives u per pair."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mode: FreivaldsMode
    u: Optional[FieldVector] = None
    w: Optional[FieldVector] = None
    A: Optional[FieldMatrix] = None

    def challenge(self, x: Sequence[int], y: Sequence[int]) -> FreivaldsChallenge:
        if self.mode is FreivaldsMode.FIAT_SHAMIR:
            return challenge_fs(self.A, [x], [y])
        return FreivaldsChallenge(u=self.u, w=self.w, mode=FreivaldsMode.PRIVATE)


class FreivaldsProof(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y: FieldVector
