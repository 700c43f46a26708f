"""
Bilinear pairing engine.

Two backends sit behind one interface:

- ``real``: the BN254 type-3 pairing of ``py_ecc.optimized_bn128``;
- ``toy``: the additive group of integers mod a small prime q, where
  g^a := a mod q and e(x, y) := x*y mod q. It is insecure and exists so that
  discrete logs can be read off and soundness errors of order 1/q measured.

Group-exponentiations and pairings are tallied in per-role ``OpCounters``
opened with ``op_scope``.
"""
from __future__ import annotations

import contextvars
import logging
import threading
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Iterator, List, Optional, Sequence, Tuple

from sympy import isprime

from vermat.errors import DimensionError, GroupMismatchError, MalformedError, ParameterError

logger = logging.getLogger(__name__)


class Group(str, Enum):
    G1 = "G1"
    G2 = "G2"
    GT = "GT"


GROUP_TAGS = {Group.G1: 0x01, Group.G2: 0x02, Group.GT: 0x03}
TAG_GROUPS = {tag: group for group, tag in GROUP_TAGS.items()}


# ============================================================================
# OPERATION COUNTERS
# ============================================================================

@dataclass
class OpCounters:
    role: str = "unscoped"
    field_ops: int = 0
    small_ops: int = 0
    g1_exp: int = 0
    g2_exp: int = 0
    gt_exp: int = 0
    pairings: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def group_exps(self) -> int:
        return self.g1_exp + self.g2_exp + self.gt_exp

    def merge(self, other: "OpCounters") -> None:
        with self._lock:
            self.field_ops += other.field_ops
            self.small_ops += other.small_ops
            self.g1_exp += other.g1_exp
            self.g2_exp += other.g2_exp
            self.gt_exp += other.gt_exp
            self.pairings += other.pairings

    def as_dict(self) -> dict:
        return {
            "field_ops": self.field_ops,
            "g1_exp": self.g1_exp,
            "g2_exp": self.g2_exp,
            "gt_exp": self.gt_exp,
            "pairings": self.pairings,
        }


_current_counters: contextvars.ContextVar[Optional[OpCounters]] = contextvars.ContextVar(
    "vermat_op_counters", default=None
)

_EXP_FIELDS = {Group.G1: "g1_exp", Group.G2: "g2_exp", Group.GT: "gt_exp"}


@contextmanager
def op_scope(role: str) -> Iterator[OpCounters]:
    """Open a fresh counter for ``role``; it is merged into the enclosing scope on exit."""
    counters = OpCounters(role=role)
    parent = _current_counters.get()
    token = _current_counters.set(counters)
    try:
        yield counters
    finally:
        _current_counters.reset(token)
        if parent is not None:
            parent.merge(counters)


def current_role() -> str:
    counters = _current_counters.get()
    return counters.role if counters is not None else "unscoped"


def count_field(k: int = 1) -> None:
    counters = _current_counters.get()
    if counters is not None and k:
        counters.field_ops += k


def count_small(k: int = 1) -> None:
    counters = _current_counters.get()
    if counters is not None and k:
        counters.small_ops += k


def count_exp(group: Group, k: int = 1) -> None:
    counters = _current_counters.get()
    if counters is not None and k:
        name = _EXP_FIELDS[group]
        setattr(counters, name, getattr(counters, name) + k)


def count_pairings(k: int = 1) -> None:
    counters = _current_counters.get()
    if counters is not None and k:
        counters.pairings += k


def run_scoped(tasks: Sequence[Callable[[], Any]], workers: int = 1) -> List[Any]:
    """
    Run independent tasks, each under its own counter scope carrying the
    caller's role. With ``workers > 1`` they run on a thread pool.
    """
    role = current_role()

    def scoped(task: Callable[[], Any]) -> Any:
        with op_scope(role):
            return task()

    if workers <= 1 or len(tasks) <= 1:
        return [scoped(task) for task in tasks]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(contextvars.copy_context().run, scoped, task)
            for task in tasks
        ]
        return [future.result() for future in futures]


# ============================================================================
# BACKENDS
# ============================================================================

class PairingBackend(ABC):
    """Raw group arithmetic; values are backend-native and never leave GroupElement."""

    name: str
    order: int
    secure: bool

    @abstractmethod
    def generator(self, group: Group) -> Any: ...

    @abstractmethod
    def identity(self, group: Group) -> Any: ...

    @abstractmethod
    def mul(self, group: Group, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def pow(self, group: Group, a: Any, k: int) -> Any: ...

    @abstractmethod
    def inv(self, group: Group, a: Any) -> Any: ...

    @abstractmethod
    def eq(self, group: Group, a: Any, b: Any) -> bool: ...

    @abstractmethod
    def pair(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def encode(self, group: Group, a: Any) -> bytes: ...

    @abstractmethod
    def decode(self, group: Group, data: bytes) -> Any: ...

    def pair_product(self, pairs: Sequence[Tuple[Any, Any]]) -> Any:
        acc = self.identity(Group.GT)
        for a, b in pairs:
            acc = self.mul(Group.GT, acc, self.pair(a, b))
        return acc

    def multi_exp(self, group: Group, bases: Sequence[Any], exps: Sequence[int]) -> Any:
        acc = self.identity(group)
        for base, k in zip(bases, exps):
            acc = self.mul(group, acc, self.pow(group, base, k))
        return acc


class ToyBackend(PairingBackend):
    secure = False

    def __init__(self, q: int):
        self.name = "toy"
        self.order = q

    def generator(self, group: Group) -> int:
        return 1

    def identity(self, group: Group) -> int:
        return 0

    def mul(self, group: Group, a: int, b: int) -> int:
        return (a + b) % self.order

    def pow(self, group: Group, a: int, k: int) -> int:
        return (a * k) % self.order

    def inv(self, group: Group, a: int) -> int:
        return (-a) % self.order

    def eq(self, group: Group, a: int, b: int) -> bool:
        return a == b

    def pair(self, a: int, b: int) -> int:
        return (a * b) % self.order

    def multi_exp(self, group: Group, bases: Sequence[int], exps: Sequence[int]) -> int:
        return sum(b * k for b, k in zip(bases, exps)) % self.order

    def encode(self, group: Group, a: int) -> bytes:
        return a.to_bytes(8, "little")

    def decode(self, group: Group, data: bytes) -> int:
        if len(data) != 8:
            raise MalformedError(f"toy element must be 8 bytes, got {len(data)}")
        value = int.from_bytes(data, "little")
        if value >= self.order:
            raise MalformedError(f"toy element {value} is not reduced mod {self.order}")
        return value


class BN254Backend(PairingBackend):
    """BN254 over py_ecc's optimized projective arithmetic."""

    secure = True
    PIPPENGER_THRESHOLD = 16

    def __init__(self):
        try:
            from py_ecc import optimized_bn128 as bn
        except ImportError as e:
            raise ParameterError(f"real backend unavailable: {str(e)}")
        self.bn = bn
        self.name = "real"
        self.order = int(bn.curve_order)
        self.field_modulus = int(bn.field_modulus)
        self._gt = bn.pairing(bn.G2, bn.G1)

    # -- group law ---------------------------------------------------------

    def generator(self, group: Group) -> Any:
        if group is Group.G1:
            return self.bn.G1
        if group is Group.G2:
            return self.bn.G2
        return self._gt

    def identity(self, group: Group) -> Any:
        if group is Group.G1:
            return self.bn.Z1
        if group is Group.G2:
            return self.bn.Z2
        return self.bn.FQ12.one()

    def mul(self, group: Group, a: Any, b: Any) -> Any:
        if group is Group.GT:
            return a * b
        return self.bn.add(a, b)

    def pow(self, group: Group, a: Any, k: int) -> Any:
        k %= self.order
        if group is Group.GT:
            return a ** k
        return self.bn.multiply(a, k)

    def inv(self, group: Group, a: Any) -> Any:
        if group is Group.GT:
            return self.bn.FQ12.one() / a
        return self.bn.neg(a)

    def eq(self, group: Group, a: Any, b: Any) -> bool:
        if group is Group.GT:
            return a == b
        return self.bn.eq(a, b)

    def pair(self, a: Any, b: Any) -> Any:
        return self.bn.pairing(b, a)

    def pair_product(self, pairs: Sequence[Tuple[Any, Any]]) -> Any:
        acc = self.bn.FQ12.one()
        for a, b in pairs:
            acc = acc * self.bn.pairing(b, a, final_exponentiate=False)
        return self.bn.final_exponentiate(acc)

    def multi_exp(self, group: Group, bases: Sequence[Any], exps: Sequence[int]) -> Any:
        exps = [k % self.order for k in exps]
        if group is Group.GT or len(bases) < self.PIPPENGER_THRESHOLD:
            return super().multi_exp(group, bases, exps)
        return self._pippenger(group, bases, exps)

    def _pippenger(self, group: Group, bases: Sequence[Any], exps: Sequence[int]) -> Any:
        n = len(bases)
        c = 1
        while (c + 2) * 2 ** (c + 2) < n:
            c += 1
        mask = (1 << c) - 1
        bits = max(k.bit_length() for k in exps)
        zero = self.identity(group)
        result = zero
        for shift in reversed(range(0, bits, c)):
            for _ in range(c):
                result = self.bn.double(result)
            buckets: List[Any] = [None] * (mask + 1)
            for base, k in zip(bases, exps):
                digit = (k >> shift) & mask
                if digit:
                    bucket = buckets[digit]
                    buckets[digit] = base if bucket is None else self.bn.add(bucket, base)
            running = zero
            window = zero
            for digit in range(mask, 0, -1):
                if buckets[digit] is not None:
                    running = self.bn.add(running, buckets[digit])
                window = self.bn.add(window, running)
            result = self.bn.add(result, window)
        return result

    # -- encoding ----------------------------------------------------------
    # G1: 32-byte big-endian x; top bit = infinity, next bit = y odd.
    # G2: 64 bytes x.c1 || x.c0 with the same flags on the first byte; the
    #     sign bit is the parity of y.c1, or of y.c0 when y.c1 == 0.
    # GT: the 12 coefficients, 32 bytes each, big-endian.

    _INFINITY = 0x80
    _ODD = 0x40

    @staticmethod
    def _int(c: Any) -> int:
        return int(getattr(c, "n", c))

    def _is_infinity(self, pt: Any) -> bool:
        z = pt[2]
        return z == type(z).zero()

    def encode(self, group: Group, a: Any) -> bytes:
        if group is Group.GT:
            return b"".join(self._int(c).to_bytes(32, "big") for c in a.coeffs)
        width = 32 if group is Group.G1 else 64
        if self._is_infinity(a):
            return bytes([self._INFINITY]) + bytes(width - 1)
        x, y = self.bn.normalize(a)
        if group is Group.G1:
            raw = bytearray(self._int(x).to_bytes(32, "big"))
            odd = self._int(y) & 1
        else:
            x0, x1 = (self._int(c) for c in x.coeffs)
            y0, y1 = (self._int(c) for c in y.coeffs)
            raw = bytearray(x1.to_bytes(32, "big") + x0.to_bytes(32, "big"))
            odd = (y1 & 1) if y1 else (y0 & 1)
        if odd:
            raw[0] |= self._ODD
        return bytes(raw)

    def decode(self, group: Group, data: bytes) -> Any:
        P = self.field_modulus
        if group is Group.GT:
            if len(data) != 384:
                raise MalformedError(f"GT element must be 384 bytes, got {len(data)}")
            coeffs = [int.from_bytes(data[i:i + 32], "big") for i in range(0, 384, 32)]
            if any(c >= P for c in coeffs):
                raise MalformedError("GT coefficient not reduced")
            value = self.bn.FQ12(coeffs)
            if value ** self.order != self.bn.FQ12.one():
                raise MalformedError("GT element is not in the order-r subgroup")
            return value

        width = 32 if group is Group.G1 else 64
        if len(data) != width:
            raise MalformedError(f"{group.value} element must be {width} bytes, got {len(data)}")
        flags = data[0]
        body = bytes([flags & 0x3F]) + data[1:]
        if flags & self._INFINITY:
            if flags & self._ODD or any(body):
                raise MalformedError("non-canonical point at infinity")
            return self.identity(group)
        odd = 1 if flags & self._ODD else 0

        if group is Group.G1:
            x = int.from_bytes(body, "big")
            if x >= P:
                raise MalformedError("G1 x-coordinate not reduced")
            rhs = (pow(x, 3, P) + 3) % P
            y = pow(rhs, (P + 1) // 4, P)
            if y * y % P != rhs:
                raise MalformedError("G1 x-coordinate is not on the curve")
            if y & 1 != odd:
                y = P - y
            return (self.bn.FQ(x), self.bn.FQ(y), self.bn.FQ.one())

        x1 = int.from_bytes(body[:32], "big")
        x0 = int.from_bytes(body[32:], "big")
        if x0 >= P or x1 >= P:
            raise MalformedError("G2 x-coordinate not reduced")
        x = self.bn.FQ2([x0, x1])
        y = _fq2_sqrt(self.bn.FQ2, x ** 3 + self.bn.b2, P)
        if y is None:
            raise MalformedError("G2 x-coordinate is not on the curve")
        y0, y1 = (self._int(c) for c in y.coeffs)
        if ((y1 & 1) if y1 else (y0 & 1)) != odd:
            y = -y
        point = (x, y, self.bn.FQ2.one())
        if not self.bn.is_on_curve(point, self.bn.b2):
            raise MalformedError("G2 point is not on the curve")
        if not self._is_infinity(self.bn.multiply(point, self.order)):
            raise MalformedError("G2 point is outside the prime-order subgroup")
        return point


def _fq2_sqrt(FQ2: Any, a: Any, P: int) -> Optional[Any]:
    """Square root in F_p[i]/(i^2+1) for p = 3 mod 4; None when a is a non-residue."""
    if a == FQ2.zero():
        return FQ2.zero()
    a1 = a ** ((P - 3) // 4)
    alpha = a1 * a1 * a
    x0 = a1 * a
    if alpha == -FQ2.one():
        root = FQ2([0, 1]) * x0
    else:
        root = ((FQ2.one() + alpha) ** ((P - 1) // 2)) * x0
    return root if root * root == a else None


# ============================================================================
# SUITE AND ELEMENTS
# ============================================================================

class GroupElement:
    """Immutable element of one of G1, G2, GT of a given suite."""

    __slots__ = ("suite", "group", "value")

    def __init__(self, suite: "PairingSuite", group: Group, value: Any):
        self.suite = suite
        self.group = group
        self.value = value

    def _check(self, other: "GroupElement") -> None:
        if not isinstance(other, GroupElement):
            raise GroupMismatchError(f"cannot combine {self.group.value} element with {type(other).__name__}")
        if other.group is not self.group:
            raise GroupMismatchError(f"mixed-group operation {self.group.value} * {other.group.value}")
        if other.suite != self.suite:
            raise GroupMismatchError("elements belong to different pairing suites")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.suite, self.group, self.suite.backend.mul(self.group, self.value, other.value))

    def __truediv__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return self * other.inverse()

    def __pow__(self, k: int) -> "GroupElement":
        k %= self.suite.p
        if k == 0:
            return self.suite.identity(self.group)
        count_exp(self.group)
        return GroupElement(self.suite, self.group, self.suite.backend.pow(self.group, self.value, k))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.suite, self.group, self.suite.backend.inv(self.group, self.value))

    def is_identity(self) -> bool:
        return self == self.suite.identity(self.group)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return (
            other.group is self.group
            and other.suite == self.suite
            and self.suite.backend.eq(self.group, self.value, other.value)
        )

    def __hash__(self) -> int:
        return hash(self.to_bytes())

    def to_bytes(self) -> bytes:
        return bytes([GROUP_TAGS[self.group]]) + self.suite.backend.encode(self.group, self.value)

    def __repr__(self) -> str:
        if self.suite.backend.name == "toy":
            return f"GroupElement({self.group.value}, {self.value})"
        return f"GroupElement({self.group.value}, {self.to_bytes()[1:9].hex()}...)"


class PairingSuite:
    """Groups, generators, scalar field and pairing map of one backend."""

    def __init__(self, backend: PairingBackend):
        self.backend = backend
        self.p = backend.order
        self.g1 = GroupElement(self, Group.G1, backend.generator(Group.G1))
        self.g2 = GroupElement(self, Group.G2, backend.generator(Group.G2))
        self.gT = GroupElement(self, Group.GT, backend.generator(Group.GT))
        self._identities = {g: GroupElement(self, g, backend.identity(g)) for g in Group}

    @property
    def tag(self) -> str:
        return self.backend.name

    @property
    def secure(self) -> bool:
        return self.backend.secure

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PairingSuite):
            return NotImplemented
        return self.tag == other.tag and self.p == other.p

    def __hash__(self) -> int:
        return hash((self.tag, self.p))

    def __repr__(self) -> str:
        return f"PairingSuite({self.tag}, p={self.p})"

    def identity(self, group: Group) -> GroupElement:
        return self._identities[group]

    def generator(self, group: Group) -> GroupElement:
        return {Group.G1: self.g1, Group.G2: self.g2, Group.GT: self.gT}[group]

    def random_scalar(self, rng: Any, nonzero: bool = False) -> int:
        return rng.randrange(1, self.p) if nonzero else rng.randrange(self.p)

    def random_scalars(self, rng: Any, n: int, nonzero: bool = False) -> List[int]:
        return [self.random_scalar(rng, nonzero) for _ in range(n)]

    def pair(self, x: GroupElement, y: GroupElement) -> GroupElement:
        if x.group is not Group.G1 or y.group is not Group.G2:
            raise GroupMismatchError(f"pairing expects (G1, G2), got ({x.group.value}, {y.group.value})")
        count_pairings()
        return GroupElement(self, Group.GT, self.backend.pair(x.value, y.value))

    def pairing_product(self, xs: Sequence[GroupElement], ys: Sequence[GroupElement]) -> GroupElement:
        """prod_i e(xs[i], ys[i])."""
        if len(xs) != len(ys):
            raise DimensionError(f"pairing product over {len(xs)} G1 and {len(ys)} G2 elements")
        for x, y in zip(xs, ys):
            if x.group is not Group.G1 or y.group is not Group.G2:
                raise GroupMismatchError("pairing product expects (G1, G2) pairs")
        count_pairings(len(xs))
        value = self.backend.pair_product([(x.value, y.value) for x, y in zip(xs, ys)])
        return GroupElement(self, Group.GT, value)

    def multi_exp(self, bases: Sequence[GroupElement], exps: Sequence[int],
                  group: Group = Group.G1) -> GroupElement:
        return multi_exp(bases, exps, suite=self, group=group)

    def element_from_bytes(self, data: bytes) -> GroupElement:
        if not data:
            raise MalformedError("empty group element encoding")
        group = TAG_GROUPS.get(data[0])
        if group is None:
            raise MalformedError(f"unknown group tag 0x{data[0]:02x}")
        return GroupElement(self, group, self.backend.decode(group, data[1:]))


def multi_exp(bases: Sequence[GroupElement], exps: Sequence[int],
              suite: Optional[PairingSuite] = None, group: Group = Group.G1) -> GroupElement:
    """
    prod_j bases[j]^exps[j]. The exponentiation counter grows by the number of
    nonzero exponents; an empty product is the identity of ``group``.
    """
    if len(bases) != len(exps):
        raise DimensionError(f"multi_exp over {len(bases)} bases and {len(exps)} exponents")
    if not bases:
        if suite is None:
            raise DimensionError("empty multi_exp needs an explicit suite")
        return suite.identity(group)
    suite = suite or bases[0].suite
    group = bases[0].group
    for base in bases:
        if base.group is not group or base.suite != suite:
            raise GroupMismatchError("multi_exp bases must share one group and suite")
    pairs = [(b.value, k % suite.p) for b, k in zip(bases, exps) if k % suite.p]
    if not pairs:
        return suite.identity(group)
    count_exp(group, len(pairs))
    values, ks = zip(*pairs)
    return GroupElement(suite, group, suite.backend.multi_exp(group, values, ks))


def exp_all(base: GroupElement, exps: Sequence[int]) -> List[GroupElement]:
    """[base^k for k in exps]."""
    return [base ** k for k in exps]


@lru_cache(maxsize=None)
def suite_real() -> PairingSuite:
    suite = PairingSuite(BN254Backend())
    logger.info(f"BN254 suite ready, group order has {suite.p.bit_length()} bits")
    return suite


@lru_cache(maxsize=None)
def suite_toy(q: int = 101) -> PairingSuite:
    if q < 3 or not isprime(q):
        raise ParameterError(f"toy modulus must be a prime >= 3, got {q}")
    if q >= 2 ** 64:
        raise ParameterError(f"toy modulus must fit the 8-byte encoding, got {q.bit_length()} bits")
    logger.warning(f"toy pairing suite over Z_{q} is insecure and meant for testing only")
    return PairingSuite(ToyBackend(q))


def suite_for(backend: str, modulus: Optional[int] = None) -> PairingSuite:
    if backend == "real":
        suite = suite_real()
        if modulus is not None and modulus != suite.p:
            raise ParameterError(f"real backend has fixed group order, got modulus {modulus}")
        return suite
    if backend == "toy":
        return suite_toy(modulus if modulus is not None else 101)
    raise ParameterError(f"unknown backend '{backend}', expected real or toy")
