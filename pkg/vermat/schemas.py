import math
from enum import Enum
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from vermat.fplinalg import FieldVector
from vermat.pairing_core import GroupElement


def _ceil(value: float) -> int:
    # float roots of perfect powers land a hair above the integer
    nearest = round(value)
    return nearest if abs(value - nearest) < 1e-9 else math.ceil(value)


# ==================================================
#              PROTOCOL AND ROLE TAGS
# ==================================================

class ProtocolTag(str, Enum):
    FREIVALDS = "freivalds"
    FG = "fg"
    SPMV = "spmv"
    RANK1DP = "rank1dp"
    GENDP = "gendp"
    PVMAT = "pvmat"
    SMALLFIELD = "smallfield"


class RoleTag(str, Enum):
    EK = "ek"
    VK = "vk"
    TRUSTEE = "trustee"
    PROBGEN = "probgen"
    PROOF = "proof"
    RESPONSE = "response"


class VerifyMode(str, Enum):
    PRODUCTION = "production"
    TESTING = "testing"


# ==================================================
#              PARAMETER SCHEMAS
# ==================================================

class DotProductDims(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=0)
    b1: int = Field(ge=0)
    b2: int = Field(ge=0)

    @model_validator(mode="after")
    def covers_length(self):
        if self.b1 * self.b2 < self.m:
            raise ValueError(f"b1*b2 = {self.b1 * self.b2} does not cover m = {self.m}")
        if self.m > 0 and (self.b1 < 1 or self.b2 < 1):
            raise ValueError("block dims must be positive")
        return self

    @property
    def padded(self) -> int:
        return self.b1 * self.b2

    @classmethod
    def unbalanced(cls, m: int, ratio: int = 100) -> "DotProductDims":
        """b2 close to ratio*b1 with b1*b2 >= m."""
        if m == 0:
            return cls(m=0, b1=0, b2=0)
        b1 = max(1, _ceil(math.sqrt(m / ratio)))
        return cls(m=m, b1=b1, b2=_ceil(m / b1))

    @classmethod
    def cube_root(cls, m: int) -> "DotProductDims":
        """b1 ~ m^(1/3), b2 ~ m^(2/3)."""
        b1 = max(1, _ceil(m ** (1 / 3)))
        return cls(m=m, b1=b1, b2=max(1, _ceil(m / b1)))


class PvmatParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1)
    n: int = Field(ge=1)
    b1: int = Field(ge=1)
    b2: int = Field(ge=1)
    c1: int = Field(ge=1)
    c2: int = Field(ge=1)
    d1: int = Field(ge=1)
    d2: int = Field(ge=1)

    @model_validator(mode="after")
    def covers_lengths(self):
        if self.b1 * self.b2 < self.m:
            raise ValueError(f"b1*b2 = {self.b1 * self.b2} must cover m = {self.m}")
        if self.c1 * self.c2 < self.n:
            raise ValueError(f"c1*c2 = {self.c1 * self.c2} must cover n = {self.n}")
        if self.d1 * self.d2 < self.n:
            raise ValueError(f"d1*d2 = {self.d1 * self.d2} must cover n = {self.n}")
        return self

    @classmethod
    def defaults(cls, m: int, n: int, **overrides) -> "PvmatParams":
        """
        b1 = ceil(sqrt(m)/10), b2 = ceil(10 sqrt(m)), same for c over n,
        d1 = ceil(n^(1/3)/3), d2 = ceil(3 n^(2/3)); second dims are raised
        when rounding leaves the product short of m or n.
        """
        dims = {
            "b1": max(1, _ceil(math.sqrt(m) / 10)),
            "b2": max(1, _ceil(10 * math.sqrt(m))),
            "c1": max(1, _ceil(math.sqrt(n) / 10)),
            "c2": max(1, _ceil(10 * math.sqrt(n))),
            "d1": max(1, _ceil(n ** (1 / 3) / 3)),
            "d2": max(1, _ceil(3 * n ** (2 / 3))),
        }
        dims.update({k: v for k, v in overrides.items() if v is not None})
        for first, second, length in (("b1", "b2", m), ("c1", "c2", n), ("d1", "d2", n)):
            if dims[first] * dims[second] < length and second not in overrides:
                dims[second] = _ceil(length / dims[first])
        return cls(m=m, n=n, **dims)


class ChunkParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    k: int = Field(ge=1)

    @classmethod
    def for_length(cls, n: int, a: float = 0.75) -> "ChunkParams":
        if not 0 < a < 1:
            raise ValueError(f"chunk exponent must lie in (0, 1), got {a}")
        return cls(n=n, k=min(n, max(1, _ceil(n ** a))))

    @property
    def chunks(self) -> int:
        return -(-self.n // self.k)

    def bounds(self) -> List[range]:
        return [range(i * self.k, min(self.n, (i + 1) * self.k)) for i in range(self.chunks)]

    def dims(self, length: int) -> DotProductDims:
        return DotProductDims.cube_root(length)


# ==================================================
#              VERIFICATION RESULTS
# ==================================================

class Verdict(BaseModel):
    """Outcome of a verification: the certified output, or a rejection reason."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    accepted: bool
    y: Optional[FieldVector] = None
    value: Optional[GroupElement] = None
    reason: Optional[str] = None
    checks: Dict[str, bool] = Field(default_factory=dict)

    @classmethod
    def accept(cls, y: Optional[FieldVector] = None, value: Optional[GroupElement] = None,
               checks: Optional[Dict[str, bool]] = None) -> "Verdict":
        return cls(accepted=True, y=y, value=value, checks=checks or {})

    @classmethod
    def reject(cls, reason: str, checks: Optional[Dict[str, bool]] = None) -> "Verdict":
        return cls(accepted=False, reason=reason, checks=checks or {})


# ==================================================
#              CONTAINER SCHEMAS
# ==================================================

class SuiteDescriptor(BaseModel):
    model_config = ConfigDict(frozen=True)

    backend: str
    modulus: int

    @field_validator("backend")
    @classmethod
    def known_backend(cls, v):
        if v not in ("real", "toy"):
            raise ValueError(f"unknown backend '{v}'")
        return v


class ContainerEntry(BaseModel):
    name: str
    kind: str
    shape: List[int] = Field(default_factory=list)
    modulus: Optional[int] = None


class ContainerHeader(BaseModel):
    protocol: ProtocolTag
    role: RoleTag
    suite: SuiteDescriptor
    dims: Dict[str, int] = Field(default_factory=dict)
    entries: List[ContainerEntry] = Field(default_factory=list)
    meta: Dict[str, Union[bool, int, float, str]] = Field(default_factory=dict)


# ==================================================
#              BENCHMARK SCHEMAS
# ==================================================

BENCH_COLUMNS = [
    "protocol", "m", "n", "phase", "wall_ms",
    "field_ops", "g1_exp", "g2_exp", "gt_exp", "pairings",
    "expected_field_ops", "expected_group_ops", "overhead_ratio", "speedup_vs_fg",
]


class BenchRow(BaseModel):
    protocol: str
    m: int
    n: int
    phase: str
    wall_ms: float = Field(ge=0)
    field_ops: int = 0
    g1_exp: int = 0
    g2_exp: int = 0
    gt_exp: int = 0
    pairings: int = 0
    expected_field_ops: Optional[float] = None
    expected_group_ops: Optional[float] = None
    overhead_ratio: Optional[float] = None
    speedup_vs_fg: Optional[float] = None

    @property
    def group_exps(self) -> int:
        return self.g1_exp + self.g2_exp + self.gt_exp

    def csv_values(self) -> List[str]:
        values = []
        for column in BENCH_COLUMNS:
            v = getattr(self, column)
            if v is None:
                values.append("")
            elif isinstance(v, float):
                values.append(f"{v:.3f}")
            else:
                values.append(str(v))
        return values


class BenchReport(BaseModel):
    rows: List[BenchRow] = Field(default_factory=list)

    def select(self, protocol: Optional[str] = None, phase: Optional[str] = None,
               size: Optional[int] = None) -> List[BenchRow]:
        return [
            r for r in self.rows
            if (protocol is None or r.protocol == protocol)
            and (phase is None or r.phase == phase)
            and (size is None or r.n == size)
        ]

    def to_csv(self) -> str:
        lines = [",".join(BENCH_COLUMNS)]
        lines.extend(",".join(row.csv_values()) for row in self.rows)
        return "\n".join(lines) + "\n"
