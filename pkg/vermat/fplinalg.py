"""
Exact linear algebra over F_p.

Matrices are dense (row-major) or sparse (coordinate triples sorted by
(row, col)); one product by A costs mu(A) = 2*nnz (sparse) or 2*m*n (dense)
field operations, and that is what the counters record.

The reshape helpers fill U row-major and Y column-major so that
Trace(reshape_lhs(u) * reshape_rhs(y)) = u^T y.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from vermat.errors import DimensionError, MalformedError
from vermat.pairing_core import GroupElement, count_field, count_small, multi_exp

logger = logging.getLogger(__name__)


# ============================================================================
# VECTORS
# ============================================================================

class FieldVector:
    """Immutable vector over F_p with entries reduced into [0, p)."""

    __slots__ = ("p", "entries")

    def __init__(self, entries: Iterable[int], p: int):
        self.p = p
        self.entries = tuple(int(e) % p for e in entries)

    @classmethod
    def zeros(cls, n: int, p: int) -> "FieldVector":
        return cls([0] * n, p)

    @classmethod
    def unit(cls, n: int, j: int, p: int) -> "FieldVector":
        if not 0 <= j < n:
            raise DimensionError(f"unit vector index {j} out of range for length {n}")
        return cls([1 if i == j else 0 for i in range(n)], p)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, index):
        return self.entries[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldVector):
            return NotImplemented
        return self.p == other.p and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.p, self.entries))

    def __repr__(self) -> str:
        return f"FieldVector({list(self.entries)}, p={self.p})"

    def __add__(self, other: "FieldVector") -> "FieldVector":
        _same_length(self, other)
        count_field(len(self))
        return FieldVector((a + b for a, b in zip(self, other)), self.p)

    def __sub__(self, other: "FieldVector") -> "FieldVector":
        _same_length(self, other)
        count_field(len(self))
        return FieldVector((a - b for a, b in zip(self, other)), self.p)

    def scale(self, c: int) -> "FieldVector":
        count_field(len(self))
        return FieldVector((c * a for a in self), self.p)

    def dot(self, other: Sequence[int]) -> int:
        """Inner product; costs 2n field operations."""
        _same_length(self, other)
        count_field(2 * len(self))
        return sum(a * b for a, b in zip(self.entries, other)) % self.p

    def padded(self, length: int) -> "FieldVector":
        if length < len(self):
            raise DimensionError(f"cannot pad length {len(self)} down to {length}")
        return FieldVector(self.entries + (0,) * (length - len(self)), self.p)

    def with_entry(self, index: int, value: int) -> "FieldVector":
        entries = list(self.entries)
        entries[index] = value
        return FieldVector(entries, self.p)


def _same_length(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")


# ============================================================================
# MATRICES
# ============================================================================

Triple = Tuple[int, int, int]


class FieldMatrix:
    """Immutable m x n matrix over F_p, dense or sparse."""

    __slots__ = ("p", "m", "n", "_rows", "_triples")

    def __init__(self, m: int, n: int, p: int,
                 rows: Optional[List[List[int]]] = None,
                 triples: Optional[List[Triple]] = None):
        self.p = p
        self.m = m
        self.n = n
        self._rows = rows
        self._triples = triples

    # -- constructors ------------------------------------------------------

    @classmethod
    def dense(cls, rows: Sequence[Sequence[int]], p: int, n: Optional[int] = None) -> "FieldMatrix":
        rows = [[int(v) % p for v in row] for row in rows]
        width = n if n is not None else (len(rows[0]) if rows else 0)
        for i, row in enumerate(rows):
            if len(row) != width:
                raise DimensionError(f"row {i} has {len(row)} entries, expected {width}")
        return cls(len(rows), width, p, rows=rows)

    @classmethod
    def sparse(cls, m: int, n: int, triples: Iterable[Triple], p: int) -> "FieldMatrix":
        cleaned = {}
        for i, j, v in triples:
            if not (0 <= i < m and 0 <= j < n):
                raise DimensionError(f"entry ({i}, {j}) outside {m}x{n}")
            if (i, j) in cleaned:
                raise DimensionError(f"duplicate entry ({i}, {j})")
            cleaned[(i, j)] = int(v) % p
        entries = sorted((i, j, v) for (i, j), v in cleaned.items() if v)
        return cls(m, n, p, triples=entries)

    @classmethod
    def zeros(cls, m: int, n: int, p: int) -> "FieldMatrix":
        return cls(m, n, p, rows=[[0] * n for _ in range(m)])

    @classmethod
    def identity(cls, n: int, p: int) -> "FieldMatrix":
        return cls.sparse(n, n, ((i, i, 1) for i in range(n)), p)

    # -- properties ----------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return self.m, self.n

    @property
    def is_sparse(self) -> bool:
        return self._triples is not None

    @property
    def nnz(self) -> int:
        if self._triples is not None:
            return len(self._triples)
        return sum(1 for row in self._rows for v in row if v)

    @property
    def mu(self) -> int:
        """Cost of one product by this matrix."""
        return 2 * len(self._triples) if self._triples is not None else 2 * self.m * self.n

    def rows(self) -> List[List[int]]:
        if self._rows is not None:
            return [list(row) for row in self._rows]
        rows = [[0] * self.n for _ in range(self.m)]
        for i, j, v in self._triples:
            rows[i][j] = v
        return rows

    def triples(self) -> List[Triple]:
        if self._triples is not None:
            return list(self._triples)
        return [(i, j, v) for i, row in enumerate(self._rows) for j, v in enumerate(row) if v]

    def to_dense(self) -> "FieldMatrix":
        return self if self._rows is not None else FieldMatrix(self.m, self.n, self.p, rows=self.rows())

    def to_sparse(self) -> "FieldMatrix":
        return self if self._triples is not None else FieldMatrix(self.m, self.n, self.p, triples=self.triples())

    def entry(self, i: int, j: int) -> int:
        if self._rows is not None:
            return self._rows[i][j]
        for a, b, v in self._triples:
            if (a, b) == (i, j):
                return v
        return 0

    def column(self, j: int) -> List[int]:
        if self._rows is not None:
            return [row[j] for row in self._rows]
        col = [0] * self.m
        for i, b, v in self._triples:
            if b == j:
                col[i] = v
        return col

    def transpose(self) -> "FieldMatrix":
        if self._triples is not None:
            return FieldMatrix.sparse(self.n, self.m, ((j, i, v) for i, j, v in self._triples), self.p)
        return FieldMatrix(self.n, self.m, self.p, rows=[list(col) for col in zip(*self._rows)] or
                           [[] for _ in range(self.n)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.shape == other.shape and self.p == other.p and self.triples() == other.triples()

    def __hash__(self) -> int:
        return hash((self.shape, self.p, tuple(self.triples())))

    def __repr__(self) -> str:
        kind = f"sparse nnz={len(self._triples)}" if self.is_sparse else "dense"
        return f"FieldMatrix({self.m}x{self.n}, p={self.p}, {kind})"


# ============================================================================
# PRODUCTS
# ============================================================================

def matvec(A: FieldMatrix, x: Sequence[int]) -> FieldVector:
    """y = A x mod p; costs mu(A)."""
    if len(x) != A.n:
        raise DimensionError(f"matrix is {A.m}x{A.n} but vector has length {len(x)}")
    count_field(A.mu)
    return FieldVector(_product(A, x), A.p)


def matvec_integer(A: FieldMatrix, x: Sequence[int]) -> List[int]:
    """A x over the integers, entries of A taken in [0, p); costs mu(A) small-value ops."""
    if len(x) != A.n:
        raise DimensionError(f"matrix is {A.m}x{A.n} but vector has length {len(x)}")
    count_small(A.mu)
    return _product(A, x)


def _product(A: FieldMatrix, x: Sequence[int]) -> List[int]:
    if A._rows is not None:
        return [sum(a * b for a, b in zip(row, x)) for row in A._rows]
    y = [0] * A.m
    for i, j, v in A._triples:
        y[i] += v * x[j]
    return y


def rmatvec(A: FieldMatrix, u: Sequence[int]) -> FieldVector:
    """w^T = u^T A mod p; costs mu(A)."""
    if len(u) != A.m:
        raise DimensionError(f"matrix is {A.m}x{A.n} but left vector has length {len(u)}")
    count_field(A.mu)
    if A._rows is not None:
        w = [0] * A.n
        for ui, row in zip(u, A._rows):
            if ui:
                for j, a in enumerate(row):
                    w[j] += ui * a
    else:
        w = [0] * A.n
        for i, j, v in A._triples:
            w[j] += u[i] * v
    return FieldVector(w, A.p)


def matmul(A: FieldMatrix, B: FieldMatrix) -> FieldMatrix:
    """Dense schoolbook product; only used on the small reshaped matrices."""
    if A.n != B.m:
        raise DimensionError(f"cannot multiply {A.m}x{A.n} by {B.m}x{B.n}")
    count_field(2 * A.m * A.n * B.n)
    a_rows, b_rows = A.rows(), B.rows()
    rows = [
        [sum(a_rows[i][k] * b_rows[k][j] for k in range(A.n)) for j in range(B.n)]
        for i in range(A.m)
    ]
    return FieldMatrix.dense(rows, A.p, n=B.n)


def reshape_lhs(u: Sequence[int], b1: int, b2: int, p: Optional[int] = None) -> FieldMatrix:
    """U in F_p^{b1 x b2}, U[i][j] = u[i*b2 + j], filled row-major with zero padding."""
    p = p if p is not None else u.p
    if b1 * b2 < len(u):
        raise DimensionError(f"{b1}x{b2} block cannot hold a vector of length {len(u)}")
    padded = list(u) + [0] * (b1 * b2 - len(u))
    return FieldMatrix.dense([padded[i * b2:(i + 1) * b2] for i in range(b1)], p, n=b2)


def reshape_rhs(y: Sequence[int], b2: int, b1: int, p: Optional[int] = None) -> FieldMatrix:
    """Y in F_p^{b2 x b1}, Y[j][i] = y[i*b2 + j], filled column-major with zero padding."""
    p = p if p is not None else y.p
    if b1 * b2 < len(y):
        raise DimensionError(f"{b2}x{b1} block cannot hold a vector of length {len(y)}")
    padded = list(y) + [0] * (b1 * b2 - len(y))
    return FieldMatrix.dense([[padded[i * b2 + j] for i in range(b1)] for j in range(b2)], p, n=b1)


def trace(M: FieldMatrix) -> int:
    if M.m != M.n:
        raise DimensionError(f"trace of non-square {M.m}x{M.n} matrix")
    count_field(M.m)
    return sum(M.entry(i, i) for i in range(M.m)) % M.p


def trace_group(C: Sequence[Sequence[GroupElement]]) -> GroupElement:
    """Product of the diagonal of a square matrix of group elements."""
    if any(len(row) != len(C) for row in C):
        raise DimensionError("trace of non-square group matrix")
    if not C:
        raise DimensionError("trace of an empty group matrix")
    acc = C[0][0]
    for i in range(1, len(C)):
        acc = acc * C[i][i]
    return acc


# ============================================================================
# EXPONENT-SIDE PRODUCTS (the star operator)
# ============================================================================

def star_vector(bases: Sequence[GroupElement], v: Sequence[int]) -> GroupElement:
    """bases^T * v = prod_j bases[j]^v[j]."""
    return multi_exp(bases, list(v))


def star_rows(bases: Sequence[GroupElement], M: FieldMatrix) -> List[GroupElement]:
    """bases^T * M: one multi-exponentiation per column of M (len(bases) == M.m)."""
    if len(bases) != M.m:
        raise DimensionError(f"{len(bases)} bases against a {M.m}x{M.n} exponent matrix")
    return [multi_exp(bases, M.column(k)) for k in range(M.n)]


def star_matrix(G: Sequence[Sequence[GroupElement]], M: FieldMatrix) -> List[List[GroupElement]]:
    """G * M for a matrix G of group elements: (G*M)[i][k] = prod_j G[i][j]^M[j][k]."""
    columns = [M.column(k) for k in range(M.n)]
    out = []
    for row in G:
        if len(row) != M.m:
            raise DimensionError(f"group row of length {len(row)} against {M.m}x{M.n} exponents")
        out.append([multi_exp(row, col) for col in columns])
    return out


def group_matvec(G: Sequence[Sequence[GroupElement]], v: Sequence[int]) -> List[GroupElement]:
    """G * v = [prod_k G[i][k]^v[k] for each row i]."""
    return [multi_exp(row, list(v)) for row in G]


# ============================================================================
# RANDOM INSTANCES
# ============================================================================

def random_vector(n: int, p: int, rng, nonzero: bool = False) -> FieldVector:
    low = 1 if nonzero else 0
    return FieldVector([rng.randrange(low, p) for _ in range(n)], p)


def random_dense(m: int, n: int, p: int, rng, nonzero: bool = False) -> FieldMatrix:
    low = 1 if nonzero else 0
    return FieldMatrix.dense([[rng.randrange(low, p) for _ in range(n)] for _ in range(m)], p, n=n)


def random_sparse(m: int, n: int, nnz: int, p: int, rng) -> FieldMatrix:
    if nnz > m * n:
        raise DimensionError(f"cannot place {nnz} nonzeros in a {m}x{n} matrix")
    positions = set()
    while len(positions) < nnz:
        positions.add((rng.randrange(m), rng.randrange(n)))
    return FieldMatrix.sparse(m, n, ((i, j, rng.randrange(1, p)) for i, j in positions), p)


# ============================================================================
# TEXT FORMATS
# ============================================================================

def _parse_int(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        try:
            value = float(token)
        except ValueError:
            raise MalformedError(f"{where}: '{token}' is not a number")
        if not value.is_integer():
            raise MalformedError(f"{where}: '{token}' is not an integer")
        return int(value)


def load_matrix_market(path: Union[str, Path], p: int) -> FieldMatrix:
    """Read a Matrix Market file (array or coordinate) reducing values mod p."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise MalformedError(f"cannot read matrix file {path}: {str(e)}")
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise MalformedError(f"{path}: missing %%MatrixMarket banner")
    banner = lines[0].lower().split()
    if len(banner) < 5 or banner[1] != "matrix":
        raise MalformedError(f"{path}: unsupported banner '{lines[0]}'")
    layout, value_type, symmetry = banner[2], banner[3], banner[4]
    if layout not in ("coordinate", "array"):
        raise MalformedError(f"{path}: unsupported layout '{layout}'")
    if value_type not in ("integer", "real", "pattern"):
        raise MalformedError(f"{path}: unsupported field '{value_type}'")
    if symmetry not in ("general", "symmetric"):
        raise MalformedError(f"{path}: unsupported symmetry '{symmetry}'")

    body = [line.split() for line in lines[1:] if line.strip() and not line.startswith("%")]
    if not body:
        raise MalformedError(f"{path}: missing size line")
    size = [_parse_int(t, f"{path} size line") for t in body[0]]
    data = body[1:]

    if layout == "coordinate":
        if len(size) != 3:
            raise MalformedError(f"{path}: coordinate size line needs 'm n nnz'")
        m, n, nnz = size
        if len(data) != nnz:
            raise MalformedError(f"{path}: expected {nnz} entries, found {len(data)}")
        entries = {}
        for k, tokens in enumerate(data):
            where = f"{path} entry {k + 1}"
            expected = 2 if value_type == "pattern" else 3
            if len(tokens) != expected:
                raise MalformedError(f"{where}: expected {expected} fields")
            i, j = _parse_int(tokens[0], where) - 1, _parse_int(tokens[1], where) - 1
            if not (0 <= i < m and 0 <= j < n):
                raise MalformedError(f"{where}: index ({i + 1}, {j + 1}) outside {m}x{n}")
            v = 1 if value_type == "pattern" else _parse_int(tokens[2], where)
            entries[(i, j)] = (entries.get((i, j), 0) + v) % p
            if symmetry == "symmetric" and i != j:
                entries[(j, i)] = (entries.get((j, i), 0) + v) % p
        return FieldMatrix.sparse(m, n, ((i, j, v) for (i, j), v in entries.items()), p)

    if len(size) != 2 or value_type == "pattern":
        raise MalformedError(f"{path}: array layout needs 'm n' and explicit values")
    m, n = size
    values = [_parse_int(t[0], f"{path} value {k + 1}") for k, t in enumerate(data)]
    rows = [[0] * n for _ in range(m)]
    if symmetry == "general":
        if len(values) != m * n:
            raise MalformedError(f"{path}: expected {m * n} values, found {len(values)}")
        for k, v in enumerate(values):
            rows[k % m][k // m] = v
    else:
        it = iter(values)
        try:
            for j in range(n):
                for i in range(j, m):
                    rows[i][j] = rows[j][i] = next(it)
        except StopIteration:
            raise MalformedError(f"{path}: too few values for a symmetric {m}x{n} array")
    return FieldMatrix.dense(rows, p, n=n)


def save_matrix_market(A: FieldMatrix, path: Union[str, Path]) -> None:
    """Sparse matrices are written as coordinate files, dense ones as (column-major) arrays."""
    lines = []
    if A.is_sparse:
        triples = A.triples()
        lines.append("%%MatrixMarket matrix coordinate integer general")
        lines.append(f"{A.m} {A.n} {len(triples)}")
        lines.extend(f"{i + 1} {j + 1} {v}" for i, j, v in triples)
    else:
        rows = A.rows()
        lines.append("%%MatrixMarket matrix array integer general")
        lines.append(f"{A.m} {A.n}")
        lines.extend(str(rows[i][j]) for j in range(A.n) for i in range(A.m))
    Path(path).write_text("\n".join(lines) + "\n")


def load_integers(path: Union[str, Path]) -> List[int]:
    """One decimal integer per line; blank lines and '#' comments are skipped."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise MalformedError(f"cannot read vector file {path}: {str(e)}")
    values = []
    for k, line in enumerate(lines):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise MalformedError(f"{path} line {k + 1}: '{line}' is not an integer")
    return values


def save_vector(values: Iterable[int], path: Union[str, Path]) -> None:
    Path(path).write_text("".join(f"{v}\n" for v in values))
