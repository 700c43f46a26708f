"""
Binary containers for keys, proofs and trustee material.

Layout::

    b"VMAT1" | u32 header length | header JSON | entries | 32-byte digest

The header is a ``ContainerHeader``. Every entry payload is prefixed with its
u32 length and appears in header order. The digest is SHAKE-128 over all
preceding bytes; it detects corruption and gives no authenticity.

Bundles are pydantic models. Nested models are flattened into dotted entry
names ("params.m", "chunks.0.g1_U"), where digit segments are list indexes.
"""
import hashlib
import logging
import os
import struct
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from vermat.config import config
from vermat.errors import IntegrityError, MalformedError
from vermat.fplinalg import FieldMatrix, FieldVector
from vermat.pairing_core import GroupElement, PairingSuite, suite_for
from vermat.schemas import ContainerEntry, ContainerHeader, ProtocolTag, RoleTag, SuiteDescriptor

logger = logging.getLogger(__name__)

DIGEST_SIZE = 32

M = TypeVar("M", bound=BaseModel)


def _digest(data: bytes) -> bytes:
    return hashlib.shake_128(data).digest(DIGEST_SIZE)


def _width(p: int) -> int:
    return max(1, (p.bit_length() + 7) // 8)


def _int_bytes(value: int) -> bytes:
    return value.to_bytes(value.bit_length() // 8 + 1, "big", signed=True)


class _Reader:
    """Cursor over a byte string; running past the end is a malformed input."""

    def __init__(self, data: bytes, where: str):
        self.data = data
        self.pos = 0
        self.where = where

    def take(self, size: int) -> bytes:
        if size < 0 or self.pos + size > len(self.data):
            raise MalformedError(f"{self.where}: truncated at byte {self.pos}")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def done(self) -> None:
        if self.pos != len(self.data):
            raise MalformedError(f"{self.where}: {len(self.data) - self.pos} trailing bytes")


class LoadedContainer:
    def __init__(self, header: ContainerHeader, suite: PairingSuite, values: Dict[str, Any]):
        self.header = header
        self.suite = suite
        self.values = values


class ContainerService:
    """Reads and writes ``VMAT1`` containers"""

    # ==================================================
    #              ENCODING
    # ==================================================

    def _flatten(self, value: Any, name: str, out: List[Tuple[ContainerEntry, bytes]]) -> None:
        if isinstance(value, BaseModel):
            for field_name in type(value).model_fields:
                child = f"{name}.{field_name}" if name else field_name
                self._flatten(getattr(value, field_name), child, out)
        elif value is None:
            out.append((ContainerEntry(name=name, kind="none"), b""))
        elif isinstance(value, Enum):
            out.append((ContainerEntry(name=name, kind="str"), str(value.value).encode()))
        elif isinstance(value, bool):
            out.append((ContainerEntry(name=name, kind="bool"), bytes([value])))
        elif isinstance(value, int):
            out.append((ContainerEntry(name=name, kind="int"), _int_bytes(value)))
        elif isinstance(value, float):
            out.append((ContainerEntry(name=name, kind="float"), repr(value).encode()))
        elif isinstance(value, str):
            out.append((ContainerEntry(name=name, kind="str"), value.encode()))
        elif isinstance(value, bytes):
            out.append((ContainerEntry(name=name, kind="bytes"), value))
        elif isinstance(value, GroupElement):
            out.append((ContainerEntry(name=name, kind="elem"), value.to_bytes()))
        elif isinstance(value, FieldVector):
            w = _width(value.p)
            payload = b"".join(v.to_bytes(w, "little") for v in value)
            out.append((ContainerEntry(name=name, kind="fvec", shape=[len(value)], modulus=value.p), payload))
        elif isinstance(value, FieldMatrix):
            out.append(self._encode_matrix(name, value))
        elif isinstance(value, (list, tuple)):
            self._flatten_list(list(value), name, out)
        else:
            raise MalformedError(f"cannot store {type(value).__name__} at '{name}'")

    def _flatten_list(self, items: List[Any], name: str, out: List[Tuple[ContainerEntry, bytes]]) -> None:
        if not items:
            out.append((ContainerEntry(name=name, kind="empty"), b""))
        elif all(isinstance(v, GroupElement) for v in items):
            out.append((ContainerEntry(name=name, kind="elems", shape=[len(items)]),
                        self._encode_elements(items)))
        elif all(isinstance(v, (list, tuple)) and all(isinstance(e, GroupElement) for e in v) for v in items):
            widths = {len(v) for v in items}
            if len(widths) != 1:
                raise MalformedError(f"ragged element matrix at '{name}'")
            flat = [e for row in items for e in row]
            out.append((ContainerEntry(name=name, kind="elems2", shape=[len(items), widths.pop()]),
                        self._encode_elements(flat)))
        elif all(isinstance(v, int) and not isinstance(v, bool) for v in items):
            payload = b"".join(struct.pack("<H", len(b)) + b for b in map(_int_bytes, items))
            out.append((ContainerEntry(name=name, kind="ints", shape=[len(items)]), payload))
        elif all(isinstance(v, BaseModel) for v in items):
            out.append((ContainerEntry(name=name, kind="models", shape=[len(items)]), b""))
            for index, item in enumerate(items):
                self._flatten(item, f"{name}.{index}", out)
        else:
            raise MalformedError(f"cannot store mixed list at '{name}'")

    @staticmethod
    def _encode_elements(items: List[GroupElement]) -> bytes:
        parts = []
        for element in items:
            raw = element.to_bytes()
            parts.append(struct.pack("<H", len(raw)) + raw)
        return b"".join(parts)

    @staticmethod
    def _encode_matrix(name: str, A: FieldMatrix) -> Tuple[ContainerEntry, bytes]:
        w = _width(A.p)
        if A.is_sparse:
            triples = A.triples()
            payload = b"".join(struct.pack("<II", i, j) + v.to_bytes(w, "little") for i, j, v in triples)
            shape = [A.m, A.n, len(triples)]
        else:
            payload = b"".join(v.to_bytes(w, "little") for row in A.rows() for v in row)
            shape = [A.m, A.n, -1]
        return ContainerEntry(name=name, kind="fmat", shape=shape, modulus=A.p), payload

    def dumps(self, bundle: BaseModel, protocol: ProtocolTag, role: RoleTag, suite: PairingSuite,
              dims: Optional[Dict[str, int]] = None,
              meta: Optional[Dict[str, Union[bool, int, float, str]]] = None) -> bytes:
        entries: List[Tuple[ContainerEntry, bytes]] = []
        self._flatten(bundle, "", entries)
        header = ContainerHeader(
            protocol=protocol,
            role=role,
            suite=SuiteDescriptor(backend=suite.tag, modulus=suite.p),
            dims=dims or {},
            entries=[entry for entry, _ in entries],
            meta=meta or {},
        )
        header_bytes = header.model_dump_json().encode()
        body = [config.CONTAINER_MAGIC, struct.pack("<I", len(header_bytes)), header_bytes]
        for _, payload in entries:
            body.append(struct.pack("<I", len(payload)))
            body.append(payload)
        data = b"".join(body)
        return data + _digest(data)

    def save(self, path: Union[str, Path], bundle: BaseModel, protocol: ProtocolTag, role: RoleTag,
             suite: PairingSuite, dims: Optional[Dict[str, int]] = None,
             meta: Optional[Dict[str, Union[bool, int, float, str]]] = None) -> Path:
        path = Path(path)
        data = self.dumps(bundle, protocol, role, suite, dims, meta)
        path.write_bytes(data)
        if role is RoleTag.TRUSTEE:
            os.chmod(path, 0o600)
        logger.info(f"wrote {protocol.value}/{role.value} container {path} ({len(data)} bytes)")
        return path

    # ==================================================
    #              DECODING
    # ==================================================

    def _decode_elements(self, reader: _Reader, count: int, suite: PairingSuite) -> List[GroupElement]:
        return [suite.element_from_bytes(reader.take(reader.u16())) for _ in range(count)]

    @staticmethod
    def _decode_field(raw: bytes, p: int, where: str) -> int:
        value = int.from_bytes(raw, "little")
        if value >= p:
            raise MalformedError(f"{where}: value {value} is not reduced mod {p}")
        return value

    def _decode_entry(self, entry: ContainerEntry, payload: bytes, suite: PairingSuite) -> Any:
        where = f"entry '{entry.name}'"
        reader = _Reader(payload, where)
        kind, shape = entry.kind, entry.shape
        if kind in ("none", "empty"):
            if payload:
                raise MalformedError(f"{where}: unexpected payload")
            return None if kind == "none" else []
        if kind == "bool":
            raw = reader.take(1)[0]
            if raw not in (0, 1):
                raise MalformedError(f"{where}: bad boolean byte {raw}")
            value = bool(raw)
        elif kind == "int":
            value = int.from_bytes(reader.take(len(payload)), "big", signed=True) if payload else 0
        elif kind == "float":
            value = float(reader.take(len(payload)).decode())
        elif kind == "str":
            value = reader.take(len(payload)).decode()
        elif kind == "bytes":
            value = reader.take(len(payload))
        elif kind == "elem":
            value = suite.element_from_bytes(reader.take(len(payload)))
        elif kind == "elems":
            value = self._decode_elements(reader, shape[0], suite)
        elif kind == "elems2":
            rows, cols = shape
            flat = self._decode_elements(reader, rows * cols, suite)
            value = [flat[r * cols:(r + 1) * cols] for r in range(rows)]
        elif kind == "ints":
            value = [int.from_bytes(reader.take(reader.u16()), "big", signed=True) for _ in range(shape[0])]
        elif kind == "fvec":
            p, w = entry.modulus, _width(entry.modulus)
            value = FieldVector([self._decode_field(reader.take(w), p, where) for _ in range(shape[0])], p)
        elif kind == "fmat":
            value = self._decode_matrix(reader, entry, where)
        else:
            raise MalformedError(f"{where}: unknown kind '{kind}'")
        reader.done()
        return value

    def _decode_matrix(self, reader: _Reader, entry: ContainerEntry, where: str) -> FieldMatrix:
        m, n, nnz = entry.shape
        p, w = entry.modulus, _width(entry.modulus)
        if nnz < 0:
            rows = [[self._decode_field(reader.take(w), p, where) for _ in range(n)] for _ in range(m)]
            return FieldMatrix.dense(rows, p, n=n) if m else FieldMatrix.zeros(0, n, p)
        triples = []
        for _ in range(nnz):
            i, j = struct.unpack("<II", reader.take(8))
            triples.append((i, j, self._decode_field(reader.take(w), p, where)))
        return FieldMatrix.sparse(m, n, triples, p)

    @staticmethod
    def _check_entry_shape(entry: ContainerEntry) -> None:
        expected = {"elems": 1, "ints": 1, "fvec": 1, "models": 1, "elems2": 2, "fmat": 3}
        rank = expected.get(entry.kind, 0)
        if len(entry.shape) != rank:
            raise MalformedError(f"entry '{entry.name}' of kind {entry.kind} needs a shape of rank {rank}")
        dims = entry.shape[:2] if entry.kind == "fmat" else entry.shape
        if any(d < 0 for d in dims):
            raise MalformedError(f"entry '{entry.name}' has a negative dimension")
        if entry.kind in ("fvec", "fmat") and (entry.modulus is None or entry.modulus < 2):
            raise MalformedError(f"entry '{entry.name}' has no valid modulus")

    @staticmethod
    def _nest(values: Dict[str, Any]) -> Dict[str, Any]:
        root: Dict[str, Any] = {}
        for name, value in values.items():
            node = root
            parts = name.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
                if not isinstance(node, dict):
                    raise MalformedError(f"entry '{name}' collides with a value")
            node[parts[-1]] = value

        def listify(node: Any) -> Any:
            if not isinstance(node, dict):
                return node
            node = {k: listify(v) for k, v in node.items()}
            if node and all(k.isdigit() for k in node):
                indexes = sorted(int(k) for k in node)
                if indexes != list(range(len(indexes))):
                    raise MalformedError("list entries are not contiguous")
                return [node[str(i)] for i in indexes]
            return node

        return listify(root)

    def loads(self, data: bytes, protocol: Optional[ProtocolTag] = None,
              role: Optional[RoleTag] = None) -> LoadedContainer:
        magic = config.CONTAINER_MAGIC
        if len(data) < len(magic) + 4 + DIGEST_SIZE or not data.startswith(magic):
            raise MalformedError("not a VMAT1 container")
        body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
        if _digest(body) != digest:
            raise IntegrityError("container digest mismatch")

        reader = _Reader(body, "container")
        reader.take(len(magic))
        try:
            header = ContainerHeader.model_validate_json(reader.take(reader.u32()))
        except ValidationError as e:
            raise MalformedError(f"container header is invalid: {e.errors()[0]['msg']}")
        if protocol is not None and header.protocol is not protocol:
            raise MalformedError(f"expected a {protocol.value} container, got {header.protocol.value}")
        if role is not None and header.role is not role:
            raise MalformedError(f"expected a {role.value} container, got {header.role.value}")
        suite = suite_for(header.suite.backend, header.suite.modulus)

        values: Dict[str, Any] = {}
        for entry in header.entries:
            self._check_entry_shape(entry)
            payload = reader.take(reader.u32())
            if entry.kind == "models":
                continue
            try:
                values[entry.name] = self._decode_entry(entry, payload, suite)
            except MalformedError:
                raise
            except (ValueError, IndexError, AssertionError, ArithmeticError, struct.error) as e:
                raise MalformedError(f"entry '{entry.name}' cannot be decoded: {e}")
        reader.done()
        logger.debug(f"loaded {header.protocol.value}/{header.role.value} container with "
                     f"{len(header.entries)} entries")
        return LoadedContainer(header, suite, self._nest(values))

    def load(self, path: Union[str, Path],
             bundle_type: Union[Type[M], Callable[[ContainerHeader], Type[M]]],
             protocol: Optional[ProtocolTag] = None,
             role: Optional[RoleTag] = None) -> Tuple[ContainerHeader, PairingSuite, M]:
        """``bundle_type`` may be a model class or a function picking one from the header."""
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as e:
            raise MalformedError(f"cannot read container {path}: {e.strerror}")
        loaded = self.loads(data, protocol, role)
        if not isinstance(bundle_type, type):
            bundle_type = bundle_type(loaded.header)
        try:
            bundle = bundle_type.model_validate(loaded.values)
        except ValidationError as e:
            raise MalformedError(f"container {path} does not hold a {bundle_type.__name__}: "
                                 f"{e.errors()[0]['msg']}")
        return loaded.header, loaded.suite, bundle


container_service = ContainerService()
