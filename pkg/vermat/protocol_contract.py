from abc import ABC, abstractmethod
from typing import Any, ClassVar, Dict, List, Optional, Type, Union

from pydantic import BaseModel

from vermat.errors import ParameterError
from vermat.fplinalg import FieldMatrix
from vermat.pairing_core import PairingSuite
from vermat.schemas import ProtocolTag, RoleTag, Verdict


class ProtocolContract(ABC):
    """Contract for the role operations of one verifiable matrix-vector protocol"""

    class KeygenRequestDTO:
        def __init__(
            self,
            suite: PairingSuite,
            matrix: Optional[FieldMatrix] = None,
            length: Optional[int] = None,
            rng: Any = None,
            dims: Optional[Dict[str, Optional[int]]] = None,
            chunk_a: Optional[float] = None,
            fiat_shamir: bool = False,
        ):
            self.suite = suite
            self.matrix = matrix
            self.length = length
            self.rng = rng
            self.dims = {k: v for k, v in (dims or {}).items() if v is not None}
            self.chunk_a = chunk_a
            self.fiat_shamir = fiat_shamir

    class KeyBundleDTO:
        def __init__(
            self,
            ek: BaseModel,
            vk: BaseModel,
            trustee: Optional[BaseModel] = None,
            dims: Optional[Dict[str, int]] = None,
            meta: Optional[Dict[str, Union[bool, int, float, str]]] = None,
        ):
            self.ek = ek
            self.vk = vk
            self.trustee = trustee
            self.dims = dims or {}
            self.meta = meta or {}

    tag: ClassVar[ProtocolTag]
    bundles: ClassVar[Dict[RoleTag, Type[BaseModel]]] = {}
    needs_matrix: ClassVar[bool] = True
    small_field: ClassVar[bool] = False

    def bundle_type(self, role: RoleTag) -> Type[BaseModel]:
        if role not in self.bundles:
            raise ParameterError(f"protocol '{self.tag.value}' has no '{role.value}' container")
        return self.bundles[role]

    @abstractmethod
    def keygen(self, request: "ProtocolContract.KeygenRequestDTO") -> "ProtocolContract.KeyBundleDTO":
        """Preparator: keys for one matrix (or one secret vector for dot products)"""
        pass

    def probgen(self, key: BaseModel, x: List[int], suite: PairingSuite) -> BaseModel:
        """Trustee: per-input verification material"""
        raise ParameterError(f"protocol '{self.tag.value}' has no probgen step")

    @abstractmethod
    def compute(self, ek: BaseModel, x: List[int], suite: PairingSuite) -> BaseModel:
        """Prover: output and proof"""
        pass

    def trustee(self, key: BaseModel, x: List[int], proof: BaseModel, suite: PairingSuite) -> BaseModel:
        """Trustee: response bound to a specific proof"""
        raise ParameterError(f"protocol '{self.tag.value}' has no trustee step")

    @abstractmethod
    def verify(self, vk: BaseModel, x: List[int], proof: BaseModel, suite: PairingSuite,
               aux: Optional[BaseModel] = None, rng: Any = None) -> Verdict:
        """Verifier: accept with the output, or reject with a reason"""
        pass
