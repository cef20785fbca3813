"""
qev/qev/protocols.py

Duck types shared by the reports, the sweeps and the output writer
"""
from typing import (
    Dict,
    Protocol,
    Union,
    runtime_checkable
)

from .state import QevParams

Cell = Union[float, bool]

@runtime_checkable
class RowLike(Protocol):
    """
    Anything that renders itself as one row of output columns
    """
    def as_row(self) -> Dict[str, Cell]:
        raise NotImplementedError()

class PointEvaluator(Protocol):
    """
    The per-point work of a sweep
    """
    def __call__(self, params: QevParams) -> Dict[str, Cell]:
        raise NotImplementedError()
