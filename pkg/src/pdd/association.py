"""Attribute-value counting and the adjusted standardized residual matrix.

For two attribute values ``a`` and ``b`` of different attributes over ``M``
records::

    Exp(a, b) = Occ(a) * Occ(b) / M
    AR(a, b)  = (Occ(a, b) - Exp(a, b))
                / sqrt(Exp(a, b) * (1 - Occ(a) / M) * (1 - Occ(b) / M))

``formula="literal"`` selects the alternative reading
``(Occ - Exp) / sqrt(Exp) * (1 - Occ(a) Occ(b) / M**2)``.
When a margin is 0 or M the variance vanishes and AR is defined as 0; the
ARV keeps a mask of those cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pdd.discretize import DiscretizedTable
from pdd.errors import EmptyDataset, UnknownAv, ZeroSupportCondition

FORMULAS = ("standard", "literal")


@dataclass(frozen=True)
class AvIndex:
    """Dense enumeration of (attribute, value) pairs in schema then label order."""

    entries: tuple[tuple[str, str], ...]
    attributes: tuple[str, ...] = ()
    lookup: dict[tuple[str, str], int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "lookup", {av: i for i, av in enumerate(self.entries)})
        if not self.attributes:
            object.__setattr__(self, "attributes", tuple(dict.fromkeys(a for a, _ in self.entries)))

    @classmethod
    def from_table(cls, table: DiscretizedTable) -> "AvIndex":
        return cls(
            entries=tuple((n, lab) for n in table.names for lab in table.labels[n]),
            attributes=tuple(table.names),
        )

    @property
    def T(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> tuple[str, str]:
        return self.entries[i]

    def index(self, attribute: str, value: str) -> int:
        try:
            return self.lookup[(attribute, value)]
        except KeyError:
            raise UnknownAv(f"unknown attribute value {attribute}={value}") from None

    def attribute_ids(self) -> np.ndarray:
        """Position of each AV's attribute in ``attributes``."""
        pos = {a: i for i, a in enumerate(self.attributes)}
        return np.array([pos[a] for a, _ in self.entries], dtype=np.int64)

    def cross_mask(self) -> np.ndarray:
        """Boolean T x T mask, True where the two AVs belong to different attributes."""
        ids = self.attribute_ids()
        return ids[:, None] != ids[None, :]

    def values_of(self, attribute: str) -> list[int]:
        return [i for i, (a, _) in enumerate(self.entries) if a == attribute]

    def label(self, i: int) -> str:
        a, v = self.entries[i]
        return f"{a}={v}"


@dataclass(frozen=True)
class ContingencyModel:
    """Single and pairwise AV occurrence counts.

    ``occ_pair`` is a symmetric T x T integer matrix; within-attribute cells
    (including the diagonal) are not meaningful and are stored as 0.
    """

    M: int
    occ_single: np.ndarray
    occ_pair: np.ndarray
    av_index: AvIndex

    def _check_cross(self, i: int, j: int) -> None:
        a, b = self.av_index[i][0], self.av_index[j][0]
        if a == b:
            raise ValueError(f"{self.av_index.label(i)} and {self.av_index.label(j)} share an attribute")

    def support(self, i: int, j: int) -> float:
        self._check_cross(i, j)
        return support(int(self.occ_pair[i, j]), self.M)

    def confidence(self, i: int, j: int) -> float:
        """con(i -> j) = Occ(i, j) / Occ(j)."""
        self._check_cross(i, j)
        return confidence(int(self.occ_pair[i, j]), int(self.occ_single[j]))

    def expected(self, i: int, j: int) -> float:
        self._check_cross(i, j)
        return expected(int(self.occ_single[i]), int(self.occ_single[j]), self.M)

    def adjusted_residual(self, i: int, j: int, formula: str = "standard") -> float:
        self._check_cross(i, j)
        return adjusted_residual(
            int(self.occ_pair[i, j]),
            int(self.occ_single[i]),
            int(self.occ_single[j]),
            self.M,
            formula,
        )


def build_contingency(table: DiscretizedTable) -> tuple[AvIndex, ContingencyModel]:
    index = AvIndex.from_table(table)
    T, M = index.T, table.M
    onehot = np.zeros((M, T), dtype=np.float64)
    offset = 0
    rows = np.arange(M)
    for n in table.names:
        onehot[rows, offset + table.codes(n)] = 1.0
        offset += len(table.labels[n])
    occ_single = onehot.sum(axis=0).round().astype(np.int64)
    # float matmul is exact for counts far below 2**53
    occ_pair = (onehot.T @ onehot).round().astype(np.int64)
    occ_pair[~index.cross_mask()] = 0
    return index, ContingencyModel(M=M, occ_single=occ_single, occ_pair=occ_pair, av_index=index)


def support(occ_pair: int, m: int) -> float:
    if m == 0:
        raise EmptyDataset("support is undefined on an empty dataset")
    return occ_pair / m


def confidence(occ_pair: int, occ_condition: int) -> float:
    """Fraction of the condition AV's records that also hold the other AV."""
    if occ_condition == 0:
        raise ZeroSupportCondition("confidence conditioned on an AV that never occurs")
    return occ_pair / occ_condition


def expected(occ1: int, occ2: int, m: int) -> float:
    if m == 0:
        raise EmptyDataset("expected frequency is undefined on an empty dataset")
    return occ1 * occ2 / m


def is_degenerate(occ1: int, occ2: int, m: int) -> bool:
    return occ1 <= 0 or occ2 <= 0 or occ1 >= m or occ2 >= m


def adjusted_residual(
    occ_pair: int, occ1: int, occ2: int, m: int, formula: str = "standard"
) -> float:
    """AR of one AV pair; 0.0 when either margin is 0 or M."""
    if m == 0:
        raise EmptyDataset("AR is undefined on an empty dataset")
    if formula not in FORMULAS:
        raise ValueError(f"unknown formula {formula!r}")
    if is_degenerate(occ1, occ2, m):
        return 0.0
    exp = occ1 * occ2 / m
    if formula == "standard":
        return (occ_pair - exp) / math.sqrt(exp * (1 - occ1 / m) * (1 - occ2 / m))
    return (occ_pair - exp) / math.sqrt(exp) * (1 - (occ1 / m) * (occ2 / m))


@dataclass(frozen=True)
class ArvMatrix:
    values: np.ndarray
    av_index: AvIndex
    degenerate: np.ndarray
    formula: str = "standard"

    @property
    def T(self) -> int:
        return self.values.shape[0]


def build_arv(
    index: AvIndex, model: ContingencyModel, formula: str = "standard"
) -> ArvMatrix:
    """T x T matrix of ARs over cross-attribute pairs; within-attribute blocks are 0."""
    if formula not in FORMULAS:
        raise ValueError(f"unknown formula {formula!r}")
    T, M = index.T, model.M
    if T and M == 0:
        raise EmptyDataset("cannot build the AR matrix of an empty dataset")
    if T == 0:
        empty = np.zeros((0, 0))
        return ArvMatrix(empty, index, empty.astype(bool), formula)

    occ = model.occ_single.astype(np.float64)
    obs = model.occ_pair.astype(np.float64)
    cross = index.cross_mask()
    bad_margin = (model.occ_single <= 0) | (model.occ_single >= M)
    degenerate = cross & (bad_margin[:, None] | bad_margin[None, :])
    live = cross & ~degenerate

    p = occ / M
    exp = np.outer(occ, occ) / M
    if formula == "standard":
        denom = np.sqrt(exp * np.outer(1 - p, 1 - p))
        scale = 1.0
    else:
        denom = np.sqrt(exp)
        scale = 1 - np.outer(p, p)
    ar = np.zeros((T, T))
    ar[live] = ((obs - exp) / np.where(live, denom, 1.0) * scale)[live]
    # exact symmetry regardless of rounding order
    upper = np.triu(ar, 1)
    ar = upper + upper.T
    return ArvMatrix(values=ar, av_index=index, degenerate=degenerate, formula=formula)
