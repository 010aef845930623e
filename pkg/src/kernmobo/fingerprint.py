"""Morgan-style circular count fingerprints over the unfolded 64-bit key space.

Atom identifiers are produced with FNV-1a (64-bit) over a canonical byte
encoding, so fingerprints are identical across processes and platforms.
No identifier deduplication is performed: every (atom, iteration) emission is
counted, giving a total count mass of ``num_atoms * (radius + 1)``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from sklearn.base import BaseEstimator, TransformerMixin

from kernmobo.exceptions import AlreadyFolded, DataError, EmptyInput
from kernmobo.smiles import BondOrder, MolGraph, parse_smiles

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

BOND_CODE = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 4,
}


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def _atom_invariant_bytes(element: str, degree: int, total_h: int,
                          charge: int, aromatic: bool) -> bytes:
    return b"atom\x00" + element.encode("ascii") + b"\x00" + struct.pack(
        "<iiiB", degree, total_h, charge, int(aromatic))


def _environment_bytes(previous: int, neighbors: list[tuple[int, int]]) -> bytes:
    parts = [b"env\x00", struct.pack("<QI", previous, len(neighbors))]
    parts.extend(struct.pack("<BQ", code, ident) for code, ident in neighbors)
    return b"".join(parts)


@dataclass(frozen=True)
class FingerprintConfig:
    radius: int = 2
    fold_dim: int = 0  # 0 means unfolded

    def __post_init__(self):
        if isinstance(self.radius, bool) or not isinstance(self.radius, int) or self.radius < 0:
            raise DataError(f"radius must be a non-negative integer, got {self.radius!r}")
        if isinstance(self.fold_dim, bool) or not isinstance(self.fold_dim, int) or self.fold_dim < 0:
            raise DataError(f"fold_dim must be 0 (FULL) or a positive integer, got {self.fold_dim!r}")


@dataclass(frozen=True, eq=True)
class SparseFingerprint:
    """Immutable sparse count vector ``{key: count}``.

    Attributes:
        counts: read-only mapping from non-negative integer key to positive count.
        radius: Morgan radius used to generate the fingerprint (-1 if unknown).
        fold: folded width, 0 for the full key space.
    """

    counts: Mapping[int, int] = field(default_factory=dict)
    radius: int = -1
    fold: int = 0

    def __post_init__(self):
        clean = {}
        for key, count in self.counts.items():
            key, count = int(key), int(count)
            if key < 0:
                raise DataError(f"fingerprint keys must be non-negative, got {key}")
            if count < 0:
                raise DataError(f"fingerprint counts must be non-negative, got {count}")
            if self.fold and key >= self.fold:
                raise DataError(f"key {key} out of range for folded width {self.fold}")
            if count:
                clean[key] = count
        object.__setattr__(self, "counts", MappingProxyType(dict(sorted(clean.items()))))

    def __len__(self) -> int:
        return len(self.counts)

    def __hash__(self):
        return hash((tuple(self.counts.items()), self.radius, self.fold))

    def __eq__(self, other):
        if not isinstance(other, SparseFingerprint):
            return NotImplemented
        return (dict(self.counts) == dict(other.counts)
                and self.radius == other.radius and self.fold == other.fold)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def is_binary(self) -> bool:
        return all(c == 1 for c in self.counts.values())

    def to_json(self, smiles: str = "") -> str:
        """One JSON-lines record; keys are decimal strings in ascending order."""
        return json.dumps({
            "smiles": smiles,
            "radius": self.radius,
            "fold": self.fold,
            "fp": {str(k): v for k, v in self.counts.items()},
        }, separators=(", ", ": "))

    @classmethod
    def from_json(cls, line: str) -> tuple[str, "SparseFingerprint"]:
        record = json.loads(line)
        fp = cls({int(k): int(v) for k, v in record["fp"].items()},
                 radius=int(record.get("radius", -1)), fold=int(record.get("fold", 0)))
        return record.get("smiles", ""), fp


def morgan_count_fingerprint(mol: MolGraph, config: FingerprintConfig | None = None) -> SparseFingerprint:
    """Circular count fingerprint of a parsed molecule.

    Iteration 0 hashes ``(element, degree, total H, formal charge, aromatic)``
    per atom. Each later iteration hashes the atom's previous identifier with
    the sorted ``(bond code, neighbor previous identifier)`` list; atoms with
    no neighbors are rehashed with an empty list, so their identifier still
    changes between iterations.

    The result is folded when ``config.fold_dim > 0``.
    """
    config = config or FingerprintConfig()
    if mol.num_atoms == 0:
        raise EmptyInput("cannot fingerprint an empty molecule")

    ids = [
        fnv1a_64(_atom_invariant_bytes(a.element, mol.degree(a.index), a.total_h,
                                       a.formal_charge, a.aromatic))
        for a in mol.atoms
    ]
    counts: dict[int, int] = {}
    for ident in ids:
        counts[ident] = counts.get(ident, 0) + 1
    neighbor_codes = [
        [(j, BOND_CODE[order]) for j, order in mol.neighbors(i)] for i in range(mol.num_atoms)
    ]
    for _ in range(config.radius):
        new_ids = []
        for i, prev in enumerate(ids):
            env = sorted((code, ids[j]) for j, code in neighbor_codes[i])
            new_ids.append(fnv1a_64(_environment_bytes(prev, env)))
        ids = new_ids
        for ident in ids:
            counts[ident] = counts.get(ident, 0) + 1

    fp = SparseFingerprint(counts, radius=config.radius, fold=0)
    if config.fold_dim:
        fp = fold(fp, config.fold_dim)
    return fp


def fold(fp: SparseFingerprint, width: int) -> SparseFingerprint:
    """Fold an unfolded fingerprint to ``width`` bins by ``key % width``.

    Colliding keys have their counts summed, so the total mass is preserved.
    """
    if fp.fold:
        raise AlreadyFolded(f"fingerprint already folded to width {fp.fold}")
    if isinstance(width, bool) or int(width) != width or width < 1:
        raise DataError(f"fold width must be a positive integer, got {width!r}")
    width = int(width)
    out: dict[int, int] = {}
    for key, count in fp.counts.items():
        k = key % width
        out[k] = out.get(k, 0) + count
    return SparseFingerprint(out, radius=fp.radius, fold=width)


def to_binary(fp: SparseFingerprint) -> SparseFingerprint:
    return SparseFingerprint(dict.fromkeys(fp.counts, 1), radius=fp.radius, fold=fp.fold)


def smiles_fingerprint(smiles: str, config: FingerprintConfig | None = None) -> SparseFingerprint:
    return morgan_count_fingerprint(parse_smiles(smiles), config)


def fingerprint_many(molecules: Iterable, config: FingerprintConfig | None = None) -> list[SparseFingerprint]:
    """Fingerprint a batch; items may be SMILES strings, graphs or fingerprints.

    Fingerprints pass through unchanged, which lets the estimators accept
    precomputed features.
    """
    config = config or FingerprintConfig()
    out = []
    for item in molecules:
        if isinstance(item, SparseFingerprint):
            out.append(item)
        elif isinstance(item, MolGraph):
            out.append(morgan_count_fingerprint(item, config))
        elif isinstance(item, str):
            out.append(smiles_fingerprint(item, config))
        else:
            raise DataError(f"cannot fingerprint object of type {type(item).__name__}")
    return out


class MorganCountFingerprinter(TransformerMixin, BaseEstimator):
    """Transformer mapping SMILES (or parsed graphs) to sparse count fingerprints.

    Parameters
    ----------
    radius : int, default=2
        Number of neighborhood-update iterations.
    fold_dim : int, default=0
        Fold width; 0 keeps the full 64-bit key space.
    binary : bool, default=False
        Replace counts by presence flags.
    """

    def __init__(self, radius=2, fold_dim=0, binary=False):
        self.radius = radius
        self.fold_dim = fold_dim
        self.binary = binary

    def fit(self, X=None, y=None):
        self.config_ = FingerprintConfig(self.radius, self.fold_dim)
        return self

    def transform(self, X):
        config = getattr(self, "config_", None) or FingerprintConfig(self.radius, self.fold_dim)
        fps = fingerprint_many(X, config)
        if self.binary:
            fps = [to_binary(fp) for fp in fps]
        return fps
