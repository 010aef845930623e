"""SMILES parsing into a plain molecular graph.

Supported grammar subset:

* organic-subset atoms ``B C N O P S F Cl Br I`` and aromatic ``b c n o p s``
* bracket atoms ``[isotope? symbol chirality? Hn? charge? :class?]``; the
  isotope, chirality and atom class are parsed and dropped
* bonds ``- = # :`` and the directional markers ``/ \\`` (read as an
  unannotated bond)
* branches ``( )`` and ring closures ``1``-``9`` / ``%nn``

Multi-fragment input (``.``) is rejected. Aromaticity is taken verbatim from
lowercase symbols; there is no kekulization or perception step.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from kernmobo.exceptions import (
    DanglingBond,
    DisconnectedFragments,
    EmptySmiles,
    RingBondConflict,
    SmilesSyntaxError,
    UnbalancedParenthesis,
    UnclosedRing,
    UnknownSymbol,
)


class BondOrder(Enum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> int:
        """Valence consumed by one end of the bond (aromatic counts as 1)."""
        return 1 if self is BondOrder.AROMATIC else self.value


DEFAULT_VALENCE = {
    "B": 3, "C": 4, "N": 3, "O": 2, "P": 3, "S": 2,
    "F": 1, "Cl": 1, "Br": 1, "I": 1,
}
ORGANIC_SUBSET = frozenset(DEFAULT_VALENCE)
AROMATIC_ORGANIC = frozenset("bcnops")
ELEMENTS = frozenset("""
H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu
Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba
La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi
Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds
Rg Cn Nh Fl Mc Lv Ts Og
""".split())
# lowercase symbols accepted inside brackets
AROMATIC_BRACKET = frozenset({"b", "c", "n", "o", "p", "s", "se", "as", "te"})

_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
}
# directional bonds carry stereo only
_STEREO_BONDS = frozenset("/\\")
_UNANNOTATED = object()


@dataclass(frozen=True)
class Atom:
    index: int
    element: str
    aromatic: bool = False
    formal_charge: int = 0
    explicit_h: int | None = None
    implicit_h: int = 0

    @property
    def total_h(self) -> int:
        """Hydrogen count: bracket count when given, computed otherwise."""
        return self.explicit_h if self.explicit_h is not None else self.implicit_h


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder


@dataclass(frozen=True)
class MolGraph:
    """Immutable molecular graph.

    ``adjacency[i]`` lists ``(neighbor_index, bond_index)`` pairs in the
    order the bonds were written.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    adjacency: tuple[tuple[tuple[int, int], ...], ...]
    smiles: str = ""

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def neighbors(self, i: int) -> list[tuple[int, BondOrder]]:
        return [(j, self.bonds[k].order) for j, k in self.adjacency[i]]


@dataclass
class _PendingAtom:
    element: str
    aromatic: bool
    formal_charge: int = 0
    explicit_h: int | None = None
    bracket: bool = False


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.atoms: list[_PendingAtom] = []
        self.bonds: list[list] = []  # [a, b, order-or-None]
        self.pairs: set[frozenset] = set()
        self.rings: dict[int, tuple[int, object, int]] = {}
        self.branch_stack: list[int] = []
        self.prev: int | None = None
        self.pending_bond: object | None = None
        self.pending_pos = -1

    def error(self, cls, message, position=None):
        return cls(message, smiles=self.text, position=position)

    def run(self) -> MolGraph:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch == "(":
                if self.prev is None:
                    raise self.error(SmilesSyntaxError, "branch opened before any atom", self.pos)
                if self.pending_bond is not None:
                    raise self.error(DanglingBond, "bond symbol before '('", self.pending_pos)
                self.branch_stack.append(self.prev)
                self.pos += 1
                if self.pos < len(text) and text[self.pos] == ")":
                    raise self.error(SmilesSyntaxError, "empty branch", self.pos)
            elif ch == ")":
                if not self.branch_stack:
                    raise self.error(UnbalancedParenthesis, "unmatched ')'", self.pos)
                if self.pending_bond is not None:
                    raise self.error(DanglingBond, "bond symbol before ')'", self.pending_pos)
                self.prev = self.branch_stack.pop()
                self.pos += 1
            elif ch in _BOND_SYMBOLS or ch in _STEREO_BONDS:
                if self.prev is None:
                    raise self.error(DanglingBond, "bond symbol with no preceding atom", self.pos)
                if self.pending_bond is not None:
                    raise self.error(SmilesSyntaxError, "two consecutive bond symbols", self.pos)
                self.pending_bond = _BOND_SYMBOLS.get(ch, _UNANNOTATED)
                self.pending_pos = self.pos
                self.pos += 1
            elif ch.isdigit() or ch == "%":
                self._ring_closure()
            elif ch == ".":
                raise self.error(DisconnectedFragments,
                                 "multi-fragment SMILES are not supported", self.pos)
            elif ch == "[":
                self._add_atom(self._bracket_atom())
            else:
                self._add_atom(self._organic_atom())

        if self.pending_bond is not None:
            raise self.error(DanglingBond, "bond symbol with no following atom", self.pending_pos)
        if self.branch_stack:
            raise self.error(UnbalancedParenthesis, "unclosed branch")
        if self.rings:
            digits = ", ".join(str(d) for d in sorted(self.rings))
            raise self.error(UnclosedRing, f"ring closure(s) {digits} never closed")
        return self._build()

    def _organic_atom(self) -> _PendingAtom:
        text, pos = self.text, self.pos
        two = text[pos:pos + 2]
        if two in ("Cl", "Br"):
            self.pos += 2
            return _PendingAtom(two, aromatic=False)
        ch = text[pos]
        if ch in ORGANIC_SUBSET:
            self.pos += 1
            return _PendingAtom(ch, aromatic=False)
        if ch in AROMATIC_ORGANIC:
            self.pos += 1
            return _PendingAtom(ch.upper(), aromatic=True)
        raise self.error(UnknownSymbol, f"unknown atom symbol {ch!r}", pos)

    def _bracket_atom(self) -> _PendingAtom:
        text = self.text
        start = self.pos
        end = text.find("]", start)
        if end < 0:
            raise self.error(SmilesSyntaxError, "unterminated bracket atom", start)
        body = text[start + 1:end]
        self.pos = end + 1
        i = 0
        while i < len(body) and body[i].isdigit():  # isotope
            i += 1
        symbol = None
        aromatic = False
        if body[i:i + 2] in AROMATIC_BRACKET:
            symbol, aromatic = body[i:i + 2], True
        elif body[i:i + 1] in AROMATIC_BRACKET:
            symbol, aromatic = body[i:i + 1], True
        elif body[i:i + 2] in ELEMENTS:
            symbol = body[i:i + 2]
        elif body[i:i + 1] in ELEMENTS:
            symbol = body[i:i + 1]
        if symbol is None:
            raise self.error(UnknownSymbol, f"unknown bracket atom [{body}]", start)
        i += len(symbol)
        element = symbol.capitalize() if aromatic else symbol
        if i < len(body) and body[i] == "@":
            i += 1
            if i < len(body) and body[i] == "@":
                i += 1
            elif body[i:i + 2] in ("TH", "AL", "SP", "TB", "OH"):
                i += 2
                while i < len(body) and body[i].isdigit():
                    i += 1
        explicit_h = 0
        if i < len(body) and body[i] == "H":
            i += 1
            digits = ""
            while i < len(body) and body[i].isdigit():
                digits += body[i]
                i += 1
            explicit_h = int(digits) if digits else 1
        charge = 0
        if i < len(body) and body[i] in "+-":
            sign = 1 if body[i] == "+" else -1
            j = i + 1
            if j < len(body) and body[j].isdigit():
                k = j
                while k < len(body) and body[k].isdigit():
                    k += 1
                charge = sign * int(body[j:k])
                i = k
            else:
                n = 1
                while j < len(body) and body[j] == body[i]:
                    n += 1
                    j += 1
                charge = sign * n
                i = j
        if i < len(body) and body[i] == ":":
            i += 1
            while i < len(body) and body[i].isdigit():
                i += 1
        if i != len(body):
            raise self.error(UnknownSymbol, f"cannot parse bracket atom [{body}]", start)
        return _PendingAtom(element, aromatic, charge, explicit_h, bracket=True)

    def _add_atom(self, atom: _PendingAtom) -> None:
        idx = len(self.atoms)
        self.atoms.append(atom)
        if self.prev is not None:
            order = None if self.pending_bond in (None, _UNANNOTATED) else self.pending_bond
            self._add_bond(self.prev, idx, order, self.pending_pos)
        self.pending_bond = None
        self.prev = idx

    def _add_bond(self, a: int, b: int, order, position: int) -> None:
        key = frozenset((a, b))
        if a == b:
            raise self.error(SmilesSyntaxError, "ring closure bonds an atom to itself", position)
        if key in self.pairs:
            raise self.error(SmilesSyntaxError, "duplicate bond between the same atoms", position)
        self.pairs.add(key)
        self.bonds.append([a, b, order])

    def _ring_closure(self) -> None:
        text, start = self.text, self.pos
        if self.prev is None:
            raise self.error(SmilesSyntaxError, "ring closure before any atom", start)
        if text[start] == "%":
            digits = text[start + 1:start + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise self.error(SmilesSyntaxError, "'%' must be followed by two digits", start)
            number = int(digits)
            self.pos += 3
        else:
            number = int(text[start])
            self.pos += 1
        order = None if self.pending_bond in (None, _UNANNOTATED) else self.pending_bond
        self.pending_bond = None
        if number in self.rings:
            other, other_order, _ = self.rings.pop(number)
            if order is not None and other_order is not None and order is not other_order:
                raise self.error(RingBondConflict,
                                 f"ring {number} closed with conflicting bond orders", start)
            self._add_bond(other, self.prev, order or other_order, start)
        else:
            self.rings[number] = (self.prev, order, start)

    def _build(self) -> MolGraph:
        n = len(self.atoms)
        if n == 0:
            raise self.error(EmptySmiles, "no atoms")
        bonds = []
        for a, b, order in self.bonds:
            if order is None:
                both = self.atoms[a].aromatic and self.atoms[b].aromatic
                order = BondOrder.AROMATIC if both else BondOrder.SINGLE
            bonds.append(Bond(a, b, order))
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        used = [0] * n
        for k, bond in enumerate(bonds):
            adjacency[bond.a].append((bond.b, k))
            adjacency[bond.b].append((bond.a, k))
            used[bond.a] += bond.order.valence
            used[bond.b] += bond.order.valence
        atoms = []
        for i, pa in enumerate(self.atoms):
            implicit = 0
            if not pa.bracket:
                implicit = DEFAULT_VALENCE[pa.element] - used[i] - (1 if pa.aromatic else 0)
                implicit = max(implicit, 0)
            atoms.append(Atom(i, pa.element, pa.aromatic, pa.formal_charge,
                              pa.explicit_h if pa.bracket else None, implicit))
        return MolGraph(tuple(atoms), tuple(bonds),
                        tuple(tuple(adj) for adj in adjacency), self.text)


def parse_smiles(text: str) -> MolGraph:
    """Parse a single-fragment SMILES string.

    Args:
        text: SMILES string; surrounding whitespace is ignored.

    Returns:
        The parsed :class:`MolGraph`.

    Raises:
        EmptySmiles: blank input.
        UnbalancedParenthesis, UnclosedRing, UnknownSymbol, DanglingBond,
        DisconnectedFragments, RingBondConflict, SmilesSyntaxError: malformed
        input.
    """
    text = text.strip() if text is not None else ""
    if not text:
        raise EmptySmiles("empty SMILES string")
    return _Parser(text).run()
