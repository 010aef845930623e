from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernmobo.exceptions import (
    DanglingBond,
    DataError,
    DisconnectedFragments,
    EmptyInput,
    RingBondConflict,
    SmilesError,
    UnbalancedParenthesis,
    UnclosedRing,
    UnknownSymbol,
)
from kernmobo.smiles import BondOrder, parse_smiles


def bond_set(mol):
    return {(min(b.a, b.b), max(b.a, b.b), b.order) for b in mol.bonds}


class TestExamples:
    def test_ethanol(self):
        mol = parse_smiles("CCO")
        assert [a.element for a in mol.atoms] == ["C", "C", "O"]
        assert bond_set(mol) == {(0, 1, BondOrder.SINGLE), (1, 2, BondOrder.SINGLE)}
        assert [a.implicit_h for a in mol.atoms] == [3, 2, 1]

    def test_benzene(self):
        mol = parse_smiles("c1ccccc1")
        assert mol.num_atoms == 6
        assert all(a.aromatic and a.element == "C" for a in mol.atoms)
        assert len(mol.bonds) == 6
        assert all(b.order is BondOrder.AROMATIC for b in mol.bonds)
        assert all(mol.degree(i) == 2 for i in range(6))
        assert [a.implicit_h for a in mol.atoms] == [1] * 6

    def test_two_digit_ring_closure(self):
        mol = parse_smiles("C%12CC%12")
        assert mol.num_atoms == 3
        assert (0, 2, BondOrder.SINGLE) in bond_set(mol)
        assert len(mol.bonds) == 3

    def test_stereo_marks_ignored(self):
        a, b = parse_smiles("F/C=C/F"), parse_smiles("FC=CF")
        assert a.atoms == b.atoms
        assert a.bonds == b.bonds

    def test_chirality_ignored(self):
        a, b = parse_smiles("C[C@@H](N)O"), parse_smiles("C[CH](N)O")
        assert a.atoms == b.atoms and a.bonds == b.bonds

    def test_bracket_atoms(self):
        mol = parse_smiles("[NH4+]")
        atom = mol.atoms[0]
        assert (atom.element, atom.formal_charge, atom.explicit_h, atom.implicit_h) == ("N", 1, 4, 0)
        assert atom.total_h == 4
        iso = parse_smiles("[13CH3-]").atoms[0]
        assert (iso.element, iso.formal_charge, iso.total_h) == ("C", -1, 3)
        assert parse_smiles("[Cl-]").atoms[0].element == "Cl"
        assert parse_smiles("[O-][N+](=O)C").atoms[1].formal_charge == 1

    def test_bracket_without_h_count_has_no_hydrogens(self):
        assert parse_smiles("[C]").atoms[0].total_h == 0

    def test_aromatic_nh(self):
        mol = parse_smiles("c1cc[nH]c1")
        n = mol.atoms[3]
        assert n.element == "N" and n.aromatic and n.total_h == 1

    def test_explicit_bond_orders(self):
        mol = parse_smiles("C=CC#N")
        assert [b.order for b in mol.bonds] == [BondOrder.DOUBLE, BondOrder.SINGLE, BondOrder.TRIPLE]
        assert [a.implicit_h for a in mol.atoms] == [2, 1, 0, 0]

    def test_two_letter_organic_atoms(self):
        mol = parse_smiles("ClCBr")
        assert [a.element for a in mol.atoms] == ["Cl", "C", "Br"]

    def test_overvalent_atom_gets_zero_h(self):
        mol = parse_smiles("CC(C)(C)(C)(C)C")
        assert mol.atoms[1].implicit_h == 0

    def test_ring_bond_annotation_on_either_side(self):
        for smi in ("C=1CCC1", "C1CCC=1"):
            mol = parse_smiles(smi)
            assert (0, 3, BondOrder.DOUBLE) in bond_set(mol)

    def test_aromatic_chain_bond_between_aromatic_atoms(self):
        # biphenyl link: two aromatic atoms, no symbol, outside any ring
        mol = parse_smiles("c1ccccc1c1ccccc1")
        link = [b for b in mol.bonds if {b.a, b.b} == {5, 6}]
        assert link[0].order is BondOrder.AROMATIC
        single = parse_smiles("c1ccccc1-c1ccccc1")
        assert [b for b in single.bonds if {b.a, b.b} == {5, 6}][0].order is BondOrder.SINGLE

    def test_adjacency_consistent(self, corpus):
        for smi in corpus:
            mol = parse_smiles(smi)
            for idx, bond in enumerate(mol.bonds):
                assert (bond.b, idx) in mol.adjacency[bond.a]
                assert (bond.a, idx) in mol.adjacency[bond.b]
            assert sum(len(n) for n in mol.adjacency) == 2 * len(mol.bonds)

    def test_kekule_corpus(self):
        corpus = [
            "O=C(NC1=C2C(NC=C2)=NC=C1)C3CCC(CC3)C(N)C",
            "S(=O)(=O)(/N=C/1/C=C(C2C(=O)CC(CC2=O)(C)C)C(=O)C=3C1=CC=CC3)C4=CC=C(C=C4)C",
            "O[C@]1([C@@]2([C@H]([C@H]3[C@H]([C@@H](O)C2)[C@@]4(C(=CC3)CC(=O)C=C4)C)CC1)C)C(=O)COC(=O)C",
            "O=N(=O)C1=CC(/C(=N/NC=2N=C(C(=NN2)C=3C=CC=CC3)C4=CC=CC=C4)/C)=CC=C1",
        ]
        for smi in corpus:
            mol = parse_smiles(smi)
            assert mol.num_atoms > 10


class TestErrors:
    @pytest.mark.parametrize("smi, exc", [
        ("C(", UnbalancedParenthesis),
        ("CC)", UnbalancedParenthesis),
        ("ClC1=CC=C(S(=O)(=O)C=2C(=CC(=NC2NC)C)C=C1", UnbalancedParenthesis),
        ("C1CC", UnclosedRing),
        ("CX", UnknownSymbol),
        ("[Xx]", UnknownSymbol),
        ("CC=", DanglingBond),
        ("C(=)C", DanglingBond),
        ("CC.O", DisconnectedFragments),
        ("C=1CC#1", RingBondConflict),
        ("", EmptyInput),
        ("   ", EmptyInput),
    ])
    def test_raises(self, smi, exc):
        with pytest.raises(exc):
            parse_smiles(smi)

    def test_errors_are_data_errors_with_position(self):
        with pytest.raises(SmilesError) as info:
            parse_smiles("CCX")
        assert isinstance(info.value, DataError)
        assert info.value.position == 2
        assert "CCX" in str(info.value)


# -- generated SMILES with known atom / ring counts ---------------------------------------

ATOMS = ["C", "N", "O", "S", "Cl", "F", "[NH3+]", "[13C]", "c", "n"]


@st.composite
def smiles_with_counts(draw):
    """A chain with optional one-atom branches and ring closures between chain atoms."""
    n = draw(st.integers(1, 12))
    chain = [draw(st.sampled_from(ATOMS)) for _ in range(n)]
    branches = [draw(st.sampled_from(["", "(C)", "(O)", "(=O)", "(Cl)"])) for _ in range(n)]
    n_rings = draw(st.integers(0, min(3, max(0, (n - 1) // 3))))
    opens: dict[int, list[int]] = {}
    closes: dict[int, list[int]] = {}
    used_pairs = set()
    digit = 1
    for _ in range(n_rings):
        i = draw(st.integers(0, n - 3))
        j = draw(st.integers(i + 2, n - 1))
        if (i, j) in used_pairs:
            continue
        used_pairs.add((i, j))
        opens.setdefault(i, []).append(digit)
        closes.setdefault(j, []).append(digit)
        digit += 1
    parts = []
    for k in range(n):
        parts.append(chain[k])
        for d in closes.get(k, []) + opens.get(k, []):
            parts.append(str(d) if d < 10 else f"%{d}")
        parts.append(branches[k])
    n_atoms = n + sum(1 for b in branches if b)
    return "".join(parts), n_atoms, len(used_pairs)


@settings(max_examples=200, deadline=None)
@given(smiles_with_counts())
def test_atom_and_bond_counts(case):
    smi, n_atoms, n_rings = case
    mol = parse_smiles(smi)
    assert mol.num_atoms == n_atoms
    assert mol.num_bonds == n_atoms - 1 + n_rings


@settings(max_examples=100, deadline=None)
@given(smiles_with_counts())
def test_parse_is_deterministic(case):
    a, b = parse_smiles(case[0]), parse_smiles(case[0])
    assert a.atoms == b.atoms and a.bonds == b.bonds and a.adjacency == b.adjacency


@settings(max_examples=100, deadline=None)
@given(smiles_with_counts())
def test_implicit_h_non_negative(case):
    assert all(a.implicit_h >= 0 for a in parse_smiles(case[0]).atoms)


def test_synthetic_generator_parses(synthetic):
    assert len(set(synthetic)) == len(synthetic)
    for smi in synthetic:
        parse_smiles(smi)
