from __future__ import annotations

import pytest

from kernmobo.datasets import synthetic_smiles

# hand-written molecules covering rings, branches, charges and bracket atoms
CORPUS = [
    "CCO", "CC(=O)O", "c1ccccc1", "Cc1ccccc1", "Oc1ccccc1", "c1ccncc1", "c1cc[nH]c1",
    "CC(C)C", "CCN(CC)CC", "C1CCCCC1", "C1CCOC1", "CC(=O)Oc1ccccc1C(=O)O",
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "O=[N+]([O-])c1ccccc1", "C#N", "FC(F)(F)c1ccccc1",
    "CCS(=O)(=O)N", "c1ccc2ccccc2c1", "C=CC=C", "NCC(=O)O", "CC(N)C(=O)O", "Clc1ccc(Cl)cc1",
    "CCCCCCCC", "OC1CCCCC1", "c1ccsc1", "CC(C)(C)O", "[NH4+]", "C[C@H](N)C(=O)O",
    "Cc1ccc(-c2cc(C(F)(F)F)nn2-c2ccc(S(N)(=O)=O)cc2)cc1", "CCCC(=O)NNC(=O)Nc1ccccc1",
    "CC(=O)NC(C)Cc1ccc(C#Cc2ccnc(N3CCCC(F)C3)n2)cc1", "BrCCBr", "OCC(O)CO", "C1CC1",
]


@pytest.fixture(scope="session")
def corpus() -> list[str]:
    return list(CORPUS)


@pytest.fixture(scope="session")
def synthetic() -> list[str]:
    return synthetic_smiles(200, seed=11)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
