"""Deterministic synthetic SMILES corpora for tests and desk-scale benchmarks."""

from __future__ import annotations

import numpy as np

from kernmobo.fingerprint import FingerprintConfig, smiles_fingerprint

# chain pieces: begin and end on an atom that can take another bond
_BACKBONE = (
    "C", "CC", "CCC", "C(C)", "C(=O)", "N", "NC", "O", "OC", "S", "C=C", "CN",
    "c1ccccc1", "c1ccncc1", "c1ccc(O)cc1", "c1ccsc1", "C1CCCCC1", "C1CCNCC1",
    "C1CCOC1", "c1ccc2ccccc2c1", "C(=O)N", "NC(=O)", "C(C)(C)", "c1cnc[nH]1",
    "S(=O)(=O)", "CC(O)",
)
# capping pieces: may end the chain or hang in a branch
_CAPS = (
    "C", "F", "Cl", "Br", "O", "N", "C#N", "C(F)(F)F", "C(=O)O", "OC", "CC",
    "c1ccccc1", "N(C)C", "S(N)(=O)=O", "[N+](=O)[O-]", "C(N)=O",
)


def synthetic_smiles(n: int, seed: int = 0, min_pieces: int = 2, max_pieces: int = 6,
                     unique_fingerprints: bool = True) -> list[str]:
    """Generate ``n`` distinct, parseable single-fragment SMILES strings.

    Molecules are random chains of backbone pieces with optional branch caps.
    With ``unique_fingerprints`` (default) no two molecules share a radius-2
    count fingerprint, so GP training sets built from them have no
    duplicate inputs.
    """
    rng = np.random.default_rng(seed)
    out: list[str] = []
    seen_smiles: set[str] = set()
    seen_fps: set = set()
    config = FingerprintConfig(radius=2)
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 200 * n + 1000:
            raise RuntimeError(f"could not generate {n} distinct molecules")
        k = int(rng.integers(min_pieces, max_pieces + 1))
        parts = []
        for _ in range(k):
            parts.append(_BACKBONE[rng.integers(len(_BACKBONE))])
            if rng.random() < 0.35:
                parts.append("(" + _CAPS[rng.integers(len(_CAPS))] + ")")
        if rng.random() < 0.7:
            parts.append(_CAPS[rng.integers(len(_CAPS))])
        smi = "".join(parts)
        if smi in seen_smiles:
            continue
        seen_smiles.add(smi)
        if unique_fingerprints:
            fp = smiles_fingerprint(smi, config)
            if fp in seen_fps:
                continue
            seen_fps.add(fp)
        out.append(smi)
    return out


CELECOXIB = "Cc1ccc(-c2cc(C(F)(F)F)nn2-c2ccc(S(N)(=O)=O)cc2)cc1"
ASPIRIN = "CC(=O)Oc1ccccc1C(=O)O"
