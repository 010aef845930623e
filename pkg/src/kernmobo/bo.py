"""Pool-based Bayesian optimization loops.

:func:`run_gp_mobo` is the multi-objective loop (independent GPs per
objective, Monte Carlo EHVI, reference point re-inferred every iteration).
:func:`run_scalarized_sobo` and :func:`run_random_baseline` are the
comparison baselines. All three draw candidates without replacement from a
fixed query pool and return the same :class:`BORunResult` shape.
"""

from __future__ import annotations

import logging
import math
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from kernmobo.acquisition import (
    AcquisitionConfig,
    AcquisitionKind,
    ehvi_mc_batch,
    expected_improvement,
    geometric_mean,
    select_candidate,
    ucb,
)
from kernmobo.exceptions import DataError, DuplicateSmiles, EmptyInput, PoolExhausted
from kernmobo.fingerprint import FingerprintConfig, SparseFingerprint, smiles_fingerprint
from kernmobo.gp import GPHyperparams, fit, mo_fit, mo_predict, predict
from kernmobo.kernels import KernelKind, kernel_function
from kernmobo.pareto import ParetoFront, ReferencePointConfig, hv_sweep, infer_reference_point, pareto_filter

logger = logging.getLogger(__name__)


def named_rng(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named consumer of the master seed.

    Each stream is keyed on ``(seed, crc32(name))``, so adding a new consumer
    never shifts the draws of an existing one.
    """
    seq = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                 spawn_key=(zlib.crc32(name.encode("utf-8")),))
    return np.random.default_rng(seq)


# -- oracles -------------------------------------------------------------------------

class Oracle:
    """Deterministic evaluator ``smiles -> objective vector`` (or ``None`` if missing)."""

    n_objectives: int = 1

    def evaluate(self, smiles: str) -> np.ndarray | None:
        raise NotImplementedError

    def __call__(self, smiles: str) -> np.ndarray | None:
        return self.evaluate(smiles)


class SimilarityOracle(Oracle):
    """Kernel similarity of a molecule's fingerprint to a fixed reference molecule."""

    n_objectives = 1

    def __init__(self, reference_smiles: str, kind="minmax",
                 fingerprint: FingerprintConfig | None = None):
        self.reference_smiles = reference_smiles
        self.kind = KernelKind.parse(kind)
        self.fingerprint = fingerprint or FingerprintConfig()
        self._kernel = kernel_function(self.kind)
        self._ref_fp = smiles_fingerprint(reference_smiles, self.fingerprint)
        self._cache: dict[str, np.ndarray | None] = {}

    def evaluate(self, smiles: str) -> np.ndarray | None:
        if smiles not in self._cache:
            try:
                fp = smiles_fingerprint(smiles, self.fingerprint)
            except DataError:
                self._cache[smiles] = None
            else:
                self._cache[smiles] = np.array([self._kernel(fp, self._ref_fp)])
        value = self._cache[smiles]
        return None if value is None else value.copy()


def similarity_oracle(reference_smiles: str, kind="minmax",
                      fingerprint: FingerprintConfig | None = None) -> SimilarityOracle:
    return SimilarityOracle(reference_smiles, kind, fingerprint)


class TableOracle(Oracle):
    """Exact-string lookup into a ``{smiles: vector or None}`` table."""

    def __init__(self, table: dict, n_objectives: int):
        self.table = table
        self.n_objectives = n_objectives

    def evaluate(self, smiles: str) -> np.ndarray | None:
        value = self.table.get(smiles)
        if value is None:
            return None
        value = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(value)):
            return None
        return value.copy()


def csv_oracle(path, objective_columns: Sequence[str]) -> TableOracle:
    """Oracle backed by an objectives CSV (see :func:`kernmobo.io.load_objectives_csv`)."""
    from kernmobo.io import load_objectives_csv

    table = load_objectives_csv(path, objective_columns)
    return TableOracle(table, len(objective_columns))


class CompositeOracle(Oracle):
    """Concatenates the outputs of several oracles; missing if any part is missing."""

    def __init__(self, oracles: Sequence[Oracle]):
        if not oracles:
            raise EmptyInput("CompositeOracle needs at least one oracle")
        self.oracles = list(oracles)
        self.n_objectives = sum(o.n_objectives for o in self.oracles)

    def evaluate(self, smiles: str) -> np.ndarray | None:
        parts = []
        for oracle in self.oracles:
            value = oracle.evaluate(smiles)
            if value is None:
                return None
            parts.append(np.atleast_1d(value))
        return np.concatenate(parts)


# -- configuration and records ----------------------------------------------------------

@dataclass
class CandidatePool:
    known: list[tuple[str, np.ndarray]]
    query: list[str]

    def __post_init__(self):
        self.known = [(s, np.asarray(y, dtype=float).ravel()) for s, y in self.known]
        names = [s for s, _ in self.known] + list(self.query)
        if len(set(names)) != len(names):
            dupes = sorted({s for s in names if names.count(s) > 1})
            raise DuplicateSmiles(f"SMILES appear more than once in the pool: {dupes[:5]}")
        dims = {len(y) for _, y in self.known}
        if len(dims) > 1:
            raise DataError(f"known objective vectors have mixed dimensions {sorted(dims)}")
        for s, y in self.known:
            if not np.all(np.isfinite(y)):
                raise DataError(f"known molecule {s!r} has non-finite objectives")
        self.query = list(self.query)

    @classmethod
    def from_smiles(cls, smiles: Sequence[str], oracle: Oracle, n_known: int = 10,
                    rng: np.random.Generator | None = None) -> "CandidatePool":
        """Split a SMILES list into known (evaluated now) and query molecules.

        With ``rng`` the known set is a random subset, otherwise the first
        ``n_known`` entries. Known molecules the oracle cannot evaluate are
        dropped with a warning.
        """
        smiles = list(smiles)
        order = list(range(len(smiles))) if rng is None else list(rng.permutation(len(smiles)))
        chosen = sorted(order[:n_known]) if rng is not None else order[:n_known]
        chosen_set = set(chosen)
        known = []
        for i in chosen:
            y = oracle.evaluate(smiles[i])
            if y is None:
                logger.warning("dropping known molecule %r: oracle value missing", smiles[i])
                continue
            known.append((smiles[i], y))
        query = [s for i, s in enumerate(smiles) if i not in chosen_set]
        return cls(known, query)


@dataclass(frozen=True)
class BORunConfig:
    n_iter: int = 20
    hypers: tuple[GPHyperparams, ...] | GPHyperparams = GPHyperparams()
    acquisition: AcquisitionConfig = AcquisitionConfig()
    reference: ReferencePointConfig = ReferencePointConfig()
    fingerprint: FingerprintConfig = FingerprintConfig()
    kernel: KernelKind = KernelKind.MINMAX
    seed: int = 0

    def __post_init__(self):
        if int(self.n_iter) != self.n_iter or self.n_iter < 0:
            raise DataError(f"n_iter must be a non-negative integer, got {self.n_iter!r}")
        object.__setattr__(self, "kernel", KernelKind.parse(self.kernel))

    def hypers_for(self, d: int) -> list[GPHyperparams]:
        if isinstance(self.hypers, GPHyperparams):
            return [self.hypers] * d
        hypers = list(self.hypers)
        if len(hypers) == 1:
            return hypers * d
        if len(hypers) != d:
            raise DataError(f"{len(hypers)} hyperparameter sets for {d} objectives")
        return hypers


@dataclass
class IterationRecord:
    iteration: int
    smiles: str
    acquisition: float
    observed: list[float]
    reference_point: list[float]
    hv_before: float
    hv_after: float
    hv_fixed_ref: float
    n_known: int
    n_query: int
    discarded: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BORunResult:
    method: str
    records: list[IterationRecord]
    front: ParetoFront
    front_smiles: list[str]
    known: list[tuple[str, np.ndarray]]
    fixed_reference: np.ndarray
    initial_hv_fixed: float
    discarded: list[str]

    @property
    def hv_fixed_series(self) -> list[float]:
        """Fixed-reference hypervolume before the first and after every iteration."""
        return [self.initial_hv_fixed] + [r.hv_fixed_ref for r in self.records]

    @property
    def final_hv_fixed(self) -> float:
        return self.hv_fixed_series[-1]


# -- loop -------------------------------------------------------------------------------

def _hv_above(Y: np.ndarray, r: np.ndarray) -> float:
    """Hypervolume of the non-dominated points of ``Y`` strictly above ``r``."""
    front = pareto_filter(Y).points
    front = front[np.all(front > r, axis=1)]
    return hv_sweep(front, r) if len(front) else 0.0


@dataclass
class _LoopState:
    known_smiles: list[str]
    known_fps: list[SparseFingerprint]
    known_Y: np.ndarray
    query_smiles: list[str]
    query_fps: list[SparseFingerprint]
    front: ParetoFront
    reference: np.ndarray
    iteration: int


Scorer = Callable[[_LoopState, BORunConfig], np.ndarray]


def _run_loop(pool: CandidatePool, oracle: Oracle, config: BORunConfig, scorer: Scorer,
              method: str) -> BORunResult:
    if not pool.known:
        raise EmptyInput("the candidate pool has no known molecules")
    if config.n_iter > 0 and not pool.query:
        raise PoolExhausted("the query pool is empty")

    known_smiles = [s for s, _ in pool.known]
    known_Y = np.vstack([y for _, y in pool.known])
    fp_cfg = config.fingerprint
    known_fps = [smiles_fingerprint(s, fp_cfg) for s in known_smiles]
    query_smiles = list(pool.query)
    query_fps = [smiles_fingerprint(s, fp_cfg) for s in query_smiles]

    fixed_ref = infer_reference_point(pareto_filter(known_Y), config.reference)
    hv_fixed = _hv_above(known_Y, fixed_ref)
    initial_hv_fixed = hv_fixed
    records: list[IterationRecord] = []
    all_discarded: list[str] = []

    for t in range(1, config.n_iter + 1):
        if not query_smiles:
            logger.info("query pool exhausted after %d iterations", t - 1)
            break
        front = pareto_filter(known_Y)
        ref = infer_reference_point(front, config.reference)
        hv_before = _hv_above(front.points, ref)
        state = _LoopState(known_smiles, known_fps, known_Y, query_smiles, query_fps,
                           front, ref, t)
        scores = np.asarray(scorer(state, config), dtype=float)

        eligible = np.ones(len(query_smiles), dtype=bool)
        discarded = []
        chosen = y = None
        while eligible.any():
            idx = select_candidate(scores, eligible)
            y = oracle.evaluate(query_smiles[idx])
            if y is not None and np.all(np.isfinite(y)):
                chosen = idx
                break
            logger.info("discarding %r: oracle value missing", query_smiles[idx])
            eligible[idx] = False
            discarded.append(query_smiles[idx])
        # discarded molecules leave the pool for good
        for s in discarded:
            j = query_smiles.index(s)
            del query_smiles[j], query_fps[j]
            scores = np.delete(scores, j)
            if chosen is not None and j < chosen:
                chosen -= 1
        all_discarded.extend(discarded)
        if chosen is None:
            logger.info("no evaluable candidates left at iteration %d", t)
            break

        smi = query_smiles.pop(chosen)
        known_fps.append(query_fps.pop(chosen))
        known_smiles.append(smi)
        known_Y = np.vstack([known_Y, np.asarray(y, dtype=float).reshape(1, -1)])
        hv_after = _hv_above(known_Y, ref)
        hv_fixed = _hv_above(known_Y, fixed_ref)
        records.append(IterationRecord(
            iteration=t,
            smiles=smi,
            acquisition=float(scores[chosen]),
            observed=[float(v) for v in y],
            reference_point=[float(v) for v in ref],
            hv_before=float(hv_before),
            hv_after=float(hv_after),
            hv_fixed_ref=float(hv_fixed),
            n_known=len(known_smiles),
            n_query=len(query_smiles),
            discarded=discarded,
        ))

    front = pareto_filter(known_Y)
    return BORunResult(
        method=method,
        records=records,
        front=front,
        front_smiles=[known_smiles[i] for i in front.indices],
        known=list(zip(known_smiles, known_Y)),
        fixed_reference=fixed_ref,
        initial_hv_fixed=float(initial_hv_fixed),
        discarded=all_discarded,
    )


def _ehvi_scorer(seed: int) -> Scorer:
    rng = named_rng(seed, "ehvi")

    def score(state: _LoopState, config: BORunConfig) -> np.ndarray:
        d = state.known_Y.shape[1]
        mogp = mo_fit(state.known_fps, state.known_Y, config.hypers_for(d), config.kernel)
        means, variances = mo_predict(mogp, state.query_fps)
        # one batch of normals per iteration, shared by every candidate
        normals = rng.standard_normal((config.acquisition.mc_samples, d))
        front = state.front.points
        front = front[np.all(front > state.reference, axis=1)]
        return ehvi_mc_batch(means, variances, front, state.reference, normals)

    return score


def run_gp_mobo(pool: CandidatePool, oracle: Oracle, config: BORunConfig | None = None) -> BORunResult:
    """Multi-objective BO with independent per-objective GPs and MC-EHVI.

    Each iteration refits the GPs on all known data, re-infers the reference
    point from the current front, scores every query molecule by EHVI, then
    evaluates the best one and moves it to the known set. Candidates whose
    oracle value is missing are discarded and the next-best is tried in the
    same iteration.
    """
    config = config or BORunConfig()
    return _run_loop(pool, oracle, config, _ehvi_scorer(config.seed), "gp-mobo")


def _scalar_scorer(state: _LoopState, config: BORunConfig) -> np.ndarray:
    scalar = np.array([geometric_mean(row) for row in state.known_Y])
    hyper = config.hypers_for(1)[0]
    gp = fit(state.known_fps, scalar, hyper, config.kernel)
    pred = predict(gp, state.query_fps)
    acq = config.acquisition
    if acq.kind is AcquisitionKind.UCB:
        return ucb(pred.means, pred.variances, acq.ucb_beta)
    return expected_improvement(pred.means, pred.variances, float(scalar.max()))


def run_scalarized_sobo(pool: CandidatePool, oracle: Oracle, config: BORunConfig | None = None) -> BORunResult:
    """Single-objective BO on the geometric mean of the objectives.

    Uses EI (``f_best`` is the best scalarized known value) unless the
    acquisition kind is UCB. Records keep the full objective vectors so the
    chosen molecules can be analysed against the Pareto front.
    """
    config = config or BORunConfig(acquisition=AcquisitionConfig(kind=AcquisitionKind.EI))
    kind = config.acquisition.kind
    if kind not in (AcquisitionKind.EI, AcquisitionKind.UCB):
        raise DataError(f"scalarized BO needs EI or UCB, got {kind.value}")
    return _run_loop(pool, oracle, config, _scalar_scorer, f"sobo-{kind.value}")


def run_random_baseline(pool: CandidatePool, oracle: Oracle, n_iter: int = 20, seed: int = 0,
                        config: BORunConfig | None = None) -> BORunResult:
    """Uniform draws without replacement from the query pool."""
    base = config or BORunConfig()
    config = BORunConfig(n_iter=n_iter, hypers=base.hypers, acquisition=base.acquisition,
                         reference=base.reference, fingerprint=base.fingerprint,
                         kernel=base.kernel, seed=seed)
    rng = named_rng(seed, "random-baseline")

    def score(state: _LoopState, _config: BORunConfig) -> np.ndarray:
        return rng.random(len(state.query_smiles))

    return _run_loop(pool, oracle, config, score, "random")


def run_method(method: str, pool: CandidatePool, oracle: Oracle, config: BORunConfig) -> BORunResult:
    method = method.lower()
    if method == "gp-mobo":
        return run_gp_mobo(pool, oracle, config)
    if method in ("sobo-ei", "sobo-ucb"):
        kind = AcquisitionKind.EI if method == "sobo-ei" else AcquisitionKind.UCB
        acq = AcquisitionConfig(kind, config.acquisition.mc_samples, config.acquisition.ucb_beta)
        cfg = BORunConfig(config.n_iter, config.hypers, acq, config.reference,
                          config.fingerprint, config.kernel, config.seed)
        return run_scalarized_sobo(pool, oracle, cfg)
    if method == "random":
        return run_random_baseline(pool, oracle, config.n_iter, config.seed, config)
    raise DataError(f"unknown method {method!r}")


METHODS = ("gp-mobo", "sobo-ei", "sobo-ucb", "random")
