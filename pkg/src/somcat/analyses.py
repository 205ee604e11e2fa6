"""The three map analyses for categorical data.

* ``kmca``      trains on the corrected Burt rows; only modalities get map
                positions.
* ``kmca_ind``  trains on the corrected disjunctive rows (individuals) and
                places each modality afterwards at the best matching unit of
                the mean vector of its adopters.
* ``kdisj``     trains individuals and modalities simultaneously on an
                extended code vector: the first M components live in
                modality space, the last N in individual space.  Steps
                alternate strictly, individual steps on even t, modality
                steps on odd t.  An individual step pairs the drawn
                individual with its rarest chosen modality and updates the
                whole code vector; a modality step searches and updates the
                individual-space components only.

All three consume one RNG stream per run (seeded from the config), covering
initialization, draws and tie breaks, so equal inputs give equal outputs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .dataset import CategoricalDataset, DisjunctiveTable, to_disjunctive
from .errors import ConfigError, DataError, DimensionError
from .som import (
    DistanceMask,
    MapAssignment,
    SomModel,
    Topology,
    TrainConfig,
    UniformRowSampler,
    assign,
    init_model,
    train,
)
from .tables import burt, corrected_burt, corrected_disjunctive

ALGORITHMS = ("kmca", "kmca-ind", "kdisj")


def default_iterations(
    algorithm: str,
    n_individuals: int,
    n_modalities: int,
    n_variables: int,
    cap: int = 100_000,
) -> int:
    """Schedule length used when the config leaves t_max unset.

    Rule of thumb: roughly 20 passes over the trained family, floored at 500
    for the (small) Burt input and capped for very large datasets.
    """
    if algorithm == "kmca":
        return max(500, 20 * n_modalities)
    if algorithm == "kmca-ind":
        return min(20 * n_individuals * n_variables, cap)
    if algorithm == "kdisj":
        return min(20 * (n_individuals + n_modalities), cap)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def _resolve(config: TrainConfig, steps: int) -> TrainConfig:
    if config.t_max is not None:
        return config
    return dataclasses.replace(config, t_max=steps)


def modality_mean_vectors(disj: DisjunctiveTable) -> np.ndarray:
    """Mean corrected-disjunctive row over each modality's adopters, M x M.

    Computed in closed form from co-occurrence counts: entry (j, l) equals
    B_jl / (b_j * sqrt(K) * sqrt(b_l)), which is exactly the average of the
    corrected rows of the individuals who chose modality j.
    """
    counts = disj.counts.astype(np.float64)
    for j, c in enumerate(disj.counts):
        if c == 0:
            raise DataError(
                f"modality {disj.names[j]!r} has no adopters, no mean vector"
            )
    b = disj.entries.T @ disj.entries
    k = float(disj.n_variables)
    return b / counts[:, np.newaxis] / np.sqrt(counts)[np.newaxis, :] / np.sqrt(k)


def kdisj_associate(row: np.ndarray, rng: np.random.Generator | None = None) -> int:
    """Rarest chosen modality of a corrected disjunctive row.

    The corrected value of a chosen modality is 1/sqrt(K*b_j), so the
    largest entry marks the smallest count.  Exact ties are resolved by a
    uniform draw when an RNG is given, else by the lowest column index.
    """
    row = np.asarray(row, dtype=np.float64)
    hits = np.flatnonzero(row == row.max())
    if len(hits) == 1 or rng is None:
        return int(hits[0])
    return int(hits[rng.integers(0, len(hits))])


class KdisjSampler:
    """Alternating input source for the simultaneous analysis.

    Even t: draw an individual i, pair it with column j(i), search on the
    first M components, update all M + N.  Odd t: draw a modality j, search
    and update the last N components only.
    """

    def __init__(self, dc: np.ndarray):
        self.dc = np.asarray(dc, dtype=np.float64)
        self.n, self.m = self.dc.shape
        self.dim = self.m + self.n
        self._search_ind = DistanceMask(0, self.m)
        self._update_all = DistanceMask(0, self.dim)
        self._mod_mask = DistanceMask(self.m, self.dim)

    def draw(self, t: int, rng: np.random.Generator):
        x = np.zeros(self.dim)
        if t % 2 == 0:
            i = int(rng.integers(0, self.n))
            j = kdisj_associate(self.dc[i], rng)
            x[: self.m] = self.dc[i]
            x[self.m:] = self.dc[:, j]
            return x, self._search_ind, self._update_all
        j = int(rng.integers(0, self.m))
        x[self.m:] = self.dc[:, j]
        return x, self._mod_mask, self._mod_mask

    @property
    def qe_rows(self) -> np.ndarray:
        return self.dc

    @property
    def qe_mask(self) -> DistanceMask:
        return self._search_ind


@dataclass(eq=False)
class AnalysisResult:
    """A trained model plus the map positions of modalities/individuals.

    The topology is duplicated out of the model so a result stays renderable
    after deserialization without its model file.
    """

    algorithm: str
    topology: Topology
    model: SomModel | None
    modalities: MapAssignment
    individuals: MapAssignment | None
    provenance: dict
    qe_log: list[tuple[int, float]]

    @staticmethod
    def _pack(a: MapAssignment | None) -> dict | None:
        if a is None:
            return None
        members = {
            str(u): mem for u, mem in sorted(a.members_by_unit().items()) if mem
        }
        return {
            "items": list(a.labels),
            "units": a.units.tolist(),
            "members": members,
        }

    def to_json(self, model_file: str | None = None) -> dict:
        return {
            "algorithm": self.algorithm,
            "model_file": model_file,
            "topology": self.topology.to_json(),
            "provenance": {
                "dataset_sha256": self.provenance["dataset_sha256"],
                "config": self.provenance["config"],
                "qe_log": [[int(t), q] for t, q in self.qe_log],
            },
            "modalities": self._pack(self.modalities),
            "individuals": self._pack(self.individuals),
        }

    @classmethod
    def from_json(cls, data: dict, model: SomModel | None = None) -> "AnalysisResult":
        topo = Topology.from_json(data["topology"])
        n_units = topo.n_units

        def unpack(packed):
            if packed is None:
                return None
            return MapAssignment(
                labels=tuple(packed["items"]),
                units=np.asarray(packed["units"], dtype=np.int64),
                n_units=n_units,
            )

        prov = data["provenance"]
        return cls(
            algorithm=data["algorithm"],
            topology=topo,
            model=model,
            modalities=unpack(data["modalities"]),
            individuals=unpack(data["individuals"]),
            provenance={
                "dataset_sha256": prov["dataset_sha256"],
                "config": prov["config"],
            },
            qe_log=[(int(t), float(q)) for t, q in prov["qe_log"]],
        )


def _provenance(ds: CategoricalDataset, cfg: TrainConfig) -> dict:
    return {"dataset_sha256": ds.sha256(), "config": cfg.to_json()}


def kmca(
    ds: CategoricalDataset,
    topology: Topology,
    config: TrainConfig | None = None,
) -> AnalysisResult:
    """Train on the corrected Burt rows; map positions for modalities only."""
    config = config or TrainConfig()
    disj = to_disjunctive(ds)
    bc = corrected_burt(burt(disj))
    cfg = _resolve(
        config,
        default_iterations(
            "kmca", ds.n_individuals, ds.n_modalities, ds.n_variables
        ),
    )
    model = init_model(topology, bc.entries.shape[1], cfg, data=bc.entries)
    model, qe_log = train(model, UniformRowSampler(bc.entries))
    modalities = assign(model, bc.entries, labels=bc.row_labels)
    return AnalysisResult(
        algorithm="kmca",
        topology=topology,
        model=model,
        modalities=modalities,
        individuals=None,
        provenance=_provenance(ds, cfg),
        qe_log=qe_log,
    )


def kmca_ind(
    ds: CategoricalDataset,
    topology: Topology,
    config: TrainConfig | None = None,
) -> AnalysisResult:
    """Train on corrected disjunctive rows; modalities placed by mean vector."""
    config = config or TrainConfig()
    disj = to_disjunctive(ds)
    dc = corrected_disjunctive(disj)
    cfg = _resolve(
        config,
        default_iterations(
            "kmca-ind", ds.n_individuals, ds.n_modalities, ds.n_variables
        ),
    )
    model = init_model(topology, dc.entries.shape[1], cfg, data=dc.entries)
    model, qe_log = train(model, UniformRowSampler(dc.entries))
    individuals = assign(model, dc.entries, labels=dc.row_labels)
    means = modality_mean_vectors(disj)
    modalities = assign(model, means, labels=disj.names)
    return AnalysisResult(
        algorithm="kmca-ind",
        topology=topology,
        model=model,
        modalities=modalities,
        individuals=individuals,
        provenance=_provenance(ds, cfg),
        qe_log=qe_log,
    )


def kdisj(
    ds: CategoricalDataset,
    topology: Topology,
    config: TrainConfig | None = None,
    observer=None,
) -> AnalysisResult:
    """Simultaneous analysis of individuals and modalities on one map."""
    config = config or TrainConfig()
    disj = to_disjunctive(ds)
    dc = corrected_disjunctive(disj).entries
    n, m = dc.shape
    cfg = _resolve(
        config, default_iterations("kdisj", n, m, ds.n_variables)
    )
    lo = np.concatenate([dc.min(axis=0), dc.min(axis=1)])
    hi = np.concatenate([dc.max(axis=0), dc.max(axis=1)])
    model = init_model(topology, m + n, cfg, ranges=(lo, hi))
    sampler = KdisjSampler(dc)
    model, qe_log = train(model, sampler, observer=observer)
    modalities = assign(
        model, dc.T, mask=DistanceMask(m, m + n), labels=disj.names
    )
    individuals = assign(
        model, dc, mask=DistanceMask(0, m), labels=disj.individuals
    )
    return AnalysisResult(
        algorithm="kdisj",
        topology=topology,
        model=model,
        modalities=modalities,
        individuals=individuals,
        provenance=_provenance(ds, cfg),
        qe_log=qe_log,
    )


def run_analysis(
    algorithm: str,
    ds: CategoricalDataset,
    topology: Topology,
    config: TrainConfig | None = None,
) -> AnalysisResult:
    if algorithm == "kmca":
        return kmca(ds, topology, config)
    if algorithm == "kmca-ind":
        return kmca_ind(ds, topology, config)
    if algorithm == "kdisj":
        return kdisj(ds, topology, config)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


@dataclass(eq=False)
class DeviationTable:
    """Observed minus expected modality counts per unit.

    ``observed[j, k]`` counts individuals at unit k choosing modality j;
    ``expected`` is the independence baseline b_j * n_k / N.  The own-class
    deviation of a modality is the deviation at its own map unit, positive
    when the map pulls a modality toward the individuals who chose it.
    """

    modalities: tuple[str, ...]
    observed: np.ndarray          # M x U
    expected: np.ndarray          # M x U
    unit_counts: np.ndarray       # individuals per unit, length U
    own_unit: np.ndarray          # unit of each modality, length M
    own_deviation: np.ndarray     # length M

    @property
    def deviation(self) -> np.ndarray:
        return self.observed - self.expected

    def to_json(self) -> dict:
        return {
            "modalities": list(self.modalities),
            "unit_counts": self.unit_counts.tolist(),
            "observed": self.observed.tolist(),
            "expected": self.expected.tolist(),
            "own_unit": self.own_unit.tolist(),
            "own_deviation": self.own_deviation.tolist(),
        }


def deviations(result: AnalysisResult, ds: CategoricalDataset) -> DeviationTable:
    """Attraction diagnostic for a result that mapped the individuals."""
    if result.individuals is None:
        raise ConfigError("deviation table needs an individuals assignment")
    disj = to_disjunctive(ds)
    if tuple(result.individuals.labels) != tuple(disj.individuals):
        raise DataError("result individuals do not match the dataset")
    if tuple(result.modalities.labels) != tuple(disj.names):
        raise DataError("result modalities do not match the dataset")
    u = result.individuals.n_units
    onehot = np.zeros((disj.n_individuals, u), dtype=np.int64)
    onehot[np.arange(disj.n_individuals), result.individuals.units] = 1
    observed = disj.entries.T @ onehot
    if not np.array_equal(observed.sum(axis=1), disj.counts):
        raise DimensionError("observed counts lost individuals")
    unit_counts = onehot.sum(axis=0)
    expected = np.outer(
        disj.counts.astype(np.float64), unit_counts.astype(np.float64)
    ) / disj.n_individuals
    own_unit = result.modalities.units.copy()
    m_idx = np.arange(disj.n_modalities)
    own_dev = (observed - expected)[m_idx, own_unit]
    return DeviationTable(
        modalities=disj.names,
        observed=observed,
        expected=expected,
        unit_counts=unit_counts,
        own_unit=own_unit,
        own_deviation=own_dev,
    )
