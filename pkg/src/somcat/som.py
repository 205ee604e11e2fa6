"""Core self-organizing map engine.

A map is a small grid (or string) of units, each carrying a code vector in
data space.  Training repeatedly draws an input vector, finds the best
matching unit by masked Euclidean distance, and pulls the code vectors of
the winner's grid neighborhood toward the input.  Both the learning rate
and the neighborhood radius shrink over time:

    epsilon(t) = epsilon0 / (1 + c0 * t / U)          U = number of units
    radius(t)  = floor((n/2) / (1 + t * (2n - 4) / t_max))   n = longer side

so the radius starts at floor(n/2) and reaches 0 after a quarter of the
schedule (for n >= 3), after which only the winner itself moves.

Component masks let different input families live in different slices of
one code vector: the search mask picks which components define the match,
the update mask picks which components move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import jsonio
from .errors import ConfigError, DimensionError


@dataclass(frozen=True)
class Topology:
    """Rectangular unit layout; a string is stored as a 1 x length grid."""

    kind: str
    rows: int
    cols: int

    def __post_init__(self):
        if self.kind not in ("grid", "string"):
            raise ConfigError(f"unknown topology kind {self.kind!r}")
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("topology sides must be positive")
        if self.kind == "string" and self.rows != 1:
            raise ConfigError("string topology must have a single row")
        if self.n_units < 2:
            raise ConfigError("a map needs at least 2 units")

    @classmethod
    def grid(cls, rows: int, cols: int) -> "Topology":
        return cls(kind="grid", rows=rows, cols=cols)

    @classmethod
    def string(cls, length: int) -> "Topology":
        return cls(kind="string", rows=1, cols=length)

    @property
    def n_units(self) -> int:
        return self.rows * self.cols

    @property
    def side(self) -> int:
        return max(self.rows, self.cols)

    def position(self, unit: int) -> tuple[int, int]:
        """(row, col) of a unit; units are numbered row-major."""
        if not 0 <= unit < self.n_units:
            raise DimensionError(f"unit {unit} out of range")
        return divmod(unit, self.cols)

    @cached_property
    def distances(self) -> np.ndarray:
        """U x U Chebyshev distances between unit grid positions."""
        r, c = np.divmod(np.arange(self.n_units), self.cols)
        dr = np.abs(r[:, np.newaxis] - r[np.newaxis, :])
        dc = np.abs(c[:, np.newaxis] - c[np.newaxis, :])
        return np.maximum(dr, dc)

    def adjacent_pairs(self) -> list[tuple[int, int]]:
        """Horizontally or vertically touching unit pairs, each once (a < b)."""
        pairs = []
        for u in range(self.n_units):
            r, c = divmod(u, self.cols)
            if c + 1 < self.cols:
                pairs.append((u, u + 1))
            if r + 1 < self.rows:
                pairs.append((u, u + self.cols))
        return pairs

    def to_json(self) -> dict:
        return {"kind": self.kind, "rows": self.rows, "cols": self.cols}

    @classmethod
    def from_json(cls, data: dict) -> "Topology":
        return cls(kind=data["kind"], rows=data["rows"], cols=data["cols"])


@dataclass(frozen=True)
class InitSpec:
    """How to draw initial code vectors.

    "random-uniform" draws each component uniformly over the data's
    per-component range (or an explicit one); "sample-rows" copies randomly
    chosen data rows.
    """

    kind: str = "random-uniform"
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.kind not in ("random-uniform", "sample-rows"):
            raise ConfigError(f"unknown init kind {self.kind!r}")
        if self.hi < self.lo:
            raise ConfigError("init range must satisfy lo <= hi")

    def to_json(self) -> dict:
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_json(cls, data: dict) -> "InitSpec":
        return cls(kind=data["kind"], lo=data["lo"], hi=data["hi"])


@dataclass(frozen=True)
class TrainConfig:
    """Training schedule parameters; ``t_max`` may stay None until resolved
    by the calling analysis (which knows the dataset size)."""

    epsilon0: float = 0.5
    c0: float = 1.0
    t_max: int | None = None
    seed: int = 0
    init: InitSpec = field(default_factory=InitSpec)

    def __post_init__(self):
        if not 0.0 < self.epsilon0 <= 1.0:
            raise ConfigError("epsilon0 must lie in (0, 1]")
        if self.c0 <= 0.0:
            raise ConfigError("c0 must be positive")
        if self.t_max is not None and self.t_max < 1:
            raise ConfigError("t_max must be at least 1")

    def epsilon(self, t: int, n_units: int) -> float:
        return self.epsilon0 / (1.0 + self.c0 * t / n_units)

    def radius(self, t: int, side: int) -> int:
        if self.t_max is None:
            raise ConfigError("radius schedule needs a resolved t_max")
        slope = max(2 * side - 4, 0)
        return int(math.floor((side / 2.0) / (1.0 + t * slope / self.t_max)))

    def to_json(self) -> dict:
        return {
            "epsilon0": self.epsilon0,
            "c0": self.c0,
            "t_max": self.t_max,
            "seed": self.seed,
            "init": self.init.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "TrainConfig":
        return cls(
            epsilon0=data["epsilon0"],
            c0=data["c0"],
            t_max=data["t_max"],
            seed=data["seed"],
            init=InitSpec.from_json(data["init"]),
        )


@dataclass(frozen=True)
class DistanceMask:
    """Half-open component slice [lo, hi) of the code vector."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0 or self.hi <= self.lo:
            raise DimensionError(f"bad mask [{self.lo}, {self.hi})")

    @classmethod
    def full(cls, dim: int) -> "DistanceMask":
        return cls(0, dim)

    @property
    def width(self) -> int:
        return self.hi - self.lo


@dataclass(eq=False)
class SomModel:
    topology: Topology
    dim: int
    config: TrainConfig
    code_vectors: np.ndarray          # U x dim
    trained_steps: int = 0
    rng: np.random.Generator = None   # type: ignore[assignment]

    def __post_init__(self):
        self.code_vectors = np.ascontiguousarray(self.code_vectors, dtype=np.float64)
        if self.code_vectors.shape != (self.topology.n_units, self.dim):
            raise DimensionError(
                f"code vectors shape {self.code_vectors.shape} does not match "
                f"{self.topology.n_units} units x dim {self.dim}"
            )
        if self.rng is None:
            self.rng = np.random.default_rng(self.config.seed)

    def to_json(self) -> dict:
        return {
            "topology": self.topology.to_json(),
            "dim": self.dim,
            "config": self.config.to_json(),
            "trained_steps": self.trained_steps,
            "code_vectors": self.code_vectors.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SomModel":
        return cls(
            topology=Topology.from_json(data["topology"]),
            dim=data["dim"],
            config=TrainConfig.from_json(data["config"]),
            code_vectors=np.asarray(data["code_vectors"], dtype=np.float64),
            trained_steps=data["trained_steps"],
        )

    def save(self, path) -> None:
        jsonio.write_atomic(path, jsonio.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "SomModel":
        return cls.from_json(jsonio.load(path))


def init_model(
    topology: Topology,
    dim: int,
    config: TrainConfig,
    data: np.ndarray | None = None,
    ranges: tuple[np.ndarray, np.ndarray] | None = None,
) -> SomModel:
    """Create a model with freshly drawn code vectors.

    The model's RNG is seeded from the config and used first for the init
    draw, then handed to training, so a (config, data) pair fixes the whole
    run.  Range precedence for uniform init: explicit ``ranges``, then the
    data's per-component min/max, then the InitSpec scalar (lo, hi).
    """
    rng = np.random.default_rng(config.seed)
    u = topology.n_units
    if config.init.kind == "sample-rows":
        if data is None:
            raise ConfigError("sample-rows init requires data")
        data = np.asarray(data, dtype=np.float64)
        if data.shape[1] != dim:
            raise DimensionError("init data width does not match dim")
        idx = rng.integers(0, data.shape[0], size=u)
        code = data[idx].copy()
    else:
        if ranges is not None:
            lo = np.asarray(ranges[0], dtype=np.float64)
            hi = np.asarray(ranges[1], dtype=np.float64)
        elif data is not None:
            data = np.asarray(data, dtype=np.float64)
            if data.shape[1] != dim:
                raise DimensionError("init data width does not match dim")
            lo, hi = data.min(axis=0), data.max(axis=0)
        else:
            lo = np.full(dim, config.init.lo)
            hi = np.full(dim, config.init.hi)
        if lo.shape != (dim,) or hi.shape != (dim,):
            raise DimensionError("init ranges must have one (lo, hi) per component")
        if np.any(hi < lo):
            raise ConfigError("init ranges must satisfy lo <= hi")
        code = rng.uniform(lo, hi, size=(u, dim))
    model = SomModel(
        topology=topology, dim=dim, config=config, code_vectors=code, rng=rng
    )
    return model


def _masked_input(x: np.ndarray, mask: DistanceMask, dim: int) -> np.ndarray:
    """Accept a full-dim vector or one already cut to the mask width."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape == (dim,):
        return x[mask.lo:mask.hi]
    if x.shape == (mask.width,):
        return x
    raise DimensionError(
        f"input width {x.shape} matches neither dim {dim} nor mask {mask.width}"
    )


def bmu(model: SomModel, x: np.ndarray, mask: DistanceMask | None = None) -> int:
    """Best matching unit: least squared distance on the masked components.

    Ties resolve to the lowest unit index.
    """
    if mask is None:
        mask = DistanceMask.full(model.dim)
    xm = _masked_input(x, mask, model.dim)
    if not np.all(np.isfinite(xm)):
        raise DimensionError("input vector contains non-finite values")
    diff = model.code_vectors[:, mask.lo:mask.hi] - xm[np.newaxis, :]
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


def train_step(
    model: SomModel,
    x: np.ndarray,
    t: int,
    search_mask: DistanceMask | None = None,
    update_mask: DistanceMask | None = None,
) -> int:
    """One training step at schedule time t; returns the winning unit.

    The input must be full-dim here (the update mask slices into it).
    """
    cfg = model.config
    if cfg.t_max is None or not 0 <= t < cfg.t_max:
        raise ConfigError(f"step time {t} outside schedule [0, {cfg.t_max})")
    if search_mask is None:
        search_mask = DistanceMask.full(model.dim)
    if update_mask is None:
        update_mask = DistanceMask.full(model.dim)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise DimensionError("train_step needs a full-dimension input vector")

    winner = bmu(model, x, search_mask)
    rho = cfg.radius(t, model.topology.side)
    eps = cfg.epsilon(t, model.topology.n_units)
    hood = model.topology.distances[winner] <= rho
    lo, hi = update_mask.lo, update_mask.hi
    block = model.code_vectors[hood, lo:hi]
    model.code_vectors[hood, lo:hi] = block + eps * (x[lo:hi] - block)
    model.trained_steps += 1
    return winner


def _masked_rows(model: SomModel, rows, mask: DistanceMask) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionError("expected a 2-d array of row vectors")
    if rows.shape[1] == model.dim:
        return rows[:, mask.lo:mask.hi]
    if rows.shape[1] == mask.width:
        return rows
    raise DimensionError("rows match neither full dim nor mask width")


def _squared_distances(rows: np.ndarray, code: np.ndarray) -> np.ndarray:
    # Same difference-based arithmetic as bmu(), so assignment and training
    # agree bit-for-bit on distances; chunked to bound the temporary.
    out = np.empty((rows.shape[0], code.shape[0]))
    for start in range(0, rows.shape[0], 1024):
        chunk = rows[start:start + 1024]
        diff = chunk[:, np.newaxis, :] - code[np.newaxis, :, :]
        out[start:start + 1024] = np.einsum("nuw,nuw->nu", diff, diff)
    return out


def quantization_error(
    model: SomModel, rows: np.ndarray, mask: DistanceMask | None = None
) -> float:
    """Mean squared distance from each row to its best matching unit."""
    if mask is None:
        mask = DistanceMask.full(model.dim)
    rows = _masked_rows(model, rows, mask)
    code = model.code_vectors[:, mask.lo:mask.hi]
    d2 = _squared_distances(rows, code)
    return float(np.mean(np.maximum(d2.min(axis=1), 0.0)))


class UniformRowSampler:
    """Draws data rows uniformly; the plain sampler for single-family maps."""

    def __init__(self, rows: np.ndarray, mask: DistanceMask | None = None):
        self.rows = np.asarray(rows, dtype=np.float64)
        self.mask = mask

    def draw(self, t: int, rng: np.random.Generator):
        i = int(rng.integers(0, self.rows.shape[0]))
        return self.rows[i], self.mask, self.mask

    @property
    def qe_rows(self) -> np.ndarray:
        return self.rows

    @property
    def qe_mask(self) -> DistanceMask | None:
        return self.mask


def _default_checkpoints(t_max: int) -> list[int]:
    marks = {0, t_max}
    for i in range(1, 10):
        marks.add(round(t_max * i / 10))
    return sorted(marks)


def train(model, sampler, checkpoints=None, observer=None):
    """Run the full schedule on a fresh model.

    ``sampler.draw(t, rng)`` supplies (input, search mask, update mask) per
    step from the model's own RNG stream.  Returns the model and a log of
    (steps done, quantization error) at the checkpoint steps.  ``observer``
    is called as observer(t, x, search_mask, update_mask, model) after each
    step, for instrumentation.
    """
    if model.trained_steps != 0:
        raise ConfigError("train() expects a freshly initialized model")
    t_max = model.config.t_max
    if t_max is None:
        raise ConfigError("train() needs a resolved t_max")
    marks = set(_default_checkpoints(t_max) if checkpoints is None else checkpoints)
    qe_log: list[tuple[int, float]] = []
    if 0 in marks:
        qe_log.append((0, quantization_error(model, sampler.qe_rows, sampler.qe_mask)))
    for t in range(t_max):
        x, smask, umask = sampler.draw(t, model.rng)
        train_step(model, x, t, smask, umask)
        if observer is not None:
            observer(t, x, smask, umask, model)
        if (t + 1) in marks:
            qe_log.append(
                (t + 1, quantization_error(model, sampler.qe_rows, sampler.qe_mask))
            )
    return model, qe_log


@dataclass(eq=False)
class MapAssignment:
    """Each labelled item mapped to its best matching unit."""

    labels: tuple[str, ...]
    units: np.ndarray
    n_units: int

    def __post_init__(self):
        self.units = np.asarray(self.units, dtype=np.int64)
        if len(self.labels) != self.units.shape[0]:
            raise DimensionError("assignment labels do not match unit array")

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.units, minlength=self.n_units)

    def members_by_unit(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {u: [] for u in range(self.n_units)}
        for label, u in zip(self.labels, self.units):
            out[int(u)].append(label)
        return out

    def unit_of(self, label: str) -> int:
        try:
            return int(self.units[self.labels.index(label)])
        except ValueError:
            raise DimensionError(f"unknown item {label!r}") from None


def assign(
    model: SomModel,
    rows: np.ndarray,
    mask: DistanceMask | None = None,
    labels: tuple[str, ...] | list[str] = (),
) -> MapAssignment:
    """Map every row to its best matching unit (deterministic, no learning)."""
    if mask is None:
        mask = DistanceMask.full(model.dim)
    rows = _masked_rows(model, rows, mask)
    code = model.code_vectors[:, mask.lo:mask.hi]
    units = np.argmin(_squared_distances(rows, code), axis=1)
    if not labels:
        labels = tuple(str(i) for i in range(rows.shape[0]))
    return MapAssignment(
        labels=tuple(labels), units=units, n_units=model.topology.n_units
    )


@dataclass(frozen=True)
class NeighborStats:
    mean_adjacent: float
    mean_non_adjacent: float


def neighbor_distance_stats(
    model: SomModel, mask: DistanceMask | None = None
) -> NeighborStats:
    """Mean code-vector distance over grid-adjacent vs all other unit pairs.

    On a well-ordered map the adjacent mean is the smaller one.
    """
    if mask is None:
        mask = DistanceMask.full(model.dim)
    code = model.code_vectors[:, mask.lo:mask.hi]
    u = model.topology.n_units
    adjacent = set(model.topology.adjacent_pairs())
    adj, non = [], []
    for a in range(u):
        for b in range(a + 1, u):
            d = float(np.linalg.norm(code[a] - code[b]))
            (adj if (a, b) in adjacent else non).append(d)
    if not adj or not non:
        raise ConfigError("topology too small to split adjacent/non-adjacent pairs")
    return NeighborStats(
        mean_adjacent=float(np.mean(adj)), mean_non_adjacent=float(np.mean(non))
    )
