#!/usr/bin/env python3
"""
Data models for ctdne
"""

from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Optional, List, Dict, Any

from apps.ctdne.errors import ConfigError


class BiasKind(str, Enum):
    """Shape of an initial-edge (F_s) or temporal-neighbor (F_Γ) distribution"""
    UNIFORM = "unif"
    LINEAR = "lin"
    EXPONENTIAL = "exp"


class Favor(str, Enum):
    """Which end of the time axis a biased distribution prefers"""
    LATE = "late"
    EARLY = "early"


class WalkKind(str, Enum):
    """Walk provenance"""
    TEMPORAL = "temporal"
    RELAXED = "relaxed"  # fallback walk that may violate time
    STATIC = "static"


class EdgeOperator(str, Enum):
    """Operators combining two node embeddings into an edge feature"""
    MEAN = "mean"
    HADAMARD = "hadamard"
    ABS_DIFF = "abs-diff"
    SQUARED_DIFF = "squared-diff"


class InactivePolicy(str, Enum):
    """Fill rule for nodes without edges in a snapshot"""
    ZEROS = "zeros"
    LAST_ACTIVE = "last-active"
    MEAN_ACTIVE = "mean-active"


class SnapshotMode(str, Enum):
    """How the training span is cut into snapshots"""
    EQUAL_TIME = "equal-time"
    EQUAL_COUNT = "equal-count"


class NegativeScope(str, Enum):
    """Which edges a sampled negative pair must avoid"""
    ALL = "all"
    TRAIN = "train"


@dataclass(frozen=True)
class TemporalEdge:
    """Timestamped edge between two dense node ids"""
    src: int
    dst: int
    time: int

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return {"src": self.src, "dst": self.dst, "time": self.time}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TemporalEdge":
        """Create from dictionary"""
        return cls(src=int(data["src"]), dst=int(data["dst"]), time=int(data["time"]))


@dataclass
class TemporalWalk:
    """
    Node sequence plus the times of the traversed edges.

    times[i] is the time of the edge nodes[i] -> nodes[i+1].
    """
    nodes: List[int]
    times: List[int] = field(default_factory=list)
    kind: WalkKind = WalkKind.TEMPORAL

    def __len__(self) -> int:
        return len(self.nodes)

    def is_time_respecting(self) -> bool:
        """Check that traversed edge times strictly increase"""
        return all(a < b for a, b in zip(self.times, self.times[1:]))

    def truncated(self, length: int) -> "TemporalWalk":
        """Prefix of the walk holding at most `length` nodes"""
        if length >= len(self.nodes):
            return self
        return TemporalWalk(
            nodes=self.nodes[:length],
            times=self.times[:max(length - 1, 0)],
            kind=self.kind,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return {"nodes": list(self.nodes), "times": list(self.times), "kind": self.kind.value}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TemporalWalk":
        """Create from dictionary"""
        return cls(
            nodes=[int(v) for v in data["nodes"]],
            times=[int(t) for t in data.get("times", [])],
            kind=WalkKind(data.get("kind", "temporal")),
        )


@dataclass(frozen=True)
class SamplingOptions:
    """
    Knobs for the biased distributions.

    exp_scale rescales time differences inside exponentials; None means
    1 / (t_max - t_min) of the graph being walked.
    """
    exp_scale: Optional[float] = None
    exp_favor: Favor = Favor.LATE
    linear_favor: Favor = Favor.EARLY

    def scale_for(self, t_min: int, t_max: int) -> float:
        """Resolve the exponential time rescale for a time range"""
        if self.exp_scale is not None:
            return float(self.exp_scale)
        span = t_max - t_min
        return 1.0 / span if span > 0 else 1.0


@dataclass
class WalkBudget:
    """Temporal context window budget for walk generation"""
    beta: int
    omega: int = 10
    max_len: int = 80
    relax: bool = True

    def __post_init__(self):
        if self.omega < 2:
            raise ConfigError(f"omega must be >= 2, got {self.omega}")
        if self.max_len < self.omega:
            raise ConfigError(f"max walk length ({self.max_len}) must be >= omega ({self.omega})")
        if self.beta < 1:
            raise ConfigError(f"beta must be >= 1, got {self.beta}")

    @staticmethod
    def beta_for(walks_per_node: int, n_nodes: int, omega: int, max_len: int) -> int:
        """β = R · N · (L − ω + 1)"""
        return walks_per_node * n_nodes * (max_len - omega + 1)

    @classmethod
    def from_walks_per_node(
        cls, walks_per_node: int, n_nodes: int, omega: int = 10, max_len: int = 80, relax: bool = True
    ) -> "WalkBudget":
        """Derive β from the number of walks per node"""
        if walks_per_node < 1:
            raise ConfigError(f"walks per node must be >= 1, got {walks_per_node}")
        beta = cls.beta_for(walks_per_node, max(n_nodes, 1), omega, max_len)
        return cls(beta=beta, omega=omega, max_len=max_len, relax=relax)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)


@dataclass
class TrainConfig:
    """Skip-gram with negative sampling hyperparameters"""
    dimension: int = 128
    omega: int = 10
    negatives: int = 5
    lr0: float = 0.025
    lr_min: float = 1e-4
    epochs: int = 1
    seed: int = 0
    online_lr: Optional[float] = None
    shrink_window: bool = False
    ns_exponent: float = 0.75
    noise_refresh: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dimension}")
        if self.omega < 1:
            raise ConfigError(f"window must be >= 1, got {self.omega}")
        if self.negatives < 1:
            raise ConfigError(f"negatives must be >= 1, got {self.negatives}")
        if not 0 < self.lr_min <= self.lr0:
            raise ConfigError(f"need 0 < lr_min <= lr0, got lr_min={self.lr_min}, lr0={self.lr0}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @property
    def online_step(self) -> float:
        """Fixed step size used by online updates"""
        return self.online_lr if self.online_lr is not None else self.lr0 / 10.0

    def with_dimension(self, dimension: int) -> "TrainConfig":
        """Copy with a different embedding dimension"""
        data = asdict(self)
        data["dimension"] = dimension
        return TrainConfig(**data)

    def with_seed(self, seed: int) -> "TrainConfig":
        """Copy with a different seed"""
        data = asdict(self)
        data["seed"] = seed
        return TrainConfig(**data)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)


@dataclass
class SnapshotConfig:
    """Discrete snapshot baseline settings"""
    n_snapshots: int = 4
    dimension: int = 128
    inactive_policy: InactivePolicy = InactivePolicy.ZEROS
    mode: SnapshotMode = SnapshotMode.EQUAL_TIME

    def __post_init__(self):
        if self.n_snapshots < 1:
            raise ConfigError(f"number of snapshots must be >= 1, got {self.n_snapshots}")
        if self.dimension % self.n_snapshots != 0:
            raise ConfigError(
                f"number of snapshots ({self.n_snapshots}) must divide the dimension ({self.dimension})"
            )

    @property
    def per_snapshot_dim(self) -> int:
        """D / T"""
        return self.dimension // self.n_snapshots


@dataclass
class GraphStats:
    """Summary statistics of a temporal graph"""
    n_nodes: int
    n_edges: int
    mean_degree: float
    max_degree: int
    timespan_days: float

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)


@dataclass
class LinkPredictionResult:
    """Per-variant link prediction outcome across seeds"""
    variant: str
    seeds: List[int] = field(default_factory=list)
    aucs: List[float] = field(default_factory=list)
    operators: List[str] = field(default_factory=list)

    @property
    def mean_auc(self) -> float:
        return float(sum(self.aucs) / len(self.aucs)) if self.aucs else float("nan")

    @property
    def std_auc(self) -> float:
        if not self.aucs:
            return float("nan")
        mean = self.mean_auc
        return float((sum((a - mean) ** 2 for a in self.aucs) / len(self.aucs)) ** 0.5)

    @property
    def chosen_operator(self) -> Optional[str]:
        """Most frequently selected operator (first seen on ties)"""
        if not self.operators:
            return None
        return max(dict.fromkeys(self.operators), key=self.operators.count)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return {
            "variant": self.variant,
            "mean_auc": self.mean_auc,
            "std_auc": self.std_auc,
            "seeds": list(self.seeds),
            "aucs": list(self.aucs),
            "operators": list(self.operators),
            "chosen_operator": self.chosen_operator,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LinkPredictionResult":
        """Create from dictionary"""
        return cls(
            variant=data["variant"],
            seeds=[int(s) for s in data.get("seeds", [])],
            aucs=[float(a) for a in data.get("aucs", [])],
            operators=list(data.get("operators", [])),
        )


@dataclass
class RunConfig:
    """Fully resolved CLI run configuration"""
    input: str = ""
    directed: bool = False
    unit_scale: float = 1.0
    fs: BiasKind = BiasKind.UNIFORM
    fg: BiasKind = BiasKind.UNIFORM
    omega: int = 10
    walk_length: int = 80
    beta: Optional[int] = None
    walks_per_node: Optional[int] = None
    relax: bool = True
    dimension: int = 128
    negatives: int = 5
    lr: float = 0.025
    lr_min: float = 1e-4
    online_lr: Optional[float] = None
    epochs: int = 1
    shrink_window: bool = False
    seed: int = 0
    seeds: int = 10
    out: str = "out"
    snapshots: int = 4
    inactive_policy: InactivePolicy = InactivePolicy.ZEROS
    snapshot_mode: SnapshotMode = SnapshotMode.EQUAL_TIME
    walks_per_edge: int = 10
    warmup: float = 0.0
    batch_edges: int = 1
    threads: int = 1
    sgd_workers: int = 1
    exp_scale: Optional[float] = None
    exp_favor: Favor = Favor.LATE
    linear_favor: Favor = Favor.EARLY
    split_fraction: float = 0.75
    negative_scope: NegativeScope = NegativeScope.ALL
    variant: str = "ctdne"
    all_variants: bool = False
    opt: bool = False
    export_walks: bool = False

    DEFAULT_WALKS_PER_NODE = 10

    def walk_budget(self, n_nodes: int) -> WalkBudget:
        """Budget for a graph with n_nodes nodes (β given, or derived from R)"""
        if self.beta is not None:
            return WalkBudget(beta=self.beta, omega=self.omega, max_len=self.walk_length, relax=self.relax)
        walks_per_node = self.walks_per_node or self.DEFAULT_WALKS_PER_NODE
        return WalkBudget.from_walks_per_node(
            walks_per_node, n_nodes, omega=self.omega, max_len=self.walk_length, relax=self.relax
        )

    def snapshot_budget(self, n_active: int) -> WalkBudget:
        """Per-snapshot budget: ⌈β/T⌉ when β is fixed, else derived from R and the active node count"""
        if self.beta is not None:
            beta = -(-self.beta // self.snapshots)
            return WalkBudget(beta=beta, omega=self.omega, max_len=self.walk_length, relax=self.relax)
        return self.walk_budget(n_active)

    def train_config(self) -> TrainConfig:
        """Skip-gram settings for this run"""
        return TrainConfig(
            dimension=self.dimension,
            omega=self.omega,
            negatives=self.negatives,
            lr0=self.lr,
            lr_min=self.lr_min,
            epochs=self.epochs,
            seed=self.seed,
            online_lr=self.online_lr,
            shrink_window=self.shrink_window,
            workers=self.sgd_workers,
        )

    def snapshot_config(self) -> SnapshotConfig:
        """Snapshot baseline settings for this run"""
        return SnapshotConfig(
            n_snapshots=self.snapshots,
            dimension=self.dimension,
            inactive_policy=self.inactive_policy,
            mode=self.snapshot_mode,
        )

    def sampling_options(self) -> SamplingOptions:
        """Biased-distribution knobs for this run"""
        return SamplingOptions(exp_scale=self.exp_scale, exp_favor=self.exp_favor, linear_favor=self.linear_favor)

    def seed_list(self) -> List[int]:
        """Seeds used for repeated evaluation runs"""
        return [self.seed + i for i in range(self.seeds)]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a JSON-ready dictionary"""
        result = {}
        for key, value in asdict(self).items():
            result[key] = value.value if isinstance(value, Enum) else value
        return result

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Create from a validated dictionary"""
        data = dict(data)
        enum_fields = {
            "fs": BiasKind,
            "fg": BiasKind,
            "inactive_policy": InactivePolicy,
            "snapshot_mode": SnapshotMode,
            "exp_favor": Favor,
            "linear_favor": Favor,
            "negative_scope": NegativeScope,
        }
        for key, enum_cls in enum_fields.items():
            if key in data and data[key] is not None and not isinstance(data[key], enum_cls):
                data[key] = enum_cls(data[key])
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})
