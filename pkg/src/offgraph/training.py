"""End-to-end training orchestration.

One run: preprocess, split 7:3 by tweets, build the vocabulary from the
training side only, mask the social graph, then jointly optimize the graph
attention, encoder, and fusion parameters with two Adam groups (the graph
attention layer at its own learning rate, everything else at the base rate).
Test macro-F1 is tracked per epoch; training stops early once it fails to
improve for ``early_stop_patience`` consecutive epochs, and the best epoch's
metrics and parameters are what a run reports.

Every random choice (split, init, shuffling, dropout) derives from the one
config seed, so a run is bit-reproducible; its result JSON is byte-identical
across invocations.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .corpus import Corpus, Split, Vocab, batches, build_vocab, encode, preprocess_corpus, split_corpus
from .graph import SocialGraph, build_graph, mask_test_information, with_node_features
from .losses import FocalParams, focal_loss_tensor
from .metrics import MetricsReport, metrics_report
from .model import ABLATIONS, DetectionModel
from .optim import Adam, zero_grads
from .tensor import Tensor

__all__ = [
    "TrainConfig",
    "TrainingDiverged",
    "EarlyStopper",
    "RunResult",
    "TrainedRun",
    "parse_config_file",
    "write_config_file",
    "fit",
    "train",
    "ablate",
    "run_ablation_table",
    "replicate",
    "sweep",
    "save_checkpoint",
    "load_checkpoint",
]

INIT_SWEEP_FRACTIONS = (0.1, 0.7)
FRACTION_SWEEP = tuple(round(0.1 * k, 1) for k in range(1, 10))


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    # protocol
    train_fraction: float = 0.7
    batch_size: int = 64
    max_epochs: int = 20
    early_stop_patience: int = 5
    lr_gat: float = 1e-2
    lr_rest: float = 5e-5
    focal_alpha: float = 0.25
    focal_gamma: float = 2.0
    init_strategy: str = "nonoff"
    graph_variant: str = "soft"
    ablation: str = "full"
    seed: int = 7
    stratify_split: bool = False
    symmetric_neighbors: bool = False
    # model dimensions (desk scale; raise for fidelity experiments)
    gat_hidden: int = 64
    gat_heads: int = 8
    d_model: int = 64
    encoder_layers: int = 2
    encoder_heads: int = 4
    d_ff: int = 128
    max_len: int = 64
    fusion_heads: int = 4
    attention_dropout: float = 0.5
    hidden_dropout: float = 0.1
    pooling: str = "mean"
    # vocabulary
    vocab_min_freq: int = 1
    vocab_max_size: int = 30000

    def validate(self) -> "TrainConfig":
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        positive = (
            "batch_size", "max_epochs", "early_stop_patience", "lr_gat", "lr_rest",
            "gat_hidden", "gat_heads", "d_model", "encoder_layers", "encoder_heads",
            "d_ff", "max_len", "fusion_heads", "vocab_min_freq", "vocab_max_size",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.early_stop_patience > self.max_epochs:
            raise ValueError("early_stop_patience cannot exceed max_epochs")
        if self.ablation not in ABLATIONS:
            raise ValueError(f"unknown ablation {self.ablation!r}")
        FocalParams(self.focal_alpha, self.focal_gamma)
        return self

    def to_dict(self) -> dict:
        return asdict(self)


_BOOLS = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def parse_config_file(path) -> TrainConfig:
    """Read a flat ``key = value`` file whose keys are TrainConfig fields."""
    types = {f.name: f.type for f in fields(TrainConfig)}
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            kind = types[key]
            if kind in ("bool", bool):
                if raw.lower() not in _BOOLS:
                    raise ValueError(f"{path}:{lineno}: bad boolean {raw!r}")
                values[key] = _BOOLS[raw.lower()]
            elif kind in ("int", int):
                values[key] = int(raw)
            elif kind in ("float", float):
                values[key] = float(raw)
            else:
                values[key] = raw
    return TrainConfig(**values).validate()


def write_config_file(config: TrainConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in config.to_dict().items():
            fh.write(f"{key} = {value}\n")


class EarlyStopper:
    """Stop once the monitored score fails to improve for ``patience`` epochs."""

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError("patience must be at least 1")
        self.patience = patience
        self.best = -np.inf
        self.best_epoch = 0
        self.stale = 0

    def update(self, epoch: int, score: float) -> bool:
        """Record the epoch's score; True means stop now."""
        if score > self.best:
            self.best = score
            self.best_epoch = epoch
            self.stale = 0
            return False
        self.stale += 1
        return self.stale >= self.patience


@dataclass
class RunResult:
    config: dict
    seed: int
    epochs_run: int
    best_epoch: int
    train_loss: list[float]
    epoch_f1: list[float]
    best_metrics: MetricsReport

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "seed": self.seed,
            "epochs_run": self.epochs_run,
            "best_epoch": self.best_epoch,
            "train_loss": self.train_loss,
            "epoch_f1": self.epoch_f1,
            "best_metrics": self.best_metrics.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class TrainedRun:
    """Everything a finished run produced; ``result`` is the reportable part."""

    result: RunResult
    model: DetectionModel
    best_state: dict[str, np.ndarray]
    vocab: Vocab
    graph: SocialGraph
    split: Split


def _stream(seed: int, which: int) -> np.random.Generator:
    return np.random.default_rng([seed, which])


def _feature_dim(variant: str, vocab: Vocab) -> int:
    return {"soft": 2, "hard": 1, "bow": len(vocab)}[variant]


def _encode_split(split: Split, vocab: Vocab, max_len: int):
    train = [encode(t, vocab, max_len) for t in split.train]
    test = [encode(t, vocab, max_len) for t in split.test]
    return train, test


def fit(config: TrainConfig, corpus: Corpus) -> TrainedRun:
    """Train per the full protocol and keep the best-F1 epoch's parameters."""
    config.validate()
    corpus = preprocess_corpus(corpus)
    split = split_corpus(corpus, config.train_fraction, _stream(config.seed, 0), config.stratify_split)
    vocab = build_vocab(split.train, config.vocab_min_freq, config.vocab_max_size)
    graph = build_graph(corpus)
    graph = with_node_features(graph, split.train, config.graph_variant, config.init_strategy, vocab)
    graph = mask_test_information(graph, split, vocab)

    model = DetectionModel(config, len(vocab), _feature_dim(config.graph_variant, vocab), _stream(config.seed, 1))
    train_seqs, test_seqs = _encode_split(split, vocab, config.max_len)
    authors_known = model.gat is not None
    focal = FocalParams(config.focal_alpha, config.focal_gamma)

    gat_group, rest_group = model.parameter_groups()
    optimizers = [Adam(g, lr) for g, lr in ((gat_group, config.lr_gat), (rest_group, config.lr_rest)) if g]
    all_params = gat_group + rest_group

    shuffle_rng = _stream(config.seed, 2)
    dropout_rng = _stream(config.seed, 3)

    stopper = EarlyStopper(config.early_stop_patience)
    losses: list[float] = []
    f1_history: list[float] = []
    best_metrics: MetricsReport | None = None
    best_state: dict[str, np.ndarray] = model.state_arrays()
    epochs_run = 0

    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        epoch_losses = []
        for batch in batches(train_seqs, config.batch_size, shuffle_rng, shuffle=True):
            zero_grads(all_params)
            embeddings = model.user_embeddings(graph, training=True, rng=dropout_rng)
            author_idx = [graph.index[s.author_id] if authors_known else None for s in batch]
            probs = model.forward_batch(batch, author_idx, embeddings, training=True, rng=dropout_rng)
            loss = focal_loss_tensor(probs, [s.label for s in batch], focal)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDiverged(f"non-finite loss {value} at epoch {epoch}")
            loss.backward()
            for opt in optimizers:
                opt.step()
            epoch_losses.append(value)
        losses.append(float(np.mean(epoch_losses)))

        scores = model.predict(test_seqs, graph)
        report = metrics_report(scores, [s.label for s in test_seqs])
        f1_history.append(report.f1)
        if report.f1 > stopper.best:
            best_metrics = report
            best_state = model.state_arrays()
        if stopper.update(epoch, report.f1):
            break

    result = RunResult(
        config=config.to_dict(),
        seed=config.seed,
        epochs_run=epochs_run,
        best_epoch=stopper.best_epoch,
        train_loss=losses,
        epoch_f1=f1_history,
        best_metrics=best_metrics,
    )
    return TrainedRun(result=result, model=model, best_state=best_state, vocab=vocab, graph=graph, split=split)


def train(config: TrainConfig, corpus: Corpus) -> RunResult:
    return fit(config, corpus).result


def ablate(config: TrainConfig, variant: str, corpus: Corpus) -> RunResult:
    if variant not in ABLATIONS:
        raise ValueError(f"unknown ablation {variant!r}; expected one of {ABLATIONS}")
    return train(replace(config, ablation=variant), corpus)


def run_ablation_table(config: TrainConfig, corpus: Corpus) -> list[dict]:
    """One row per ablation variant, full first."""
    rows = []
    for variant in ("full",) + tuple(v for v in ABLATIONS if v != "full"):
        result = ablate(config, variant, corpus)
        rows.append({"variant": variant, **result.best_metrics.to_dict()})
    return rows


@dataclass
class ReplicationReport:
    runs: list[RunResult]
    mean: dict[str, float]
    std: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "runs": [r.to_dict() for r in self.runs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def replicate(config: TrainConfig, corpus: Corpus, n: int = 10) -> ReplicationReport:
    """n independent runs on derived seeds; each resamples the split and init."""
    if n < 1:
        raise ValueError("need at least one replication")
    runs = [train(replace(config, seed=config.seed + i), corpus) for i in range(n)]
    keys = ("auc", "accuracy", "precision", "recall", "f1")
    table = {k: np.array([getattr(r.best_metrics, k) for r in runs]) for k in keys}
    return ReplicationReport(
        runs=runs,
        mean={k: float(v.mean()) for k, v in table.items()},
        std={k: float(v.std()) for k, v in table.items()},
    )


_METRIC_COLUMNS = ("auc", "accuracy", "precision", "recall", "f1")


def sweep(config: TrainConfig, axis: str, corpus: Corpus) -> str:
    """Run the named experiment grid and return its CSV table.

    ``train_fraction``: nine training ratios, 0.1 through 0.9.
    ``init``: the four unknown-feature strategies at sparse (0.1) and
    default (0.7) training ratios, eight rows.
    ``variant``: the three graph feature variants, each as the graph-only
    model (text encoder removed) and the full model, six rows.
    """
    rows: list[dict] = []
    if axis == "train_fraction":
        for fraction in FRACTION_SWEEP:
            result = train(replace(config, train_fraction=fraction), corpus)
            rows.append({"train_fraction": fraction, **_metric_cells(result)})
        header = ["train_fraction", *_METRIC_COLUMNS]
    elif axis == "init":
        for fraction in INIT_SWEEP_FRACTIONS:
            for strategy in ("all0", "all1", "avg", "nonoff"):
                result = train(replace(config, train_fraction=fraction, init_strategy=strategy), corpus)
                rows.append({"train_fraction": fraction, "init_strategy": strategy, **_metric_cells(result)})
        header = ["train_fraction", "init_strategy", *_METRIC_COLUMNS]
    elif axis == "variant":
        for model_kind, ablation in (("graph_only", "no_encoder"), ("full", "full")):
            for variant in ("bow", "hard", "soft"):
                result = train(replace(config, graph_variant=variant, ablation=ablation), corpus)
                rows.append({"model": model_kind, "graph_variant": variant, **_metric_cells(result)})
        header = ["model", "graph_variant", *_METRIC_COLUMNS]
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def _metric_cells(result: RunResult) -> dict:
    return {k: repr(getattr(result.best_metrics, k)) for k in _METRIC_COLUMNS}


# -- checkpoints ----------------------------------------------------------


def save_checkpoint(run: TrainedRun, path) -> None:
    """Self-describing JSON: config, vocabulary, masked graph, best parameters."""
    payload = {
        "config": run.result.config,
        "vocab": run.vocab.tokens,
        "graph": {
            "nodes": run.graph.nodes,
            "edges": [list(e) for e in run.graph.directed_edges()],
            "features": run.graph.features.tolist(),
            "variant": run.graph.variant,
            "init_strategy": run.graph.init_strategy,
        },
        "params": {
            name: {"shape": list(value.shape), "data": value.reshape(-1).tolist()}
            for name, value in run.best_state.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2)


@dataclass
class Checkpoint:
    config: TrainConfig
    model: DetectionModel
    vocab: Vocab
    graph: SocialGraph


def load_checkpoint(path) -> Checkpoint:
    from .graph import graph_from_json

    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    config = TrainConfig(**payload["config"]).validate()
    vocab = Vocab(tokens=list(payload["vocab"]))
    graph = graph_from_json(json.dumps(payload["graph"]))
    model = DetectionModel(config, len(vocab), _feature_dim(config.graph_variant, vocab), _stream(config.seed, 1))
    arrays = {
        name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in payload["params"].items()
    }
    model.load_state_arrays(arrays)
    return Checkpoint(config=config, model=model, vocab=vocab, graph=graph)
