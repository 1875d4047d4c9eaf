"""Training orchestration: epochs, early stopping, grid search.

An epoch is one pass over the training index list, which is either a seeded
permutation of the training set or (with weighted sampling enabled) a
same-sized weighted draw with replacement. Validation quality is measured in
the requirement-to-segments direction: for every validation document each
requirement ranks all segments, and AP(3) is averaged over scorable pairs.
"""
from __future__ import annotations

import copy
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .corpus import AnnotationSet, Document, RequirementCatalog
from .errors import InvalidInput, NumericalError
from .metrics import RelevanceJudgment, mean_metrics
from .models import AdamWState, MlpClassifier, OptimizerConfig, adamw_step, lr_at
from .ranking import ScoreMatrix, rank
from .sampler import compute_weights, sample_epoch


@dataclass
class DocRows:
    doc: Document
    ann: AnnotationSet
    rows: slice  # rows of the dataset matrix belonging to this document


@dataclass
class SegmentDataset:
    """Feature rows plus labels for one split, grouped by document."""
    X: np.ndarray  # n x d
    Y: np.ndarray  # n x M
    docs: list[DocRows]

    def __len__(self):
        return self.X.shape[0]

    @property
    def has_link_flags(self) -> np.ndarray:
        return self.Y.any(axis=1)


def build_dataset(docs_with_anns, catalog: RequirementCatalog, featurize) -> SegmentDataset:
    """Stack per-document feature matrices; featurize(doc) -> (N, d)."""
    xs, ys, groups = [], [], []
    row = 0
    for doc, ann in docs_with_anns:
        x = featurize(doc)
        y = np.zeros((len(doc), len(catalog)))
        for seg_id, req_id in ann.links:
            y[doc.segment(seg_id).order, catalog.index_of(req_id)] = 1.0
        xs.append(x)
        ys.append(y)
        groups.append(DocRows(doc, ann, slice(row, row + len(doc))))
        row += len(doc)
    if not xs:
        raise InvalidInput("no documents in dataset")
    return SegmentDataset(np.vstack(xs), np.vstack(ys), groups)


def judgments_from_scores(doc: Document, ann: AnnotationSet, catalog: RequirementCatalog,
                          scores: ScoreMatrix, k_max: int):
    for j, req in enumerate(catalog):
        relevant = ann.segments_for(req.req_id)
        ranked = rank(scores, doc, catalog, j, k_max)
        rel = tuple(1 if seg_id in relevant else 0 for seg_id, _ in ranked.items)
        yield RelevanceJudgment(ranked_rel=rel, relevant_total=len(relevant))


def evaluate_model(model, dataset: SegmentDataset, catalog: RequirementCatalog,
                   ks=(3, 5)):
    """MetricsReport over all (document, requirement) pairs of a split."""
    judgments = []
    k_max = max(ks)
    for group in dataset.docs:
        probs = np.atleast_2d(model.forward(dataset.X[group.rows]))
        scores = ScoreMatrix(group.doc.doc_id, probs)
        judgments.extend(
            judgments_from_scores(group.doc, group.ann, catalog, scores, k_max))
    return mean_metrics(judgments, ks)


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 15
    patience: int = 3
    seed: int = 42
    sampler_enabled: bool = False
    hidden_dim: int | None = 1024
    dropout_p: float = 0.3
    optimizer: OptimizerConfig = OptimizerConfig(peak_lr=1e-5, batch_size=8)

    def __post_init__(self):
        if self.patience >= self.max_epochs:
            raise InvalidInput("patience must be < max_epochs")


@dataclass
class RunRecord:
    config: dict
    train_loss: list = field(default_factory=list)
    val_map3: list = field(default_factory=list)
    val_ms3: list = field(default_factory=list)
    best_epoch: int = -1  # zero-based
    stopped_epoch: int = -1
    wall_time: float = 0.0
    error: str | None = None

    def to_json_obj(self) -> dict:
        return {
            "config": self.config,
            "train_loss": self.train_loss,
            "val_map3": self.val_map3,
            "val_ms3": self.val_ms3,
            "best_epoch": self.best_epoch,
            "stopped_epoch": self.stopped_epoch,
            "wall_time": self.wall_time,
            "error": self.error,
        }


class EarlyStopper:
    """Stop when the watched metric has not improved for `patience`
    consecutive epochs; remembers the earliest epoch attaining the best
    value (strict improvement required)."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = float("-inf")
        self.best_epoch = -1
        self.since_improvement = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record one epoch's metric; returns True when training should stop."""
        if value > self.best:
            self.best = value
            self.best_epoch = epoch
            self.since_improvement = 0
        else:
            self.since_improvement += 1
        return self.since_improvement >= self.patience


def _config_snapshot(cfg: TrainConfig) -> dict:
    opt = cfg.optimizer
    return {
        "max_epochs": cfg.max_epochs,
        "patience": cfg.patience,
        "seed": cfg.seed,
        "sampler_enabled": cfg.sampler_enabled,
        "hidden_dim": cfg.hidden_dim,
        "dropout_p": cfg.dropout_p,
        "peak_lr": opt.peak_lr,
        "batch_size": opt.batch_size,
        "weight_decay": opt.weight_decay,
        "warmup_fraction": opt.warmup_fraction,
        "clip_norm": opt.clip_norm,
    }


def train_run(train: SegmentDataset, valid: SegmentDataset,
              catalog: RequirementCatalog, cfg: TrainConfig):
    """Train an MLP head with BCE + AdamW; early-stop on validation MAP(3).

    Returns (best model, RunRecord). Deterministic for a fixed config; the
    best epoch is the earliest one attaining the maximum validation MAP(3).
    """
    start = time.monotonic()
    n = len(train)
    opt = cfg.optimizer
    model = MlpClassifier(train.X.shape[1], len(catalog), cfg.hidden_dim,
                          cfg.dropout_p, seed=cfg.seed)
    state = AdamWState()
    dropout_rng = np.random.default_rng(cfg.seed + 1)

    steps_per_epoch = math.ceil(n / opt.batch_size)
    total_steps = steps_per_epoch * cfg.max_epochs
    record = RunRecord(config=_config_snapshot(cfg))

    weights = compute_weights(train.has_link_flags) if cfg.sampler_enabled else None
    stopper = EarlyStopper(cfg.patience)
    best_params = None
    step = 0

    for epoch in range(cfg.max_epochs):
        if weights is not None:
            indices = sample_epoch(weights, n, cfg.seed + epoch)
        else:
            indices = np.random.default_rng(cfg.seed + epoch).permutation(n)
        epoch_loss = 0.0
        for b in range(steps_per_epoch):
            batch = indices[b * opt.batch_size:(b + 1) * opt.batch_size]
            try:
                loss, grads = model.loss_and_grads(
                    train.X[batch], train.Y[batch], train_mode=True, rng=dropout_rng)
                adamw_step(model.params, grads, state, lr_at(step, total_steps, opt), opt)
            except NumericalError as e:
                raise NumericalError(f"epoch {epoch} step {step}: {e}") from e
            epoch_loss += loss * len(batch)
            step += 1
        record.train_loss.append(epoch_loss / len(indices))

        report = evaluate_model(model, valid, catalog, ks=(3,))
        val_map = report.per_k[3]["map"]
        record.val_map3.append(val_map)
        record.val_ms3.append(report.per_k[3]["ms"])

        stop = stopper.update(epoch, val_map)
        if stopper.best_epoch == epoch:
            best_params = copy.deepcopy(model.params)
            record.best_epoch = epoch
        record.stopped_epoch = epoch
        if stop:
            break

    model.params = best_params
    record.wall_time = time.monotonic() - start
    return model, record


def grid_search(grid: dict, train: SegmentDataset, valid: SegmentDataset,
                catalog: RequirementCatalog, base: TrainConfig = TrainConfig()):
    """Exhaustive search over the cartesian product of ``grid`` values.

    Grid keys: hidden_dim, dropout_p, batch_size, peak_lr. Returns
    (ranked, failures): successful runs ranked by validation MAP(3)
    descending, ties preferring smaller models then earlier grid order,
    plus the records of failed runs.
    """
    keys = list(grid)
    combos = list(itertools.product(*(grid[k] for k in keys)))
    if not combos:
        raise InvalidInput("empty grid")
    results = []
    failures = []
    for order, combo in enumerate(combos):
        params = dict(zip(keys, combo))
        opt = OptimizerConfig(
            peak_lr=params.get("peak_lr", base.optimizer.peak_lr),
            batch_size=params.get("batch_size", base.optimizer.batch_size),
            warmup_fraction=base.optimizer.warmup_fraction,
            weight_decay=base.optimizer.weight_decay,
            clip_norm=base.optimizer.clip_norm,
        )
        cfg = TrainConfig(
            max_epochs=base.max_epochs, patience=base.patience, seed=base.seed,
            sampler_enabled=base.sampler_enabled,
            hidden_dim=params.get("hidden_dim", base.hidden_dim),
            dropout_p=params.get("dropout_p", base.dropout_p),
            optimizer=opt,
        )
        try:
            model, record = train_run(train, valid, catalog, cfg)
        except NumericalError as e:
            failures.append(RunRecord(config=_config_snapshot(cfg), error=str(e)))
            continue
        n_params = sum(p.size for p in model.params.values())
        results.append((max(record.val_map3), n_params, order, model, record))
    results.sort(key=lambda r: (-r[0], r[1], r[2]))
    return [(model, record) for _, _, _, model, record in results], failures
