"""Feedforward network training for architecture fitness evaluation.

One architecture is scored by training a batch of identically configured
models that differ only in their derived seeds, then averaging the test-split
score. The whole pipeline (split, weight init, shuffling, training, scoring)
is a pure function of (dataset, schema, config, architecture), so repeated
evaluations are bit-identical and batch runs can execute in any order or in
parallel without changing results.

Fixed settings: rectifier hidden layers, softmax or identity output,
cross-entropy or mean squared error loss, adaptive-moment updates at learning
rate 0.01 (beta1 0.9, beta2 0.999, eps 1e-8), He-uniform weight init with
zero biases, mini-batches of 32 shuffled per epoch, at most 100 epochs with
validation-loss early stopping (min delta 1e-4, patience 10, no weight
restoration), and a 0.70/0.15/0.15 train/validation/test split.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .arch_space import Arch
from .fitness import r_squared, r_squared_multioutput
from .seeding import derive_run_seed, make_rng, splitmix64

TASK_CLASSIFICATION = "classification"
TASK_REGRESSION = "regression"

COLUMN_KINDS = ("numeric", "binary", "categorical")

# Domain separation tags so the split permutation and the per-run shuffle
# stream never reuse the raw seed consumed by weight initialisation.
_SPLIT_TAG = 0x53504C4954  # "SPLIT"
_SHUFFLE_TAG = 0x53484646  # "SHFF"


class IngestError(ValueError):
    """The dataset file or schema cannot be turned into a training set."""


class TrainingError(RuntimeError):
    """Training produced a non-finite score."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    beta_1: float = 0.9
    beta_2: float = 0.999
    epsilon: float = 1e-8
    max_epochs: int = 100
    early_stop_min_delta: float = 1e-4
    early_stop_patience: int = 10
    batch_size: int = 32
    split_fractions: tuple[float, float, float] = (0.70, 0.15, 0.15)
    batch_runs: int = 30
    base_seed: int = 0

    def __post_init__(self) -> None:
        if not math.isclose(sum(self.split_fractions), 1.0, rel_tol=0, abs_tol=1e-12):
            raise ValueError(f"split fractions must sum to 1, got {self.split_fractions}")
        if self.batch_runs < 1:
            raise ValueError("batch_runs must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass(frozen=True)
class Dataset:
    """Preprocessed tabular data ready for training.

    features: float matrix, one row per pattern.
    targets: integer class indices (classification) or float responses
    (regression, unscaled).
    n_outputs: class count, or 1 for regression.
    column_kinds: declared kind per source column, as ingested.
    """

    features: np.ndarray
    targets: np.ndarray
    task: str
    n_outputs: int
    column_kinds: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.task not in (TASK_CLASSIFICATION, TASK_REGRESSION):
            raise ValueError(f"unknown task kind {self.task!r}")
        if len(self.features) != len(self.targets):
            raise ValueError("features and targets disagree on pattern count")


@dataclass(frozen=True)
class NetworkStructure:
    """Fully connected layer sizes: input, hidden widths, output."""

    layer_dims: tuple[int, ...]

    @property
    def weight_shapes(self) -> tuple[tuple[int, int], ...]:
        dims = self.layer_dims
        return tuple((dims[i], dims[i + 1]) for i in range(len(dims) - 1))


@dataclass
class NetworkParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass(frozen=True)
class TrainResult:
    r2: float
    epochs_used: int


@dataclass(frozen=True)
class BatchResult:
    per_run_r2: tuple[float, ...]
    mean_r2: float
    epochs_used: tuple[int, ...]
    seeds: tuple[int, ...]


def build_network(arch: Arch, input_dim: int, output_dim: int) -> NetworkStructure:
    """Structure for the network realising an architecture tuple."""
    if input_dim < 1 or output_dim < 1:
        raise ValueError("input and output dimensions must be >= 1")
    return NetworkStructure(layer_dims=(input_dim, *arch, output_dim))


def parameter_count(structure: NetworkStructure) -> int:
    return sum(fan_in * fan_out + fan_out for fan_in, fan_out in structure.weight_shapes)


def init_weights(structure: NetworkStructure, seed: int) -> NetworkParams:
    """He-uniform weights, each drawn from [-sqrt(6/fan_in), +sqrt(6/fan_in)];
    biases zero. Fully determined by the seed."""
    rng = make_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in structure.weight_shapes:
        limit = math.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return NetworkParams(weights=weights, biases=biases)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def forward(params: NetworkParams, features: np.ndarray, task: str) -> np.ndarray:
    """Predictions: softmax probabilities per class, or raw outputs."""
    activation = features
    last = len(params.weights) - 1
    for i, (weight, bias) in enumerate(zip(params.weights, params.biases)):
        pre = activation @ weight + bias
        activation = np.maximum(pre, 0.0) if i < last else pre
    return _softmax(activation) if task == TASK_CLASSIFICATION else activation


def _one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def _target_matrix(targets: np.ndarray, task: str, n_outputs: int) -> np.ndarray:
    if task == TASK_CLASSIFICATION:
        return _one_hot(targets, n_outputs)
    return targets.reshape(len(targets), n_outputs).astype(float)


def loss_value(params: NetworkParams, features: np.ndarray, targets: np.ndarray, task: str) -> float:
    """Mean cross-entropy on class labels, or mean squared error over all outputs."""
    outputs = forward(params, features, task)
    if task == TASK_CLASSIFICATION:
        probs = outputs[np.arange(len(targets)), targets]
        return float(-np.mean(np.log(np.maximum(probs, 1e-300))))
    residual = outputs - targets.reshape(outputs.shape)
    return float(np.mean(residual**2))


def loss_and_grads(
    params: NetworkParams, features: np.ndarray, targets: np.ndarray, task: str
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Loss plus analytic gradients for every weight matrix and bias vector."""
    activations = [features]
    pre_activations = []
    activation = features
    last = len(params.weights) - 1
    for i, (weight, bias) in enumerate(zip(params.weights, params.biases)):
        pre = activation @ weight + bias
        pre_activations.append(pre)
        activation = np.maximum(pre, 0.0) if i < last else pre
        activations.append(activation)

    n = len(features)
    if task == TASK_CLASSIFICATION:
        probs = _softmax(pre_activations[-1])
        picked = probs[np.arange(n), targets]
        loss = float(-np.mean(np.log(np.maximum(picked, 1e-300))))
        delta = (probs - _one_hot(targets, probs.shape[1])) / n
    else:
        outputs = pre_activations[-1]
        target_matrix = targets.reshape(outputs.shape)
        residual = outputs - target_matrix
        loss = float(np.mean(residual**2))
        delta = 2.0 * residual / residual.size

    grad_w: list[np.ndarray] = [np.empty(0)] * len(params.weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(params.biases)
    for layer in range(last, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params.weights[layer].T) * (pre_activations[layer - 1] > 0.0)
    return loss, grad_w, grad_b


class _AdamState:
    def __init__(self, params: NetworkParams, cfg: TrainConfig):
        self.cfg = cfg
        self.step = 0
        self.m_w = [np.zeros_like(w) for w in params.weights]
        self.v_w = [np.zeros_like(w) for w in params.weights]
        self.m_b = [np.zeros_like(b) for b in params.biases]
        self.v_b = [np.zeros_like(b) for b in params.biases]

    def update(self, params: NetworkParams, grad_w, grad_b) -> None:
        cfg = self.cfg
        self.step += 1
        correction_1 = 1.0 - cfg.beta_1**self.step
        correction_2 = 1.0 - cfg.beta_2**self.step
        for i in range(len(params.weights)):
            for value, grad, m, v in (
                (params.weights[i], grad_w[i], self.m_w[i], self.v_w[i]),
                (params.biases[i], grad_b[i], self.m_b[i], self.v_b[i]),
            ):
                m *= cfg.beta_1
                m += (1.0 - cfg.beta_1) * grad
                v *= cfg.beta_2
                v += (1.0 - cfg.beta_2) * grad**2
                m_hat = m / correction_1
                v_hat = v / correction_2
                value -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)


def split_indices(
    n: int, fractions: tuple[float, float, float], base_seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic train/validation/test permutation split from the base seed."""
    rng = make_rng(splitmix64(base_seed ^ _SPLIT_TAG))
    order = rng.permutation(n)
    n_train = int(n * fractions[0])
    n_val = int(n * fractions[1])
    if n_train < 1 or n_val < 1 or n - n_train - n_val < 1:
        raise ValueError(f"dataset of {n} patterns is too small for fractions {fractions}")
    return order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :]


def _test_score(params: NetworkParams, data: Dataset, test_idx: np.ndarray, task: str) -> float:
    predictions = forward(params, data.features[test_idx], task)
    targets = _target_matrix(data.targets[test_idx], task, data.n_outputs)
    if targets.shape[1] == 1:
        return r_squared(targets[:, 0], predictions[:, 0])
    return r_squared_multioutput(targets, predictions)


def train_once(structure: NetworkStructure, data: Dataset, cfg: TrainConfig, seed: int) -> TrainResult:
    """Train one model and score it on the test split.

    Divergence (non-finite validation loss) stops training and the model is
    scored as-is; a non-finite final score raises TrainingError.
    """
    train_idx, val_idx, test_idx = split_indices(len(data.features), cfg.split_fractions, cfg.base_seed)
    x_train = data.features[train_idx]
    y_train = data.targets[train_idx]
    x_val = data.features[val_idx]
    y_val = data.targets[val_idx]

    params = init_weights(structure, seed)
    shuffle_rng = make_rng(splitmix64(seed ^ _SHUFFLE_TAG))
    adam = _AdamState(params, cfg)

    if data.task == TASK_REGRESSION:
        y_train = y_train.reshape(len(y_train), data.n_outputs).astype(float)
        y_val = y_val.reshape(len(y_val), data.n_outputs).astype(float)

    best_val = math.inf
    stalled = 0
    epochs_used = 0
    for _ in range(cfg.max_epochs):
        order = shuffle_rng.permutation(len(x_train))
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            _, grad_w, grad_b = loss_and_grads(params, x_train[batch], y_train[batch], data.task)
            adam.update(params, grad_w, grad_b)
        epochs_used += 1
        val_loss = loss_value(params, x_val, y_val, data.task)
        if not math.isfinite(val_loss):
            break
        if val_loss < best_val - cfg.early_stop_min_delta:
            best_val = val_loss
            stalled = 0
        else:
            stalled += 1
            if stalled >= cfg.early_stop_patience:
                break

    score = _test_score(params, data, test_idx, data.task)
    if not math.isfinite(score):
        raise TrainingError(f"non-finite test score after {epochs_used} epochs")
    return TrainResult(r2=score, epochs_used=epochs_used)


def evaluate_batch(arch: Arch, data: Dataset, cfg: TrainConfig) -> BatchResult:
    """Train batch_runs seeded models for one architecture and average scores.

    Run j trains with seed base_seed XOR splitmix64(j), so run 0 uses the
    base seed itself and every batch under equal conditions repeats exactly.
    """
    structure = build_network(arch, data.features.shape[1], data.n_outputs)
    seeds = tuple(derive_run_seed(cfg.base_seed, j) for j in range(cfg.batch_runs))
    results = [train_once(structure, data, cfg, seed) for seed in seeds]
    per_run = tuple(result.r2 for result in results)
    return BatchResult(
        per_run_r2=per_run,
        mean_r2=sum(per_run) / len(per_run),
        epochs_used=tuple(result.epochs_used for result in results),
        seeds=seeds,
    )


def _zscore(values: np.ndarray, column: str) -> np.ndarray:
    mean = values.mean()
    sd = values.std()  # population SD; consistency matters, not the convention
    if sd == 0.0:
        raise IngestError(f"numeric column {column!r} is constant; z-score undefined")
    return (values - mean) / sd


def ingest_dataset(path, schema: Mapping, task: str) -> Dataset:
    """Load a CSV with header and preprocess per the declared column kinds.

    Numeric inputs are z-score normalised, binary inputs become -1/1,
    categorical inputs are one-hot encoded (categories in sorted order), and
    regression targets stay unscaled. Classification targets map to indices
    of their sorted distinct labels. Missing values are rejected.
    """
    if task not in (TASK_CLASSIFICATION, TASK_REGRESSION):
        raise IngestError(f"unknown task kind {task!r}")
    target_column = schema.get("target")
    if not target_column:
        raise IngestError("schema must name a target column")
    column_kinds = dict(schema.get("columns", {}))
    for column, kind in column_kinds.items():
        if kind not in COLUMN_KINDS:
            raise IngestError(f"column {column!r} has unknown kind {kind!r}")

    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise IngestError("dataset file is empty")
        rows = [row for row in reader if row]
    if target_column not in header:
        raise IngestError(f"target column {target_column!r} not in file header")
    unknown = [c for c in header if c != target_column and c not in column_kinds]
    if unknown:
        raise IngestError(f"file columns not declared in schema: {unknown}")
    missing = [c for c in column_kinds if c not in header]
    if missing:
        raise IngestError(f"schema columns not in file: {missing}")
    if not rows:
        raise IngestError("dataset has no data rows")

    columns: dict[str, list[str]] = {name: [] for name in header}
    for line_no, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise IngestError(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
        for name, cell in zip(header, row):
            if cell == "":
                raise IngestError(f"line {line_no}: missing value in column {name!r}")
            columns[name].append(cell)

    feature_blocks: list[np.ndarray] = []
    for name in header:  # file order fixes the feature layout
        if name == target_column:
            continue
        cells = columns[name]
        kind = column_kinds[name]
        if kind == "numeric":
            try:
                raw = np.array([float(cell) for cell in cells])
            except ValueError:
                raise IngestError(f"non-numeric value in numeric column {name!r}") from None
            feature_blocks.append(_zscore(raw, name)[:, None])
        elif kind == "binary":
            levels = sorted(set(cells))
            if len(levels) != 2:
                raise IngestError(
                    f"binary column {name!r} has {len(levels)} distinct value(s), expected 2"
                )
            mapping = {levels[0]: -1.0, levels[1]: 1.0}
            feature_blocks.append(np.array([mapping[cell] for cell in cells])[:, None])
        else:
            levels = sorted(set(cells))
            index = {level: i for i, level in enumerate(levels)}
            block = np.zeros((len(cells), len(levels)))
            for row_i, cell in enumerate(cells):
                block[row_i, index[cell]] = 1.0
            feature_blocks.append(block)

    features = np.hstack(feature_blocks)
    target_cells = columns[target_column]
    if task == TASK_CLASSIFICATION:
        labels = sorted(set(target_cells))
        if len(labels) < 2:
            raise IngestError("classification target needs at least 2 classes")
        label_index = {label: i for i, label in enumerate(labels)}
        targets = np.array([label_index[cell] for cell in target_cells], dtype=int)
        n_outputs = len(labels)
    else:
        try:
            targets = np.array([float(cell) for cell in target_cells])
        except ValueError:
            raise IngestError("non-numeric value in regression target") from None
        n_outputs = 1
    return Dataset(
        features=features,
        targets=targets,
        task=task,
        n_outputs=n_outputs,
        column_kinds=column_kinds,
    )


def write_batch_details_csv(rows: Sequence[tuple[str, int, int, float, int]], path) -> None:
    """Per-run detail listing: architecture,run,seed,r2,epochs."""
    from .fileio import atomic_write_text
    from .fitness import format_fitness

    lines = ["architecture,run,seed,r2,epochs"]
    for arch_text, run, seed, r2, epochs in rows:
        lines.append(f"{arch_text},{run},{seed},{format_fitness(r2)},{epochs}")
    atomic_write_text(path, "\n".join(lines) + "\n")
