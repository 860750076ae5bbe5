"""The learnable model: signed message-passing matrix with trainable scalars,
a stack of GCN layers trained by hand-written backprop and Adam, weighted
binary cross-entropy (plus optional pairwise/prior penalties), and the
epoch loop with early stopping on evaluation loss.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import expit

from .graphs import Graph, derive_seed
from .features import FeatureMatrix, NormalizationStats

__all__ = [
    "TrainConfig",
    "PygonModel",
    "ModifiedAdjacency",
    "build_modified_adjacency",
    "forward",
    "wbce_loss",
    "pairwise_penalty",
    "count_prior_penalty",
    "extended_loss",
    "loss_gradient",
    "Gradients",
    "backward",
    "AdamState",
    "adam_step",
    "train",
    "predict",
    "TrainHistory",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
]

DEFAULT_HIDDEN = (225, 175, 400, 150)
PROB_CLAMP = 1e-7


@dataclass
class TrainConfig:
    """Training hyper-parameters; the defaults are the tuned values used
    throughout (5 GCN layers via the four hidden sizes, Adam at lr 0.005
    with L2 5e-4, dropout 0.4, up to 1000 epochs with patience 40)."""

    max_epochs: int = 1000
    patience: int = 40
    learning_rate: float = 0.005
    l2_coeff: float = 0.0005
    dropout: float = 0.4
    hidden_dims: tuple = DEFAULT_HIDDEN
    loss_c1: float = 0.0
    loss_c2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.hidden_dims = tuple(int(d) for d in self.hidden_dims)
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")


class PygonModel:
    """GCN layer weights plus the learnable scalars of the message matrix.

    ``beta`` (non-edge weight exponent) and ``gamma`` (diagonal weight) are
    learned; ``alpha`` (edge weight exponent) stays frozen. ``p`` is the host
    edge probability the model was built for, and ``edge_correction`` toggles
    the (1-p)/p factor that unbiases message sums when p != 1/2.
    """

    def __init__(self, layer_weights, beta=0.0, gamma=-1.0, alpha=0.0,
                 dropout_rate=0.4, p=0.5, edge_correction=True):
        self.layer_weights = [np.asarray(w, dtype=np.float64) for w in layer_weights]
        if not self.layer_weights:
            raise ValueError("need at least one layer")
        for a, b in zip(self.layer_weights, self.layer_weights[1:]):
            if a.shape[1] != b.shape[0]:
                raise ValueError("layer dimensions do not chain")
        if self.layer_weights[-1].shape[1] != 1:
            raise ValueError("final layer must map to a single score column")
        self.beta = float(beta)
        self.gamma = float(gamma)
        self.alpha = float(alpha)
        self.dropout_rate = float(dropout_rate)
        self.p = float(p)
        self.edge_correction = bool(edge_correction)

    @property
    def num_layers(self) -> int:
        return len(self.layer_weights)

    @property
    def feature_dim(self) -> int:
        return self.layer_weights[0].shape[0]

    @classmethod
    def init_glorot(cls, feature_dim, hidden_dims, dropout_rate, p,
                    edge_correction=True, seed=0) -> "PygonModel":
        """Fresh model with Glorot-uniform layer weights and the standard
        scalar initialization e^alpha = e^beta = 1, gamma = -1."""
        rng = np.random.default_rng(derive_seed(seed))
        dims = [int(feature_dim), *hidden_dims, 1]
        weights = []
        for fan_in, fan_out in zip(dims, dims[1:]):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        return cls(weights, beta=0.0, gamma=-1.0, alpha=0.0,
                   dropout_rate=dropout_rate, p=p, edge_correction=edge_correction)

    def mu(self) -> float:
        return (1.0 - self.p) / self.p if self.edge_correction else 1.0

    def snapshot(self):
        return [w.copy() for w in self.layer_weights], self.beta, self.gamma


@dataclass(frozen=True)
class ModifiedAdjacency:
    """Message-passing matrix built from a graph and the model scalars.

    Entries (all over sqrt(n)): gamma on the diagonal, mu * e^alpha on edges,
    -e^beta on missing edges; edge entries stay positive and non-edge entries
    negative for any scalar values. The scalars used at build time are kept
    so a stale matrix can be detected.
    """

    matrix: np.ndarray
    adjacency: np.ndarray
    n: int
    mu: float
    alpha: float
    beta: float
    gamma: float


def build_modified_adjacency(g: Graph, model: PygonModel) -> ModifiedAdjacency:
    if g.p != model.p:
        raise ValueError(f"model built for p={model.p} but graph has p={g.p}")
    n = g.n
    scale = 1.0 / math.sqrt(n)
    mu = model.mu()
    pos = mu * math.exp(model.alpha) * scale
    neg = -math.exp(model.beta) * scale
    matrix = np.where(g.adjacency, pos, neg)
    np.fill_diagonal(matrix, model.gamma * scale)
    return ModifiedAdjacency(matrix=matrix, adjacency=g.adjacency, n=n, mu=mu,
                             alpha=model.alpha, beta=model.beta, gamma=model.gamma)


@dataclass
class ForwardCache:
    """Everything the backward pass needs from one forward call."""

    layer_inputs: list        # H^(0) .. H^(L-1), post-dropout
    projections: list         # G_l = H^(l-1) @ W_l
    preactivations: list      # Z_l = A_mod @ G_l
    drop_masks: list          # boolean masks for hidden layers (None if unused)
    yhat: np.ndarray
    beta: float
    gamma: float
    training: bool


def forward(model: PygonModel, adj: ModifiedAdjacency, X: FeatureMatrix,
            training: bool = False, rng=None):
    """Run the GCN stack; returns the per-vertex scores in (0,1) and a cache.

    Hidden layers apply ReLU then (in training) inverted dropout; the output
    layer applies a sigmoid and no dropout.
    """
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X)
    if values.shape[1] != model.feature_dim:
        raise ValueError(
            f"feature dimension {values.shape[1]} does not match model input {model.feature_dim}")
    if values.shape[0] != adj.n:
        raise ValueError("feature rows do not match graph size")
    use_dropout = training and model.dropout_rate > 0.0
    if use_dropout and rng is None:
        raise ValueError("training-mode forward with dropout needs an rng")
    keep = 1.0 - model.dropout_rate

    h = np.asarray(values, dtype=np.float64)
    inputs, projections, preactivations, masks = [], [], [], []
    last = model.num_layers - 1
    for l, w in enumerate(model.layer_weights):
        inputs.append(h)
        g = h @ w
        z = adj.matrix @ g
        projections.append(g)
        preactivations.append(z)
        if l == last:
            yhat = expit(z[:, 0])
        else:
            h = np.maximum(z, 0.0)
            if use_dropout:
                mask = rng.random(h.shape) >= model.dropout_rate
                h = h * mask / keep
                masks.append(mask)
            else:
                masks.append(None)
    cache = ForwardCache(layer_inputs=inputs, projections=projections,
                         preactivations=preactivations, drop_masks=masks,
                         yhat=yhat, beta=model.beta, gamma=model.gamma,
                         training=training)
    return yhat, cache


def _clamped(yhat: np.ndarray) -> np.ndarray:
    return np.clip(yhat, PROB_CLAMP, 1.0 - PROB_CLAMP)


def wbce_loss(yhat: np.ndarray, y: np.ndarray, k: int, n: int) -> float:
    """Weighted binary cross-entropy with class weights 1/k and 1/(n-k)."""
    if k <= 0 or k >= n:
        raise ValueError(f"class weights undefined for k={k}, n={n}")
    yc = _clamped(np.asarray(yhat, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    pos = (y * np.log(yc)).sum() / k
    neg = ((1.0 - y) * np.log(1.0 - yc)).sum() / (n - k)
    return float(-(pos + neg))


def pairwise_penalty(yhat: np.ndarray, adjacency: np.ndarray) -> float:
    """Mean over ordered vertex pairs of -[A log((1+yi yj)/2) + (1-A) log((1-yi yj)/2)]."""
    yc = _clamped(np.asarray(yhat, dtype=np.float64))
    n = yc.shape[0]
    outer = np.outer(yc, yc)
    a = adjacency.astype(np.float64)
    total = a * np.log((1.0 + outer) / 2.0) + (1.0 - a) * np.log((1.0 - outer) / 2.0)
    return float(-total.sum() / (n * n))


def count_prior_penalty(yhat: np.ndarray, k: int, n: int) -> float:
    """Mean over vertices of -[yi log(k/n) + (1-yi) log(1-k/n)]."""
    if k <= 0 or k >= n:
        raise ValueError(f"prior undefined for k={k}, n={n}")
    yc = _clamped(np.asarray(yhat, dtype=np.float64))
    ratio = k / n
    return float(-(yc * math.log(ratio) + (1.0 - yc) * math.log(1.0 - ratio)).mean())


def extended_loss(yhat, y, adjacency, k: int, n: int, c1: float = 0.0, c2: float = 0.0) -> float:
    """WBCE plus c1 * pairwise penalty plus c2 * count prior; reduces to WBCE
    exactly at c1 = c2 = 0."""
    loss = wbce_loss(yhat, y, k, n)
    if c1 != 0.0:
        loss += c1 * pairwise_penalty(yhat, adjacency)
    if c2 != 0.0:
        loss += c2 * count_prior_penalty(yhat, k, n)
    return loss


def loss_gradient(yhat, y, adjacency, k: int, n: int, c1: float = 0.0, c2: float = 0.0) -> np.ndarray:
    """d(extended_loss)/d(yhat); zero where the probability clamp is active."""
    if k <= 0 or k >= n:
        raise ValueError(f"class weights undefined for k={k}, n={n}")
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    yc = _clamped(yhat)
    grad = -(y / yc) / k + ((1.0 - y) / (1.0 - yc)) / (n - k)
    if c1 != 0.0:
        outer = np.outer(yc, yc)
        a = adjacency.astype(np.float64)
        pair = -(a / (1.0 + outer) - (1.0 - a) / (1.0 - outer)) / (n * n)
        grad += c1 * ((pair + pair.T) @ yc)
    if c2 != 0.0:
        ratio = k / n
        grad += c2 * (-(math.log(ratio) - math.log(1.0 - ratio)) / n)
    active = (yhat > PROB_CLAMP) & (yhat < 1.0 - PROB_CLAMP)
    return grad * active


@dataclass
class Gradients:
    """Loss gradients for every learnable parameter (alpha is frozen by
    construction and has no entry)."""

    weights: list
    beta: float
    gamma: float


def backward(model: PygonModel, adj: ModifiedAdjacency, X, y, cache: ForwardCache,
             config: TrainConfig) -> Gradients:
    """Exact analytic gradients of the configured loss.

    Gradients for beta and gamma flow through the message matrix, which
    multiplies every layer's projection: d(matrix)/d(beta) is -e^beta/sqrt(n)
    on missing-edge off-diagonals and d(matrix)/d(gamma) is 1/sqrt(n) on the
    diagonal. L2 is not added here; the optimizer couples it in.
    """
    if cache.beta != model.beta or cache.gamma != model.gamma:
        raise ValueError("stale forward cache: model scalars changed since forward")
    if adj.beta != model.beta or adj.gamma != model.gamma:
        raise ValueError("stale modified adjacency: rebuild it for the current model")
    n = adj.n
    y = np.asarray(y, dtype=np.float64)
    k = int(round(y.sum()))
    yhat = cache.yhat

    dyhat = loss_gradient(yhat, y, adj.adjacency, k, n, config.loss_c1, config.loss_c2)
    dz = (dyhat * yhat * (1.0 - yhat))[:, None]

    keep = 1.0 - model.dropout_rate
    weight_grads = [None] * model.num_layers
    d_matrix = np.zeros((n, n))
    for l in range(model.num_layers - 1, -1, -1):
        d_matrix += dz @ cache.projections[l].T
        dg = adj.matrix.T @ dz
        weight_grads[l] = cache.layer_inputs[l].T @ dg
        if l == 0:
            break
        dh = dg @ model.layer_weights[l].T
        mask = cache.drop_masks[l - 1]
        if cache.training and mask is not None:
            dh = dh * mask / keep
        dz = dh * (cache.preactivations[l - 1] > 0.0)

    scale = 1.0 / math.sqrt(n)
    diag_sum = float(np.trace(d_matrix))
    edge_sum = float(d_matrix[adj.adjacency].sum())
    nonedge_sum = float(d_matrix.sum()) - diag_sum - edge_sum
    dbeta = -math.exp(model.beta) * scale * nonedge_sum
    dgamma = scale * diag_sum
    return Gradients(weights=weight_grads, beta=dbeta, gamma=dgamma)


@dataclass
class AdamState:
    """First/second moment estimates and the shared step counter."""

    m: dict
    v: dict
    t: int = 0

    @classmethod
    def init(cls, params: dict) -> "AdamState":
        return cls(m={k: np.zeros_like(v) for k, v in params.items()},
                   v={k: np.zeros_like(v) for k, v in params.items()})


def adam_step(params: dict, grads: dict, state: AdamState, lr: float, l2: float = 0.0,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One in-place Adam update over the parameter dictionary.

    The L2 term l2 * w is added to the gradient of every layer weight (keys
    starting with "W") before the moment update; the message-matrix scalars
    are never decayed.
    """
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for key, param in params.items():
        g = np.asarray(grads[key], dtype=np.float64)
        if l2 != 0.0 and key.startswith("W"):
            g = g + l2 * param
        state.m[key] = beta1 * state.m[key] + (1.0 - beta1) * g
        state.v[key] = beta2 * state.v[key] + (1.0 - beta2) * (g * g)
        m_hat = state.m[key] / bc1
        v_hat = state.v[key] / bc2
        param -= lr * m_hat / (np.sqrt(v_hat) + eps)


@dataclass
class TrainHistory:
    """Per-epoch losses and the early-stopping bookkeeping."""

    train_losses: list = field(default_factory=list)
    eval_losses: list = field(default_factory=list)
    best_epoch: int = 0
    best_eval_loss: float = math.inf
    epochs_run: int = 0
    stopped_early: bool = False


def _instance_arrays(pair):
    inst, feats = pair
    if not feats.normalized:
        raise ValueError("features must be normalized before training")
    y = inst.labels.astype(np.float64)
    return inst, feats, y


def train(train_data, eval_data, config: TrainConfig, edge_correction: bool = True):
    """Train on shuffled graphs, one full-graph update per graph per epoch.

    After every epoch the mean configured loss over the evaluation graphs is
    measured with dropout off; training stops at max_epochs or once patience
    epochs pass without a new minimum, and the returned model is the snapshot
    from the best-evaluation-loss epoch.
    """
    if not train_data or not eval_data:
        raise ValueError("train and eval sets must both be non-empty")
    train_items = [_instance_arrays(p) for p in train_data]
    eval_items = [_instance_arrays(p) for p in eval_data]
    ref = train_items[0][0]
    for inst, _, _ in train_items + eval_items:
        same = (inst.graph.n == ref.graph.n and inst.graph.p == ref.graph.p
                and inst.kind == ref.kind and inst.k == ref.k)
        if not same:
            raise ValueError("all graphs in a run must share (n, p, k, kind)")

    f0 = train_items[0][1].values.shape[1]
    model = PygonModel.init_glorot(f0, config.hidden_dims, config.dropout,
                                   p=ref.graph.p, edge_correction=edge_correction,
                                   seed=derive_seed(config.seed, 0))
    rng = np.random.default_rng(derive_seed(config.seed, 1))

    params = {f"W{i}": w for i, w in enumerate(model.layer_weights)}
    params["beta"] = np.asarray(model.beta, dtype=np.float64)
    params["gamma"] = np.asarray(model.gamma, dtype=np.float64)
    state = AdamState.init(params)

    history = TrainHistory()
    best = None
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_items))
        epoch_losses = []
        for idx in order:
            inst, feats, y = train_items[idx]
            adj = build_modified_adjacency(inst.graph, model)
            yhat, cache = forward(model, adj, feats, training=True, rng=rng)
            epoch_losses.append(extended_loss(yhat, y, adj.adjacency, inst.k,
                                              inst.graph.n, config.loss_c1, config.loss_c2))
            grads = backward(model, adj, feats, y, cache, config)
            grad_dict = {f"W{i}": g for i, g in enumerate(grads.weights)}
            grad_dict["beta"] = grads.beta
            grad_dict["gamma"] = grads.gamma
            adam_step(params, grad_dict, state, lr=config.learning_rate, l2=config.l2_coeff)
            model.beta = float(params["beta"])
            model.gamma = float(params["gamma"])

        eval_loss = _mean_loss(model, eval_items, config)
        history.train_losses.append(float(np.mean(epoch_losses)))
        history.eval_losses.append(eval_loss)
        history.epochs_run = epoch
        if eval_loss < history.best_eval_loss:
            history.best_eval_loss = eval_loss
            history.best_epoch = epoch
            best = model.snapshot()
        if epoch - history.best_epoch >= config.patience:
            history.stopped_early = True
            break

    weights, beta, gamma = best
    trained = PygonModel(weights, beta=beta, gamma=gamma, alpha=model.alpha,
                         dropout_rate=model.dropout_rate, p=model.p,
                         edge_correction=model.edge_correction)
    return trained, history


def _mean_loss(model: PygonModel, items, config: TrainConfig) -> float:
    losses = []
    for inst, feats, y in items:
        adj = build_modified_adjacency(inst.graph, model)
        yhat, _ = forward(model, adj, feats, training=False)
        losses.append(extended_loss(yhat, y, adj.adjacency, inst.k, inst.graph.n,
                                    config.loss_c1, config.loss_c2))
    return float(np.mean(losses))


def predict(model: PygonModel, g: Graph, X: FeatureMatrix) -> np.ndarray:
    """Per-vertex scores in (0,1) with dropout off; X must carry the
    training-time normalization."""
    if isinstance(X, FeatureMatrix) and not X.normalized:
        raise ValueError("prediction features must be normalized with the training statistics")
    adj = build_modified_adjacency(g, model)
    yhat, _ = forward(model, adj, X, training=False)
    return yhat


@dataclass
class Checkpoint:
    """A trained model plus whatever is needed to score a fresh graph."""

    model: PygonModel
    stats: NormalizationStats | None = None
    feature_set: str | None = None
    train_config: TrainConfig | None = None


def save_checkpoint(path, model: PygonModel, stats: NormalizationStats | None = None,
                    feature_set: str | None = None, train_config: TrainConfig | None = None):
    """Serialize to JSON; floats round-trip bit-exactly."""
    blob = {
        "dims": [int(model.feature_dim)] + [int(w.shape[1]) for w in model.layer_weights],
        "weights": [w.tolist() for w in model.layer_weights],
        "beta": model.beta,
        "gamma": model.gamma,
        "alpha": model.alpha,
        "dropout_rate": model.dropout_rate,
        "p": model.p,
        "edge_correction": model.edge_correction,
        "feature_set": feature_set,
        "normalization": None if stats is None else {
            "feature_names": list(stats.feature_names),
            "mean": stats.mean.tolist(),
            "std": stats.std.tolist(),
        },
        "train_config": None if train_config is None else asdict(train_config),
    }
    with open(path, "w") as fh:
        json.dump(blob, fh)


def load_checkpoint(path) -> Checkpoint:
    with open(path) as fh:
        blob = json.load(fh)
    model = PygonModel(
        [np.asarray(w, dtype=np.float64) for w in blob["weights"]],
        beta=blob["beta"], gamma=blob["gamma"], alpha=blob["alpha"],
        dropout_rate=blob["dropout_rate"], p=blob["p"],
        edge_correction=blob["edge_correction"],
    )
    stats = None
    if blob.get("normalization") is not None:
        norm = blob["normalization"]
        stats = NormalizationStats(
            feature_names=tuple(norm["feature_names"]),
            mean=np.asarray(norm["mean"], dtype=np.float64),
            std=np.asarray(norm["std"], dtype=np.float64),
        )
    cfg = None
    if blob.get("train_config") is not None:
        cfg = TrainConfig(**blob["train_config"])
    return Checkpoint(model=model, stats=stats, feature_set=blob.get("feature_set"),
                      train_config=cfg)
