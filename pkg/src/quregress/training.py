"""Full-batch Adam training of circuit regressors and R^2 / RMSE evaluation."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ._kernels import compile_program, expval_and_jacobian, expvals
from .benchmarks import RegressionDataset
from .errors import DegenerateTargetError, InvalidArgument
from .sim import CircuitSpec


def r2_score(y, y_hat) -> float:
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise InvalidArgument(f"length mismatch: {y.shape} vs {y_hat.shape}")
    if y.size < 2:
        raise InvalidArgument("r2_score needs at least two samples")
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        raise DegenerateTargetError("target has zero variance; R^2 is undefined")
    return float(1.0 - np.sum((y - y_hat) ** 2) / ss_tot)


def rmse(y, y_hat) -> float:
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise InvalidArgument(f"length mismatch: {y.shape} vs {y_hat.shape}")
    if y.size < 1:
        raise InvalidArgument("rmse needs at least one sample")
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


@dataclass(frozen=True)
class Metrics:
    r2: float
    rmse: float

    @classmethod
    def of(cls, y, y_hat) -> "Metrics":
        return cls(r2_score(y, y_hat), rmse(y, y_hat))

    def to_json(self):
        return {"r2": self.r2, "rmse": self.rmse}


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 200
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    init_range: float = np.pi
    measurement_wire: int = 0
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidArgument("learning_rate must be > 0")
        if self.epochs < 0:
            raise InvalidArgument("epochs must be >= 0")

    def replace(self, **changes) -> "TrainConfig":
        return TrainConfig(**{**asdict(self), **changes})


@dataclass
class TrainResult:
    final_params: np.ndarray
    loss_history: np.ndarray
    train_metrics: Metrics
    full_metrics: Metrics
    best_loss: float = float("nan")
    initial_params: np.ndarray = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "params": [float(v) for v in self.final_params],
            "loss_history": [float(v) for v in self.loss_history],
            "train": self.train_metrics.to_json(),
            "full": self.full_metrics.to_json(),
        }


class Adam:
    def __init__(self, lr=0.05, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def predict(circuit, params, X, wire: int = 0) -> np.ndarray:
    return expvals(circuit, params, X, wire)


def evaluate(circuit: CircuitSpec, params, data: RegressionDataset, wire: int = 0) -> Metrics:
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.shape[0] != circuit.n_trainable:
        raise InvalidArgument(f"circuit has {circuit.n_trainable} trainable angle(s), "
                              f"got {params.shape[0]} parameter(s)")
    return Metrics.of(data.y, predict(circuit, params, data.X, wire))


def train(circuit: CircuitSpec, data: RegressionDataset, config: TrainConfig = TrainConfig()) -> TrainResult:
    """Fit on ``data.train_idx`` by full-batch Adam on MSE; keep the best iterate."""
    X, y = data.X_train, data.y_train
    if np.all(y == y[0]) or np.all(data.y == data.y[0]):
        raise DegenerateTargetError("training target is constant")
    prog = compile_program(circuit)
    wire = config.measurement_wire
    rng = np.random.default_rng(config.seed)
    params = rng.uniform(-config.init_range, config.init_range, size=circuit.n_trainable)
    initial = params.copy()
    opt = Adam(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)
    n = len(y)
    history = np.empty(config.epochs)
    best_params, best_loss = params.copy(), np.inf
    for epoch in range(config.epochs):
        f, jac = expval_and_jacobian(prog, params, X, wire)
        resid = f - y
        loss = float(np.mean(resid ** 2))
        history[epoch] = loss
        if loss < best_loss:
            best_loss, best_params = loss, params.copy()
        params = opt.step(params, jac.T @ (2.0 * resid / n))
    final_loss = float(np.mean((expvals(prog, params, X, wire) - y) ** 2))
    if final_loss < best_loss:
        best_loss, best_params = final_loss, params.copy()
    return TrainResult(
        final_params=best_params,
        loss_history=history,
        train_metrics=Metrics.of(y, expvals(prog, best_params, X, wire)),
        full_metrics=Metrics.of(data.y, expvals(prog, best_params, data.X, wire)),
        best_loss=best_loss,
        initial_params=initial,
    )
