"""Binary classifiers over SODP feature vectors.

Three models are provided: Fisher's linear discriminant, a Gaussian naive
Bayes classifier evaluated in the log domain, and a perceptron with one
logistic hidden layer trained by full-batch gradient descent on mean
cross-entropy. CHF is the positive class (label 1) everywhere.

Tie rules: an LDA score of exactly 0 is Normal; an NB or MLP probability
of exactly 0.5 is CHF. All variances are population variances.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit, log_expit, logsumexp

from .errors import (
    BadHyperparameterError,
    SingularCovarianceError,
    SodpChfError,
    TooFewRowsError,
)
from .record_io import FeatureRow, Label

LOG_2PI = float(np.log(2.0 * np.pi))
DEFAULT_NEURONS = (3, 5, 7, 9)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray  # 1 = CHF, 0 = Normal
    subject_ids: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.features, dtype=float))
        y = np.asarray(self.labels).astype(np.int64).ravel()
        s = np.asarray(self.subject_ids, dtype=object).ravel()
        if not (X.shape[0] == y.size == s.size):
            raise ValueError("features, labels and subject_ids must have the same length")
        if y.size and not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 (Normal) or 1 (CHF)")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "subject_ids", s)

    def __len__(self) -> int:
        return self.labels.size

    @classmethod
    def from_rows(cls, rows: Sequence[FeatureRow]) -> "Dataset":
        X = np.array([r.features for r in rows], dtype=float).reshape(len(rows), -1)
        y = np.array([1 if r.label is Label.CHF else 0 for r in rows], dtype=np.int64)
        s = np.array([r.subject_id for r in rows], dtype=object)
        return cls(X, y, s)

    @classmethod
    def from_arrays(cls, X, y, subject_ids=None) -> "Dataset":
        y = np.asarray(y)
        if subject_ids is None:
            subject_ids = [str(i) for i in range(y.size)]
        return cls(X, y, subject_ids)

    def subset(self, mask_or_index) -> "Dataset":
        return Dataset(
            self.features[mask_or_index],
            self.labels[mask_or_index],
            self.subject_ids[mask_or_index],
        )

    def subjects(self) -> list[str]:
        """Distinct subject ids in order of first appearance."""
        return list(dict.fromkeys(self.subject_ids.tolist()))


def _require_both_classes(y: np.ndarray, what: str) -> None:
    if y.size < 2 or y.min() == y.max():
        raise TooFewRowsError(f"{what} needs rows from both classes")


# Standardization ------------------------------------------------------------


@dataclass(frozen=True)
class StandardizationParams:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std


def standardize_fit(train) -> StandardizationParams:
    X = train.features if isinstance(train, Dataset) else np.atleast_2d(np.asarray(train, float))
    if X.shape[0] < 2:
        raise TooFewRowsError("standardization needs at least two rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    return StandardizationParams(mean, std)


def standardize_apply(params: StandardizationParams, X) -> np.ndarray:
    return params.apply(X)


# Fisher LDA -----------------------------------------------------------------


@dataclass(frozen=True)
class LdaModel:
    weight: np.ndarray
    bias: float

    def scores(self, X) -> np.ndarray:
        return np.atleast_2d(np.asarray(X, dtype=float)) @ self.weight + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.scores(X) > 0).astype(np.int64)


def lda_train(train: Dataset, ridge: float = 1e-6) -> LdaModel:
    """Fisher discriminant on the ridge-regularized pooled covariance.

    The boundary sits at the midpoint of the projected class means, moved
    by the log prior ratio.
    """
    X, y = train.features, train.labels
    _require_both_classes(y, "LDA")
    pos, neg = X[y == 1], X[y == 0]
    mu1, mu0 = pos.mean(axis=0), neg.mean(axis=0)
    centered = np.vstack((pos - mu1, neg - mu0))
    cov = centered.T @ centered / X.shape[0]
    lam = ridge * float(np.mean(np.diag(cov)))
    reg = cov + lam * np.eye(cov.shape[0])
    try:
        if np.linalg.cond(reg) > 1.0 / np.finfo(float).eps:
            raise np.linalg.LinAlgError
        w = np.linalg.solve(reg, mu1 - mu0)
    except np.linalg.LinAlgError:
        raise SingularCovarianceError("pooled covariance is singular after regularization") from None
    p1 = pos.shape[0] / X.shape[0]
    b = -float(w @ (mu1 + mu0)) / 2.0 + float(np.log(p1 / (1.0 - p1)))
    return LdaModel(w, b)


def lda_predict(model: LdaModel, x) -> tuple[Label, float]:
    score = float(np.dot(model.weight, np.asarray(x, dtype=float)) + model.bias)
    return (Label.CHF if score > 0 else Label.NORMAL), score


# Gaussian naive Bayes -------------------------------------------------------


@dataclass(frozen=True)
class NbModel:
    priors: np.ndarray  # [P(Normal), P(CHF)]
    means: np.ndarray  # (2, d)
    variances: np.ndarray  # (2, d)

    def log_joint(self, X) -> np.ndarray:
        """log p(x, class) for each row, columns ordered (Normal, CHF)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            var = self.variances[c]
            dev = X - self.means[c]
            ll = -0.5 * (LOG_2PI + np.log(var) + dev * dev / var)
            out[:, c] = ll.sum(axis=1) + np.log(self.priors[c])
        return out

    def log_odds(self, X) -> np.ndarray:
        """log p(CHF | x) - log p(Normal | x).

        Each feature's squared deviations are expanded as a*x^2 + b*x + c so
        equal class variances cancel the quadratic term exactly; this keeps
        the ratio accurate for x far from both class means.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        (m0, m1), (v0, v1) = self.means, self.variances
        a = 1.0 / v1 - 1.0 / v0
        b = -2.0 * (m1 / v1 - m0 / v0)
        c = m1 * m1 / v1 - m0 * m0 / v0
        with np.errstate(over="ignore", invalid="ignore"):
            quad = np.where(a == 0, 0.0, a * X * X)
        terms = -0.5 * (np.log(v1) - np.log(v0) + quad + b * X + c)
        return terms.sum(axis=1) + np.log(self.priors[1]) - np.log(self.priors[0])

    def posterior_chf(self, X) -> np.ndarray:
        return expit(self.log_odds(X))

    def log_posterior(self, X) -> np.ndarray:
        """Normalized log p(class | x), columns ordered (Normal, CHF)."""
        lj = self.log_joint(X)
        return lj - logsumexp(lj, axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return (self.posterior_chf(X) >= 0.5).astype(np.int64)


def nb_train(train: Dataset, var_floor_frac: float = 1e-9) -> NbModel:
    X, y = train.features, train.labels
    _require_both_classes(y, "naive Bayes")
    max_var = float(X.var(axis=0).max())
    floor = var_floor_frac * max_var if max_var > 0 else var_floor_frac
    means = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
    variances = np.vstack([X[y == c].var(axis=0) for c in (0, 1)])
    variances = np.maximum(variances, floor)
    priors = np.array([np.mean(y == 0), np.mean(y == 1)], dtype=float)
    return NbModel(priors, means, variances)


def nb_predict(model: NbModel, x) -> tuple[Label, float]:
    p = float(model.posterior_chf(np.asarray(x, dtype=float)[None, :])[0])
    return (Label.CHF if p >= 0.5 else Label.NORMAL), p


# Perceptron with one hidden layer ---------------------------------------------


@dataclass(frozen=True)
class MlpModel:
    W1: np.ndarray  # (hidden, inputs)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float

    @property
    def hidden_size(self) -> int:
        return self.w2.size

    @property
    def n_inputs(self) -> int:
        return self.W1.shape[1]

    def hidden(self, X) -> np.ndarray:
        return expit(np.atleast_2d(np.asarray(X, dtype=float)) @ self.W1.T + self.b1)

    def logits(self, X) -> np.ndarray:
        return self.hidden(X) @ self.w2 + self.b2

    def proba(self, X) -> np.ndarray:
        return expit(self.logits(X))

    def predict(self, X) -> np.ndarray:
        return (self.proba(X) >= 0.5).astype(np.int64)

    def to_vector(self) -> np.ndarray:
        return np.concatenate((self.W1.ravel(), self.b1, self.w2, [self.b2]))

    @classmethod
    def from_vector(cls, theta, n_inputs: int, hidden: int) -> "MlpModel":
        theta = np.asarray(theta, dtype=float)
        h, d = hidden, n_inputs
        if theta.size != h * d + 2 * h + 1:
            raise ValueError("parameter vector has the wrong size")
        W1 = theta[: h * d].reshape(h, d).copy()
        b1 = theta[h * d: h * d + h].copy()
        w2 = theta[h * d + h: h * d + 2 * h].copy()
        return cls(W1, b1, w2, float(theta[-1]))


def mlp_init(n_inputs: int, hidden: int, seed: int) -> MlpModel:
    """Weights uniform in [-0.5, 0.5], drawn in the order W1, b1, w2, b2."""
    rng = np.random.default_rng(seed)
    W1 = rng.uniform(-0.5, 0.5, size=(hidden, n_inputs))
    b1 = rng.uniform(-0.5, 0.5, size=hidden)
    w2 = rng.uniform(-0.5, 0.5, size=hidden)
    b2 = float(rng.uniform(-0.5, 0.5))
    return MlpModel(W1, b1, w2, b2)


def mlp_loss(model: MlpModel, X, y) -> float:
    z = model.logits(X)
    y = np.asarray(y, dtype=float)
    # -[y log s(z) + (1-y) log s(-z)], stable for large |z|
    return float(-np.mean(y * log_expit(z) + (1.0 - y) * log_expit(-z)))


def mlp_loss_and_grad(model: MlpModel, X, y) -> tuple[float, MlpModel]:
    """Mean cross-entropy and its gradient (returned as an MlpModel of partials)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    a1 = model.hidden(X)
    z = a1 @ model.w2 + model.b2
    loss = float(-np.mean(y * log_expit(z) + (1.0 - y) * log_expit(-z)))
    dz = (expit(z) - y) / n
    g_w2 = a1.T @ dz
    g_b2 = float(dz.sum())
    dh = np.outer(dz, model.w2) * a1 * (1.0 - a1)
    g_W1 = dh.T @ X
    g_b1 = dh.sum(axis=0)
    return loss, MlpModel(g_W1, g_b1, g_w2, g_b2)


def _check_mlp_hyperparameters(hidden, lr, epochs):
    if not isinstance(hidden, (int, np.integer)) or hidden < 1:
        raise BadHyperparameterError(f"hidden size must be a positive integer, got {hidden!r}")
    if not (np.isfinite(lr) and lr > 0):
        raise BadHyperparameterError(f"learning rate must be positive, got {lr!r}")
    if not isinstance(epochs, (int, np.integer)) or epochs < 0:
        raise BadHyperparameterError(f"epochs must be a non-negative integer, got {epochs!r}")


def mlp_train(
    train: Dataset,
    hidden: int = 9,
    lr: float = 0.1,
    epochs: int = 2000,
    seed: int = 1,
) -> MlpModel:
    """Full-batch gradient descent; expects standardized features."""
    _check_mlp_hyperparameters(hidden, lr, epochs)
    X = train.features
    y = train.labels.astype(float)
    if X.shape[0] < 1:
        raise TooFewRowsError("MLP training needs at least one row")
    m = mlp_init(X.shape[1], int(hidden), seed)
    W1, b1, w2, b2 = m.W1.copy(), m.b1.copy(), m.w2.copy(), m.b2
    n = X.shape[0]
    for _ in range(int(epochs)):
        a1 = expit(X @ W1.T + b1)
        dz = (expit(a1 @ w2 + b2) - y) / n
        dh = np.outer(dz, w2) * a1 * (1.0 - a1)
        w2 -= lr * (a1.T @ dz)
        b2 -= lr * float(dz.sum())
        W1 -= lr * (dh.T @ X)
        b1 -= lr * dh.sum(axis=0)
    return MlpModel(W1, b1, w2, float(b2))


def mlp_predict(model: MlpModel, x) -> tuple[Label, float]:
    p = float(model.proba(np.asarray(x, dtype=float)[None, :])[0])
    return (Label.CHF if p >= 0.5 else Label.NORMAL), p


# Classifier specs -----------------------------------------------------------

CLASSIFIER_NAMES = ("lda", "nb", "mlp")


@dataclass(frozen=True)
class ClassifierSpec:
    """Which classifier to train and with what hyperparameters."""

    name: str = "lda"
    hidden: int = 9
    lr: float = 0.1
    epochs: int = 2000
    seed: int = 1

    def __post_init__(self):
        name = self.name.lower()
        if name not in CLASSIFIER_NAMES:
            raise BadHyperparameterError(f"unknown classifier {self.name!r}")
        object.__setattr__(self, "name", name)
        if name == "mlp":
            _check_mlp_hyperparameters(self.hidden, self.lr, self.epochs)

    def with_hidden(self, hidden: int) -> "ClassifierSpec":
        return replace(self, hidden=hidden)


@dataclass(frozen=True)
class FittedClassifier:
    spec: ClassifierSpec
    model: object
    scaler: StandardizationParams | None = field(default=None)

    def _prepare(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.scaler.apply(X) if self.scaler is not None else X

    def predict(self, X) -> np.ndarray:
        return self.model.predict(self._prepare(X))

    def score(self, X) -> np.ndarray:
        """LDA score, or CHF probability for NB and MLP."""
        Z = self._prepare(X)
        if isinstance(self.model, LdaModel):
            return self.model.scores(Z)
        if isinstance(self.model, NbModel):
            return self.model.posterior_chf(Z)
        return self.model.proba(Z)


def fit_classifier(spec: ClassifierSpec, train: Dataset) -> FittedClassifier:
    """Train ``spec`` on ``train``; LDA and MLP see features standardized on ``train`` only."""
    _require_both_classes(train.labels, spec.name.upper())
    if spec.name == "nb":
        return FittedClassifier(spec, nb_train(train))
    scaler = standardize_fit(train)
    z = Dataset(scaler.apply(train.features), train.labels, train.subject_ids)
    if spec.name == "lda":
        return FittedClassifier(spec, lda_train(z), scaler)
    return FittedClassifier(spec, mlp_train(z, spec.hidden, spec.lr, spec.epochs, spec.seed), scaler)


# Plain-text model files -------------------------------------------------------

MODEL_FORMAT = "sodp-chf-model"
MODEL_VERSION = 1


def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in np.ravel(values))


def save_model(fitted: FittedClassifier, path) -> None:
    """Write a versioned ``key values...`` text file, one array per line."""
    m = fitted.model
    lines = [f"{MODEL_FORMAT} {MODEL_VERSION}"]
    if isinstance(m, LdaModel):
        lines += ["kind lda", f"inputs {m.weight.size}", f"weight {_fmt(m.weight)}", f"bias {_fmt(m.bias)}"]
    elif isinstance(m, NbModel):
        lines += [
            "kind nb",
            f"inputs {m.means.shape[1]}",
            f"priors {_fmt(m.priors)}",
            f"mean_normal {_fmt(m.means[0])}",
            f"mean_chf {_fmt(m.means[1])}",
            f"var_normal {_fmt(m.variances[0])}",
            f"var_chf {_fmt(m.variances[1])}",
        ]
    elif isinstance(m, MlpModel):
        s = fitted.spec
        lines += [
            "kind mlp",
            f"inputs {m.n_inputs}",
            f"hidden {m.hidden_size}",
            f"lr {_fmt(s.lr)}",
            f"epochs {s.epochs}",
            f"seed {s.seed}",
            f"W1 {_fmt(m.W1)}",
            f"b1 {_fmt(m.b1)}",
            f"w2 {_fmt(m.w2)}",
            f"b2 {_fmt(m.b2)}",
        ]
    else:
        raise TypeError(f"cannot save model of type {type(m).__name__}")
    if fitted.scaler is not None:
        lines += [f"scaler_mean {_fmt(fitted.scaler.mean)}", f"scaler_std {_fmt(fitted.scaler.std)}"]
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> FittedClassifier:
    text = Path(path).read_text().splitlines()
    if not text or text[0].split() != [MODEL_FORMAT, str(MODEL_VERSION)]:
        raise SodpChfError(f"{path}: not a {MODEL_FORMAT} v{MODEL_VERSION} file")
    kv = {}
    for line in text[1:]:
        if line.strip():
            key, _, rest = line.partition(" ")
            kv[key] = rest.split()

    def arr(key):
        return np.array([float(v) for v in kv[key]])

    kind = kv["kind"][0]
    d = int(kv["inputs"][0])
    scaler = None
    if "scaler_mean" in kv:
        scaler = StandardizationParams(arr("scaler_mean"), arr("scaler_std"))
    if kind == "lda":
        return FittedClassifier(ClassifierSpec("lda"), LdaModel(arr("weight"), float(arr("bias")[0])), scaler)
    if kind == "nb":
        model = NbModel(
            arr("priors"),
            np.vstack((arr("mean_normal"), arr("mean_chf"))),
            np.vstack((arr("var_normal"), arr("var_chf"))),
        )
        return FittedClassifier(ClassifierSpec("nb"), model, scaler)
    if kind == "mlp":
        h = int(kv["hidden"][0])
        spec = ClassifierSpec("mlp", h, float(kv["lr"][0]), int(kv["epochs"][0]), int(kv["seed"][0]))
        model = MlpModel(arr("W1").reshape(h, d), arr("b1"), arr("w2"), float(arr("b2")[0]))
        return FittedClassifier(spec, model, scaler)
    raise SodpChfError(f"{path}: unknown model kind {kind!r}")
