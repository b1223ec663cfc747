"""Dataset ingestion, model evaluation, metrics, description length, fitting.

Evaluation uses protected semantics: ``log`` and ``sqrt`` act on the absolute
value of their argument, and the protected power ``|**|`` computes ``|x|^y``
(zero base yields 0 for positive exponents and NaN otherwise).  Gradients in
the parameters are accumulated analytically alongside the forward pass.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .expr import Binary, Const, Expr, Param, Unary, Var, param_indices, size_of

SIGMA2_FLOOR = 1e-12
FISHER_FLOOR = 1e-12

# Operator alphabet used for the description-length structure term.
OPERATOR_ALPHABET = ("+", "-", "*", "/", "^", "|**|", "sin", "cos", "exp", "log", "sqrt", "abs")


class EvaluationError(ValueError):
    pass


class FitFailure(RuntimeError):
    pass


@dataclass
class Dataset:
    X: np.ndarray  # rows x d
    y: np.ndarray  # rows
    columns: list[str] = field(default_factory=list)
    test: Optional["Dataset"] = None

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("predictor rows and target length must align")
        if not self.columns:
            self.columns = [f"x{i}" for i in range(self.X.shape[1])]
        if self.test is not None and self.test.X.shape[1] != self.X.shape[1]:
            raise ValueError("train and test partitions disagree on column count")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_vars(self) -> int:
        return self.X.shape[1]


def load_dataset(path: str, target: Optional[str] = None, test_path: Optional[str] = None) -> Dataset:
    """CSV with a header row; the last column is the target unless named."""

    def read(p: str) -> tuple[np.ndarray, np.ndarray, list[str]]:
        with open(p, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader if row]
        data = np.asarray(rows, dtype=float)
        tcol = header.index(target) if target is not None else len(header) - 1
        mask = [i for i in range(len(header)) if i != tcol]
        return data[:, mask], data[:, tcol], [header[i] for i in mask]

    X, y, cols = read(path)
    ds = Dataset(X, y, cols)
    if test_path is not None:
        Xt, yt, _ = read(test_path)
        ds.test = Dataset(Xt, yt, cols)
    return ds


@dataclass
class FitRecord:
    params: tuple[float, ...]
    fitness: float
    dl: Optional[float]
    size: int
    n_params: int
    loss_kind: str = "mse"


@dataclass
class Metrics:
    mse: float
    r2: Optional[float]
    nll: float


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(e: Expr, theta: Sequence[float], X: np.ndarray) -> np.ndarray:
    """Row-wise evaluation; non-finite rows are left as inf/nan for the caller."""
    X = np.asarray(X, dtype=float)
    theta = np.asarray(theta, dtype=float)
    with np.errstate(all="ignore"):
        return _eval(e, theta, X)


def _eval(e: Expr, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    if isinstance(e, Const):
        return np.full(n, e.value)
    if isinstance(e, Var):
        if e.index >= X.shape[1]:
            raise EvaluationError(f"variable x{e.index} missing from the dataset")
        return X[:, e.index].copy()
    if isinstance(e, Param):
        if e.index >= theta.shape[0]:
            raise EvaluationError(f"no value supplied for parameter t{e.index}")
        return np.full(n, theta[e.index])
    if isinstance(e, Unary):
        u = _eval(e.child, theta, X)
        return _apply_unary(e.op, u)
    if isinstance(e, Binary):
        a = _eval(e.left, theta, X)
        b = _eval(e.right, theta, X)
        return _apply_binary(e.op, a, b)
    raise EvaluationError(f"cannot evaluate {e!r}")


def _apply_unary(op: str, u: np.ndarray) -> np.ndarray:
    if op == "sin":
        return np.sin(u)
    if op == "cos":
        return np.cos(u)
    if op == "exp":
        return np.exp(u)
    if op == "log":
        return np.log(np.abs(u))
    if op == "sqrt":
        return np.sqrt(np.abs(u))
    if op == "abs":
        return np.abs(u)
    raise EvaluationError(f"unknown unary operator {op!r}")


def _apply_binary(op: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if op == "^":
        return np.power(a, b)
    if op == "|**|":
        base = np.abs(a)
        out = np.power(base, b)
        # |x| = 0 is only defined for positive exponents
        zero = base == 0.0
        out = np.where(zero & (b > 0), 0.0, out)
        out = np.where(zero & (b <= 0), np.nan, out)
        return out
    raise EvaluationError(f"unknown binary operator {op!r}")


def eval_with_grad(e: Expr, theta: Sequence[float], X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predictions and the Jacobian d prediction / d theta (rows x p)."""
    X = np.asarray(X, dtype=float)
    theta = np.asarray(theta, dtype=float)
    with np.errstate(all="ignore"):
        v, j = _eval_grad(e, theta, X)
    return v, j


def _eval_grad(e: Expr, theta: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, p = X.shape[0], theta.shape[0]
    if isinstance(e, Const):
        return np.full(n, e.value), np.zeros((n, p))
    if isinstance(e, Var):
        return X[:, e.index].copy(), np.zeros((n, p))
    if isinstance(e, Param):
        j = np.zeros((n, p))
        j[:, e.index] = 1.0
        return np.full(n, theta[e.index]), j
    if isinstance(e, Unary):
        u, ju = _eval_grad(e.child, theta, X)
        if e.op == "sin":
            return np.sin(u), np.cos(u)[:, None] * ju
        if e.op == "cos":
            return np.cos(u), -np.sin(u)[:, None] * ju
        if e.op == "exp":
            v = np.exp(u)
            return v, v[:, None] * ju
        if e.op == "log":
            return np.log(np.abs(u)), (1.0 / u)[:, None] * ju
        if e.op == "sqrt":
            v = np.sqrt(np.abs(u))
            return v, (np.sign(u) / (2.0 * v))[:, None] * ju
        if e.op == "abs":
            return np.abs(u), np.sign(u)[:, None] * ju
        raise EvaluationError(f"unknown unary operator {e.op!r}")
    if isinstance(e, Binary):
        a, ja = _eval_grad(e.left, theta, X)
        b, jb = _eval_grad(e.right, theta, X)
        if e.op == "+":
            return a + b, ja + jb
        if e.op == "-":
            return a - b, ja - jb
        if e.op == "*":
            return a * b, b[:, None] * ja + a[:, None] * jb
        if e.op == "/":
            return a / b, (ja * b[:, None] - a[:, None] * jb) / (b * b)[:, None]
        if e.op == "^":
            v = np.power(a, b)
            da = b * np.power(a, b - 1.0)
            db = v * np.log(a)
            return v, da[:, None] * ja + db[:, None] * jb
        if e.op == "|**|":
            v = _apply_binary("|**|", a, b)
            base = np.abs(a)
            da = b * np.power(base, b - 1.0) * np.sign(a)
            db = v * np.log(base)
            return v, da[:, None] * ja + db[:, None] * jb
        raise EvaluationError(f"unknown binary operator {e.op!r}")
    raise EvaluationError(f"cannot evaluate {e!r}")


# ---------------------------------------------------------------------------
# Metrics and fitness


def gaussian_nll(residuals: np.ndarray) -> float:
    """NLL under the plug-in MLE noise variance sigma^2 = SSR / n."""
    n = residuals.shape[0]
    sigma2 = max(float(np.sum(residuals**2)) / n, SIGMA2_FLOOR)
    return 0.5 * n * (np.log(2.0 * np.pi * sigma2) + 1.0)


def metrics(e: Expr, theta: Sequence[float], X: np.ndarray, y: np.ndarray) -> Metrics:
    yhat = evaluate(e, theta, X)
    r = yhat - y
    mse = float(np.mean(r**2))
    sst = float(np.sum((y - np.mean(y)) ** 2))
    r2 = None if sst == 0.0 else 1.0 - float(np.sum(r**2)) / sst
    return Metrics(mse=mse, r2=r2, nll=gaussian_nll(r))


def fitness_of(e: Expr, theta: Sequence[float], data: Dataset, loss_kind: str = "mse") -> float:
    """Maximization convention: the negated loss."""
    m = metrics(e, theta, data.X, data.y)
    return -m.mse if loss_kind == "mse" else -m.nll


def _loss_and_grad(e: Expr, theta: np.ndarray, X: np.ndarray, y: np.ndarray, loss_kind: str):
    yhat, jac = eval_with_grad(e, theta, X)
    r = yhat - y
    if not np.all(np.isfinite(r)):
        return None, None
    n = X.shape[0]
    ssr = float(np.sum(r**2))
    if loss_kind == "mse":
        loss = ssr / n
        grad = (2.0 / n) * (r @ jac)
    else:
        sigma2 = max(ssr / n, SIGMA2_FLOOR)
        loss = 0.5 * n * (np.log(2.0 * np.pi * sigma2) + 1.0)
        grad = (r @ jac) / sigma2 if ssr / n > SIGMA2_FLOOR else np.zeros_like(theta)
    if not np.all(np.isfinite(grad)):
        return loss, None
    return loss, grad


def fit_params(
    e: Expr,
    data: Dataset,
    loss_kind: str = "mse",
    restarts: int = 10,
    seed: int = 0,
) -> tuple[np.ndarray, float]:
    """Best of ``restarts`` gradient-based local fits from random starts.

    Starting points are drawn Uniform(-2, 2) from a generator seeded with
    ``seed``, so results are bit-reproducible.  A restart whose optimum
    leaves any training row non-finite is discarded; if every restart is
    discarded the fit fails.
    """
    if data.n_rows == 0:
        raise FitFailure("empty dataset")
    p = max(param_indices(e), default=-1) + 1
    if p == 0:
        theta = np.zeros(0)
        fit = fitness_of(e, theta, data, loss_kind)
        if not np.isfinite(fit):
            raise FitFailure("expression is non-finite on the training data")
        return theta, fit
    rng = np.random.default_rng(seed)
    starts = rng.uniform(-2.0, 2.0, size=(max(restarts, 1), p))

    def objective(theta: np.ndarray):
        loss, grad = _loss_and_grad(e, theta, data.X, data.y, loss_kind)
        if loss is None or grad is None:
            return 1e30, np.zeros_like(theta)
        return loss, grad

    best_theta, best_fit = None, -np.inf
    for theta0 in starts:
        res = minimize(objective, theta0, jac=True, method="L-BFGS-B")
        theta = res.x
        yhat = evaluate(e, theta, data.X)
        if not np.all(np.isfinite(yhat)):
            continue
        fit = fitness_of(e, theta, data, loss_kind)
        if np.isfinite(fit) and fit > best_fit:
            best_theta, best_fit = theta, fit
    if best_theta is None:
        raise FitFailure("all restarts produced non-finite fits")
    return best_theta, best_fit


# ---------------------------------------------------------------------------
# Description length


def alphabet_size(n_vars: int) -> int:
    """Operators plus terminals: the variables and the parameter token."""
    return len(OPERATOR_ALPHABET) + n_vars + 1


def description_length(e: Expr, theta: Sequence[float], data: Dataset) -> float:
    """Model-selection score: data NLL plus structure and parameter codes.

    DL = NLL + k*log|A| + sum_j [ log(I_jj)/2 + log|theta_j| ] - (p/2)*log 3
    over the nonzero parameters, where k is the node count, |A| the alphabet
    size, and I the Gauss-Newton diagonal of the observed Fisher information.
    Zero parameters are dropped from the code entirely.
    """
    theta = np.asarray(theta, dtype=float)
    yhat, jac = eval_with_grad(e, theta, data.X)
    r = yhat - data.y
    n = data.n_rows
    sigma2 = max(float(np.sum(r**2)) / n, SIGMA2_FLOOR)
    nll = 0.5 * n * (np.log(2.0 * np.pi * sigma2) + 1.0)
    k = size_of(e)
    dl = nll + k * np.log(alphabet_size(data.n_vars))
    fisher = np.sum(jac**2, axis=0) / sigma2
    p_effective = 0
    for j, tj in enumerate(theta):
        if tj == 0.0:
            continue
        p_effective += 1
        ijj = max(float(fisher[j]), FISHER_FLOOR)
        dl += 0.5 * np.log(ijj) + np.log(abs(tj))
    dl -= 0.5 * p_effective * np.log(3.0)
    return float(dl)
