"""Desk-scale problem generators and exact-solution oracles."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.io
import scipy.optimize

from .core import Convexity, FiniteSumProblem, ProblemConstants
from .losses import FAMILIES, Family, component_infimum, link_derivative, link_value, LossSpec
from .stepsize import sps

NEWTON_MAX_ITER = 200
NEWTON_GTOL = 1e-10
# sigma^2 below this (relative to max(1, |f*|)) is rounding error: the problem interpolates
SIGMA_SQ_TOL = 1e-14


def _sigma_sq(f_star: float, mean_inf: float) -> float:
    s = f_star - mean_inf
    return 0.0 if s <= SIGMA_SQ_TOL * max(1.0, abs(f_star)) else s


class LinearModelProblem(FiniteSumProblem):
    """``f_i(x) = phi(t_i(x)) + lam/2 ||x||^2`` with a linear argument.

    ``t_i = b_i <a_i, x>`` for the classification families and
    ``t_i = <a_i, x> - y_i`` for the squared loss; ``targets`` holds ``b_i``
    or ``y_i`` accordingly.
    """

    def __init__(self, A: np.ndarray, targets: np.ndarray, family: Family, lam: float = 0.0,
                 *, infima: np.ndarray | None = None, convexity: Convexity | None = None):
        if family not in FAMILIES:
            raise ValueError(f"unknown loss family {family!r}")
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        A = np.array(A, dtype=np.float64)
        targets = np.array(targets, dtype=np.float64)
        if A.ndim != 2 or targets.shape != (A.shape[0],):
            raise ValueError("A must be n x d with one target per row")
        if family != "squared" and not np.all(np.abs(targets) == 1.0):
            raise ValueError("classification targets must be +1 or -1")
        A.setflags(write=False)
        targets.setflags(write=False)
        self.A, self.targets, self.family, self.lam = A, targets, family, float(lam)
        if infima is None:
            infima = [component_infimum(LossSpec(family, A[i], targets[i], lam)) for i in range(A.shape[0])]
        row_sq = np.einsum("ij,ij->i", A, A)
        if family == "logistic":
            smoothness = row_sq / 4 + lam
        elif family == "squared":
            smoothness = row_sq + lam
        else:
            smoothness = None
        if convexity is None:
            convexity = Convexity("strongly_convex", lam) if lam > 0 else Convexity("convex")
        super().__init__(A.shape[0], A.shape[1], infima, smoothness=smoothness, convexity=convexity)
        self.smooth = family != "hinge"

    def spec(self, i: int) -> LossSpec:
        return LossSpec(self.family, self.A[i], float(self.targets[i]), self.lam)

    def _args(self, rows: np.ndarray, targets: np.ndarray, x: np.ndarray) -> np.ndarray:
        dots = rows @ x
        return dots - targets if self.family == "squared" else targets * dots

    def _chain(self, targets: np.ndarray, d: np.ndarray) -> np.ndarray:
        return d if self.family == "squared" else d * targets

    def component_value(self, i, x):
        x = np.asarray(x, dtype=np.float64)
        t = self._args(self.A[i:i + 1], self.targets[i:i + 1], x)
        return float(link_value(self.family, t)[0]) + 0.5 * self.lam * float(x @ x)

    def component_gradient(self, i, x):
        x = np.asarray(x, dtype=np.float64)
        t = self._args(self.A[i:i + 1], self.targets[i:i + 1], x)
        s = self._chain(self.targets[i:i + 1], link_derivative(self.family, t))[0]
        return s * self.A[i] + self.lam * x

    def component_values(self, x):
        x = np.asarray(x, dtype=np.float64)
        return link_value(self.family, self._args(self.A, self.targets, x)) + 0.5 * self.lam * float(x @ x)

    def batch_value_and_gradient(self, indices, x):
        rows, tg = self.A[indices], self.targets[indices]
        t = self._args(rows, tg, x)
        val = float(np.mean(link_value(self.family, t))) + 0.5 * self.lam * float(x @ x)
        s = self._chain(tg, link_derivative(self.family, t))
        return val, (s @ rows) / len(indices) + self.lam * x

    def full_value(self, x):
        return float(np.mean(self.component_values(x)))

    def full_gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        t = self._args(self.A, self.targets, x)
        s = self._chain(self.targets, link_derivative(self.family, t))
        return (s @ self.A) / self.n + self.lam * x

    def full_hessian(self, x):
        """Hessian of the mean loss (smooth families only)."""
        t = self._args(self.A, self.targets, np.asarray(x, dtype=np.float64))
        if self.family == "logistic":
            p = 0.25 * (1.0 - np.tanh(0.5 * t) ** 2)
        elif self.family == "exponential":
            p = np.exp(-t)
        elif self.family == "squared":
            p = np.ones_like(t)
        else:
            raise ValueError("hinge loss has no Hessian")
        return (self.A.T * p) @ self.A / self.n + self.lam * np.eye(self.dim)


class LinearSystemProblem(FiniteSumProblem):
    """Stochastic reformulation of a consistent system ``Ax = b`` under row sketches.

    Component ``i`` is ``(A_i x - b_i)^2 / (2 ||A_i||^2)`` and is drawn with
    probability ``||A_i||^2 / ||A||_F^2``; SGD on it with unit step is
    randomized Kaczmarz.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, *, check_consistent: bool = True):
        A = np.array(A, dtype=np.float64)
        b = np.array(b, dtype=np.float64)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("A must be m x d with len(b) == m")
        row_sq = np.einsum("ij,ij->i", A, A)
        fro = row_sq.sum()
        if fro == 0:
            raise ValueError("A must be nonzero")
        if check_consistent:
            sol = np.linalg.lstsq(A, b, rcond=None)[0]
            if np.linalg.norm(A @ sol - b) > 1e-10 * max(1.0, np.linalg.norm(b)):
                raise ValueError("linear system is inconsistent")
        A.setflags(write=False)
        b.setflags(write=False)
        self.A, self.b, self.row_sq = A, b, row_sq
        self.probabilities = row_sq / fro
        self.W = A.T @ A / fro
        eig = np.linalg.eigvalsh(self.W)
        tol = max(A.shape) * np.finfo(float).eps * eig.max()
        self.lambda_min_plus = float(eig[eig > tol].min())
        self.lambda_max = float(eig.max())
        super().__init__(A.shape[0], A.shape[1], np.zeros(A.shape[0]), weights=self.probabilities.copy(),
                         smoothness=np.where(row_sq > 0, 1.0, 0.0) + 0.0,
                         convexity=Convexity("pl", self.lambda_min_plus))

    def _inv_row_sq(self, i):
        return 0.0 if self.row_sq[i] == 0 else 1.0 / self.row_sq[i]

    def component_value(self, i, x):
        r = float(self.A[i] @ x) - self.b[i]
        return 0.5 * r * r * self._inv_row_sq(i)

    def component_gradient(self, i, x):
        r = float(self.A[i] @ x) - self.b[i]
        return (r * self._inv_row_sq(i)) * self.A[i]

    def component_values(self, x):
        r = self.A @ x - self.b
        return 0.5 * r * r * np.where(self.row_sq > 0, 1.0 / np.where(self.row_sq > 0, self.row_sq, 1.0), 0.0)

    def batch_value_and_gradient(self, indices, x):
        if len(indices) == 1:
            i = int(indices[0])
            return self.component_value(i, x), self.component_gradient(i, x)
        return super().batch_value_and_gradient(indices, x)

    def full_value(self, x):
        r = self.A @ x - self.b
        return float(r @ r) / (2 * self.row_sq.sum())

    def full_gradient(self, x):
        return self.A.T @ (self.A @ x - self.b) / self.row_sq.sum()

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``x`` onto the solution set."""
        return x + np.linalg.pinv(self.A) @ (self.b - self.A @ x)


class MatrixFactorizationProblem(FiniteSumProblem):
    """``f_j(W1, W2) = ||W2 W1 x_j - A x_j||^2`` over a fixed sample set.

    Parameters are flattened as ``[vec(W1), vec(W2)]`` with ``W1`` of shape
    ``k x p`` and ``W2`` of shape ``q x k`` for ``A`` of shape ``q x p``.
    """

    def __init__(self, A: np.ndarray, X: np.ndarray, rank: int):
        A = np.array(A, dtype=np.float64)
        X = np.array(X, dtype=np.float64)
        if rank < 1:
            raise ValueError("rank must be at least 1")
        if X.ndim != 2 or X.shape[0] != A.shape[1]:
            raise ValueError("samples must be columns of a p x m matrix")
        A.setflags(write=False)
        X.setflags(write=False)
        self.A, self.X, self.rank = A, X, int(rank)
        self.Y = A @ X
        q, p = A.shape
        self.shapes = ((rank, p), (q, rank))
        super().__init__(X.shape[1], rank * p + q * rank, np.zeros(X.shape[1]), convexity=Convexity("pl"))

    def unpack(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        (k, p), (q, _) = self.shapes
        return theta[:k * p].reshape(k, p), theta[k * p:].reshape(q, k)

    def pack(self, W1: np.ndarray, W2: np.ndarray) -> np.ndarray:
        return np.concatenate([W1.ravel(), W2.ravel()])

    def initial_point(self, seed: int = 0, scale: float = 1.0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        (k, p), (q, _) = self.shapes
        W1 = rng.standard_normal((k, p)) * scale / math.sqrt(p)
        W2 = rng.standard_normal((q, k)) * scale / math.sqrt(k)
        return self.pack(W1, W2)

    def _residual(self, theta, cols):
        W1, W2 = self.unpack(theta)
        H = W1 @ self.X[:, cols]
        return W1, W2, H, W2 @ H - self.Y[:, cols]

    def component_value(self, i, x):
        *_, R = self._residual(x, slice(i, i + 1))
        return float(np.sum(R * R))

    def component_gradient(self, i, x):
        return self.batch_value_and_gradient(np.array([i]), x)[1]

    def component_values(self, x):
        *_, R = self._residual(x, slice(None))
        return np.einsum("ij,ij->j", R, R)

    def batch_value_and_gradient(self, indices, x):
        W1, W2, H, R = self._residual(x, indices)
        b = len(indices)
        gW2 = 2.0 * R @ H.T / b
        gW1 = 2.0 * (W2.T @ R) @ self.X[:, indices].T / b
        return float(np.sum(R * R)) / b, self.pack(gW1, gW2)

    def full_value(self, x):
        return float(np.mean(self.component_values(x)))

    def full_gradient(self, x):
        return self.batch_value_and_gradient(np.arange(self.n), x)[1]


# --------------------------------------------------------------------------
# generators


def _sparse_features(rng, n, d, sparsity):
    mask = rng.random((n, d)) < sparsity
    empty = ~mask.any(axis=1)
    mask[empty, rng.integers(0, d, size=int(empty.sum()))] = True
    return np.where(mask, rng.standard_normal((n, d)), 0.0)


def generate_synthetic_classification(
    n: int = 1000,
    d: int = 100,
    sparsity: float = 0.1,
    lam: float = 0.0,
    seed: int = 0,
    *,
    family: Family = "logistic",
    label_noise: float = 0.1,
    fistar: str = "lambert",
    normalize_rows: bool = True,
) -> tuple[LinearModelProblem, ProblemConstants]:
    """Sparse Gaussian features, a planted separator and flipped labels.

    Each feature is nonzero with probability ``sparsity`` (every row keeps at
    least one nonzero) and, by default, rows are scaled to unit norm so that
    every ``L_i`` is ``1/4 + lam``. Labels are ``sign(<a_i, w>)`` with a
    fraction ``label_noise`` flipped. With ``lam = 0`` the data must have rank ``d``.
    ``fistar="zero"`` is only accepted without regularization.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if not 0 < sparsity <= 1:
        raise ValueError("sparsity must lie in (0, 1]")
    if lam < 0 or not 0 <= label_noise < 0.5:
        raise ValueError("need lam >= 0 and label_noise in [0, 0.5)")
    if family not in ("logistic", "exponential"):
        raise ValueError("synthetic classification supports logistic and exponential losses")
    if fistar not in ("lambert", "zero"):
        raise ValueError("fistar must be 'lambert' or 'zero'")
    if lam > 0 and fistar != "lambert":
        raise ValueError("regularized losses need the Lambert f_i* path")
    rng = np.random.default_rng(seed)
    A = _sparse_features(rng, n, d, sparsity)
    if normalize_rows:
        A /= np.linalg.norm(A, axis=1, keepdims=True)
    w = rng.standard_normal(d)
    labels = np.sign(A @ w)
    labels[labels == 0] = 1.0
    labels[rng.random(n) < label_noise] *= -1
    if lam == 0 and np.linalg.matrix_rank(A) < d:
        raise ValueError("unregularized problem is not strongly convex: feature matrix is rank deficient")
    problem = LinearModelProblem(A, labels, family, lam)
    return problem, solve_exact(problem).constants


def generate_least_squares(n: int = 50, d: int = 20, seed: int = 0, *, noise: float = 0.0,
                           lam: float = 0.0) -> LinearModelProblem:
    """Gaussian least squares; ``noise = 0`` gives a realizable (interpolating) problem."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d))
    y = A @ rng.standard_normal(d) + noise * rng.standard_normal(n)
    return LinearModelProblem(A, y, "squared", lam)


def generate_separable_hinge(n: int = 40, d: int = 10, seed: int = 0, *, min_margin: float = 0.1) -> LinearModelProblem:
    """Unregularized hinge loss on linearly separable data (interpolation holds)."""
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(d)
    w /= np.linalg.norm(w)
    rows = []
    while len(rows) < n:
        a = rng.standard_normal(d)
        if abs(a @ w) >= min_margin:
            rows.append(a)
    A = np.array(rows)
    return LinearModelProblem(A, np.sign(A @ w), "hinge", 0.0)


def generate_linear_system(m: int, d: int, seed: int = 0) -> LinearSystemProblem:
    """Gaussian ``A`` with ``b = A x_planted``."""
    if m < 1 or d < 1:
        raise ValueError("m and d must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, d))
    return LinearSystemProblem(A, A @ rng.standard_normal(d))


def conditioned_matrix(q: int, p: int, cond_number: float, rng, spectrum: str = "cliff") -> np.ndarray:
    """Random ``q x p`` matrix with condition number ``cond_number``.

    ``loguniform`` spaces singular values geometrically from 1 to
    ``1/cond_number``. ``cliff`` keeps the leading ``p - 1`` values in
    ``[0.2, 1]`` and puts only the last at ``1/cond_number``, so a rank
    deficient factorization leaves a visible residual.
    """
    r = min(q, p)
    if spectrum == "loguniform":
        s = np.logspace(0, -math.log10(cond_number), r)
    elif spectrum == "cliff":
        s = np.concatenate([np.linspace(1.0, 0.2, r - 1), [1.0 / cond_number]]) if r > 1 else np.ones(1)
    else:
        raise ValueError(f"unknown spectrum {spectrum!r}")
    U, _ = np.linalg.qr(rng.standard_normal((q, r)))
    V, _ = np.linalg.qr(rng.standard_normal((p, r)))
    return (U * s) @ V.T


def generate_matrix_factorization(rank_k: int, num_samples: int = 1000, cond_number: float = 1e10,
                                  seed: int = 0, *, shape: tuple[int, int] = (10, 6),
                                  spectrum: str = "cliff") -> MatrixFactorizationProblem:
    if rank_k < 1 or num_samples < 1:
        raise ValueError("rank_k and num_samples must be positive")
    rng = np.random.default_rng(seed)
    A = conditioned_matrix(*shape, cond_number, rng, spectrum)
    X = rng.standard_normal((shape[1], num_samples))
    return MatrixFactorizationProblem(A, X, rank_k)


# --------------------------------------------------------------------------
# exact solutions


class ExactSolution(NamedTuple):
    x_star: np.ndarray
    f_star: float
    sigma_sq: float
    constants: ProblemConstants


class NewtonFailure(RuntimeError):
    pass


def _newton(problem: LinearModelProblem, x0: np.ndarray) -> np.ndarray:
    x = x0.copy()
    f = problem.full_value(x)
    for _ in range(NEWTON_MAX_ITER):
        g = problem.full_gradient(x)
        if np.linalg.norm(g) <= NEWTON_GTOL:
            return x
        H = problem.full_hessian(x)
        step = np.linalg.solve(H, g)
        t = 1.0
        while True:
            x_new = x - t * step
            f_new = problem.full_value(x_new)
            if f_new <= f - 1e-4 * t * float(g @ step) or t < 1e-12:
                break
            t *= 0.5
        if t < 1e-12 and f_new >= f:
            # line search stalled at machine precision
            if np.linalg.norm(g) <= 1e3 * NEWTON_GTOL:
                return x
            break
        x, f = x_new, f_new
    raise NewtonFailure(f"Newton did not reach ||grad|| <= {NEWTON_GTOL} in {NEWTON_MAX_ITER} iterations")


def _hinge_projection(problem: LinearModelProblem, x0: np.ndarray) -> np.ndarray:
    Z = problem.A * problem.targets[:, None]
    res = scipy.optimize.minimize(
        lambda x: 0.5 * float((x - x0) @ (x - x0)), x0, jac=lambda x: x - x0, method="SLSQP",
        constraints=[{"type": "ineq", "fun": lambda x: Z @ x - 1.0, "jac": lambda x: Z}],
        options={"ftol": 1e-14, "maxiter": 500},
    )
    if not res.success or np.min(Z @ res.x) < 1.0 - 1e-9:
        raise NewtonFailure(f"hinge projection failed: {res.message}")
    # nudge onto the feasible side so every component is exactly at its infimum
    x = res.x
    worst = float(np.min(Z @ x))
    return x / worst if worst < 1.0 else x


def solve_exact(problem: FiniteSumProblem, x0: np.ndarray | None = None) -> ExactSolution:
    """``x*``, ``f*``, ``sigma^2 = f(x*) - mean f_i*`` and the bound constants.

    Linear systems and separable hinge problems have solution sets; ``x*`` is
    then the projection of ``x0`` (default: origin) onto that set.
    """
    x0 = np.zeros(problem.dim) if x0 is None else np.asarray(x0, dtype=np.float64)
    if isinstance(problem, LinearSystemProblem):
        x_star = problem.project(x0)
        return ExactSolution(x_star, 0.0, 0.0, ProblemConstants(
            mu=problem.lambda_min_plus, L_max=1.0, L=problem.lambda_max, sigma_sq=0.0,
            x_star=x_star, f_star=0.0, z_sq=None, mu_min=0.0, lambda_min_plus_W=problem.lambda_min_plus,
        ))
    if not isinstance(problem, LinearModelProblem):
        raise ValueError(f"no exact solver for {type(problem).__name__}")

    fam, lam, A = problem.family, problem.lam, problem.A
    row_sq = np.einsum("ij,ij->i", A, A)
    gram_max = float(np.linalg.eigvalsh(A.T @ A / problem.n).max())
    if fam == "hinge":
        if lam != 0:
            raise ValueError("exact hinge solve needs lam = 0 on separable data")
        x_star = _hinge_projection(problem, x0)
        G = float(np.sqrt(row_sq.max()))
        f_star = problem.full_value(x_star)
        sigma_sq = _sigma_sq(f_star, problem.mean_infimum())
        return ExactSolution(x_star, f_star, sigma_sq, ProblemConstants(
            mu=0.0, L_max=math.inf, L=math.inf, sigma_sq=sigma_sq,
            x_star=x_star, f_star=f_star, G=G, z_sq=float(row_sq.mean()), mu_min=0.0,
        ))
    if fam == "squared":
        H = problem.full_hessian(x0)
        x_star = np.linalg.lstsq(H, A.T @ problem.targets / problem.n, rcond=None)[0]
        eig = np.linalg.eigvalsh(H)
        mu, L = float(max(eig.min(), 0.0)), float(eig.max())
        z_sq, G = None, None
    else:
        x_star = _newton(problem, x0)
        H = problem.full_hessian(x_star)
        eig = np.linalg.eigvalsh(H)
        # lam is a global strong-convexity constant; without it fall back to the local Hessian
        mu = lam if lam > 0 else float(eig.min())
        if fam == "logistic":
            L = gram_max / 4 + lam
            z_sq = float(row_sq.mean())
            G = None if lam > 0 else float(np.sqrt(row_sq.max()))
        else:
            L = float(eig.max())
            z_sq, G = None, None
    if problem.smoothness is not None:
        L_max = float(problem.smoothness.max())
    else:
        # local smoothness at x* (exponential loss is not globally smooth)
        L_max = float(np.max(np.exp(-problem.targets * (A @ x_star)) * row_sq) + lam)
    f_star = problem.full_value(x_star)
    sigma_sq = _sigma_sq(f_star, problem.mean_infimum())
    # component Hessians are rank one plus lam*I
    mu_min = lam
    return ExactSolution(x_star, f_star, sigma_sq, ProblemConstants(
        mu=mu, L_max=L_max, L=L, sigma_sq=sigma_sq, x_star=x_star, f_star=f_star,
        G=G, z_sq=z_sq, mu_min=mu_min,
    ))


def kaczmarz_sps_step(problem: LinearSystemProblem, x: np.ndarray, i: int) -> tuple[np.ndarray, float]:
    """One SGD step on row ``i`` with the generic SPS formula (``c = 1/2``, ``f_i* = 0``)."""
    if not 0 <= i < problem.n:
        raise IndexError(f"row {i} out of range")
    if problem.row_sq[i] == 0:
        raise ValueError(f"row {i} of A is zero")
    g = problem.component_gradient(i, x)
    gamma = sps(problem.component_value(i, x), problem.component_infimum(i), float(g @ g), 0.5)
    return x - gamma * g, gamma


# --------------------------------------------------------------------------
# text serialization


def _write_matrix(path: Path, M: np.ndarray):
    scipy.io.mmwrite(str(path), M, precision=17)


def _read_matrix(path: Path) -> np.ndarray:
    return np.asarray(scipy.io.mmread(str(path)), dtype=np.float64)


def _write_vector(path: Path, v: np.ndarray):
    path.write_text("".join(f"{x!r}\n" for x in np.asarray(v, dtype=np.float64).tolist()))


def _read_vector(path: Path) -> np.ndarray:
    return np.array([float(s) for s in path.read_text().split()], dtype=np.float64)


def save_problem(problem: FiniteSumProblem, directory: str | Path) -> Path:
    """Write a problem as text: ``meta.json``, Matrix Market matrices and one-value-per-line vectors."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(problem, LinearModelProblem):
        meta = {"type": "linear_model", "family": problem.family, "lambda": problem.lam}
        _write_matrix(out / "A.mtx", problem.A)
        _write_vector(out / "targets.txt", problem.targets)
        _write_vector(out / "infima.txt", problem.infima)
    elif isinstance(problem, LinearSystemProblem):
        meta = {"type": "linear_system"}
        _write_matrix(out / "A.mtx", problem.A)
        _write_vector(out / "b.txt", problem.b)
    elif isinstance(problem, MatrixFactorizationProblem):
        meta = {"type": "matrix_factorization", "rank": problem.rank}
        _write_matrix(out / "A.mtx", problem.A)
        _write_matrix(out / "X.mtx", problem.X)
    else:
        raise TypeError(f"cannot serialize {type(problem).__name__}")
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return out


def load_problem(directory: str | Path) -> FiniteSumProblem:
    src = Path(directory)
    meta = json.loads((src / "meta.json").read_text(encoding="utf-8"))
    kind = meta["type"]
    if kind == "linear_model":
        return LinearModelProblem(_read_matrix(src / "A.mtx"), _read_vector(src / "targets.txt"),
                                  meta["family"], meta["lambda"], infima=_read_vector(src / "infima.txt"))
    if kind == "linear_system":
        return LinearSystemProblem(_read_matrix(src / "A.mtx"), _read_vector(src / "b.txt"))
    if kind == "matrix_factorization":
        return MatrixFactorizationProblem(_read_matrix(src / "A.mtx"), _read_matrix(src / "X.mtx"), meta["rank"])
    raise ValueError(f"unknown problem type {kind!r}")
