"""Linear epsilon-insensitive support-vector regression.

Training minimizes  0.5*||w||^2 + C * sum_i max(0, |y_i - (w.x_i + b)| - eps)
over min-max scaled features. The solver works on the dual in the
reduced variables beta_i in [-C, C] (sum beta_i = 0 for the free bias):
each outer pass does a seed-derived permutation sweep of two-coordinate
updates followed by greedy maximal-violating-pair steps, stopping on a
relative duality gap below tolerance. Everything is deterministic given
the seed; predictions are pure.
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from numba import njit

from .errors import ConvergenceError, InvalidArgumentError, ModelParseError

MODEL_MAGIC = "CEIQ-MODEL v1"

DEFAULT_C = 1.0
DEFAULT_EPSILON = 0.1
MAX_PASSES = 10000
GAP_TOL = 1e-6

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class TrainingSet:
    """Feature matrix (n, 5) with subjective scores (n,) and provenance."""

    features: np.ndarray
    scores: np.ndarray
    source: str = ""
    polarity: str = "MOS"

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        scores = np.asarray(self.scores, dtype=np.float64)
        if feats.ndim != 2:
            raise InvalidArgumentError("features must be a 2-D array")
        if scores.ndim != 1 or len(scores) != len(feats):
            raise InvalidArgumentError("scores must be 1-D and match the feature rows")
        if not np.isfinite(feats).all() or not np.isfinite(scores).all():
            raise InvalidArgumentError("features and scores must be finite")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class SvrModel:
    weights: np.ndarray
    bias: float
    feature_min: np.ndarray
    feature_max: np.ndarray
    c: float
    epsilon: float
    format_version: int = 1
    metadata: Dict[str, str] = field(default_factory=dict)


def scale_fit(train: TrainingSet) -> Tuple[np.ndarray, np.ndarray]:
    """Per-feature min/max over the training samples."""
    if len(train) == 0:
        raise InvalidArgumentError("cannot fit scaling on an empty training set")
    return train.features.min(axis=0), train.features.max(axis=0)


def scale_apply(features: np.ndarray, feature_min: np.ndarray,
                feature_max: np.ndarray) -> np.ndarray:
    """Map features linearly so the training range becomes [0, 1].

    Out-of-range inputs extrapolate (no clamping); degenerate dimensions
    (min == max in training) map to 0 for every input.
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    span = feature_max - feature_min
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = (x - feature_min) / span
    scaled[:, span == 0] = 0.0
    return scaled if np.asarray(features).ndim == 2 else scaled[0]


@njit(cache=True, nogil=True)
def _next_rand(state):
    # splitmix64 step; the solver's permutation schedule comes from here
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True, nogil=True)
def _pair_step(X, y, beta, w, kdiag, i, j, C, eps):
    """Exact minimization of the dual along beta_i += d, beta_j -= d."""
    if i == j:
        return
    d = X.shape[1]
    fi = -y[i]
    fj = -y[j]
    kij = 0.0
    for t in range(d):
        fi += w[t] * X[i, t]
        fj += w[t] * X[j, t]
        kij += X[i, t] * X[j, t]
    eta = kdiag[i] + kdiag[j] - 2.0 * kij
    bi = beta[i]
    bj = beta[j]
    lo = max(-C - bi, bj - C)
    hi = min(C - bi, bj + C)
    if hi <= lo:
        return

    # the objective change g(d) is convex piecewise-quadratic; its minimum
    # sits at a sign-regime stationary point, a kink or a box edge
    cand = np.empty(7)
    cand[0] = lo
    cand[1] = hi
    cand[2] = min(max(-bi, lo), hi)
    cand[3] = min(max(bj, lo), hi)
    base = fi - fj
    if eta > 0.0:
        cand[4] = min(max(-base / eta, lo), hi)
        cand[5] = min(max(-(base + 2.0 * eps) / eta, lo), hi)
        cand[6] = min(max(-(base - 2.0 * eps) / eta, lo), hi)
    else:
        cand[4] = cand[0]
        cand[5] = cand[0]
        cand[6] = cand[0]

    best_d = 0.0
    best_g = 0.0
    abs_b = np.abs(bi) + np.abs(bj)
    for k in range(7):
        dd = cand[k]
        g = 0.5 * eta * dd * dd + dd * base + eps * (np.abs(bi + dd) + np.abs(bj - dd) - abs_b)
        if g < best_g:
            best_g = g
            best_d = dd
    if best_d != 0.0:
        beta[i] += best_d
        beta[j] -= best_d
        for t in range(d):
            w[t] += best_d * (X[i, t] - X[j, t])


@njit(cache=True, nogil=True)
def _kkt_bias(beta, resid, C, eps):
    """Bias implied by the KKT conditions at the current dual point."""
    n = len(beta)
    thr = 1e-8 * C
    acc = 0.0
    free = 0
    for i in range(n):
        if thr < beta[i] < C - thr:
            acc += resid[i] - eps
            free += 1
        elif -C + thr < beta[i] < -thr:
            acc += resid[i] + eps
            free += 1
    if free > 0:
        return acc / free
    lo = -np.inf
    hi = np.inf
    for i in range(n):
        if beta[i] >= C - thr:
            hi = min(hi, resid[i] - eps)
        elif beta[i] <= -C + thr:
            lo = max(lo, resid[i] + eps)
        else:
            lo = max(lo, resid[i] - eps)
            hi = min(hi, resid[i] + eps)
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    if np.isfinite(lo):
        return lo
    if np.isfinite(hi):
        return hi
    return 0.0


@njit(cache=True, nogil=True)
def _solve_dual(X, y, C, eps, seed, max_passes, tol):
    n, d = X.shape
    beta = np.zeros(n)
    w = np.zeros(d)
    kdiag = np.empty(n)
    for i in range(n):
        s = 0.0
        for t in range(d):
            s += X[i, t] * X[i, t]
        kdiag[i] = s

    perm = np.empty(n, dtype=np.int64)
    state = np.uint64(seed)
    f = np.empty(n)

    best_primal = np.inf
    best_w = np.zeros(d)
    best_b = 0.0
    primal_log = np.empty(max_passes)
    passes = 0
    converged = False
    gap = np.inf

    for p in range(max_passes):
        # seeded permutation sweep of disjoint pairs
        for i in range(n):
            perm[i] = i
        for i in range(n - 1, 0, -1):
            state, z = _next_rand(state)
            j = np.int64(z % np.uint64(i + 1))
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp
        for k in range(0, n - 1, 2):
            _pair_step(X, y, beta, w, kdiag, perm[k], perm[k + 1], C, eps)

        # greedy polish: repeatedly take the maximal-violating pair
        for _ in range(n // 2 + 1):
            for i in range(n):
                s = 0.0
                for t in range(d):
                    s += w[t] * X[i, t]
                f[i] = s - y[i]
            up_best = np.inf
            dn_best = np.inf
            up_i = -1
            dn_j = -1
            for i in range(n):
                if beta[i] < C:
                    u = f[i] + (eps if beta[i] >= 0.0 else -eps)
                    if u < up_best:
                        up_best = u
                        up_i = i
                if beta[i] > -C:
                    v = -f[i] + (eps if beta[i] <= 0.0 else -eps)
                    if v < dn_best:
                        dn_best = v
                        dn_j = i
            if up_i < 0 or dn_j < 0 or up_best + dn_best >= -1e-12:
                break
            _pair_step(X, y, beta, w, kdiag, up_i, dn_j, C, eps)

        # refresh w from beta to cancel incremental drift, then check the gap
        for t in range(d):
            s = 0.0
            for i in range(n):
                s += beta[i] * X[i, t]
            w[t] = s
        resid = np.empty(n)
        for i in range(n):
            s = y[i]
            for t in range(d):
                s -= w[t] * X[i, t]
            resid[i] = s
        b = _kkt_bias(beta, resid, C, eps)

        wnorm2 = 0.0
        for t in range(d):
            wnorm2 += w[t] * w[t]
        primal = 0.5 * wnorm2
        for i in range(n):
            loss = np.abs(resid[i] - b) - eps
            if loss > 0.0:
                primal += C * loss
        dual = 0.5 * wnorm2
        for i in range(n):
            dual += eps * np.abs(beta[i]) - y[i] * beta[i]
        gap = primal + dual

        if primal < best_primal:
            best_primal = primal
            for t in range(d):
                best_w[t] = w[t]
            best_b = b
        primal_log[p] = best_primal
        passes = p + 1
        if gap <= tol * max(1.0, np.abs(primal)):
            converged = True
            break

    return best_w, best_b, best_primal, primal_log[:passes], passes, converged, gap, beta


def solve_dual(X: np.ndarray, y: np.ndarray, c: float, epsilon: float, seed: int,
               max_passes: int = MAX_PASSES, tol: float = GAP_TOL) -> dict:
    """Run the dual solver on an already-scaled problem; full diagnostics."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w, b, primal, log, passes, converged, gap, beta = _solve_dual(
        X, y, float(c), float(epsilon), np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        max_passes, tol,
    )
    return {
        "weights": w,
        "bias": float(b),
        "primal_objective": float(primal),
        "objective_log": log,
        "passes": int(passes),
        "converged": bool(converged),
        "duality_gap": float(gap),
        "beta": beta,
    }


def train(training: TrainingSet, c: float = DEFAULT_C, epsilon: float = DEFAULT_EPSILON,
          seed: int = 0) -> SvrModel:
    """Fit the regressor; scaling parameters are learned here and embedded."""
    if len(training) < 2:
        raise InvalidArgumentError(f"need at least 2 training samples, got {len(training)}")
    if c <= 0:
        raise InvalidArgumentError("C must be positive")
    if epsilon < 0:
        raise InvalidArgumentError("epsilon must be nonnegative")
    fmin, fmax = scale_fit(training)
    scaled = scale_apply(training.features, fmin, fmax)
    result = solve_dual(scaled, training.scores, c, epsilon, seed)
    if not result["converged"]:
        raise ConvergenceError(
            f"solver did not reach gap tolerance {GAP_TOL} within {MAX_PASSES} passes "
            f"(best primal objective {result['primal_objective']:.9g})",
            achieved_objective=result["primal_objective"],
        )
    metadata = {
        "source": training.source,
        "polarity": training.polarity,
        "n_samples": str(len(training)),
        "passes": str(result["passes"]),
        "primal_objective": format(result["primal_objective"], ".17g"),
    }
    return SvrModel(
        weights=result["weights"],
        bias=result["bias"],
        feature_min=fmin,
        feature_max=fmax,
        c=float(c),
        epsilon=float(epsilon),
        metadata=metadata,
    )


def predict(model: SvrModel, features) -> np.ndarray:
    """Quality score w . scale(features) + bias; scalar in, scalar out."""
    arr = np.asarray(features, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise InvalidArgumentError("features must be finite")
    scaled = scale_apply(arr, model.feature_min, model.feature_max)
    out = scaled @ model.weights + model.bias
    return float(out) if arr.ndim == 1 else out


def _fmt_vector(v: np.ndarray) -> str:
    return " ".join(format(float(x), ".17g") for x in v)


def serialize(model: SvrModel) -> str:
    """Versioned text form; 17 significant digits so round-trips are exact."""
    lines = [MODEL_MAGIC]
    for key in sorted(model.metadata):
        lines.append(f"# {key} = {model.metadata[key]}")
    lines.append(f"weights = {_fmt_vector(model.weights)}")
    lines.append(f"bias = {format(model.bias, '.17g')}")
    lines.append(f"feature_min = {_fmt_vector(model.feature_min)}")
    lines.append(f"feature_max = {_fmt_vector(model.feature_max)}")
    lines.append(f"C = {format(model.c, '.17g')}")
    lines.append(f"epsilon = {format(model.epsilon, '.17g')}")
    return "\n".join(lines) + "\n"


_VECTOR_KEYS = {"weights", "feature_min", "feature_max"}
_SCALAR_KEYS = {"bias", "C", "epsilon"}


def deserialize(text: str) -> SvrModel:
    lines = text.splitlines()
    if not lines:
        raise ModelParseError("empty model file")
    if lines[0].strip() != MODEL_MAGIC:
        raise ModelParseError(f"line 1: expected header {MODEL_MAGIC!r}, got {lines[0].strip()!r}")
    fields: Dict[str, np.ndarray] = {}
    scalars: Dict[str, float] = {}
    metadata: Dict[str, str] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, _, v = body.partition("=")
                metadata[k.strip()] = v.strip()
            continue
        if "=" not in line:
            raise ModelParseError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key in _VECTOR_KEYS:
                fields[key] = np.array([float(tok) for tok in value.split()], dtype=np.float64)
            elif key in _SCALAR_KEYS:
                scalars[key] = float(value)
            else:
                raise ModelParseError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ModelParseError(f"line {lineno}: bad numeric value for {key!r}: {exc}") from exc
    missing = (_VECTOR_KEYS | _SCALAR_KEYS) - set(fields) - set(scalars)
    if missing:
        raise ModelParseError(f"missing fields: {', '.join(sorted(missing))} (truncated file?)")
    n = len(fields["weights"])
    for key in _VECTOR_KEYS:
        if len(fields[key]) != n:
            raise ModelParseError(f"{key} has {len(fields[key])} entries, expected {n}")
    if np.any(fields["feature_min"] > fields["feature_max"]):
        raise ModelParseError("feature_min exceeds feature_max")
    return SvrModel(
        weights=fields["weights"],
        bias=scalars["bias"],
        feature_min=fields["feature_min"],
        feature_max=fields["feature_max"],
        c=scalars["C"],
        epsilon=scalars["epsilon"],
        metadata=metadata,
    )


def save_model(model: SvrModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(model))


def load_model(path) -> SvrModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return deserialize(fh.read())
    except OSError as exc:
        raise ModelParseError(f"{path}: {exc}") from exc
