"""Density models for synthesizing extra student training points.

Transfer sets can be enlarged by sampling new inputs x' from a density
fitted to the training features and labeling them with the teacher's
posteriors.  Three samplers are provided: a diagonal-covariance Gaussian
mixture fit with EM, a Gaussian-product kernel density estimate, and a
uniform box over the observed range.  All of them operate in whatever
feature space the caller passes (the pipeline hands them the
post-imputation, post-rotation matrix the student sees).
"""

from dataclasses import dataclass, field

import numpy as np

from .forest import predict_proba

VARIANCE_FLOOR = 1e-6


def _log_normal_diag(X, mean, var):
    # sum over dims of log N(x_d; mean_d, var_d)
    return -0.5 * (np.log(2.0 * np.pi * var) + (X - mean) ** 2 / var).sum(axis=1)


def _logsumexp(a, axis):
    hi = a.max(axis=axis, keepdims=True)
    return (hi + np.log(np.exp(a - hi).sum(axis=axis, keepdims=True))).squeeze(axis)


@dataclass(frozen=True)
class GmmModel:
    """Diagonal-covariance Gaussian mixture with its EM fitting trace."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    ll_trace: np.ndarray = field(repr=False)

    @property
    def k(self):
        return self.weights.shape[0]

    def log_density(self, X):
        X = np.asarray(X, dtype=np.float64)
        parts = np.stack([
            np.log(self.weights[c]) + _log_normal_diag(X, self.means[c], self.variances[c])
            for c in range(self.k)
        ], axis=1)
        return _logsumexp(parts, axis=1)

    def sample(self, m, rng):
        comp = rng.choice(self.k, size=m, p=self.weights)
        noise = rng.normal(size=(m, self.means.shape[1]))
        return self.means[comp] + noise * np.sqrt(self.variances[comp])


@dataclass(frozen=True)
class KdeModel:
    """Gaussian product-kernel density over the training points."""

    points: np.ndarray
    bandwidths: np.ndarray

    def log_density(self, X):
        X = np.asarray(X, dtype=np.float64)
        var = self.bandwidths**2
        parts = np.stack([
            _log_normal_diag(X, p, var) for p in self.points
        ], axis=1)
        return _logsumexp(parts, axis=1) - np.log(self.points.shape[0])

    def sample(self, m, rng):
        idx = rng.integers(0, self.points.shape[0], size=m)
        noise = rng.normal(size=(m, self.points.shape[1]))
        return self.points[idx] + noise * self.bandwidths


@dataclass(frozen=True)
class UniformModel:
    """Uniform density over the axis-aligned bounding box of the data."""

    lo: np.ndarray
    hi: np.ndarray

    def log_density(self, X):
        X = np.asarray(X, dtype=np.float64)
        widths = np.maximum(self.hi - self.lo, 1e-12)
        inside = ((X >= self.lo) & (X <= self.hi)).all(axis=1)
        out = np.full(X.shape[0], -np.inf)
        out[inside] = -np.log(widths).sum()
        return out

    def sample(self, m, rng):
        return rng.uniform(self.lo, self.hi, size=(m, self.lo.shape[0]))


def _kmeans_pp_centers(X, k, rng):
    """k-means++ seeding: spread initial centers by squared-distance sampling."""
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = ((X - X[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            probs = np.full(n, 1.0 / n)
        else:
            probs = d2 / total
        nxt = int(rng.choice(n, p=probs))
        centers.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[np.array(centers)]


def fit_gmm(X, k, seed, max_iter=200, tol=1e-6):
    """Fit a diagonal-covariance mixture with EM from a k-means++ start.

    Per-dimension variances never drop below VARIANCE_FLOOR.  The mean
    log-likelihood after each iteration is recorded in ll_trace; EM
    guarantees it never decreases (modulo the floor), and fitting stops
    once the gain falls below tol.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("feature matrix must be 2-dimensional")
    n, d = X.shape
    if k < 1:
        raise ValueError("component count must be positive")
    if k > n:
        raise ValueError(f"cannot fit {k} components to {n} points")
    if np.isnan(X).any():
        raise ValueError("features contain NaN; impute before fitting")

    rng = np.random.default_rng(seed)
    means = _kmeans_pp_centers(X, k, rng)
    global_var = np.maximum(X.var(axis=0), VARIANCE_FLOOR)
    variances = np.tile(global_var, (k, 1))
    weights = np.full(k, 1.0 / k)

    trace = []
    prev = -np.inf
    for _ in range(max_iter):
        # E step: responsibilities from current parameters
        logp = np.stack([
            np.log(weights[c]) + _log_normal_diag(X, means[c], variances[c])
            for c in range(k)
        ], axis=1)
        norm = _logsumexp(logp, axis=1)
        resp = np.exp(logp - norm[:, None])
        ll = float(norm.mean())
        trace.append(ll)

        # M step: reweight by responsibilities
        nk = resp.sum(axis=0)
        safe_nk = np.maximum(nk, 1e-300)
        weights = np.maximum(nk / n, 1e-300)
        weights = weights / weights.sum()
        means = (resp.T @ X) / safe_nk[:, None]
        second = (resp.T @ (X * X)) / safe_nk[:, None]
        variances = np.maximum(second - means**2, VARIANCE_FLOOR)

        if ll - prev < tol:
            break
        prev = ll

    return GmmModel(
        weights=weights, means=means, variances=variances, ll_trace=np.array(trace)
    )


def fit_kde(X, bandwidth_floor=1e-6):
    """Kernel density with per-dimension Silverman bandwidths.

    h_d = 1.06 * std_d * n^(-1/5), floored so constant dimensions stay
    usable.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-dimensional matrix with at least two rows")
    if np.isnan(X).any():
        raise ValueError("features contain NaN; impute before fitting")
    n = X.shape[0]
    std = X.std(axis=0, ddof=1)
    h = np.maximum(1.06 * std * n ** (-0.2), bandwidth_floor)
    return KdeModel(points=X.copy(), bandwidths=h)


def fit_uniform(X):
    """Axis-aligned bounding box of the data."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("need a nonempty 2-dimensional matrix")
    if np.isnan(X).any():
        raise ValueError("features contain NaN; impute before fitting")
    return UniformModel(lo=X.min(axis=0), hi=X.max(axis=0))


SAMPLER_NAMES = ("gmm", "kde", "uniform")


def fit_sampler(name, X, seed, gmm_components=5):
    """Fit one of the named density models to a feature matrix."""
    if name == "gmm":
        k = min(gmm_components, X.shape[0])
        return fit_gmm(X, k, seed)
    if name == "kde":
        return fit_kde(X)
    if name == "uniform":
        return fit_uniform(X)
    raise ValueError(f"unknown sampler {name!r}; choose from {SAMPLER_NAMES}")


def augment_training_set(sampler, teacher, X, targets, m, seed):
    """Extend a soft-labeled transfer set with m teacher-labeled draws.

    Samples x' from the density model, labels them with the teacher's
    posteriors, and returns (X stacked with x', targets stacked with the
    new posteriors).  Original rows come first and are untouched.
    """
    if m < 0:
        raise ValueError("sample count must be nonnegative")
    X = np.asarray(X, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if m == 0:
        return X.copy(), targets.copy()
    rng = np.random.default_rng(seed)
    extra = sampler.sample(m, rng)
    extra_t = predict_proba(teacher, extra)
    return np.vstack([X, extra]), np.vstack([targets, extra_t])
