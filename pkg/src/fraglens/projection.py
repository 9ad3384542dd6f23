"""2D projection of embedding vectors (UMAP, implemented here).

Pipeline: exact k-NN graph under cosine distance, smoothed-distance
calibration (binary search for per-point bandwidths), fuzzy simplicial set
symmetrization, then a single-threaded negative-sampling SGD layout. The
layout loop is numba-compiled with a fixed-seed xorshift RNG, so a given
(vectors, params, seed) triple reproduces coordinates bit-for-bit.

Out-of-sample points (example-set overlays) are placed by inverse-distance
weighted averaging over their nearest fitted neighbors, optionally followed
by a short attractive-only optimization against the frozen layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numba
import numpy as np

from .gateway import EmbeddingVector
from .types import POSITIVE

SMOOTH_K_TOLERANCE = 1e-5
MIN_K_DIST_SCALE = 1e-3


@dataclass(frozen=True, slots=True)
class ProjectionParams:
    n_neighbors: int = 15
    min_dist: float = 0.1
    epochs: int = 200
    spread: float = 1.0
    learning_rate: float = 1.0
    negative_sample_rate: int = 5
    repulsion_strength: float = 1.0
    init: str = "pca"  # or "random"


@dataclass(frozen=True, slots=True)
class MapPoint:
    function_ref: str
    x: float
    y: float
    rating: str
    is_example_overlay: bool = False


@dataclass(slots=True)
class ProjectionModel:
    """Fitted projection: training data, neighborhood graph, 2D layout."""

    training: np.ndarray          # (n, d) float64
    knn_indices: np.ndarray       # (n, k) int64
    knn_dists: np.ndarray         # (n, k) float64
    graph_rows: np.ndarray        # COO fuzzy membership graph
    graph_cols: np.ndarray
    graph_vals: np.ndarray
    embedding: np.ndarray         # (n, 2) float64
    params: ProjectionParams
    seed: int
    a: float
    b: float

    def to_doc(self) -> dict:
        return {
            "params": {
                "n_neighbors": self.params.n_neighbors,
                "min_dist": self.params.min_dist,
                "epochs": self.params.epochs,
                "spread": self.params.spread,
                "learning_rate": self.params.learning_rate,
                "negative_sample_rate": self.params.negative_sample_rate,
                "repulsion_strength": self.params.repulsion_strength,
                "init": self.params.init,
            },
            "seed": self.seed,
            "a": self.a,
            "b": self.b,
            "training": self.training.tolist(),
            "knn_indices": self.knn_indices.tolist(),
            "knn_dists": self.knn_dists.tolist(),
            "graph": {
                "rows": self.graph_rows.tolist(),
                "cols": self.graph_cols.tolist(),
                "vals": self.graph_vals.tolist(),
            },
            "embedding": self.embedding.tolist(),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ProjectionModel":
        return cls(
            training=np.asarray(doc["training"], dtype=np.float64),
            knn_indices=np.asarray(doc["knn_indices"], dtype=np.int64),
            knn_dists=np.asarray(doc["knn_dists"], dtype=np.float64),
            graph_rows=np.asarray(doc["graph"]["rows"], dtype=np.int64),
            graph_cols=np.asarray(doc["graph"]["cols"], dtype=np.int64),
            graph_vals=np.asarray(doc["graph"]["vals"], dtype=np.float64),
            embedding=np.asarray(doc["embedding"], dtype=np.float64),
            params=ProjectionParams(**doc["params"]),
            seed=int(doc["seed"]),
            a=float(doc["a"]),
            b=float(doc["b"]),
        )


def cosine_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(a, axis=1, keepdims=True)
    nb = np.linalg.norm(b, axis=1, keepdims=True)
    na[na == 0] = 1.0
    nb[nb == 0] = 1.0
    sim = (a / na) @ (b / nb).T
    return np.clip(1.0 - sim, 0.0, 2.0)


def _knn(dist: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors (excluding self) from a full distance matrix."""
    n = dist.shape[0]
    d = dist.copy()
    np.fill_diagonal(d, np.inf)
    idx = np.argsort(d, axis=1, kind="stable")[:, :k]
    return idx.astype(np.int64), np.take_along_axis(d, idx, axis=1)


def smooth_knn_dist(
    knn_dists: np.ndarray, k: float, *, n_iter: int = 64, local_connectivity: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Per-point bandwidth (sigma) and connectivity offset (rho) such that the
    fuzzy set each point generates has cardinality log2(k)."""
    n = knn_dists.shape[0]
    target = np.log2(k)
    rho = np.zeros(n)
    sigma = np.zeros(n)
    mean_all = float(np.mean(knn_dists)) if knn_dists.size else 0.0

    for i in range(n):
        lo, hi, mid = 0.0, np.inf, 1.0
        row = knn_dists[i]
        non_zero = row[row > 0.0]
        if non_zero.shape[0] >= local_connectivity:
            index = int(np.floor(local_connectivity))
            interpolation = local_connectivity - index
            if index > 0:
                rho[i] = non_zero[index - 1]
                if interpolation > SMOOTH_K_TOLERANCE:
                    rho[i] += interpolation * (non_zero[index] - non_zero[index - 1])
            else:
                rho[i] = interpolation * non_zero[0]
        elif non_zero.shape[0] > 0:
            rho[i] = float(np.max(non_zero))

        for _ in range(n_iter):
            shifted = row[1:] - rho[i]
            psum = float(np.sum(np.where(shifted > 0, np.exp(-np.maximum(shifted, 0.0) / mid), 1.0)))
            if abs(psum - target) < SMOOTH_K_TOLERANCE:
                break
            if psum > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2 if hi == np.inf else (lo + hi) / 2.0
        sigma[i] = mid

        if rho[i] > 0.0:
            mean_i = float(np.mean(row))
            sigma[i] = max(sigma[i], MIN_K_DIST_SCALE * mean_i)
        else:
            sigma[i] = max(sigma[i], MIN_K_DIST_SCALE * mean_all)
    return sigma, rho


def membership_strengths(
    knn_indices: np.ndarray, knn_dists: np.ndarray, sigma: np.ndarray, rho: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, k = knn_indices.shape
    rows = np.repeat(np.arange(n, dtype=np.int64), k)
    cols = knn_indices.reshape(-1)
    vals = _membership_values(knn_dists, sigma, rho).reshape(-1)
    return rows, cols, vals


def _membership_values(dists: np.ndarray, sigma: np.ndarray, rho: np.ndarray) -> np.ndarray:
    # exponent clamped at 0 so the d <= rho case lands on exp(0) = 1 without
    # evaluating exp on huge arguments
    sigma_safe = np.where(sigma == 0.0, 1.0, sigma)[:, None]
    exponent = np.maximum(dists - rho[:, None], 0.0) / sigma_safe
    vals = np.exp(-exponent)
    return np.where(sigma[:, None] == 0.0, 1.0, vals)


def fuzzy_simplicial_set(
    knn_indices: np.ndarray, knn_dists: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetrized fuzzy graph in COO form: P ∪ P^T via probabilistic t-conorm."""
    n, k = knn_indices.shape
    sigma, rho = smooth_knn_dist(knn_dists, float(k))
    rows, cols, vals = membership_strengths(knn_indices, knn_dists, sigma, rho)
    dense = np.zeros((n, n))
    dense[rows, cols] = vals
    sym = dense + dense.T - dense * dense.T
    out_rows, out_cols = np.nonzero(sym)
    return out_rows.astype(np.int64), out_cols.astype(np.int64), sym[out_rows, out_cols]


def find_ab_params(spread: float, min_dist: float) -> tuple[float, float]:
    """Least-squares fit of 1/(1 + a x^(2b)) to the offset exponential decay,
    via damped Gauss-Newton (no scipy dependency)."""
    xv = np.linspace(0, spread * 3, 300)
    yv = np.zeros_like(xv)
    yv[xv < min_dist] = 1.0
    mask = xv >= min_dist
    yv[mask] = np.exp(-(xv[mask] - min_dist) / spread)

    a, b = 1.0, 1.0
    lam = 1e-3
    x_pos = xv > 0
    for _ in range(200):
        xs = np.where(x_pos, xv, 1.0)
        pw = xs ** (2 * b)
        pw = np.where(x_pos, pw, 0.0)
        denom = 1.0 + a * pw
        f = 1.0 / denom
        r = yv - f
        d_a = -pw / denom**2
        d_b = np.where(x_pos, -2.0 * a * pw * np.log(xs), 0.0) / denom**2
        J = np.stack([d_a, d_b], axis=1)
        g = J.T @ r
        H = J.T @ J + lam * np.eye(2)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        a_new, b_new = a + step[0], b + step[1]
        if a_new <= 0 or b_new <= 0:
            lam *= 10
            continue
        a, b = float(a_new), float(b_new)
        if np.max(np.abs(step)) < 1e-10:
            break
    return a, b


def make_epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    result = -1.0 * np.ones(weights.shape[0])
    n_samples = n_epochs * (weights / weights.max())
    result[n_samples > 0] = float(n_epochs) / n_samples[n_samples > 0]
    return result


@numba.njit(cache=True)
def _tau_rand_int(state):
    state[0] = (((state[0] & 4294967294) << 12) & 0xFFFFFFFF) ^ (
        (((state[0] << 13) & 0xFFFFFFFF) ^ state[0]) >> 19
    )
    state[1] = (((state[1] & 4294967288) << 4) & 0xFFFFFFFF) ^ (
        (((state[1] << 2) & 0xFFFFFFFF) ^ state[1]) >> 25
    )
    state[2] = (((state[2] & 4294967280) << 17) & 0xFFFFFFFF) ^ (
        (((state[2] << 3) & 0xFFFFFFFF) ^ state[2]) >> 11
    )
    return state[0] ^ state[1] ^ state[2]


@numba.njit(cache=True)
def _clip(val):
    if val > 4.0:
        return 4.0
    elif val < -4.0:
        return -4.0
    return val


@numba.njit(cache=True)
def _optimize_layout(
    head_embedding,
    tail_embedding,
    head,
    tail,
    n_epochs,
    n_vertices,
    epochs_per_sample,
    a,
    b,
    rng_state,
    gamma,
    initial_alpha,
    negative_sample_rate,
    move_other,
):
    dim = head_embedding.shape[1]
    alpha = initial_alpha
    epochs_per_negative_sample = epochs_per_sample / negative_sample_rate
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()
    epoch_of_next_sample = epochs_per_sample.copy()

    for n in range(n_epochs):
        for i in range(epochs_per_sample.shape[0]):
            if epoch_of_next_sample[i] <= n:
                j = head[i]
                k = tail[i]
                current = head_embedding[j]
                other = tail_embedding[k]

                dist_squared = 0.0
                for d in range(dim):
                    diff = current[d] - other[d]
                    dist_squared += diff * diff

                if dist_squared > 0.0:
                    grad_coeff = -2.0 * a * b * pow(dist_squared, b - 1.0)
                    grad_coeff /= a * pow(dist_squared, b) + 1.0
                else:
                    grad_coeff = 0.0

                for d in range(dim):
                    grad_d = _clip(grad_coeff * (current[d] - other[d]))
                    current[d] += grad_d * alpha
                    if move_other:
                        other[d] += -grad_d * alpha

                epoch_of_next_sample[i] += epochs_per_sample[i]

                n_neg_samples = int(
                    (n - epoch_of_next_negative_sample[i]) / epochs_per_negative_sample[i]
                )
                for _ in range(n_neg_samples):
                    k = _tau_rand_int(rng_state) % n_vertices
                    other = tail_embedding[k]

                    dist_squared = 0.0
                    for d in range(dim):
                        diff = current[d] - other[d]
                        dist_squared += diff * diff

                    if dist_squared > 0.0:
                        grad_coeff = 2.0 * gamma * b
                        grad_coeff /= (0.001 + dist_squared) * (a * pow(dist_squared, b) + 1)
                    elif j == k:
                        continue
                    else:
                        grad_coeff = 0.0

                    for d in range(dim):
                        if grad_coeff > 0.0:
                            grad_d = _clip(grad_coeff * (current[d] - other[d]))
                        else:
                            grad_d = 4.0
                        current[d] += grad_d * alpha

                epoch_of_next_negative_sample[i] += (
                    n_neg_samples * epochs_per_negative_sample[i]
                )
        alpha = initial_alpha * (1.0 - (float(n) / float(n_epochs)))
    return head_embedding


def _initial_layout(data: np.ndarray, init: str, rng: np.random.Generator) -> np.ndarray:
    if init == "random":
        return rng.uniform(-10.0, 10.0, size=(data.shape[0], 2))
    # PCA init, scaled so the widest axis spans ~10 units, plus tiny jitter
    centered = data - data.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    coords = centered @ vt[:2].T
    scale = np.abs(coords).max()
    if scale > 0:
        coords = coords * (10.0 / scale)
    return coords + rng.normal(scale=1e-4, size=coords.shape)


def _prepare_vectors(vectors: list[EmbeddingVector] | np.ndarray) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        data = np.asarray(vectors, dtype=np.float64)
    else:
        data = np.asarray([v.values for v in vectors], dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("vectors must form a 2D matrix")
    if not np.all(np.isfinite(data)):
        raise ValueError("vectors contain non-finite entries")
    return data


def fit_projection(
    vectors: list[EmbeddingVector] | np.ndarray,
    params: ProjectionParams = ProjectionParams(),
    seed: int = 0,
    *,
    refs: list[str] | None = None,
    ratings: list[str] | None = None,
) -> tuple[ProjectionModel, list[MapPoint]]:
    """Fit the 2D layout for a set of embedding vectors.

    n_neighbors is clamped to n_points - 1 for small inputs. Returns the
    fitted model plus one MapPoint per vector (refs/ratings optional; refs
    default to positional ids and ratings to positive).
    """
    data = _prepare_vectors(vectors)
    n = data.shape[0]
    if n < 2:
        raise ValueError(f"projection needs at least 2 vectors, got {n}")
    if params.n_neighbors < 2:
        raise ValueError("n_neighbors must be >= 2")
    k = min(params.n_neighbors, n - 1)
    effective = replace(params, n_neighbors=k)

    dist = cosine_distances(data, data)
    knn_indices, knn_dists = _knn(dist, k)
    rows, cols, vals = fuzzy_simplicial_set(knn_indices, knn_dists)

    a, b = find_ab_params(params.spread, params.min_dist)

    # Drop edges too weak to ever be sampled, as the reference construction does.
    threshold = vals.max() / float(params.epochs)
    keep = vals >= threshold
    head, tail, weights = rows[keep], cols[keep], vals[keep]
    epochs_per_sample = make_epochs_per_sample(weights, params.epochs)

    rng = np.random.default_rng(seed)
    coords = _initial_layout(data, params.init, rng).astype(np.float32)
    rng_state = np.array(
        [seed * 3 + 1, seed * 5 + 7, seed * 7 + 3], dtype=np.int64
    ) % 0x7FFFFFFF + 1

    coords = _optimize_layout(
        coords,
        coords,
        head,
        tail,
        params.epochs,
        n,
        epochs_per_sample,
        a,
        b,
        rng_state,
        params.repulsion_strength,
        params.learning_rate,
        float(params.negative_sample_rate),
        True,
    )
    embedding = np.asarray(coords, dtype=np.float64)

    model = ProjectionModel(
        training=data,
        knn_indices=knn_indices,
        knn_dists=knn_dists,
        graph_rows=head,
        graph_cols=tail,
        graph_vals=weights,
        embedding=embedding,
        params=effective,
        seed=seed,
        a=a,
        b=b,
    )
    points = _as_map_points(embedding, refs, ratings, overlay=False)
    return model, points


def _as_map_points(
    embedding: np.ndarray,
    refs: list[str] | None,
    ratings: list[str] | None,
    *,
    overlay: bool,
) -> list[MapPoint]:
    n = embedding.shape[0]
    refs = refs if refs is not None else [f"v{i}" for i in range(n)]
    ratings = ratings if ratings is not None else [POSITIVE] * n
    return [
        MapPoint(
            function_ref=refs[i],
            x=float(embedding[i, 0]),
            y=float(embedding[i, 1]),
            rating=ratings[i],
            is_example_overlay=overlay,
        )
        for i in range(n)
    ]


def transform_points(
    model: ProjectionModel,
    new_vectors: list[EmbeddingVector] | np.ndarray,
    *,
    refs: list[str] | None = None,
    ratings: list[str] | None = None,
    optimize_epochs: int = 30,
) -> list[MapPoint]:
    """Project held-out vectors into a fitted layout.

    Each point starts at the inverse-squared-distance weighted average of
    its k nearest training points' coordinates (a zero-distance neighbor
    wins outright), then a short attractive-only optimization runs against
    the frozen training layout. The fitted model is never mutated.
    """
    data = _prepare_vectors(new_vectors)
    if data.shape[1] != model.training.shape[1]:
        raise ValueError(
            f"dimension mismatch: model is {model.training.shape[1]}D, "
            f"got {data.shape[1]}D"
        )
    k = min(model.params.n_neighbors, model.training.shape[0])
    dist = cosine_distances(data, model.training)
    idx = np.argsort(dist, axis=1, kind="stable")[:, :k]
    d = np.take_along_axis(dist, idx, axis=1)

    coords = np.zeros((data.shape[0], 2))
    for i in range(data.shape[0]):
        zero = d[i] <= 1e-12
        if zero.any():
            coords[i] = model.embedding[idx[i][zero]].mean(axis=0)
            continue
        w = 1.0 / (d[i] ** 2)
        w /= w.sum()
        coords[i] = (w[:, None] * model.embedding[idx[i]]).sum(axis=0)

    if optimize_epochs > 0:
        sigma, rho = smooth_knn_dist(d, float(k))
        rows = np.repeat(np.arange(data.shape[0], dtype=np.int64), k)
        cols = idx.reshape(-1).astype(np.int64)
        vals = _membership_values(d, sigma, rho).reshape(-1)
        keep = vals > 0
        epochs_per_sample = make_epochs_per_sample(vals[keep], optimize_epochs)
        head_coords = coords.astype(np.float32)
        tail_coords = model.embedding.astype(np.float32)
        rng_state = np.array(
            [model.seed * 3 + 11, model.seed * 5 + 13, model.seed * 7 + 17], dtype=np.int64
        ) % 0x7FFFFFFF + 1
        head_coords = _optimize_layout(
            head_coords,
            tail_coords,
            rows[keep],
            cols[keep],
            optimize_epochs,
            model.embedding.shape[0],
            epochs_per_sample,
            model.a,
            model.b,
            rng_state,
            model.params.repulsion_strength,
            model.params.learning_rate,
            float(model.params.negative_sample_rate),
            False,
        )
        coords = np.asarray(head_coords, dtype=np.float64)

    return _as_map_points(coords, refs, ratings, overlay=True)
