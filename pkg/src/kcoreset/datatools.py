"""Dataset loading, synthetic data, outlier injection and inflation."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .metric import as_dataset, distances_to, pairwise_distances
from .seeding import substream

__all__ = [
    "MebEstimate",
    "approx_meb",
    "inflate",
    "inject_outliers",
    "load_dataset",
    "planted_clusters",
    "save_dataset",
]

_SPLIT = re.compile(r"[,\s]+")


def load_dataset(path, columns=None, skip_header: bool = False) -> np.ndarray:
    """Read a comma- or whitespace-separated numeric table.

    ``columns`` is a sequence of column indices (or a string like ``"0,2"``)
    selecting a subset of attributes. Blank lines are ignored.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: no such file")
    if isinstance(columns, str):
        try:
            columns = [int(c) for c in columns.split(",") if c.strip()]
        except ValueError:
            raise InputError(f"bad column list {columns!r}") from None
    rows = []
    width = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if skip_header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            fields = [f for f in _SPLIT.split(line) if f]
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise InputError(f"{path}:{lineno}: expected {width} fields, got {len(fields)}")
            try:
                vals = [float(f) for f in fields]
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric field") from None
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no data rows")
    data = np.array(rows)
    if columns is not None:
        columns = list(columns)
        if not columns or min(columns) < 0 or max(columns) >= width:
            raise InputError(f"column selection {columns} out of range for {width} columns")
        data = data[:, columns]
    return as_dataset(data)


def save_dataset(path, S) -> None:
    """Write ``S`` as CSV with round-trip float precision."""
    S = np.asarray(S)
    with Path(path).open("w") as fh:
        for row in S:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class MebEstimate:
    """Enclosing ball around the centroid.

    Encloses every point exactly (tolerance 0) and its radius is at most
    twice the true minimum enclosing radius.
    """

    center: np.ndarray
    radius: float
    method: str = "centroid"


def approx_meb(S) -> MebEstimate:
    S = as_dataset(S)
    c = S.mean(axis=0)
    return MebEstimate(c, float(distances_to(S, c).max()))


def inject_outliers(S, z: int, seed: int, max_tries: int = 1000):
    """Append ``z`` far points at distance ``100 * r`` from the enclosing-ball center.

    Directions are uniform on the sphere; a candidate within ``10 * r`` of an
    already injected point is redrawn. Returns the new dataset and the
    indices of the injected points (always the last ``z``).
    """
    S = as_dataset(S)
    n, d = S.shape
    if z < 1:
        raise InputError("z must be >= 1")
    if d == 1 and z > 2:
        raise InputError("a 1-d dataset admits at most 2 separated outliers")
    meb = approx_meb(S)
    r = meb.radius
    if r <= 0:
        raise InputError("dataset has zero extent; cannot scale outliers")
    rng = substream(seed, "injection")
    out = np.empty((z, d))
    for i in range(z):
        for _ in range(max_tries):
            u = rng.standard_normal(d)
            norm = np.linalg.norm(u)
            if norm == 0:
                continue
            cand = meb.center + (100.0 * r / norm) * u
            if i == 0 or distances_to(out[:i], cand).min() >= 10.0 * r:
                out[i] = cand
                break
        else:
            raise InputError(f"could not place outlier {i} at separation 10*r after {max_tries} tries")
    # both distance properties, checked rather than trusted
    far = min(distances_to(S, p).min() for p in out)
    assert far >= 99.0 * r, "injected point too close to the data"
    if z > 1:
        P = pairwise_distances(out)
        assert P[np.triu_indices(z, 1)].min() >= 10.0 * r, "injected points too close together"
    return as_dataset(np.vstack([S, out])), np.arange(n, n + z)


def inflate(S, h: int, seed: int) -> np.ndarray:
    """Grow ``S`` to ``h * |S|`` noisy resamples.

    Each output point is a uniformly drawn input point plus Gaussian noise
    whose per-coordinate standard deviation is 10% of that coordinate's range.
    """
    S = as_dataset(S)
    if h < 1:
        raise InputError("h must be >= 1")
    rng = substream(seed, "inflation")
    sigma = 0.1 * (S.max(axis=0) - S.min(axis=0))
    src = rng.integers(0, S.shape[0], size=h * S.shape[0])
    noise = rng.standard_normal((src.shape[0], S.shape[1])) * sigma
    return as_dataset(S[src] + noise)


def planted_clusters(n: int, dim: int, clusters: int, seed: int, spread: float = 0.05) -> np.ndarray:
    """``n`` points around ``clusters`` uniformly placed centers in the unit cube.

    Cluster sizes are uneven (Dirichlet weights) so the data has structure
    at several scales.
    """
    rng = substream(seed, "synthetic")
    centers = rng.uniform(0.0, 1.0, size=(clusters, dim))
    sizes = rng.multinomial(n, rng.dirichlet(np.ones(clusters)))
    label = np.repeat(np.arange(clusters), sizes)
    scale = spread * rng.uniform(0.5, 2.0, size=clusters)
    pts = centers[label] + rng.standard_normal((n, dim)) * scale[label, None]
    return as_dataset(pts[rng.permutation(n)])
