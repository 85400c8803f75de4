"""The solution record returned by every end-to-end solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .metric import radius_of_centers

__all__ = ["ClusteringSolution", "score"]

# info entries derived from wall-clock time
_TIMED_INFO = frozenset({"throughput"})


@dataclass
class ClusteringSolution:
    centers: np.ndarray
    center_indices: np.ndarray
    radius: float
    z: int
    algorithm: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    timings: dict[str, float] = field(default_factory=dict)
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return int(self.centers.shape[0])

    def to_dict(self, timings: bool = True) -> dict[str, Any]:
        out = {
            "algorithm": self.algorithm,
            "params": dict(self.params),
            "seed": self.seed,
            "z": int(self.z),
            "radius": float(self.radius),
            "center_indices": [int(i) for i in self.center_indices],
            "centers": [[float(c) for c in row] for row in self.centers],
            "info": {k: v for k, v in self.info.items() if timings or k not in _TIMED_INFO},
        }
        if timings:
            out["timings"] = {k: float(v) for k, v in self.timings.items()}
        return out


def score(S: np.ndarray, center_indices, z: int) -> float:
    """Radius of ``S`` w.r.t. the given centers with ``z`` outliers, from scratch."""
    center_indices = np.asarray(center_indices, dtype=np.intp)
    return radius_of_centers(S, S[center_indices], z).radius
