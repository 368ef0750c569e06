"""Run configuration shared by the pipeline, the benchmarks and the CLI."""
import os
from dataclasses import asdict, dataclass, field

from .augment import CLASSIC_LEVELS, RATIONAL_LEVELS, LevelValues
from .kernels import FAMILIES
from .pu import METHODS, SENTINELS


def default_levels(method):
    return RATIONAL_LEVELS if method == "rrbf" else CLASSIC_LEVELS


@dataclass
class RunConfig:
    input: str = None
    output: str = None
    method: str = "rrbf"
    kernel: str = "wendland"
    epsilon: float = 1.0
    K: int = 10
    xi: float = 1.0 / 3.0
    levels: tuple = None  # (a, b, c); None picks the method default
    resolution: int = 80
    gamma: float = 1.0
    seed: int = 0
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    folds: int = 10
    min_points: int = 10
    grow_empty: bool = False
    sentinel: str = "nearest"
    eig_method: str = "dacg"
    eig_tol: float = 1e-8
    eig_max_iter: int = 500
    normalize: bool = True
    cap_boundary: bool = True  # close surfaces that leave the grid

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.kernel not in FAMILIES:
            raise ValueError(f"kernel must be one of {FAMILIES}, got {self.kernel!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.K < 3:
            raise ValueError("K must be at least 3")
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.sentinel not in SENTINELS:
            raise ValueError(f"sentinel must be one of {SENTINELS}, got {self.sentinel!r}")
        if self.min_points < 1:
            raise ValueError("min_points must be at least 1")
        if self.eig_method not in ("dacg", "dense"):
            raise ValueError("eig_method must be 'dacg' or 'dense'")
        if self.levels is None:
            lv = default_levels(self.method)
            self.levels = (lv.a, lv.b, lv.c)
        self.levels = tuple(float(v) for v in self.levels)
        lv = self.level_values
        if self.method == "rrbf" and not lv.nonzero:
            raise ValueError("rrbf needs nonzero level values")

    @property
    def level_values(self):
        return LevelValues(*self.levels)

    def resolved(self):
        """Plain dict of every field, defaults expanded."""
        return asdict(self)
