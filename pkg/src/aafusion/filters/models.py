"""Linear-Gaussian motion, sensor and birth models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gaussian import ContractError, GaussianMixture


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MotionModel:
    F: np.ndarray
    Q: np.ndarray
    p_survival: float = 0.99

    def __post_init__(self):
        F, Q = _frozen(np.atleast_2d(self.F)), _frozen(np.atleast_2d(self.Q))
        d = F.shape[0]
        if F.shape != (d, d) or Q.shape != (d, d):
            raise ContractError("F and Q must be square with matching size")
        if not np.allclose(Q, Q.T, atol=1e-12) or np.linalg.eigvalsh(Q).min() < -1e-12:
            raise ContractError("process noise must be symmetric positive semidefinite")
        if not 0.0 <= self.p_survival <= 1.0:
            raise ContractError("survival probability outside [0, 1]")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "Q", Q)

    @property
    def dim(self) -> int:
        return self.F.shape[0]

    @classmethod
    def constant_velocity(cls, dt: float = 1.0, noise: float = 1.0, p_survival: float = 0.99,
                          spatial_dims: int = 2) -> MotionModel:
        """Nearly-constant-velocity model on state ``[x, vx, y, vy, ...]``."""
        f = np.array([[1.0, dt], [0.0, 1.0]])
        q = noise**2 * np.array([[dt**3 / 3, dt**2 / 2], [dt**2 / 2, dt]])
        eye = np.eye(spatial_dims)
        return cls(np.kron(eye, f), np.kron(eye, q), p_survival)


@dataclass(frozen=True, eq=False)
class SensorModel:
    """Linear sensor with Poisson clutter uniform over an axis-aligned box."""

    H: np.ndarray
    R: np.ndarray
    p_detect: float = 0.9
    clutter_rate: float = 0.0
    clutter_region: tuple[np.ndarray, np.ndarray] = ((-100.0, -100.0), (100.0, 100.0))

    def __post_init__(self):
        H, R = _frozen(np.atleast_2d(self.H)), _frozen(np.atleast_2d(self.R))
        m = H.shape[0]
        if R.shape != (m, m):
            raise ContractError("R must be square with one row per measurement dimension")
        if not np.allclose(R, R.T, atol=1e-12) or np.linalg.eigvalsh(R).min() <= 0:
            raise ContractError("measurement noise must be symmetric positive definite")
        if not 0.0 <= self.p_detect <= 1.0:
            raise ContractError("detection probability outside [0, 1]")
        if self.clutter_rate < 0:
            raise ContractError("clutter rate must be nonnegative")
        lo, hi = (_frozen(np.broadcast_to(np.asarray(b, dtype=float), (m,))) for b in self.clutter_region)
        if np.any(hi <= lo):
            raise ContractError("clutter region must have positive volume")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "clutter_region", (lo, hi))

    @property
    def meas_dim(self) -> int:
        return self.H.shape[0]

    @property
    def clutter_volume(self) -> float:
        lo, hi = self.clutter_region
        return float(np.prod(hi - lo))

    @property
    def clutter_density(self) -> float:
        return self.clutter_rate / self.clutter_volume

    def replace(self, **changes) -> SensorModel:
        fields = dict(H=self.H, R=self.R, p_detect=self.p_detect, clutter_rate=self.clutter_rate,
                      clutter_region=self.clutter_region)
        fields.update(changes)
        return SensorModel(**fields)

    @classmethod
    def position(cls, sigma: float = 1.0, p_detect: float = 0.9, clutter_rate: float = 0.0,
                 region=((-100.0, -100.0), (100.0, 100.0)), spatial_dims: int = 2) -> SensorModel:
        """Position-only sensor for ``[x, vx, y, vy, ...]`` states."""
        H = np.kron(np.eye(spatial_dims), np.array([[1.0, 0.0]]))
        return cls(H, sigma**2 * np.eye(spatial_dims), p_detect, clutter_rate, region)


@dataclass(frozen=True, eq=False)
class BirthModel:
    """Birth intensity for PHD filters; per-component existences for Bernoulli/LMB filters."""

    intensity: GaussianMixture

    @property
    def existences(self) -> np.ndarray:
        return self.intensity.weights

    def __len__(self) -> int:
        return len(self.intensity)
