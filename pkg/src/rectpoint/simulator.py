"""Synthetic pointing experiments and the Monte Carlo error-rate oracle.

Screen coordinates: x to the right, y downward. A movement angle ``a`` (degrees,
counter-clockwise as seen on screen) points along ``(cos a, -sin a)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .aggregation import TRIAL_COLUMNS
from .core import EndpointDistribution, SigmaModel
from .errors import DomainError

CYCLIC = "cyclic"
RING = "ring"


@dataclass(frozen=True)
class ExperimentDesign:
    """Task layout for one simulated experiment.

    A cyclic design runs one session per (W, H, base angle) with clicks
    alternating between two targets; a ring design runs one session per (W, H)
    over ``ring_targets`` targets visited ``ring_step`` positions apart.
    """

    name: str
    amplitude: float
    geometries: Tuple[Tuple[float, float], ...]
    angles: Tuple[float, ...]
    clicks_per_session: int
    warmup_clicks: int
    layout: str = CYCLIC
    ring_targets: int = 25
    ring_step: int = 13

    def __post_init__(self):
        if not self.geometries:
            raise DomainError("design needs at least one geometry")
        if not 0 <= self.warmup_clicks < self.clicks_per_session:
            raise DomainError("warmup_clicks must be smaller than clicks_per_session")
        if self.layout not in (CYCLIC, RING):
            raise DomainError(f"unknown layout {self.layout!r}")

    @property
    def trials_per_session(self) -> int:
        return self.clicks_per_session - self.warmup_clicks

    def sessions(self) -> List[Tuple[float, float, Optional[float]]]:
        if self.layout == CYCLIC:
            return [(w, h, a) for (w, h) in self.geometries for a in self.angles]
        return [(w, h, None) for (w, h) in self.geometries]

    @property
    def trials_per_worker(self) -> int:
        return len(self.sessions()) * self.trials_per_session

    def trial_paths(self, base_angle: Optional[float]) -> Tuple[np.ndarray, np.ndarray]:
        """Movement angle and amplitude for each analyzed click of a session."""
        clicks = np.arange(self.warmup_clicks, self.clicks_per_session)
        if self.layout == CYCLIC:
            # click 0 selects the first (left/bottom) target; odd clicks move outbound
            angles = np.where(clicks % 2 == 1, base_angle, base_angle + 180.0) % 360.0
            return angles.astype(float), np.full(len(clicks), float(self.amplitude))
        radius = self.amplitude / 2.0
        # target k sits clockwise from the top; click j selects target (step*j) mod n
        phi = np.deg2rad(90.0 - 360.0 * np.arange(self.ring_targets) / self.ring_targets)
        pos = np.column_stack([radius * np.cos(phi), -radius * np.sin(phi)])
        idx = (self.ring_step * np.arange(self.clicks_per_session)) % self.ring_targets
        move = pos[idx[clicks]] - pos[idx[clicks - 1]]
        angles = np.rad2deg(np.arctan2(-move[:, 1], move[:, 0])) % 360.0
        return angles, np.hypot(move[:, 0], move[:, 1])


def exp1_design() -> ExperimentDesign:
    """Cyclic two-target task: 4x4 sizes, four base angles, 14 analyzed clicks."""
    sizes = (30.0, 50.0, 80.0, 120.0)
    return ExperimentDesign(
        name="exp1",
        amplitude=550.0,
        geometries=tuple((w, h) for w in sizes for h in sizes),
        angles=(0.0, 30.0, 60.0, 90.0),
        clicks_per_session=17,
        warmup_clicks=3,
        layout=CYCLIC,
    )


def exp2_design() -> ExperimentDesign:
    """ISO-style ring of 25 targets: 7x7 sizes, 25 analyzed selections."""
    sizes = (12.0, 18.0, 26.0, 36.0, 48.0, 62.0, 78.0)
    return ExperimentDesign(
        name="exp2",
        amplitude=500.0,
        geometries=tuple((w, h) for w in sizes for h in sizes),
        angles=(),
        clicks_per_session=26,
        warmup_clicks=1,
        layout=RING,
    )


DESIGNS = {"exp1": exp1_design, "exp2": exp2_design}


@dataclass(frozen=True)
class GroundTruth:
    sigma_model_x: SigmaModel
    sigma_model_y: SigmaModel
    anisotropy: float = 1.0
    rho: float = 0.0
    mt_median_ms: float = 900.0
    mt_sigma_log: float = 0.35
    outlier_rate: float = 0.0
    outlier_inflation: float = 10.0

    def __post_init__(self):
        if not self.anisotropy >= 1:
            raise DomainError(f"anisotropy must be >= 1, got {self.anisotropy}")
        if not 0 <= self.outlier_rate <= 1:
            raise DomainError(f"outlier rate must lie in [0, 1], got {self.outlier_rate}")
        if not abs(self.rho) < 1:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.mt_median_ms <= 0 or self.mt_sigma_log < 0 or self.outlier_inflation <= 0:
            raise DomainError("movement-time parameters must be positive")


def sample_endpoints(sigma_x, sigma_y, rho, angle_deg, anisotropy, rng: np.random.Generator,
                     size: Optional[int] = None) -> np.ndarray:
    """Draw click offsets, shape ``(n, 2)``.

    The screen-axis covariance comes from ``sigma_x``, ``sigma_y`` and ``rho``.
    With ``anisotropy`` > 1 the draw is then stretched by ``anisotropy`` along the
    movement direction and shrunk by the same factor across it, which keeps the
    geometric-mean SD.
    """
    sx = np.asarray(sigma_x, dtype=float)
    sy = np.asarray(sigma_y, dtype=float)
    ang = np.asarray(angle_deg, dtype=float)
    if np.any(~(sx > 0)) or np.any(~(sy > 0)):
        raise DomainError("sigmas must be > 0")
    if not abs(rho) < 1:
        raise DomainError(f"rho must lie in (-1, 1), got {rho}")
    if not anisotropy >= 1:
        raise DomainError(f"anisotropy must be >= 1, got {anisotropy}")
    if size is None:
        size = int(np.broadcast(sx, sy, ang).size)
    z = rng.standard_normal((size, 2))
    x = sx * z[:, 0]
    y = sy * (rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1])
    if anisotropy != 1:
        t = np.deg2rad(ang)
        ux, uy = np.cos(t), -np.sin(t)
        along = x * ux + y * uy
        across = -x * uy + y * ux
        along = along * anisotropy
        across = across / anisotropy
        x = along * ux - across * uy
        y = along * uy + across * ux
    return np.column_stack([np.broadcast_to(x, (size,)), np.broadcast_to(y, (size,))])


def sample_endpoint(sigma_x, sigma_y, rho, angle_deg, anisotropy, rng: np.random.Generator):
    dx, dy = sample_endpoints(sigma_x, sigma_y, rho, angle_deg, anisotropy, rng, size=1)[0]
    return float(dx), float(dy)


def generate_experiment(design: ExperimentDesign, truth: GroundTruth, n_workers: int,
                        seed: int) -> pd.DataFrame:
    """Simulate analyzed trials for ``n_workers`` workers.

    Each worker gets its own generator seeded from ``(seed, worker)`` and a random
    session order. Warm-up clicks are not emitted. Rows are ordered by worker,
    session, trial.
    """
    if n_workers < 1:
        raise DomainError(f"n_workers must be >= 1, got {n_workers}")
    sessions = design.sessions()
    w_all = np.array([s[0] for s in sessions])
    h_all = np.array([s[1] for s in sessions])
    sx_all = truth.sigma_model_x.predict(w_all, h_all)
    sy_all = truth.sigma_model_y.predict(w_all, h_all)
    paths = [design.trial_paths(s[2]) for s in sessions]
    per = design.trials_per_session
    trial_index = np.tile(np.arange(per), len(sessions))
    session_index = np.repeat(np.arange(len(sessions)), per)

    frames = []
    for worker in range(n_workers):
        rng = np.random.default_rng([seed, worker])
        order = rng.permutation(len(sessions))
        angles = np.concatenate([paths[k][0] for k in order])
        amps = np.concatenate([paths[k][1] for k in order])
        width = np.repeat(w_all[order], per)
        height = np.repeat(h_all[order], per)
        offsets = sample_endpoints(
            np.repeat(sx_all[order], per), np.repeat(sy_all[order], per),
            truth.rho, angles, truth.anisotropy, rng,
        )
        n = len(width)
        mt = truth.mt_median_ms * np.exp(truth.mt_sigma_log * rng.standard_normal(n))
        mt = np.where(rng.random(n) < truth.outlier_rate, mt * truth.outlier_inflation, mt)
        frames.append(pd.DataFrame({
            "worker_id": f"w{worker:04d}",
            "session_index": session_index,
            "width": width,
            "height": height,
            "angle_deg": angles,
            "amplitude": amps,
            "trial_index": trial_index,
            "click_dx": offsets[:, 0],
            "click_dy": offsets[:, 1],
            "movement_time_ms": mt,
            "is_error": (np.abs(offsets[:, 0]) > width / 2) | (np.abs(offsets[:, 1]) > height / 2),
        }))
    return pd.concat(frames, ignore_index=True)[TRIAL_COLUMNS]


def monte_carlo_er(geometry, dist: EndpointDistribution, n_samples: int, seed: int,
                   chunk: int = 1_000_000) -> float:
    """Fraction of bivariate-normal draws outside the centered W x H rectangle.

    ``geometry`` only needs ``width``/``height`` attributes (or a pair); zero
    sizes are allowed. Standard error is about ``sqrt(p * (1 - p) / n_samples)``.
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be >= 1, got {n_samples}")
    if isinstance(geometry, tuple):
        width, height = geometry
    else:
        width, height = geometry.width, geometry.height
    if width < 0 or height < 0:
        raise DomainError("target sizes must be >= 0")
    if not isinstance(dist, EndpointDistribution):
        raise DomainError("dist must be an EndpointDistribution")
    rng = np.random.default_rng(seed)
    s = math.sqrt(1.0 - dist.rho * dist.rho)
    misses = 0
    remaining = n_samples
    while remaining:
        m = min(chunk, remaining)
        z = rng.standard_normal((2, m))
        x = dist.sigma_x * z[0]
        y = dist.sigma_y * (dist.rho * z[0] + s * z[1])
        misses += int(np.count_nonzero((np.abs(x) > width / 2) | (np.abs(y) > height / 2)))
        remaining -= m
    return misses / n_samples
