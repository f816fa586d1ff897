"""Multi-frequency inverse source problem for the 2D Helmholtz equation.

A source supported in the disk of radius ``r0`` radiates the field

    u_k(x) = integral over D0 of (i/4) H0^(1)(k |x - y|) s(y) dy

which is measured at ``M`` points on the circle of radius ``r > r0``.  The
disk is discretized by square pixels (midpoint rule), every frequency block
is split into real and imaginary rows, and the blocks are stacked into one
real matrix whose SVD drives the filtered reconstruction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ContractError
from .filters import FilterSpec, SingularSystem, apply_filtered_inverse_svd
from .numerics import hankel1_0, svd


@dataclass(frozen=True, eq=False)
class ISPGeometry:
    r0: float
    r: float
    centers: np.ndarray  # (C, 2) pixel centers inside the source disk
    areas: np.ndarray  # (C,)
    sensors: np.ndarray  # (M, 2) points on the measurement circle

    @property
    def n_cells(self) -> int:
        return self.centers.shape[0]

    @property
    def n_sensors(self) -> int:
        return self.sensors.shape[0]

    def max_wavenumber(self) -> float:
        """Largest k for which the sensors still take two samples per wavelength."""
        return math.pi * self.n_sensors / (2.0 * self.r)


def build_geometry(r0: float, r: float, cells_across: int, sensors: int) -> ISPGeometry:
    """Pixel quadrature of the disk of radius ``r0`` and ``sensors`` points on radius ``r``.

    Pixels of side ``2 r0 / cells_across`` tile ``[-r0, r0]^2``; those whose
    centers fall strictly inside the disk are kept.
    """
    if not (0 < r0 < r) or not math.isfinite(r):
        raise ContractError(f"radii must satisfy 0 < r0 < r, got r0={r0!r}, r={r!r}")
    if cells_across < 1 or int(cells_across) != cells_across:
        raise ContractError(f"cells_across must be a positive integer, got {cells_across!r}")
    if sensors < 1 or int(sensors) != sensors:
        raise ContractError(f"sensor count must be a positive integer, got {sensors!r}")
    side = 2.0 * r0 / cells_across
    ticks = -r0 + side * (np.arange(cells_across) + 0.5)
    xx, yy = np.meshgrid(ticks, ticks, indexing="xy")
    centers = np.column_stack([xx.ravel(), yy.ravel()])
    centers = centers[np.hypot(centers[:, 0], centers[:, 1]) < r0]
    areas = np.full(centers.shape[0], side * side)
    theta = 2.0 * np.pi * np.arange(sensors) / sensors
    points = r * np.column_stack([np.cos(theta), np.sin(theta)])
    return ISPGeometry(r0, r, centers, areas, points)


@dataclass(frozen=True, eq=False)
class FrequencySet:
    """Wavenumbers ``k_j = j pi / r0``."""

    r0: float
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        if not idx or any(j <= 0 for j in idx) or any(b <= a for a, b in zip(idx, idx[1:])):
            raise ContractError(f"frequency indices must be positive and increasing, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_range(cls, r0: float, j_min: int, j_max: int) -> "FrequencySet":
        return cls(r0, tuple(range(j_min, j_max + 1)))

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.array(self.indices, dtype=float) * math.pi / self.r0

    def __len__(self):
        return len(self.indices)


def _distances(geom: ISPGeometry) -> np.ndarray:
    diff = geom.sensors[:, None, :] - geom.centers[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    if np.any(dist <= 0):
        raise ContractError("a sensor coincides with a quadrature point (kernel singularity)")
    return dist


def assemble_forward(geom: ISPGeometry, k: float, _dist: np.ndarray | None = None) -> np.ndarray:
    """Complex ``M x C`` matrix with entries ``(i/4) H0^(1)(k |x_m - y_c|) * area_c``."""
    if not k > 0:
        raise ContractError(f"wavenumber must be positive, got {k!r}")
    dist = _distances(geom) if _dist is None else _dist
    return 0.25j * hankel1_0(k * dist) * geom.areas[None, :]


@dataclass(eq=False)
class JointOperator:
    """Stacked real forward operator; per frequency ``M`` real rows then ``M`` imaginary rows."""

    matrix: np.ndarray
    wavenumbers: np.ndarray
    n_sensors: int

    @cached_property
    def system(self) -> SingularSystem:
        return svd(self.matrix)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, source) -> np.ndarray:
        return self.matrix @ _values(source)

    def split(self, data) -> np.ndarray:
        """Recover the complex ``(n_freq, M)`` boundary data from stacked rows."""
        blocks = np.asarray(data, dtype=float).reshape(len(self.wavenumbers), 2, self.n_sensors)
        return blocks[:, 0] + 1j * blocks[:, 1]


def assemble_joint(geom: ISPGeometry, freqs: FrequencySet) -> JointOperator:
    ks = freqs.wavenumbers
    if len(ks) == 0:
        raise ContractError("frequency set is empty")
    if ks.max() > geom.max_wavenumber() * (1 + 1e-12):
        raise ContractError(
            f"{geom.n_sensors} sensors undersample k={ks.max():.4g}; "
            f"need at least {math.ceil(2 * ks.max() * geom.r / math.pi)}"
        )
    dist = _distances(geom)
    m = geom.n_sensors
    matrix = np.empty((2 * m * len(ks), geom.n_cells))
    for i, k in enumerate(ks):
        block = assemble_forward(geom, k, dist)
        matrix[2 * i * m:(2 * i + 1) * m] = block.real
        matrix[(2 * i + 1) * m:(2 * i + 2) * m] = block.imag
    return JointOperator(matrix, ks, m)


@dataclass(frozen=True, eq=False)
class SourceField:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise ContractError("source values must be a finite 1-D vector")
        object.__setattr__(self, "values", values)


def _values(source) -> np.ndarray:
    return source.values if isinstance(source, SourceField) else np.asarray(source, dtype=float)


def reconstruct_source(joint: JointOperator, data, spec: FilterSpec) -> SourceField:
    data = np.asarray(data, dtype=float)
    if data.shape != (joint.shape[0],):
        raise ContractError(f"data length {data.shape} does not match {joint.shape[0]} rows")
    return SourceField(apply_filtered_inverse_svd(joint.system, spec, data))


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    index: np.ndarray
    sigma: np.ndarray
    projection: np.ndarray

    def rows(self):
        return zip(self.index.tolist(), self.sigma.tolist(), self.projection.tolist())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "sigma", "projection"])
            for i, s, p in self.rows():
                writer.writerow([i, f"{s:.17g}", f"{p:.17g}"])


def spectrum_report(joint: JointOperator | SingularSystem, truth) -> SpectrumReport:
    """Singular values with ``|<v_n, truth>|`` for each retained index (1-based)."""
    system = joint.system if isinstance(joint, JointOperator) else joint
    s = _values(truth)
    if s.shape != (system.right.shape[0],):
        raise ContractError(f"truth has {s.shape} entries, operator has {system.right.shape[0]} columns")
    proj = np.abs(system.right.T @ s)
    return SpectrumReport(np.arange(1, system.rank + 1), system.sigma.copy(), proj)


def make_ground_truth(geom: ISPGeometry) -> SourceField:
    """Unit disk inclusion plus a Gaussian bump, both well inside the source disk.

    * disk of radius ``0.3 r0`` centered at ``(0.35 r0, 0)``, value 1;
    * Gaussian ``0.8 exp(-|y - c|^2 / (2 w^2))`` with ``w = 0.15 r0``,
      centered at ``(-0.4 r0, 0.2 r0)``.
    """
    r0 = geom.r0
    y = geom.centers
    disk = (np.hypot(y[:, 0] - 0.35 * r0, y[:, 1]) < 0.3 * r0).astype(float)
    w = 0.15 * r0
    d2 = (y[:, 0] + 0.4 * r0) ** 2 + (y[:, 1] - 0.2 * r0) ** 2
    bump = 0.8 * np.exp(-d2 / (2 * w * w))
    return SourceField(disk + bump)


def measurement_noise_std(data, noise_ratio: float) -> float:
    """Per-entry stddev ``noise_ratio * ||data|| / sqrt(len(data))``."""
    data = np.asarray(data, dtype=float)
    return noise_ratio * float(np.linalg.norm(data)) / math.sqrt(data.size)
