"""Two-dimensional darts environment.

A dartboard with standard tournament geometry whose 20 sector base values
are freshly shuffled for every state, so each board presented to an agent
poses a different targeting problem. Rewards follow the usual region
rules: sector value in the single bands, x3 in the treble ring, x2 in the
double ring, fixed bull / outer-bull values, zero off the board.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class BoardGeometry:
    """Radial band edges (mm) and angular layout of the board."""

    board_radius: float = 170.0
    bull_radius: float = 6.35
    outer_bull_radius: float = 15.9
    treble_inner: float = 99.0
    treble_outer: float = 107.0
    double_inner: float = 162.0
    double_outer: float = 170.0
    sector_count: int = 20
    bull_value: float = 50.0
    outer_bull_value: float = 25.0
    # First sector boundary sits this many degrees clockwise from vertical,
    # centering sector 0 on the twelve o'clock direction.
    first_boundary_deg: float = 9.0

    def __post_init__(self) -> None:
        radii = (
            self.bull_radius,
            self.outer_bull_radius,
            self.treble_inner,
            self.treble_outer,
            self.double_inner,
            self.double_outer,
        )
        if not all(a < b for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
            raise InvalidParameterError(f"band radii must be strictly increasing: {radii}")
        if self.double_outer != self.board_radius:
            raise InvalidParameterError("double_outer must equal board_radius")
        if self.sector_count != 20:
            raise InvalidParameterError("board must have 20 sectors")

    @property
    def sector_width_deg(self) -> float:
        return 360.0 / self.sector_count

    def sector_index(self, x, y):
        """Sector index for board-centered coordinates (vectorized).

        Angle is measured clockwise from the positive y axis; a point on an
        angular boundary belongs to the next (clockwise) sector.
        """
        ang = np.degrees(np.arctan2(x, y)) % 360.0
        idx = ((ang + self.first_boundary_deg) % 360.0) / self.sector_width_deg
        return idx.astype(int) if np.ndim(idx) else int(idx)


STANDARD_BOARD = BoardGeometry()


@dataclass(frozen=True)
class DartboardState:
    """One episode's board: a shuffled assignment of base values to sectors."""

    state_id: int
    sector_values: tuple[int, ...]
    geometry: BoardGeometry = STANDARD_BOARD
    bull_values: tuple[float, float] = field(default=None)  # (bull, outer bull)

    def __post_init__(self) -> None:
        if sorted(self.sector_values) != list(range(1, 21)):
            raise InvalidParameterError("sector_values must be a permutation of 1..20")
        if self.bull_values is None:
            object.__setattr__(
                self,
                "bull_values",
                (self.geometry.bull_value, self.geometry.outer_bull_value),
            )

    def to_record(self) -> dict:
        return {"state_id": self.state_id, "sector_values": list(self.sector_values)}

    @classmethod
    def from_record(cls, record: dict, geometry: BoardGeometry = STANDARD_BOARD) -> "DartboardState":
        return cls(
            state_id=int(record["state_id"]),
            sector_values=tuple(int(v) for v in record["sector_values"]),
            geometry=geometry,
        )


@dataclass(frozen=True)
class ActionGrid:
    """Square grid of candidate target actions, symmetric about the origin.

    Cell coordinates are cell centers. The flat cell index runs in C order
    over (ix, iy), i.e. index = ix * n + iy with x varying slowest.
    """

    resolution: float
    half_extent: float

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise InvalidParameterError("grid resolution must be positive")
        if self.half_extent < 0:
            raise InvalidParameterError("grid half_extent must be nonnegative")

    @cached_property
    def axis(self) -> np.ndarray:
        n_half = int(np.floor(self.half_extent / self.resolution + 1e-9))
        ax = (np.arange(-n_half, n_half + 1)) * self.resolution
        ax.flags.writeable = False
        return ax

    @property
    def n_per_side(self) -> int:
        return len(self.axis)

    @property
    def n_cells(self) -> int:
        return self.n_per_side ** 2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_per_side, self.n_per_side)

    @property
    def cell_area(self) -> float:
        return self.resolution ** 2

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.axis, self.axis, indexing="ij")
        X.flags.writeable = False
        Y.flags.writeable = False
        return X, Y

    @cached_property
    def cells(self) -> np.ndarray:
        """All cell centers, shape (n_cells, 2), in flat-index order."""
        X, Y = self.mesh
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        pts.flags.writeable = False
        return pts

    def cell_center(self, flat_index: int) -> np.ndarray:
        return self.cells[flat_index].copy()


def board_action_grid(geometry: BoardGeometry = STANDARD_BOARD, resolution: float = 5.0) -> ActionGrid:
    """Default target grid: the board's bounding square at the given resolution."""
    return ActionGrid(resolution=resolution, half_extent=geometry.board_radius)


@dataclass
class RewardGrid:
    """A state's reward function sampled at every grid cell center."""

    grid: ActionGrid
    values: np.ndarray
    state_id: int | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise InvalidParameterError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameterError("reward values must be finite")
        self._fft_memo: dict = {}

    @property
    def max_value(self) -> float:
        return float(self.values.max())

    def fourier(self, fft_shape: tuple[int, int], dtype=np.float64) -> np.ndarray:
        """Cached real FFT of the reward surface at the given padded shape.

        Safe for concurrent reads; insertion is idempotent so a rare
        duplicate compute under contention is harmless.
        """
        from scipy import fft as sfft

        key = (fft_shape, np.dtype(dtype).name)
        memo = self._fft_memo.get(key)
        if memo is None:
            memo = sfft.rfft2(self.values.astype(dtype), s=fft_shape)
            memo.flags.writeable = False
            self._fft_memo[key] = memo
        return memo


def generate_state(
    rng: np.random.Generator,
    state_id: int = 0,
    geometry: BoardGeometry = STANDARD_BOARD,
    shuffle_bulls: bool = False,
) -> DartboardState:
    """Draw a state with a uniformly random permutation of sector values.

    With ``shuffle_bulls`` the bull and outer-bull values are additionally
    swapped at random (off by default; the base variant shuffles only the
    20 sector values).
    """
    values = tuple(int(v) for v in rng.permutation(np.arange(1, 21)))
    bulls = (geometry.bull_value, geometry.outer_bull_value)
    if shuffle_bulls and rng.random() < 0.5:
        bulls = (bulls[1], bulls[0])
    return DartboardState(state_id=state_id, sector_values=values, geometry=geometry, bull_values=bulls)


def _region_rewards(state: DartboardState, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized reward lookup. Points on a band boundary score as the
    outer region (the board edge itself is off the board)."""
    g = state.geometry
    r = np.hypot(x, y)
    sector = g.sector_index(x, y)
    v = np.asarray(state.sector_values, dtype=float)[sector]
    bull, outer_bull = state.bull_values
    return np.where(
        r < g.bull_radius, bull,
        np.where(r < g.outer_bull_radius, outer_bull,
        np.where(r < g.treble_inner, v,
        np.where(r < g.treble_outer, 3.0 * v,
        np.where(r < g.double_inner, v,
        np.where(r < g.double_outer, 2.0 * v, 0.0))))),
    )


def reward_at(state: DartboardState, point) -> float:
    """Reward for a dart landing at the given board-centered point (mm)."""
    x, y = float(point[0]), float(point[1])
    return float(_region_rewards(state, np.asarray(x), np.asarray(y)))


def rasterize_reward(state: DartboardState, grid: ActionGrid) -> RewardGrid:
    """Sample the state's reward function at every cell center."""
    X, Y = grid.mesh
    return RewardGrid(grid=grid, values=_region_rewards(state, X, Y), state_id=state.state_id)
