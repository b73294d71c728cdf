# -*- coding: utf-8 -*-
"""
End-to-end studies: distance sweeps, surface maps, crossover contours and
receiver mode recommendation

Surface coordinates follow the bench convention: ``x`` is the lateral
position and ``y`` the vertical offset from the transmitter height, both in
metres, with the transmitter's surface projection at (0, 0).
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import ndimage
from skimage.measure import find_contours

from . import constants, utils
from .coupling import CapacitiveRx, ChannelSample, GalvanicRx, evaluate_rx
from .exceptions import ChannelError, GridMismatch, InvalidSpec, NoConvergence, OutOfBounds, ParseError, TooFewPoints
from .phantom import PhantomSpec, TxSpec, VoxelGrid, build_phantom, place_transmitter, voxelize
from .settings import (
	HBC_FAR_REGION_M,
	HBC_LOAD_CAPACITANCE_F,
	HBC_LOAD_RESISTANCE_OHM,
	HBC_NULL_PROMINENCE_DB,
	HBC_RETURN_CAPACITANCE_F,
	HBC_SATURATION_IQR_DB,
	HBC_SOLVER_MAX_ITER,
	HBC_SOLVER_PRECONDITIONER,
	HBC_SOLVER_TOLERANCE,
	HBC_TIE_EPSILON_DB,
)
from .solver import PotentialField, SolverStats, assemble, solve
from .tissue import QsReport, TissueTable, load_tissue_table, validate_quasistatic


logger = logging.getLogger(__name__)


LINE = 'line'
GRID = 'grid'

GRID_COLUMNS = ('x_m', 'y_m', 'mode', 'path_loss_db')
CURVE_COLUMNS = ('orientation', 'mode', 'distance_m', 'offset_m', 'x_m', 'y_m', 'z_m', 'path_loss_db')
REGION_COLUMNS = ('x_m', 'y_m', 'winner', 'margin_db')
CROSSOVER_COLUMNS = ('polyline', 'x_m', 'y_m')


def contact_steps(spacing: float, resolution: float) -> int:
	# half-up, 0.03 m at 2 cm is two voxels
	return int(math.floor(spacing / resolution + 0.5))


@dataclass(frozen=True)
class SweepSpec:
	"""
	One transmitter configuration and the receiver positions evaluated on it

	``track_x`` holds lateral positions and ``track_y`` vertical offsets from
	the transmitter height. A line track has a single lateral position.
	"""
	tx: TxSpec = field(default_factory=TxSpec)
	phantom: PhantomSpec = field(default_factory=PhantomSpec)
	table: Optional[TissueTable] = None
	modes: Tuple[str, ...] = constants.MODES
	track: str = LINE
	track_x: Tuple[float, ...] = (0.06,)
	track_y: Tuple[float, ...] = ()
	frequency: float = 21e6
	resolution: float = 0.02
	tol_rel: float = HBC_SOLVER_TOLERANCE
	max_iter: int = HBC_SOLVER_MAX_ITER
	preconditioner: str = HBC_SOLVER_PRECONDITIONER
	rx_spacing: float = 0.02
	c_return: float = HBC_RETURN_CAPACITANCE_F
	load_r: float = HBC_LOAD_RESISTANCE_OHM
	load_c: float = HBC_LOAD_CAPACITANCE_F

	@classmethod
	def line(cls, tx: TxSpec, span: float = 0.5, lateral_offset: float = 0.06, resolution: float = 0.02, **kwargs):
		"""
		Vertical track through the transmitter height, one point per voxel
		"""
		steps = int(math.floor(span / resolution + 1e-9))
		offsets = tuple(float(k * resolution) for k in range(-steps, steps + 1))
		return cls(tx=tx, track=LINE, track_x=(lateral_offset,), track_y=offsets, resolution=resolution, **kwargs)

	@classmethod
	def surface_grid(cls, tx: TxSpec, half_width: float = 0.3, half_height: float = 0.3, pitch: float = None, resolution: float = 0.02, **kwargs):
		pitch = resolution if pitch is None else pitch
		nx = int(math.floor(half_width / pitch + 1e-9))
		ny = int(math.floor(half_height / pitch + 1e-9))
		xs = tuple(float(k * pitch) for k in range(-nx, nx + 1))
		ys = tuple(float(k * pitch) for k in range(-ny, ny + 1))
		return cls(tx=tx, track=GRID, track_x=xs, track_y=ys, resolution=resolution, **kwargs)

	@property
	def contact_steps(self) -> int:
		"""
		Galvanic contact separation in whole voxels
		"""
		return contact_steps(self.rx_spacing, self.resolution)

	def validate(self):
		if self.track not in (LINE, GRID):
			raise InvalidSpec('track', f"must be {LINE!r} or {GRID!r}, got {self.track!r}")
		if not self.modes or any(mode not in constants.MODES for mode in self.modes):
			raise InvalidSpec('modes', f"must be a non-empty subset of {', '.join(constants.MODES)}")
		if self.track == LINE and len(self.track_x) != 1:
			raise InvalidSpec('track_x', "line track takes a single lateral position")
		if len(self.track_x) * len(self.track_y) < 2:
			raise InvalidSpec('track_y', "at least 2 receiver points are required")
		if not self.frequency > 0:
			raise InvalidSpec('frequency_hz', f"must be > 0, got {self.frequency}")
		if not self.resolution > 0:
			raise InvalidSpec('resolution_m', f"must be > 0, got {self.resolution}")
		if not 0 < self.tol_rel <= 1e-2:
			raise InvalidSpec('tol_rel', f"must lie in (0, 1e-2], got {self.tol_rel}")
		if self.max_iter < 1:
			raise InvalidSpec('max_iter', f"must be >= 1, got {self.max_iter}")
		if not self.rx_spacing > 0:
			raise InvalidSpec('rx_spacing_m', f"must be > 0, got {self.rx_spacing}")
		if self.contact_steps < 1:
			raise InvalidSpec('rx_spacing_m', f"{self.rx_spacing} m is less than half a {self.resolution} m voxel")
		self.tx.validate()
		self.phantom.validate()
		return self


@dataclass
class PathLossCurve:
	mode: str
	orientation: str
	distance: np.ndarray
	"""signed Euclidean Tx-Rx separation (sign of the vertical offset)"""
	offset: np.ndarray
	positions: np.ndarray
	path_loss_db: np.ndarray
	provenance: str = constants.SIMULATED

	def __len__(self):
		return int(self.distance.size)

	def to_frame(self) -> pd.DataFrame:
		return pd.DataFrame({
			'orientation': [self.orientation] * len(self),
			'mode': [self.mode] * len(self),
			'distance_m': self.distance,
			'offset_m': self.offset,
			'x_m': self.positions[:, 0] if len(self) else [],
			'y_m': self.positions[:, 1] if len(self) else [],
			'z_m': self.positions[:, 2] if len(self) else [],
			'path_loss_db': self.path_loss_db,
		}, columns=CURVE_COLUMNS)


@dataclass
class PathLossGrid:
	"""
	Path loss matrices indexed ``[ix, iy]``, one per mode, NaN where no data
	"""
	x: np.ndarray
	y: np.ndarray
	path_loss: Dict[str, np.ndarray]
	provenance: str = constants.SIMULATED
	meta: Dict[str, str] = field(default_factory=dict)

	def __post_init__(self):
		self.x = np.asarray(self.x, dtype=float)
		self.y = np.asarray(self.y, dtype=float)
		for mode, values in self.path_loss.items():
			if values.shape != (self.x.size, self.y.size):
				raise GridMismatch(f"{mode} matrix {values.shape} does not match axes {(self.x.size, self.y.size)}")

	@property
	def modes(self) -> Tuple[str, ...]:
		return tuple(mode for mode in constants.MODES if mode in self.path_loss)

	def values(self, mode: str) -> np.ndarray:
		try:
			return self.path_loss[mode]
		except KeyError:
			raise GridMismatch(f"Grid has no {mode} data") from None

	def radius(self) -> np.ndarray:
		return np.hypot(self.x[:, None], self.y[None, :])

	def same_axes(self, other: 'PathLossGrid') -> bool:
		return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

	def single(self, mode: str) -> 'PathLossGrid':
		return PathLossGrid(self.x, self.y, {mode: self.values(mode)}, self.provenance, dict(self.meta))

	def to_frame(self) -> pd.DataFrame:
		X, Y = np.meshgrid(self.x, self.y, indexing='ij')
		frames = [
			pd.DataFrame({
				'x_m': X.reshape(-1),
				'y_m': Y.reshape(-1),
				'mode': mode,
				'path_loss_db': self.path_loss[mode].reshape(-1),
			}, columns=GRID_COLUMNS)
			for mode in self.modes
		]
		if not frames:
			return pd.DataFrame(columns=GRID_COLUMNS)
		return pd.concat(frames, ignore_index=True)

	def write(self, path):
		meta = {'provenance': self.provenance}
		meta.update(sorted(self.meta.items()))
		return utils.write_table(self.to_frame(), path, meta=meta)


def read_path_loss_grid(source) -> PathLossGrid:
	"""
	Load a ``x_m,y_m,mode,path_loss_db`` table written by ``PathLossGrid.write``
	"""
	table = utils.read_table(source, GRID_COLUMNS)
	xs = utils.column_values(table, 'x_m')
	ys = utils.column_values(table, 'y_m')
	values = utils.column_values(table, 'path_loss_db')
	modes = [mode.strip() for mode in table.frame['mode']]
	for line, mode in zip(table.lines, modes):
		if mode not in constants.MODES:
			raise ParseError(f"Unknown mode {mode!r}", line)

	x_axis = np.unique(xs)
	y_axis = np.unique(ys)
	ix = np.searchsorted(x_axis, xs)
	iy = np.searchsorted(y_axis, ys)
	path_loss = {}
	seen = set()
	for line, mode, i, j, value in zip(table.lines, modes, ix, iy, values):
		matrix = path_loss.setdefault(mode, np.full((x_axis.size, y_axis.size), np.nan))
		if (mode, i, j) in seen:
			raise ParseError(f"Duplicate cell ({x_axis[i]}, {y_axis[j]}) for {mode}", line)
		seen.add((mode, i, j))
		matrix[i, j] = value
	meta = dict(table.meta)
	provenance = meta.pop('provenance', constants.SIMULATED)
	return PathLossGrid(x_axis, y_axis, path_loss, provenance, meta)


@dataclass
class SweepResult:
	spec: SweepSpec
	curves: Dict[str, PathLossCurve]
	samples: List[ChannelSample]
	stats: SolverStats
	qs: QsReport
	skipped: List[Tuple[float, float]] = field(default_factory=list)
	grids: Dict[str, PathLossGrid] = field(default_factory=dict)

	@property
	def orientation(self) -> str:
		return self.spec.tx.orientation


@dataclass(frozen=True)
class NullReport:
	found: bool
	index: Optional[int] = None
	distance: Optional[float] = None
	offset: Optional[float] = None
	path_loss_db: Optional[float] = None
	prominence_db: float = 0.0


@dataclass(frozen=True)
class SaturationReport:
	floor_db: float
	iqr_db: float
	points: int
	saturated: bool


@dataclass
class ModeRegionMap:
	x: np.ndarray
	y: np.ndarray
	winner: np.ndarray
	margin: np.ndarray
	delta: np.ndarray
	"""PL_galvanic - PL_capacitive, NaN where either grid is missing"""
	polylines: List[np.ndarray] = field(default_factory=list)
	galvanic_core: Optional[np.ndarray] = None

	@property
	def galvanic_radius(self) -> Optional[float]:
		"""
		Largest distance of a galvanic core cell from the transmitter
		"""
		if self.galvanic_core is None or not self.galvanic_core.any():
			return None
		radius = np.hypot(self.x[:, None], self.y[None, :])
		return float(radius[self.galvanic_core].max())

	def to_frame(self) -> pd.DataFrame:
		X, Y = np.meshgrid(self.x, self.y, indexing='ij')
		return pd.DataFrame({
			'x_m': X.reshape(-1),
			'y_m': Y.reshape(-1),
			'winner': self.winner.reshape(-1),
			'margin_db': self.margin.reshape(-1),
		}, columns=REGION_COLUMNS)

	def crossover_frame(self) -> pd.DataFrame:
		rows = [
			(number, float(px), float(py))
			for number, polyline in enumerate(self.polylines)
			for px, py in polyline
		]
		return pd.DataFrame(rows, columns=CROSSOVER_COLUMNS)


def read_region_map(source) -> ModeRegionMap:
	table = utils.read_table(source, REGION_COLUMNS)
	xs = utils.column_values(table, 'x_m')
	ys = utils.column_values(table, 'y_m')
	margins = utils.column_values(table, 'margin_db')
	winners = [winner.strip() for winner in table.frame['winner']]
	x_axis = np.unique(xs)
	y_axis = np.unique(ys)
	winner = np.full((x_axis.size, y_axis.size), constants.NO_DATA, dtype=object)
	margin = np.full(winner.shape, np.nan)
	for line, px, py, label, value in zip(table.lines, xs, ys, winners, margins):
		if label not in (constants.GALVANIC, constants.CAPACITIVE, constants.TIE, constants.NO_DATA):
			raise ParseError(f"Unknown winner {label!r}", line)
		i = np.searchsorted(x_axis, px)
		j = np.searchsorted(y_axis, py)
		winner[i, j] = label
		margin[i, j] = value
	delta = np.where(winner == constants.GALVANIC, margin, np.where(winner == constants.CAPACITIVE, -margin, np.where(winner == constants.TIE, 0.0, np.nan))).astype(float)
	return ModeRegionMap(x_axis, y_axis, winner, margin, delta, galvanic_core=_galvanic_core(x_axis, y_axis, winner))


@dataclass(frozen=True)
class Recommendation:
	mode: str
	margin_db: float
	x: float
	y: float


@dataclass(frozen=True)
class MapSummary:
	"""
	Worst-case loss of a single-mode receiver in the region the other mode wins
	"""
	max_capacitive_penalty_db: float
	"""loss of a capacitive-only receiver inside the galvanic region"""
	max_galvanic_penalty_db: float
	"""loss of a galvanic-only receiver inside the capacitive region"""
	galvanic_cells: int
	capacitive_cells: int
	tie_cells: int
	galvanic_radius: Optional[float]


def _tx_grid(spec: SweepSpec, grid: Optional[VoxelGrid], workers: int) -> VoxelGrid:
	if grid is None:
		grid = voxelize(build_phantom(spec.phantom), spec.resolution, workers=workers)
	elif not math.isclose(grid.resolution, spec.resolution):
		raise InvalidSpec('resolution_m', f"grid resolution {grid.resolution} differs from sweep resolution {spec.resolution}")
	return place_transmitter(grid, spec.tx)


def solve_transmitter(spec: SweepSpec, grid: VoxelGrid = None, workers: int = 1) -> PotentialField:
	"""
	Single field solve for the sweep's transmitter; raises ``NoConvergence``
	with the partial field attached when the tolerance is not met
	"""
	tx_grid = _tx_grid(spec, grid, workers)
	table = spec.table if spec.table is not None else load_tissue_table()
	system = assemble(tx_grid, table, spec.frequency, spec.tx.voltage)
	field_ = solve(system, spec.tol_rel, spec.max_iter, spec.preconditioner)
	return field_.require_converged()


def _contact_columns(grid: VoxelGrid, u: float, steps: int) -> Tuple[float, float]:
	"""
	Voxel column centres of the galvanic contacts, ``steps`` voxels apart
	and as balanced about ``u`` as the lattice allows
	"""
	ox, res = grid.origin[0], grid.resolution
	i = math.floor((u - ox) / res) - steps // 2
	return ox + (i + 0.5) * res, ox + (i + steps + 0.5) * res


def place_receivers(spec: SweepSpec, grid: VoxelGrid, u: float, v: float) -> Optional[list]:
	"""
	Receivers at surface coordinate (u, v); None when the track misses the body
	"""
	z = spec.tx.center[2] + v
	side = 1 if spec.tx.center[1] >= 0 else -1
	receivers = []
	for mode in spec.modes:
		if mode == constants.CAPACITIVE:
			contact = grid.project_to_surface(u, z, side)
			if contact is None:
				return None
			receivers.append(CapacitiveRx(tuple(contact), spec.c_return, spec.load_r, spec.load_c))
		else:
			x_a, x_b = _contact_columns(grid, u, spec.contact_steps)
			contact_a = grid.project_to_surface(x_a, z, side)
			contact_b = grid.project_to_surface(x_b, z, side)
			if contact_a is None or contact_b is None:
				return None
			receivers.append(GalvanicRx(tuple(contact_a), tuple(contact_b)))
	return receivers


def _signed_distance(position, center, offset) -> float:
	distance = float(np.linalg.norm(np.asarray(position) - np.asarray(center)))
	return -distance if offset < 0 else distance


def _evaluate(spec: SweepSpec, field_: PotentialField, workers: int):
	points = [(u, v) for u in spec.track_x for v in spec.track_y]

	def evaluate(point):
		u, v = point
		receivers = place_receivers(spec, field_.grid, u, v)
		if receivers is None:
			return point, None
		return point, [evaluate_rx(field_, rx, spec.frequency) for rx in receivers]

	if workers > 1:
		with ThreadPoolExecutor(max_workers=workers) as executor:
			results = list(executor.map(evaluate, points))
	else:
		results = [evaluate(point) for point in points]

	skipped = [point for point, samples in results if samples is None]
	for u, v in skipped:
		logger.warning("Skipping receiver at x=%.3f m, offset=%.3f m: track misses body surface", u, v)
	return [(point, samples) for point, samples in results if samples is not None], skipped


def _curves(spec: SweepSpec, evaluated) -> Dict[str, PathLossCurve]:
	curves = {}
	for mode in spec.modes:
		rows = []
		for (__, v), samples in evaluated:
			sample = next(s for s in samples if s.mode == mode)
			rows.append((_signed_distance(sample.rx_position, spec.tx.center, v), v, sample.rx_position, sample.path_loss_db))
		rows.sort(key=lambda row: (row[0], row[1]))
		curves[mode] = PathLossCurve(
			mode=mode,
			orientation=spec.tx.orientation,
			distance=np.array([row[0] for row in rows], dtype=float),
			offset=np.array([row[1] for row in rows], dtype=float),
			positions=np.array([row[2] for row in rows], dtype=float).reshape(-1, 3),
			path_loss_db=np.array([row[3] for row in rows], dtype=float),
		)
	return curves


def _grids(spec: SweepSpec, evaluated) -> Dict[str, PathLossGrid]:
	xs = np.array(sorted(set(spec.track_x)), dtype=float)
	ys = np.array(sorted(set(spec.track_y)), dtype=float)
	matrices = {mode: np.full((xs.size, ys.size), np.nan) for mode in spec.modes}
	for (u, v), samples in evaluated:
		i = int(np.searchsorted(xs, u))
		j = int(np.searchsorted(ys, v))
		for sample in samples:
			matrices[sample.mode][i, j] = sample.path_loss_db
	meta = {
		'frequency_hz': repr(float(spec.frequency)),
		'orientation': spec.tx.orientation,
		'v_tx': repr(float(spec.tx.voltage)),
	}
	return {
		mode: PathLossGrid(xs, ys, {mode: matrices[mode]}, constants.SIMULATED, dict(meta))
		for mode in spec.modes
	}


def evaluate_field(spec: SweepSpec, field_: PotentialField, workers: int = 1) -> SweepResult:
	"""
	Evaluate every receiver of the sweep on an already solved field

	The field must come from a solve of the same transmitter; a line track and
	a surface lattice can share one solve this way.
	"""
	spec.validate()
	qs = validate_quasistatic(spec.frequency, build_phantom(spec.phantom).extent)
	if not qs.quasistatic_ok:
		logger.warning("Non-quasistatic run flagged: %s", qs.notes)
	evaluated, skipped = _evaluate(spec, field_, workers)
	samples = [sample for __, point_samples in evaluated for sample in point_samples]
	result = SweepResult(spec, _curves(spec, evaluated), samples, field_.stats, qs, skipped)
	if spec.track == GRID:
		result.grids = _grids(spec, evaluated)
	logger.info("Sweep %s: %d receivers, %d skipped", spec.tx.orientation, len(evaluated), len(skipped))
	return result


def run_sweep(spec: SweepSpec, grid: VoxelGrid = None, workers: int = 1) -> SweepResult:
	"""
	Solve once for the transmitter and evaluate every receiver on the track
	"""
	spec.validate()
	return evaluate_field(spec, solve_transmitter(spec, grid, workers), workers)


def run_surface_map(spec: SweepSpec, grid: VoxelGrid = None, workers: int = 1) -> Dict[str, PathLossGrid]:
	"""
	Path loss grid per mode over a surface lattice centred on the transmitter
	"""
	if spec.track != GRID:
		spec = replace(spec, track=GRID)
	return run_sweep(spec, grid, workers).grids


def orientation_study(spec: SweepSpec, presets=(constants.O1_VERTICAL, constants.O2_LATERAL, constants.O3_NORMAL), threads: int = 1, grid: VoxelGrid = None) -> Dict[str, SweepResult]:
	"""
	One sweep per orientation preset, solved in parallel on a shared grid

	Configurations that fail to solve are logged and left out of the result.
	The grid is voxelized from the sweep phantom unless one is passed in.
	"""
	spec.validate()
	if grid is None:
		grid = voxelize(build_phantom(spec.phantom), spec.resolution, workers=threads)

	def run(orientation):
		tx = replace(spec.tx, axis=tuple(float(v) for v in constants.ORIENTATION_AXES[orientation]), orientation=orientation)
		try:
			return orientation, run_sweep(replace(spec, tx=tx), grid)
		except NoConvergence as e:
			logger.warning("Skipping %s: %s", orientation, e)
		except ChannelError as e:
			logger.warning("Skipping %s: %s: %s", orientation, e.__class__.__name__, e)
		return orientation, None

	if threads > 1:
		with ThreadPoolExecutor(max_workers=threads) as executor:
			results = list(executor.map(run, presets))
	else:
		results = [run(orientation) for orientation in presets]
	return {orientation: result for orientation, result in results if result is not None}


def find_null(curve: PathLossCurve, min_prominence: float = None) -> NullReport:
	"""
	Deepest interior notch of a path loss curve

	Prominence of a strict local minimum is measured against the lower of the
	highest values on its two sides.
	"""
	min_prominence = HBC_NULL_PROMINENCE_DB if min_prominence is None else min_prominence
	values = np.asarray(curve.path_loss_db, dtype=float)
	finite = np.flatnonzero(np.isfinite(values))
	if finite.size < 5:
		return NullReport(False)
	v = values[finite]
	best = None
	for k in range(1, v.size - 1):
		if v[k] < v[k - 1] and v[k] < v[k + 1]:
			prominence = min(v[:k].max(), v[k + 1:].max()) - v[k]
			if best is None or prominence > best[1]:
				best = (k, prominence)
	if best is None or best[1] < min_prominence:
		return NullReport(False, prominence_db=float(best[1]) if best else 0.0)
	index = int(finite[best[0]])
	return NullReport(
		True,
		index=index,
		distance=float(curve.distance[index]),
		offset=float(curve.offset[index]),
		path_loss_db=float(values[index]),
		prominence_db=float(best[1]),
	)


def saturation_floor(grid: PathLossGrid, far_region: float = None, mode: str = constants.CAPACITIVE, min_points: int = 5) -> SaturationReport:
	"""
	Median and interquartile spread of path loss beyond ``far_region`` metres
	"""
	far_region = HBC_FAR_REGION_M if far_region is None else far_region
	values = grid.values(mode)
	selected = values[(grid.radius() > far_region) & np.isfinite(values)]
	if selected.size < min_points:
		raise TooFewPoints(f"Far region beyond {far_region} m holds {selected.size} points, {min_points} required")
	q1, median, q3 = np.percentile(selected, [25, 50, 75])
	iqr = float(q3 - q1)
	saturated = iqr <= HBC_SATURATION_IQR_DB
	if not saturated:
		logger.warning("No saturation: interquartile range %.2f dB > %.2f dB", iqr, HBC_SATURATION_IQR_DB)
	return SaturationReport(float(median), iqr, int(selected.size), saturated)


def crossover_polylines(x, y, delta) -> List[np.ndarray]:
	"""
	``delta = 0`` contour lines as arrays of (x, y) points; cells with a
	missing corner are skipped
	"""
	delta = np.asarray(delta, dtype=float)
	if min(delta.shape) < 2:
		return []
	x = np.asarray(x, dtype=float)
	y = np.asarray(y, dtype=float)
	# contour vertices come back in fractional (i, j) lattice indices
	return [
		np.column_stack([np.interp(contour[:, 0], np.arange(x.size), x), np.interp(contour[:, 1], np.arange(y.size), y)])
		for contour in find_contours(delta, 0.0, mask=np.isfinite(delta))
	]


def _galvanic_core(x, y, winner) -> np.ndarray:
	"""
	Connected galvanic region containing or touching the transmitter cell
	"""
	galvanic = winner == constants.GALVANIC
	labels, count = ndimage.label(galvanic)
	core = np.zeros_like(galvanic)
	if not count:
		return core
	i = int(np.argmin(np.abs(np.asarray(x))))
	j = int(np.argmin(np.abs(np.asarray(y))))
	window = labels[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
	for label in np.unique(window[window > 0]):
		core |= labels == label
	return core


def crossover_contour(cap: PathLossGrid, galv: PathLossGrid, tie_eps: float = None) -> ModeRegionMap:
	"""
	Pointwise receiver mode winner and the galvanic/capacitive boundary
	"""
	tie_eps = HBC_TIE_EPSILON_DB if tie_eps is None else tie_eps
	if not cap.same_axes(galv):
		raise GridMismatch("Capacitive and galvanic grids have different coordinate axes")
	delta = galv.values(constants.GALVANIC) - cap.values(constants.CAPACITIVE)
	finite = np.isfinite(delta)
	winner = np.full(delta.shape, constants.NO_DATA, dtype=object)
	winner[finite & (delta > 0)] = constants.GALVANIC
	winner[finite & (delta < 0)] = constants.CAPACITIVE
	tie = finite & (np.abs(np.where(finite, delta, 0.0)) < tie_eps)
	winner[tie] = constants.TIE
	margin = np.where(finite, np.abs(np.where(finite, delta, 0.0)), np.nan)
	margin[tie] = 0.0

	region = ModeRegionMap(cap.x.copy(), cap.y.copy(), winner, margin, delta)
	region.polylines = crossover_polylines(region.x, region.y, delta)
	region.galvanic_core = _galvanic_core(region.x, region.y, winner)
	logger.debug("Crossover: %d polylines, galvanic core of %d cells", len(region.polylines), int(region.galvanic_core.sum()))
	return region


def single_mode_penalty(region: ModeRegionMap, mode: str) -> float:
	"""
	Worst-case loss (dB) of fixing the receiver to ``mode`` over the whole map
	"""
	other = constants.GALVANIC if mode == constants.CAPACITIVE else constants.CAPACITIVE
	cells = region.winner == other
	if not cells.any():
		return 0.0
	return float(region.margin[cells].max())


def summarize(region: ModeRegionMap) -> MapSummary:
	return MapSummary(
		max_capacitive_penalty_db=single_mode_penalty(region, constants.CAPACITIVE),
		max_galvanic_penalty_db=single_mode_penalty(region, constants.GALVANIC),
		galvanic_cells=int((region.winner == constants.GALVANIC).sum()),
		capacitive_cells=int((region.winner == constants.CAPACITIVE).sum()),
		tie_cells=int((region.winner == constants.TIE).sum()),
		galvanic_radius=region.galvanic_radius,
	)


def recommend_mode(region: ModeRegionMap, position) -> Recommendation:
	"""
	Winner and margin of the cell nearest to ``position``; ties prefer the
	capacitive receiver
	"""
	px, py = (float(v) for v in position)
	if not (region.x.min() <= px <= region.x.max() and region.y.min() <= py <= region.y.max()):
		raise OutOfBounds(f"Position ({px}, {py}) lies outside the map")
	i = int(np.argmin(np.abs(region.x - px)))
	j = int(np.argmin(np.abs(region.y - py)))
	winner = region.winner[i, j]
	if winner == constants.NO_DATA:
		raise OutOfBounds(f"No data at ({region.x[i]}, {region.y[j]})")
	if winner == constants.TIE:
		return Recommendation(constants.CAPACITIVE, 0.0, float(region.x[i]), float(region.y[j]))
	return Recommendation(winner, float(region.margin[i, j]), float(region.x[i]), float(region.y[j]))
