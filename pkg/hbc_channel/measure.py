# -*- coding: utf-8 -*-
"""
Measurement campaign ingestion and measured-vs-simulated comparison

Campaign files are ``x_cm,y_cm,p_rx_dbm`` tables with a ``#meta key=value``
header block. Path loss is recovered from the analyzer reading as::

	path_loss_db = (p_rx_dbm + attenuator_db - buffer_gain_db + cable_loss_db) - tx_power_dbm
"""
import io
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd

from . import constants, utils
from .exceptions import DuplicateCoordinate, GridMismatch, InvalidSpec, MissingTxPower, NoOverlap, ParseError, TooFewPoints
from .scenario import PathLossCurve, PathLossGrid, crossover_contour, find_null, saturation_floor


logger = logging.getLogger(__name__)


MEASUREMENT_COLUMNS = ('x_cm', 'y_cm', 'p_rx_dbm')

CM = 100.0


@dataclass(frozen=True)
class Calibration:
	attenuator_db: float = 20.0
	buffer_gain_db: float = 0.0
	tx_power_dbm: Optional[float] = None
	"""overrides ``#meta tx_power_dbm`` when set"""
	cable_loss_db: float = 0.0

	def __post_init__(self):
		if not (math.isfinite(self.attenuator_db) and self.attenuator_db >= 0):
			raise InvalidSpec('attenuator_db', f"must be >= 0, got {self.attenuator_db}")
		for name in ('buffer_gain_db', 'cable_loss_db'):
			if not math.isfinite(getattr(self, name)):
				raise InvalidSpec(name, "must be finite")
		if self.tx_power_dbm is not None and not math.isfinite(self.tx_power_dbm):
			raise InvalidSpec('tx_power_dbm', "must be finite")


@dataclass
class MeasuredGrid:
	x_cm: np.ndarray
	y_cm: np.ndarray
	p_rx_dbm: np.ndarray
	mode: str
	meta: Dict[str, str] = field(default_factory=dict)


@dataclass
class ComparisonReport:
	modes: tuple
	aligned_cells: int
	coverage_pct: float
	bias_db: float
	rmse_db: float
	per_mode: Dict[str, dict] = field(default_factory=dict)
	winner_agreement_pct: Optional[float] = None
	saturation_floor_delta_db: Optional[float] = None
	null_location_delta_m: Optional[float] = None

	def to_dict(self) -> dict:
		result = asdict(self)
		result['modes'] = list(self.modes)
		return result


def parse_measurements(source, mode: str = None) -> MeasuredGrid:
	"""
	Read a campaign file; ``mode`` overrides the ``#meta mode`` entry
	"""
	table = utils.read_table(source, MEASUREMENT_COLUMNS)
	xs = utils.column_values(table, 'x_cm')
	ys = utils.column_values(table, 'y_cm')
	power = utils.column_values(table, 'p_rx_dbm')

	seen = {}
	for line, x, y in zip(table.lines, xs, ys):
		if not (math.isfinite(x) and math.isfinite(y)):
			raise ParseError(f"Non-finite coordinate ({x}, {y})", line)
		if (x, y) in seen:
			raise DuplicateCoordinate(f"Duplicate coordinate ({x:g}, {y:g}) cm, first seen on line {seen[(x, y)]}", line)
		seen[(x, y)] = line

	mode = mode or table.meta.get('mode')
	if mode is None:
		raise ParseError("Measurement mode missing: pass --mode or add '#meta mode=...'")
	mode = mode.strip().lower()
	if mode not in constants.MODES:
		raise ParseError(f"Unknown measurement mode {mode!r}")
	return MeasuredGrid(xs, ys, power, mode, dict(table.meta))


def _tx_power(measured: MeasuredGrid, cal: Calibration) -> float:
	if cal.tx_power_dbm is not None:
		return cal.tx_power_dbm
	raw = measured.meta.get('tx_power_dbm')
	if raw is None:
		raise MissingTxPower("tx_power_dbm missing: set it in the calibration or as '#meta tx_power_dbm'")
	try:
		value = float(raw)
	except ValueError:
		raise ParseError(f"tx_power_dbm: invalid number {raw!r}") from None
	if not math.isfinite(value):
		raise ParseError("tx_power_dbm must be finite")
	return value


def ingest_grid(source, cal: Calibration, mode: str = None) -> PathLossGrid:
	"""
	Calibrated path loss grid from a campaign file, missing cells as NaN
	"""
	measured = parse_measurements(source, mode)
	tx_power = _tx_power(measured, cal)
	path_loss = (measured.p_rx_dbm + cal.attenuator_db - cal.buffer_gain_db + cal.cable_loss_db) - tx_power

	xs = measured.x_cm / CM
	ys = measured.y_cm / CM
	x_axis = np.unique(xs)
	y_axis = np.unique(ys)
	matrix = np.full((x_axis.size, y_axis.size), np.nan)
	matrix[np.searchsorted(x_axis, xs), np.searchsorted(y_axis, ys)] = path_loss
	if np.any(path_loss[np.isfinite(path_loss)] > 0):
		logger.warning("Ingested path loss above 0 dB, check calibration")

	meta = {key: value for key, value in measured.meta.items() if key not in ('mode', 'tx_power_dbm')}
	logger.info("Ingested %d %s cells on %dx%d lattice", path_loss.size, measured.mode, x_axis.size, y_axis.size)
	return PathLossGrid(x_axis, y_axis, {measured.mode: matrix}, constants.MEASURED, meta)


def _cm_text(value_m: float) -> str:
	"""
	Centimetre rendering that converts back to exactly ``value_m``
	"""
	candidate = value_m * CM
	for __ in range(8):
		if float(repr(candidate)) / CM == value_m:
			return repr(candidate)
		candidate = np.nextafter(candidate, math.inf if candidate / CM < value_m else -math.inf)
	raise ValueError(f"Cannot represent {value_m!r} m in centimetres")


def serialize_grid(grid: PathLossGrid, mode: str, path=None) -> str:
	"""
	Campaign-format text of one mode with identity calibration

	Reading it back with ``Calibration(attenuator_db=0)`` reproduces the finite
	cells bit for bit.
	"""
	values = grid.values(mode)
	rows = [
		(_cm_text(float(x)), _cm_text(float(y)), repr(float(values[i, j])))
		for i, x in enumerate(grid.x)
		for j, y in enumerate(grid.y)
		if np.isfinite(values[i, j])
	]
	buf = io.StringIO()
	buf.write(f"# {grid.provenance} path loss grid, identity calibration\n")
	meta = {'mode': mode, 'tx_power_dbm': '0'}
	meta.update((key, value) for key, value in sorted(grid.meta.items()) if key not in meta)
	for key, value in meta.items():
		buf.write(f"{utils.META_PREFIX} {key}={value}\n")
	pd.DataFrame(rows, columns=MEASUREMENT_COLUMNS).to_csv(buf, index=False, lineterminator='\n')
	text = buf.getvalue()
	if path is not None:
		utils.write_text(path, text)
	return text


def merge_grids(*grids: PathLossGrid) -> PathLossGrid:
	"""
	Join single-mode grids sharing the same axes
	"""
	if not grids:
		raise GridMismatch("Nothing to merge")
	first = grids[0]
	path_loss = {}
	meta = {}
	for grid in grids:
		if not first.same_axes(grid):
			raise GridMismatch("Grids have different coordinate axes")
		for mode in grid.modes:
			if mode in path_loss:
				raise GridMismatch(f"Mode {mode} present in more than one grid")
			path_loss[mode] = grid.path_loss[mode]
		meta.update(grid.meta)
	return PathLossGrid(first.x, first.y, path_loss, first.provenance, meta)


def _alignment(sim: PathLossGrid, meas: PathLossGrid):
	"""
	Nearest simulated cell for every measured cell inside the simulated hull
	"""
	def nearest(axis, values):
		half = (np.min(np.diff(axis)) / 2) if axis.size > 1 else 0.0
		index = np.abs(values[:, None] - axis[None, :]).argmin(axis=1)
		inside = (values >= axis[0] - half) & (values <= axis[-1] + half)
		return index, inside

	ix, x_inside = nearest(sim.x, meas.x)
	iy, y_inside = nearest(sim.y, meas.y)
	return ix, x_inside, iy, y_inside


def _row_curve(grid: PathLossGrid, mode: str) -> PathLossCurve:
	j = int(np.argmin(np.abs(grid.y)))
	values = grid.values(mode)[:, j]
	positions = np.stack([grid.x, np.full(grid.x.size, grid.y[j]), np.zeros(grid.x.size)], axis=-1)
	return PathLossCurve(mode, '', grid.x.copy(), grid.x.copy(), positions, values.copy(), grid.provenance)


def compare(sim: PathLossGrid, meas: PathLossGrid) -> ComparisonReport:
	"""
	Bias, RMSE, winner agreement, saturation floor and null location deltas
	between a simulated and a measured grid
	"""
	modes = tuple(mode for mode in constants.MODES if mode in sim.path_loss and mode in meas.path_loss)
	if not modes:
		raise NoOverlap("Grids share no receiver mode")
	ix, x_inside, iy, y_inside = _alignment(sim, meas)
	inside = x_inside[:, None] & y_inside[None, :]

	differences = []
	per_mode = {}
	measured_cells = 0
	for mode in modes:
		measured = meas.values(mode)
		simulated = sim.values(mode)[np.ix_(ix, iy)]
		finite_meas = np.isfinite(measured)
		aligned = finite_meas & inside & np.isfinite(simulated)
		measured_cells += int(finite_meas.sum())
		diff = (measured - simulated)[aligned]
		differences.append(diff)
		if diff.size:
			per_mode[mode] = {
				'aligned_cells': int(diff.size),
				'bias_db': float(diff.mean()),
				'rmse_db': float(np.sqrt(np.mean(diff ** 2))),
			}

	diff = np.concatenate(differences)
	if not diff.size:
		raise NoOverlap("No measured cell aligns with a simulated cell")
	report = ComparisonReport(
		modes=modes,
		aligned_cells=int(diff.size),
		coverage_pct=float(100.0 * diff.size / measured_cells),
		bias_db=float(diff.mean()),
		rmse_db=float(np.sqrt(np.mean(diff ** 2))),
		per_mode=per_mode,
	)

	if set(modes) == set(constants.MODES):
		sim_map = crossover_contour(sim, sim)
		meas_map = crossover_contour(meas, meas)
		sim_winner = sim_map.winner[np.ix_(ix, iy)]
		decided = (
			inside &
			np.isin(meas_map.winner, (constants.GALVANIC, constants.CAPACITIVE)) &
			np.isin(sim_winner, (constants.GALVANIC, constants.CAPACITIVE))
		)
		if decided.any():
			report.winner_agreement_pct = float(100.0 * np.mean(meas_map.winner[decided] == sim_winner[decided]))

	if constants.CAPACITIVE in modes:
		try:
			report.saturation_floor_delta_db = saturation_floor(meas).floor_db - saturation_floor(sim).floor_db
		except TooFewPoints as e:
			logger.info("Saturation floor not compared: %s", e)

	if constants.GALVANIC in modes:
		sim_null = find_null(_row_curve(sim, constants.GALVANIC))
		meas_null = find_null(_row_curve(meas, constants.GALVANIC))
		if sim_null.found and meas_null.found:
			report.null_location_delta_m = meas_null.distance - sim_null.distance

	logger.info("Compared %d cells: bias %.3f dB, RMSE %.3f dB", report.aligned_cells, report.bias_db, report.rmse_db)
	return report
