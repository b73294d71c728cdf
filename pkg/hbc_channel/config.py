# -*- coding: utf-8 -*-
"""
Strict YAML run configuration

Every section and key is optional; unknown keys, wrong types and values out
of range raise ``InvalidSpec`` naming the dotted key.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import yaml

from . import constants, utils
from .exceptions import ConfigError, InvalidSpec
from .phantom import PhantomSpec, TxSpec
from .scenario import SweepSpec, contact_steps
from .settings import (
	HBC_LOAD_CAPACITANCE_F,
	HBC_LOAD_RESISTANCE_OHM,
	HBC_RETURN_CAPACITANCE_F,
	HBC_SOLVER_MAX_ITER,
	HBC_SOLVER_PRECONDITIONER,
	HBC_SOLVER_TOLERANCE,
)
from .tissue import DEFAULT_TABLE_PATH, TissueTable, load_tissue_table


logger = logging.getLogger(__name__)


MAX_RESOLUTION_M = 0.1
PRECONDITIONERS = ('ilu', 'jacobi', 'none')
ORIENTATIONS = (constants.O1_VERTICAL, constants.O2_LATERAL, constants.O3_NORMAL, constants.CUSTOM)

# dataclass field -> config key
CONFIG_KEYS = {
	'center': 'center_m',
	'voltage': 'voltage_v',
	'orientation': 'orientation',
	'axis': 'axis',
}


# section -> key -> (kind, default)
SCHEMA = {
	'phantom': {
		'torso_radius_m': ('float', 0.15),
		'torso_height_m': ('float', 1.8),
		'arm_radius_m': ('float', 0.05),
		'arm_length_m': ('float', 1.8),
		'crossing_height_m': ('float', 1.4),
		'skin_thickness_m': ('float', 0.002),
		'air_margin_m': ('float', 0.30),
		'ground_plane_z_m': ('float', 0.0),
		'ground_clearance_m': ('float', 0.04),
	},
	'tissue': {
		'table': ('path', None),
		'frequency_hz': ('float', 21e6),
	},
	'tx': {
		'center_m': ('vector', (0.0, 0.12, 0.80)),
		'orientation': ('str', constants.O1_VERTICAL),
		'axis': ('vector', None),
		'plate_width_m': ('float', 0.01),
		'plate_height_m': ('float', 0.01),
		'plate_gap_m': ('float', 0.04),
		'voltage_v': ('float', 1.0),
	},
	'rx': {
		'modes': ('list', list(constants.MODES)),
		'contact_spacing_m': ('float', 0.02),
		'c_return_f': ('float', HBC_RETURN_CAPACITANCE_F),
		'load_r_ohm': ('float', HBC_LOAD_RESISTANCE_OHM),
		'load_c_f': ('float', HBC_LOAD_CAPACITANCE_F),
	},
	'sweep': {
		'span_m': ('float', 0.5),
		'lateral_offset_m': ('float', 0.06),
		'orientations': ('list', [constants.O1_VERTICAL, constants.O2_LATERAL, constants.O3_NORMAL]),
	},
	'map': {
		'half_width_m': ('float', 0.3),
		'half_height_m': ('float', 0.3),
		'pitch_m': ('float', None),
	},
	'solver': {
		'resolution_m': ('float', 0.02),
		'tol_rel': ('float', HBC_SOLVER_TOLERANCE),
		'max_iter': ('int', HBC_SOLVER_MAX_ITER),
		'preconditioner': ('str', HBC_SOLVER_PRECONDITIONER),
	},
	'output': {
		'dir': ('path', 'out'),
		'dump_field': ('bool', False),
	},
}


def _float(key, value):
	# PyYAML reads exponents without a dot (21e6) as strings
	if isinstance(value, bool):
		raise InvalidSpec(key, f"expected a number, got {value!r}")
	if isinstance(value, str):
		try:
			value = float(value)
		except ValueError:
			raise InvalidSpec(key, f"expected a number, got {value!r}") from None
	if not isinstance(value, (int, float)) or not math.isfinite(value):
		raise InvalidSpec(key, f"expected a finite number, got {value!r}")
	return float(value)


def _convert(key, kind, value):
	if value is None:
		return None
	if kind == 'float':
		return _float(key, value)
	if kind == 'int':
		if isinstance(value, bool) or not isinstance(value, int):
			raise InvalidSpec(key, f"expected an integer, got {value!r}")
		return value
	if kind == 'bool':
		if not isinstance(value, bool):
			raise InvalidSpec(key, f"expected true or false, got {value!r}")
		return value
	if kind in ('str', 'path'):
		if not isinstance(value, str):
			raise InvalidSpec(key, f"expected a string, got {value!r}")
		return value
	if kind == 'vector':
		if not isinstance(value, (list, tuple)) or len(value) != 3:
			raise InvalidSpec(key, f"expected a list of three numbers, got {value!r}")
		return [_float(f"{key}[{i}]", v) for i, v in enumerate(value)]
	if kind == 'list':
		if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
			raise InvalidSpec(key, f"expected a list of strings, got {value!r}")
		return list(value)
	raise AssertionError(kind)


def normalize(data: dict) -> dict:
	"""
	Fill defaults and check types; result is plain data suitable for hashing
	"""
	if data is None:
		data = {}
	if not isinstance(data, dict):
		raise ConfigError("Configuration must be a mapping of sections")
	result = {}
	for section in data:
		if section not in SCHEMA:
			raise InvalidSpec(str(section), "unknown section")
	for section, keys in SCHEMA.items():
		values = data.get(section) or {}
		if not isinstance(values, dict):
			raise InvalidSpec(section, "expected a mapping")
		for key in values:
			if key not in keys:
				raise InvalidSpec(f"{section}.{key}", "unknown key")
		result[section] = {
			key: _convert(f"{section}.{key}", kind, values.get(key, default))
			for key, (kind, default) in keys.items()
		}
	return result


def _positive(data: dict, key: str):
	section, name = key.split('.')
	value = data[section][name]
	if value is not None and not value > 0:
		raise InvalidSpec(key, f"must be > 0, got {value}")


@dataclass
class RunConfig:
	data: dict
	base_dir: Path = field(default_factory=Path.cwd)
	source: Optional[Path] = None

	def __post_init__(self):
		data = self.data
		for key in ('tissue.frequency_hz', 'tx.voltage_v', 'rx.contact_spacing_m', 'sweep.span_m', 'map.half_width_m', 'map.half_height_m', 'map.pitch_m', 'solver.resolution_m', 'rx.c_return_f', 'rx.load_r_ohm'):
			_positive(data, key)
		if data['rx']['load_c_f'] < 0:
			raise InvalidSpec('rx.load_c_f', "must be >= 0")
		if data['solver']['resolution_m'] > MAX_RESOLUTION_M:
			raise InvalidSpec('solver.resolution_m', f"must be <= {MAX_RESOLUTION_M} m")
		if contact_steps(data['rx']['contact_spacing_m'], data['solver']['resolution_m']) < 1:
			raise InvalidSpec('rx.contact_spacing_m', "must span at least one solver voxel")
		if not 0 < data['solver']['tol_rel'] <= 1e-2:
			raise InvalidSpec('solver.tol_rel', "must lie in (0, 1e-2]")
		if data['solver']['max_iter'] < 1:
			raise InvalidSpec('solver.max_iter', "must be >= 1")
		if data['solver']['preconditioner'] not in PRECONDITIONERS:
			raise InvalidSpec('solver.preconditioner', f"must be one of {', '.join(PRECONDITIONERS)}")
		for mode in data['rx']['modes']:
			if mode not in constants.MODES:
				raise InvalidSpec('rx.modes', f"unknown mode {mode!r}")
		if not data['rx']['modes']:
			raise InvalidSpec('rx.modes', "at least one mode is required")
		if data['tx']['orientation'] not in ORIENTATIONS:
			raise InvalidSpec('tx.orientation', f"must be one of {', '.join(ORIENTATIONS)}")
		for orientation in data['sweep']['orientations']:
			if orientation not in ORIENTATIONS[:3]:
				raise InvalidSpec('sweep.orientations', f"unknown preset {orientation!r}")
		table = self.table_path
		if table is not None and not table.is_file():
			raise InvalidSpec('tissue.table', f"file {table} does not exist")
		for section, check in (('phantom', lambda: self.phantom.validate()), ('tx', lambda: self.tx.validate())):
			try:
				check()
			except InvalidSpec as e:
				if '.' in e.field:
					raise
				key = CONFIG_KEYS.get(e.field, f"{e.field}_m")
				raise InvalidSpec(f"{section}.{key}", str(e).split(': ', 1)[-1]) from e

	@property
	def table_path(self) -> Optional[Path]:
		table = self.data['tissue']['table']
		return None if table is None else self.resolve(table)

	def resolve(self, path) -> Path:
		path = Path(path)
		return path if path.is_absolute() else self.base_dir / path

	@property
	def hash(self) -> str:
		"""
		Digest of the normalized configuration and the tissue table contents
		"""
		table = utils.file_digest(self.table_path or DEFAULT_TABLE_PATH)
		return utils.config_hash({'config': self.data, 'tissue_table': table})

	@property
	def frequency(self) -> float:
		return self.data['tissue']['frequency_hz']

	@property
	def resolution(self) -> float:
		return self.data['solver']['resolution_m']

	@property
	def output_dir(self) -> Path:
		return self.resolve(self.data['output']['dir'])

	@property
	def phantom(self) -> PhantomSpec:
		p = self.data['phantom']
		return PhantomSpec(
			torso_radius=p['torso_radius_m'],
			torso_height=p['torso_height_m'],
			arm_radius=p['arm_radius_m'],
			arm_length=p['arm_length_m'],
			crossing_height=p['crossing_height_m'],
			skin_thickness=p['skin_thickness_m'],
			air_margin=p['air_margin_m'],
			ground_plane_z=p['ground_plane_z_m'],
			ground_clearance=p['ground_clearance_m'],
		)

	def tx_for(self, orientation: str = None) -> TxSpec:
		t = self.data['tx']
		orientation = orientation or t['orientation']
		kwargs = dict(
			center=tuple(t['center_m']),
			plate_width=t['plate_width_m'],
			plate_height=t['plate_height_m'],
			plate_gap=t['plate_gap_m'],
			voltage=t['voltage_v'],
		)
		axis = t['axis'] if orientation == constants.CUSTOM else None
		if axis is not None:
			norm = math.sqrt(sum(v * v for v in axis))
			if norm == 0:
				raise InvalidSpec('tx.axis', "must be non-zero")
			axis = [v / norm for v in axis]
		return TxSpec.from_preset(orientation, axis=axis, **kwargs)

	@property
	def tx(self) -> TxSpec:
		return self.tx_for()

	@property
	def orientations(self) -> Tuple[str, ...]:
		return tuple(self.data['sweep']['orientations'])

	def table(self) -> TissueTable:
		return load_tissue_table(self.table_path or DEFAULT_TABLE_PATH)

	def _sweep_kwargs(self) -> dict:
		rx = self.data['rx']
		solver = self.data['solver']
		return dict(
			phantom=self.phantom,
			table=self.table(),
			modes=tuple(mode for mode in constants.MODES if mode in rx['modes']),
			frequency=self.frequency,
			resolution=solver['resolution_m'],
			tol_rel=solver['tol_rel'],
			max_iter=solver['max_iter'],
			preconditioner=solver['preconditioner'],
			rx_spacing=rx['contact_spacing_m'],
			c_return=rx['c_return_f'],
			load_r=rx['load_r_ohm'],
			load_c=rx['load_c_f'],
		)

	def sweep_spec(self, orientation: str = None) -> SweepSpec:
		sweep = self.data['sweep']
		kwargs = self._sweep_kwargs()
		resolution = kwargs.pop('resolution')
		return SweepSpec.line(
			self.tx_for(orientation),
			span=sweep['span_m'],
			lateral_offset=sweep['lateral_offset_m'],
			resolution=resolution,
			**kwargs,
		)

	def map_spec(self, orientation: str = None) -> SweepSpec:
		m = self.data['map']
		kwargs = self._sweep_kwargs()
		resolution = kwargs.pop('resolution')
		return SweepSpec.surface_grid(
			self.tx_for(orientation),
			half_width=m['half_width_m'],
			half_height=m['half_height_m'],
			pitch=m['pitch_m'],
			resolution=resolution,
			**kwargs,
		)


def parse_config(data: dict, base_dir=None, source=None) -> RunConfig:
	return RunConfig(normalize(data), Path(base_dir) if base_dir is not None else Path.cwd(), source)


def load_config(path=None) -> RunConfig:
	"""
	Load YAML config; without a path every default applies
	"""
	if path is None:
		return parse_config({})
	path = Path(path)
	try:
		text = path.read_text(encoding='utf-8')
	except OSError as e:
		raise ConfigError(f"config: cannot read {path}: {e}") from e
	try:
		data = yaml.safe_load(text)
	except yaml.YAMLError as e:
		raise ConfigError(f"config: invalid YAML in {path}: {e}") from e
	logger.debug("Loaded configuration %s", path)
	return parse_config(data, path.parent, path)
