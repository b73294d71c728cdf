# -*- coding: utf-8 -*-
"""
Crossed-cylinder body phantom, transmitter placement and voxel rasterization

Coordinates: x lateral (arms), y front/back (front surface at +y), z up. The
earth ground plane is the horizontal plane ``z = ground_plane_z``.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from . import constants
from .exceptions import ElectrodeOutsideBody, ElectrodesOverlap, GridTooLarge, InvalidSpec, IoError, ParseError
from .settings import HBC_MAX_GRID_CELLS


logger = logging.getLogger(__name__)


MIN_DIMS = 8
GRID_MAGIC = 'HBCGRID'


@dataclass(frozen=True)
class PhantomSpec:
	"""
	Body dimensions in metres; defaults are placeholders, not measured values
	"""
	torso_radius: float = 0.15
	torso_height: float = 1.8
	arm_radius: float = 0.05
	arm_length: float = 1.8
	crossing_height: float = 1.4
	skin_thickness: float = 0.002
	air_margin: float = 0.30
	ground_plane_z: float = 0.0
	ground_clearance: float = 0.04

	def validate(self):
		for name in ('torso_radius', 'torso_height', 'arm_radius', 'arm_length', 'skin_thickness', 'air_margin'):
			value = getattr(self, name)
			if not (math.isfinite(value) and value > 0):
				raise InvalidSpec(name, f"must be > 0, got {value}")
		if not math.isfinite(self.ground_plane_z):
			raise InvalidSpec('ground_plane_z', "must be finite")
		if not self.ground_clearance >= 0:
			raise InvalidSpec('ground_clearance', f"must be >= 0, got {self.ground_clearance}")
		if self.skin_thickness >= self.torso_radius:
			raise InvalidSpec('skin_thickness', "must be smaller than torso radius")
		if self.skin_thickness >= self.arm_radius:
			raise InvalidSpec('skin_thickness', "must be smaller than arm radius")
		if not 0 <= self.crossing_height <= self.torso_height:
			raise InvalidSpec('crossing_height', "must lie within torso height")
		if self.air_margin < 2 * self.torso_radius:
			raise InvalidSpec('air_margin', "must be at least 2 x torso radius")
		return self

	@property
	def base_z(self) -> float:
		return self.ground_plane_z + self.ground_clearance

	@property
	def arm_axis_z(self) -> float:
		return self.base_z + self.crossing_height


@dataclass(frozen=True)
class TxSpec:
	"""
	Galvanic transmitter: two plates at ``center +- axis * plate_gap / 2``
	driven to ``+-voltage / 2``
	"""
	center: Tuple[float, float, float] = (0.0, 0.12, 0.80)
	axis: Tuple[float, float, float] = (0.0, 0.0, 1.0)
	plate_width: float = 0.01
	plate_height: float = 0.01
	plate_gap: float = 0.04
	voltage: float = 1.0
	orientation: str = constants.O1_VERTICAL

	@classmethod
	def from_preset(cls, orientation, axis=None, **kwargs):
		if orientation == constants.CUSTOM:
			if axis is None:
				raise InvalidSpec('axis', "custom orientation needs an axis")
		elif orientation in constants.ORIENTATION_AXES:
			axis = constants.ORIENTATION_AXES[orientation]
		else:
			raise InvalidSpec('orientation', f"unknown preset {orientation!r}")
		return cls(axis=tuple(float(v) for v in axis), orientation=orientation, **kwargs)

	def validate(self):
		if len(self.center) != 3 or not all(math.isfinite(v) for v in self.center):
			raise InvalidSpec('center', "must be three finite coordinates")
		if len(self.axis) != 3 or abs(np.linalg.norm(self.axis) - 1.0) > 1e-9:
			raise InvalidSpec('axis', f"must be a unit vector, got {self.axis}")
		for name in ('plate_width', 'plate_height', 'plate_gap'):
			value = getattr(self, name)
			if not (math.isfinite(value) and value > 0):
				raise InvalidSpec(name, f"must be > 0, got {value}")
		if not math.isfinite(self.voltage):
			raise InvalidSpec('voltage', "must be finite")
		return self

	def plate_centers(self) -> Tuple[np.ndarray, np.ndarray]:
		center = np.asarray(self.center, dtype=float)
		offset = np.asarray(self.axis, dtype=float) * self.plate_gap / 2
		return center + offset, center - offset

	def plate_basis(self) -> Tuple[np.ndarray, np.ndarray]:
		axis = np.asarray(self.axis, dtype=float)
		reference = np.array([0.0, 1.0, 0.0]) if abs(axis[2]) > 0.9 else np.array([0.0, 0.0, 1.0])
		u = np.cross(axis, reference)
		u /= np.linalg.norm(u)
		return u, np.cross(axis, u)


class Phantom:
	"""
	Constructive geometry scene: muscle cylinders, skin shell, air, ground
	"""

	def __init__(self, spec: PhantomSpec):
		self.spec = spec

	def _inside(self, x, y, z, shrink):
		spec = self.spec
		torso = (
			(x * x + y * y <= (spec.torso_radius - shrink) ** 2) &
			(z >= spec.base_z + shrink) &
			(z <= spec.base_z + spec.torso_height - shrink)
		)
		dz = z - spec.arm_axis_z
		arm = (
			(y * y + dz * dz <= (spec.arm_radius - shrink) ** 2) &
			(np.abs(x) <= spec.arm_length / 2 - shrink)
		)
		return torso | arm

	def classify(self, points, skin=True) -> np.ndarray:
		"""
		Label of every point (``(..., 3)`` array) as Air, Skin, Muscle or
		GroundPlane
		"""
		points = np.asarray(points, dtype=float)
		x, y, z = points[..., 0], points[..., 1], points[..., 2]
		labels = np.full(x.shape, constants.AIR, dtype=np.uint8)
		labels[self._inside(x, y, z, 0.0)] = constants.SKIN if skin else constants.MUSCLE
		if skin:
			labels[self._inside(x, y, z, self.spec.skin_thickness)] = constants.MUSCLE
		labels[z <= self.spec.ground_plane_z] = constants.GROUND_PLANE
		return labels

	@property
	def top_z(self) -> float:
		spec = self.spec
		return max(spec.base_z + spec.torso_height, spec.arm_axis_z + spec.arm_radius)

	@property
	def half_width(self) -> float:
		return max(self.spec.torso_radius, self.spec.arm_length / 2)

	@property
	def half_depth(self) -> float:
		return max(self.spec.torso_radius, self.spec.arm_radius)

	@property
	def extent(self) -> float:
		"""
		Largest body dimension
		"""
		return max(self.spec.torso_height, 2 * self.half_width, 2 * self.half_depth)


def build_phantom(spec: PhantomSpec) -> Phantom:
	return Phantom(spec.validate())


@dataclass
class VoxelGrid:
	resolution: float
	labels: np.ndarray
	origin: Tuple[float, float, float]
	warnings: Tuple[str, ...] = ()
	tx: Optional[TxSpec] = None
	saved_labels: Dict[int, int] = field(default_factory=dict)
	_surface: Optional[np.ndarray] = field(default=None, init=False, repr=False, compare=False)

	@property
	def dims(self) -> Tuple[int, int, int]:
		return tuple(int(n) for n in self.labels.shape)

	def axis_centers(self, axis: int) -> np.ndarray:
		n = self.labels.shape[axis]
		return self.origin[axis] + (np.arange(n) + 0.5) * self.resolution

	def centers(self, indices) -> np.ndarray:
		indices = np.asarray(indices)
		return np.asarray(self.origin) + (indices + 0.5) * self.resolution

	def index_of(self, point) -> Optional[Tuple[int, int, int]]:
		index = np.floor((np.asarray(point, dtype=float) - self.origin) / self.resolution).astype(int)
		if np.any(index < 0) or np.any(index >= self.dims):
			return None
		return tuple(int(i) for i in index)

	def counts(self) -> Dict[int, int]:
		values, counts = np.unique(self.labels, return_counts=True)
		result = {label: 0 for label in constants.LABEL_NAMES}
		result.update({int(v): int(c) for v, c in zip(values, counts)})
		return result

	def body_mask(self) -> np.ndarray:
		return np.isin(self.labels, constants.BODY_LABELS + (constants.ELECTRODE_POS, constants.ELECTRODE_NEG, constants.RX_CONTACT))

	def surface_mask(self) -> np.ndarray:
		"""
		Body voxels with at least one air face-neighbour
		"""
		if self._surface is not None:
			return self._surface
		body = self.body_mask()
		air = np.pad(self.labels == constants.AIR, 1, constant_values=False)
		touching = np.zeros_like(body)
		for axis in range(3):
			for shift in (-1, 1):
				touching |= np.roll(air, shift, axis=axis)[1:-1, 1:-1, 1:-1]
		self._surface = body & touching
		return self._surface

	def project_to_surface(self, x: float, z: float, side: int = 1) -> Optional[np.ndarray]:
		"""
		Cast a ray along ``-side * y`` at (x, z) and return centre of the first
		body voxel hit
		"""
		i = int(math.floor((x - self.origin[0]) / self.resolution))
		k = int(math.floor((z - self.origin[2]) / self.resolution))
		if not (0 <= i < self.dims[0] and 0 <= k < self.dims[2]):
			return None
		column = self.body_mask()[i, :, k]
		hits = np.flatnonzero(column)
		if not hits.size:
			return None
		j = hits[-1] if side > 0 else hits[0]
		return self.centers((i, j, k))

	def restored(self) -> 'VoxelGrid':
		"""
		Copy without transmitter electrodes
		"""
		labels = self.labels.copy()
		flat = labels.reshape(-1)
		for index, label in self.saved_labels.items():
			flat[index] = label
		return replace(self, labels=labels, tx=None, saved_labels={})

	def write(self, path) -> Path:
		path = Path(path)
		header = (
			f"{GRID_MAGIC} dims={','.join(str(n) for n in self.dims)} "
			f"resolution={self.resolution!r} origin={','.join(repr(float(v)) for v in self.origin)}\n"
		)
		try:
			path.parent.mkdir(parents=True, exist_ok=True)
			with path.open('wb') as fp:
				fp.write(header.encode('ascii'))
				fp.write(np.ascontiguousarray(self.labels, dtype=np.uint8).tobytes())
		except OSError as e:
			raise IoError(f"Cannot write {path}: {e}") from e
		return path


def read_grid(path) -> VoxelGrid:
	try:
		data = Path(path).read_bytes()
	except OSError as e:
		raise IoError(f"Cannot read {path}: {e}") from e
	header, sep, body = data.partition(b'\n')
	fields = header.decode('ascii', errors='replace').split()
	if not sep or not fields or fields[0] != GRID_MAGIC:
		raise ParseError(f"{path}: not a voxel grid dump", 1)
	try:
		values = dict(item.split('=', 1) for item in fields[1:])
		dims = tuple(int(v) for v in values['dims'].split(','))
		resolution = float(values['resolution'])
		origin = tuple(float(v) for v in values['origin'].split(','))
	except (KeyError, ValueError) as e:
		raise ParseError(f"{path}: malformed header ({e})", 1) from e
	if len(body) != int(np.prod(dims)):
		raise ParseError(f"{path}: expected {int(np.prod(dims))} labels, got {len(body)}")
	labels = np.frombuffer(body, dtype=np.uint8).reshape(dims).copy()
	return VoxelGrid(resolution, labels, origin)


def _symmetric_centers(half_width: float, resolution: float) -> np.ndarray:
	# odd count with a centre at 0 keeps +x / -x centres bitwise mirrored
	m = max(MIN_DIMS // 2, int(math.ceil(half_width / resolution)))
	return np.arange(-m, m + 1) * resolution


def voxelize(phantom: Phantom, resolution: float, max_cells: int = None, workers: int = 1) -> VoxelGrid:
	"""
	Rasterize phantom by classifying voxel centres

	Skin thinner than one voxel is merged into muscle and reported in
	``VoxelGrid.warnings``.
	"""
	if not (math.isfinite(resolution) and resolution > 0):
		raise InvalidSpec('resolution', f"must be > 0, got {resolution}")
	spec = phantom.spec
	max_cells = HBC_MAX_GRID_CELLS if max_cells is None else max_cells

	xs = _symmetric_centers(phantom.half_width + spec.air_margin, resolution)
	ys = _symmetric_centers(phantom.half_depth + spec.air_margin, resolution)
	nz = max(MIN_DIMS, int(math.ceil((phantom.top_z + spec.air_margin - spec.ground_plane_z) / resolution)) + 1)
	# slab k = 0 is centred on the ground plane
	zs = spec.ground_plane_z + np.arange(nz) * resolution

	cells = len(xs) * len(ys) * nz
	if cells > max_cells:
		raise GridTooLarge(f"Grid {len(xs)}x{len(ys)}x{nz} = {cells} cells exceeds limit {max_cells}")

	warnings = []
	skin = spec.skin_thickness >= resolution
	if not skin:
		message = f"DegenerateGeometry: skin thickness {spec.skin_thickness} m is thinner than one voxel ({resolution} m), skin merged into muscle"
		logger.warning(message)
		warnings.append(message)

	def rasterize(k):
		X, Y = np.meshgrid(xs, ys, indexing='ij')
		points = np.stack([X, Y, np.full_like(X, zs[k])], axis=-1)
		return phantom.classify(points, skin=skin)

	if workers > 1:
		with ThreadPoolExecutor(max_workers=workers) as executor:
			slabs = list(executor.map(rasterize, range(nz)))
	else:
		slabs = [rasterize(k) for k in range(nz)]
	labels = np.stack(slabs, axis=-1)

	origin = (float(xs[0] - resolution / 2), float(ys[0] - resolution / 2), float(spec.ground_plane_z - resolution / 2))
	logger.debug("Voxelized %dx%dx%d grid at %g m", len(xs), len(ys), nz, resolution)
	return VoxelGrid(resolution, labels, origin, tuple(warnings))


def _plate_voxels(grid: VoxelGrid, tx: TxSpec, center: np.ndarray) -> np.ndarray:
	"""
	Flat indices of voxels covered by one plate
	"""
	u, v = tx.plate_basis()
	step = grid.resolution / 2
	nu = int(math.ceil(tx.plate_width / step)) + 1
	nv = int(math.ceil(tx.plate_height / step)) + 1
	su = np.linspace(-tx.plate_width / 2, tx.plate_width / 2, nu)
	sv = np.linspace(-tx.plate_height / 2, tx.plate_height / 2, nv)
	samples = center + su[:, None, None] * u + sv[None, :, None] * v
	index = np.floor((samples.reshape(-1, 3) - grid.origin) / grid.resolution).astype(int)
	if np.any(index < 0) or np.any(index >= grid.dims):
		raise ElectrodeOutsideBody(f"Plate at {center.tolist()} leaves the grid")
	return np.unique(np.ravel_multi_index(index.T, grid.dims))


def place_transmitter(grid: VoxelGrid, tx: TxSpec) -> VoxelGrid:
	"""
	Mark transmitter plates as ElectrodePos / ElectrodeNeg voxels

	Previous transmitter (if any) is removed first, so placing the same
	transmitter twice yields the same grid.
	"""
	tx.validate()
	base = grid.restored()
	if tx.plate_gap < grid.resolution:
		raise ElectrodesOverlap(f"Plate gap {tx.plate_gap} m is smaller than voxel size {grid.resolution} m")

	pos_center, neg_center = tx.plate_centers()
	pos = _plate_voxels(base, tx, pos_center)
	neg = _plate_voxels(base, tx, neg_center)
	if np.intersect1d(pos, neg).size:
		raise ElectrodesOverlap("Transmitter plates share voxels")

	flat = base.labels.reshape(-1)
	for name, indices in (('positive', pos), ('negative', neg)):
		outside = ~np.isin(flat[indices], constants.BODY_LABELS)
		if np.any(outside):
			raise ElectrodeOutsideBody(f"{outside.sum()} voxels of {name} plate are outside body tissue")

	saved = {int(i): int(flat[i]) for i in np.concatenate([pos, neg])}
	labels = base.labels.copy()
	labels.reshape(-1)[pos] = constants.ELECTRODE_POS
	labels.reshape(-1)[neg] = constants.ELECTRODE_NEG
	logger.debug("Placed %s transmitter: %d / %d plate voxels", tx.orientation, pos.size, neg.size)
	return replace(base, labels=labels, tx=tx, saved_labels=saved)


def remove_transmitter(grid: VoxelGrid) -> VoxelGrid:
	return grid.restored()


def mark_contacts(grid: VoxelGrid, indices) -> VoxelGrid:
	"""
	Copy of grid with receiver contact voxels labelled for visualisation
	"""
	labels = grid.labels.copy()
	for index in indices:
		if labels[tuple(index)] in constants.BODY_LABELS:
			labels[tuple(index)] = constants.RX_CONTACT
	return replace(grid, labels=labels)


def uniform_grid(dims, resolution: float, label: int = constants.MUSCLE, ground_plane: bool = True, origin=(0.0, 0.0, 0.0)) -> VoxelGrid:
	"""
	Single-material verification grid, ground plane slab at ``k = 0``
	"""
	if not (math.isfinite(resolution) and resolution > 0):
		raise InvalidSpec('resolution', f"must be > 0, got {resolution}")
	labels = np.full(tuple(int(n) for n in dims), label, dtype=np.uint8)
	if ground_plane:
		labels[:, :, 0] = constants.GROUND_PLANE
	return VoxelGrid(resolution, labels, tuple(float(v) for v in origin))
