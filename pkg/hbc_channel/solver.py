# -*- coding: utf-8 -*-
"""
Finite-volume electro-quasistatic solver

Solves div((sigma + j omega eps) grad phi) = 0 on a voxel grid. Transmitter
plates and the earth ground plane are Dirichlet voxels; outer box faces carry
no normal current.
"""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, bicgstab, spilu, splu

from . import constants
from .exceptions import IoError, MismatchedInputs, NoConvergence, NoElectrodes, NoGroundPlane, ParseError, SingularSystem, SystemTooLarge
from .phantom import TxSpec, VoxelGrid, place_transmitter
from .settings import HBC_DENSE_MAX_UNKNOWNS, HBC_SOLVER_MAX_ITER, HBC_SOLVER_PRECONDITIONER, HBC_SOLVER_TOLERANCE
from .tissue import TissueTable, label_admittivities


logger = logging.getLogger(__name__)


FIELD_MAGIC = 'HBCFIELD'


@dataclass
class LinearSystem:
	matrix: sp.csr_matrix
	rhs: np.ndarray
	unknowns: np.ndarray
	"""flat voxel index of every unknown"""
	index_map: np.ndarray
	"""unknown number per flat voxel, -1 for Dirichlet voxels"""
	dirichlet: np.ndarray
	"""imposed potential per flat voxel, NaN for unknowns"""
	edges: tuple
	"""(voxel_a, voxel_b, conductance) of every face with at least one free side"""
	grid: VoxelGrid
	frequency: float
	voltage: float

	@property
	def size(self) -> int:
		return int(self.unknowns.size)

	@property
	def has_anchor(self) -> bool:
		return bool(np.any(~np.isnan(self.dirichlet)))


@dataclass
class SolverStats:
	iterations: int = 0
	residual: float = 0.0
	converged: bool = True
	unknowns: int = 0
	method: str = ''
	seconds: float = 0.0

	def as_dict(self) -> dict:
		return {
			'iterations': self.iterations,
			'residual': self.residual,
			'converged': self.converged,
			'unknowns': self.unknowns,
			'method': self.method,
		}


@dataclass
class PotentialField:
	values: np.ndarray
	grid: VoxelGrid
	voltage: float
	frequency: float
	stats: SolverStats = field(default_factory=SolverStats)

	def at(self, index) -> complex:
		return complex(self.values[tuple(index)])

	def values_at(self, indices) -> np.ndarray:
		indices = np.asarray(indices).reshape(-1, 3)
		return self.values[indices[:, 0], indices[:, 1], indices[:, 2]]

	def require_converged(self) -> 'PotentialField':
		if not self.stats.converged:
			raise NoConvergence(
				f"Solver stopped after {self.stats.iterations} iterations with relative residual {self.stats.residual:.3e}",
				field=self,
			)
		return self

	def write(self, path) -> Path:
		path = Path(path)
		grid = self.grid
		header = (
			f"{FIELD_MAGIC} dims={','.join(str(n) for n in grid.dims)} "
			f"resolution={grid.resolution!r} origin={','.join(repr(float(v)) for v in grid.origin)} "
			f"voltage={self.voltage!r} frequency={self.frequency!r} "
			f"iterations={self.stats.iterations} residual={self.stats.residual!r}\n"
		)
		try:
			path.parent.mkdir(parents=True, exist_ok=True)
			with path.open('wb') as fp:
				fp.write(header.encode('ascii'))
				fp.write(np.ascontiguousarray(self.values, dtype='<c16').tobytes())
		except OSError as e:
			raise IoError(f"Cannot write {path}: {e}") from e
		return path


@dataclass
class DivergenceMap:
	net: np.ndarray
	"""net complex current leaving every voxel (A)"""
	interior_max: float
	electrode_pos: complex
	electrode_neg: complex
	ground: complex
	balance: float
	"""|I_pos + I_neg + I_ground| / |I_pos|"""

	@property
	def dipole_current(self) -> complex:
		return (self.electrode_pos - self.electrode_neg) / 2


def read_field(path, grid: VoxelGrid) -> PotentialField:
	try:
		data = Path(path).read_bytes()
	except OSError as e:
		raise IoError(f"Cannot read {path}: {e}") from e
	header, sep, body = data.partition(b'\n')
	fields = header.decode('ascii', errors='replace').split()
	if not sep or not fields or fields[0] != FIELD_MAGIC:
		raise ParseError(f"{path}: not a field dump", 1)
	try:
		values = dict(item.split('=', 1) for item in fields[1:])
		dims = tuple(int(v) for v in values['dims'].split(','))
		stats = SolverStats(iterations=int(values['iterations']), residual=float(values['residual']))
		voltage = float(values['voltage'])
		frequency = float(values['frequency'])
	except (KeyError, ValueError) as e:
		raise ParseError(f"{path}: malformed header ({e})", 1) from e
	if dims != grid.dims:
		raise MismatchedInputs(f"Field dims {dims} do not match grid {grid.dims}")
	phi = np.frombuffer(body, dtype='<c16').reshape(dims).copy()
	return PotentialField(phi, grid, voltage, frequency, stats)


def _dirichlet_values(labels: np.ndarray, voltage: float) -> np.ndarray:
	values = np.full(labels.shape, np.nan, dtype=complex)
	values[labels == constants.GROUND_PLANE] = 0.0
	values[labels == constants.ELECTRODE_POS] = voltage / 2
	values[labels == constants.ELECTRODE_NEG] = -voltage / 2
	return values


def assemble(grid: VoxelGrid, table: TissueTable, frequency: float, voltage: float) -> LinearSystem:
	"""
	Seven-point finite-volume system with harmonic face admittivities

	A Dirichlet voxel imposes its potential at its centre; the face between a
	Dirichlet voxel and a free voxel takes the free voxel's admittivity.
	"""
	labels = grid.labels
	counts = grid.counts()
	if not counts[constants.GROUND_PLANE]:
		raise NoGroundPlane("Grid has no ground plane voxels")
	if not counts[constants.ELECTRODE_POS] or not counts[constants.ELECTRODE_NEG]:
		raise NoElectrodes("Grid has no transmitter electrodes")

	present = tuple(label for label in constants.MATERIAL_LABELS if counts[label])
	table.require(
		constants.LABEL_NAMES[constants.SKIN if label == constants.RX_CONTACT else label]
		for label in present
	)
	material = label_admittivities(table, frequency, present)

	y = np.zeros(labels.shape, dtype=complex)
	for label, value in material.items():
		y[labels == label] = value

	dirichlet = _dirichlet_values(labels, voltage).reshape(-1)
	fixed = ~np.isnan(dirichlet)
	unknowns = np.flatnonzero(~fixed)
	index_map = np.full(labels.size, -1, dtype=np.int64)
	index_map[unknowns] = np.arange(unknowns.size)

	h = grid.resolution
	flat_y = y.reshape(-1)
	flat_index = np.arange(labels.size).reshape(labels.shape)
	pairs_a, pairs_b, conductances = [], [], []
	for axis in range(3):
		a = np.take(flat_index, np.arange(labels.shape[axis] - 1), axis=axis).reshape(-1)
		b = np.take(flat_index, np.arange(1, labels.shape[axis]), axis=axis).reshape(-1)
		free_a = ~fixed[a]
		free_b = ~fixed[b]
		keep = free_a | free_b
		a, b, free_a, free_b = a[keep], b[keep], free_a[keep], free_b[keep]
		ya = np.where(free_a, flat_y[a], flat_y[b])
		yb = np.where(free_b, flat_y[b], flat_y[a])
		pairs_a.append(a)
		pairs_b.append(b)
		conductances.append(2 * ya * yb / (ya + yb) * h)

	a = np.concatenate(pairs_a)
	b = np.concatenate(pairs_b)
	g = np.concatenate(conductances)

	ia = index_map[a]
	ib = index_map[b]
	both = (ia >= 0) & (ib >= 0)
	rows = np.concatenate([ia[ia >= 0], ib[ib >= 0], ia[both], ib[both]])
	cols = np.concatenate([ia[ia >= 0], ib[ib >= 0], ib[both], ia[both]])
	data = np.concatenate([g[ia >= 0], g[ib >= 0], -g[both], -g[both]])
	n = unknowns.size
	matrix = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()

	rhs = np.zeros(n, dtype=complex)
	only_a = (ia >= 0) & (ib < 0)
	only_b = (ib >= 0) & (ia < 0)
	np.add.at(rhs, ia[only_a], g[only_a] * dirichlet[b[only_a]])
	np.add.at(rhs, ib[only_b], g[only_b] * dirichlet[a[only_b]])

	logger.debug("Assembled %d unknowns, %d nonzeros", n, matrix.nnz)
	return LinearSystem(matrix, rhs, unknowns, index_map, dirichlet, (a, b, g), grid, frequency, voltage)


def _field(system: LinearSystem, solution: np.ndarray, stats: SolverStats) -> PotentialField:
	values = system.dirichlet.copy()
	values[system.unknowns] = solution
	return PotentialField(values.reshape(system.grid.dims), system.grid, system.voltage, system.frequency, stats)


def _preconditioner(matrix, name: str):
	if name == 'ilu':
		ilu = spilu(matrix.tocsc(), drop_tol=1e-5, fill_factor=10)
		return LinearOperator(matrix.shape, ilu.solve, dtype=complex)
	if name == 'jacobi':
		inverse = 1.0 / matrix.diagonal()
		return LinearOperator(matrix.shape, lambda x: inverse * x, dtype=complex)
	if name == 'none':
		return None
	raise ValueError(f"Unknown preconditioner {name!r}")


def relative_residual(system: LinearSystem, solution: np.ndarray) -> float:
	norm_b = np.linalg.norm(system.rhs)
	if norm_b == 0:
		return float(np.linalg.norm(system.matrix @ solution))
	return float(np.linalg.norm(system.rhs - system.matrix @ solution) / norm_b)


def solve(system: LinearSystem, tol_rel: float = None, max_iter: int = None, preconditioner: str = None) -> PotentialField:
	"""
	Preconditioned BiCGSTAB solve

	A run that misses the tolerance returns the last iterate with
	``stats.converged = False``; see ``PotentialField.require_converged``.
	"""
	tol_rel = HBC_SOLVER_TOLERANCE if tol_rel is None else tol_rel
	max_iter = HBC_SOLVER_MAX_ITER if max_iter is None else max_iter
	preconditioner = HBC_SOLVER_PRECONDITIONER if preconditioner is None else preconditioner
	if not 0 < tol_rel <= 1e-2:
		raise ValueError(f"tol_rel must lie in (0, 1e-2], got {tol_rel}")
	if max_iter < 1:
		raise ValueError(f"max_iter must be >= 1, got {max_iter}")
	if not system.has_anchor:
		raise SingularSystem("System has no Dirichlet voxels")

	started = time.perf_counter()
	stats = SolverStats(unknowns=system.size, method=f'bicgstab+{preconditioner}')
	if not np.any(system.rhs):
		stats.seconds = time.perf_counter() - started
		return _field(system, np.zeros(system.size, dtype=complex), stats)

	iterations = 0

	def count(__):
		nonlocal iterations
		iterations += 1

	# recurrence residual drifts from the true one, ask for a margin
	solution, info = bicgstab(
		system.matrix,
		system.rhs,
		rtol=tol_rel / 10,
		atol=0.0,
		maxiter=max_iter,
		M=_preconditioner(system.matrix, preconditioner),
		callback=count,
	)
	stats.iterations = iterations
	stats.residual = relative_residual(system, solution)
	stats.converged = stats.residual <= tol_rel
	stats.seconds = time.perf_counter() - started
	if stats.converged:
		logger.info("Solved %d unknowns in %d iterations (residual %.2e)", system.size, iterations, stats.residual)
	else:
		logger.warning("No convergence after %d iterations (info %d, residual %.2e)", iterations, info, stats.residual)
	return _field(system, solution, stats)


def solve_dense_oracle(system: LinearSystem) -> PotentialField:
	"""
	Reference solution by direct LU factorization
	"""
	if system.size > HBC_DENSE_MAX_UNKNOWNS:
		raise SystemTooLarge(f"{system.size} unknowns exceed direct solver limit {HBC_DENSE_MAX_UNKNOWNS}")
	if not system.has_anchor:
		raise SingularSystem("System has no Dirichlet voxels")
	try:
		solution = splu(system.matrix.tocsc()).solve(system.rhs)
	except RuntimeError as e:
		raise SingularSystem(str(e)) from e
	stats = SolverStats(
		iterations=1,
		residual=relative_residual(system, solution),
		unknowns=system.size,
		method='lu',
	)
	return _field(system, solution, stats)


def current_divergence(field: PotentialField, system: LinearSystem) -> DivergenceMap:
	"""
	Net current leaving each voxel, from face conductances and potentials
	"""
	if field.grid is not system.grid or field.values.shape != system.grid.dims:
		raise MismatchedInputs("Field was not produced from this system")
	a, b, g = system.edges
	phi = field.values.reshape(-1)
	flow = g * (phi[a] - phi[b])
	size = phi.size
	net = (
		np.bincount(a, weights=flow.real, minlength=size) - np.bincount(b, weights=flow.real, minlength=size) +
		1j * (np.bincount(a, weights=flow.imag, minlength=size) - np.bincount(b, weights=flow.imag, minlength=size))
	)

	labels = system.grid.labels.reshape(-1)
	free = system.index_map >= 0
	interior_max = float(np.max(np.abs(net[free]))) if np.any(free) else 0.0
	pos = complex(net[labels == constants.ELECTRODE_POS].sum())
	neg = complex(net[labels == constants.ELECTRODE_NEG].sum())
	ground = complex(net[labels == constants.GROUND_PLANE].sum())
	balance = abs(pos + neg + ground) / abs(pos) if pos else 0.0
	return DivergenceMap(net.reshape(system.grid.dims), interior_max, pos, neg, ground, float(balance))


def append_run_log(path, label: str, stats: SolverStats) -> Path:
	path = Path(path)
	line = (
		f"{label} method={stats.method} unknowns={stats.unknowns} iterations={stats.iterations} "
		f"residual={stats.residual:.6e} converged={int(stats.converged)}\n"
	)
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		with path.open('a', encoding='utf-8') as fp:
			fp.write(line)
	except OSError as e:
		raise IoError(f"Cannot write {path}: {e}") from e
	return path


def run_solve(grid: VoxelGrid, table: TissueTable, frequency: float, voltage: float, **kwargs) -> PotentialField:
	"""
	Assemble and solve in one step
	"""
	return solve(assemble(grid, table, frequency, voltage), **kwargs)


def label_currents(divergence: DivergenceMap, grid: VoxelGrid) -> Dict[str, complex]:
	labels = grid.labels
	return {
		constants.LABEL_NAMES[label]: complex(divergence.net[labels == label].sum())
		for label in constants.DIRICHLET_LABELS
	}


def embed_dipole(grid: VoxelGrid, center, axis, gap: float, voltage: float = 1.0) -> VoxelGrid:
	"""
	Place a point-like plate pair (one voxel per plate) for verification runs
	"""
	tx = TxSpec(
		center=tuple(float(v) for v in center),
		axis=tuple(float(v) for v in axis),
		plate_width=grid.resolution / 4,
		plate_height=grid.resolution / 4,
		plate_gap=gap,
		voltage=voltage,
		orientation=constants.CUSTOM,
	)
	return place_transmitter(grid, tx)
