# -*- coding: utf-8 -*-
"""
Receiver pickup models, path loss and the homogeneous-medium dipole law
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from . import constants
from .exceptions import ContactOffSurface, InvalidSpec, ZeroRadius
from .phantom import VoxelGrid
from .settings import HBC_LOAD_CAPACITANCE_F, HBC_LOAD_RESISTANCE_OHM, HBC_PATH_LOSS_FLOOR_DB, HBC_RETURN_CAPACITANCE_F
from .solver import PotentialField


logger = logging.getLogger(__name__)


Point = Tuple[float, float, float]


@dataclass(frozen=True)
class GalvanicRx:
	"""
	Two body contacts read differentially through a high-impedance buffer
	"""
	contact_a: Point
	contact_b: Point

	mode = constants.GALVANIC

	@property
	def position(self) -> np.ndarray:
		return (np.asarray(self.contact_a, dtype=float) + np.asarray(self.contact_b, dtype=float)) / 2

	@property
	def contacts(self):
		return (self.contact_a, self.contact_b)


@dataclass(frozen=True)
class CapacitiveRx:
	"""
	Single body contact; the circuit closes through the device-to-earth
	return capacitance
	"""
	contact: Point
	c_return: float = HBC_RETURN_CAPACITANCE_F
	load_r: float = HBC_LOAD_RESISTANCE_OHM
	load_c: float = HBC_LOAD_CAPACITANCE_F

	mode = constants.CAPACITIVE

	def __post_init__(self):
		if not self.c_return > 0:
			raise InvalidSpec('c_return_f', f"must be > 0, got {self.c_return}")
		if not self.load_r > 0:
			raise InvalidSpec('load_r_ohm', f"must be > 0, got {self.load_r}")
		if not self.load_c >= 0:
			raise InvalidSpec('load_c_f', f"must be >= 0, got {self.load_c}")

	@property
	def position(self) -> np.ndarray:
		return np.asarray(self.contact, dtype=float)

	@property
	def contacts(self):
		return (self.contact,)


RxModel = Union[GalvanicRx, CapacitiveRx]


@dataclass(frozen=True)
class ChannelSample:
	rx_position: Tuple[float, float, float]
	mode: str
	v_rx: complex
	v_tx: float
	path_loss_db: float


@dataclass(frozen=True)
class Dipole:
	center: Point
	moment: Point
	"""current dipole moment I * d along the plate axis (A m)"""
	admittivity: complex


def contact_voxel(grid: VoxelGrid, point) -> Tuple[int, int, int]:
	"""
	Voxel holding a receiver contact; it must be a body voxel facing air
	"""
	index = grid.index_of(point)
	if index is None:
		raise ContactOffSurface(f"Contact {tuple(point)} is outside the grid")
	if not grid.surface_mask()[index]:
		raise ContactOffSurface(f"Contact {tuple(point)} is not on the body surface")
	return index


def galvanic_pickup(field: PotentialField, rx: GalvanicRx) -> complex:
	"""
	phi(contact_a) - phi(contact_b)
	"""
	a = contact_voxel(field.grid, rx.contact_a)
	b = contact_voxel(field.grid, rx.contact_b)
	if a == b:
		raise ContactOffSurface(f"Galvanic contacts {rx.contact_a} and {rx.contact_b} share voxel {a}")
	return field.at(a) - field.at(b)


def return_path_ratio(rx: CapacitiveRx, frequency: float) -> complex:
	"""
	Z_load / (Z_load + Z_return) of the capacitive return-path divider
	"""
	if not frequency > 0:
		raise InvalidSpec('frequency_hz', f"must be > 0, got {frequency}")
	omega = 2 * math.pi * frequency
	# admittance form stays finite for very large c_return
	y_return = 1j * omega * rx.c_return
	y_load = 1 / rx.load_r + 1j * omega * rx.load_c
	return complex(y_return / (y_return + y_load))


def capacitive_pickup(field: PotentialField, rx: CapacitiveRx, frequency: float) -> complex:
	index = contact_voxel(field.grid, rx.contact)
	return field.at(index) * return_path_ratio(rx, frequency)


def path_loss(v_rx: complex, v_tx: float) -> float:
	"""
	20 log10(|v_rx| / v_tx), floored at ``HBC_PATH_LOSS_FLOOR_DB``
	"""
	if not v_tx > 0:
		raise ValueError(f"v_tx must be > 0, got {v_tx}")
	magnitude = abs(v_rx)
	if magnitude == 0:
		return float(HBC_PATH_LOSS_FLOOR_DB)
	return float(max(20 * math.log10(magnitude / v_tx), HBC_PATH_LOSS_FLOOR_DB))


def analytic_dipole_potential(point, dipole: Dipole) -> complex:
	"""
	Potential of a current dipole in an unbounded homogeneous medium:
	(I d cos(theta)) / (4 pi y r^2)
	"""
	r = np.asarray(point, dtype=float) - np.asarray(dipole.center, dtype=float)
	distance = float(np.linalg.norm(r))
	if distance == 0:
		raise ZeroRadius("Potential is undefined at the dipole centre")
	projection = float(np.dot(np.asarray(dipole.moment, dtype=float), r)) / distance
	return complex(projection / (4 * math.pi * dipole.admittivity * distance ** 2))


def evaluate_rx(field: PotentialField, rx: RxModel, frequency: float) -> ChannelSample:
	if isinstance(rx, GalvanicRx):
		v_rx = galvanic_pickup(field, rx)
	elif isinstance(rx, CapacitiveRx):
		v_rx = capacitive_pickup(field, rx, frequency)
	else:
		raise TypeError(f"Unknown receiver {rx!r}")
	v_tx = abs(field.voltage)
	loss = path_loss(v_rx, v_tx)
	if loss > 0:
		logger.warning("Path loss %.3f dB > 0 for %s receiver at %s", loss, rx.mode, rx.position.tolist())
	return ChannelSample(tuple(float(v) for v in rx.position), rx.mode, v_rx, v_tx, loss)
