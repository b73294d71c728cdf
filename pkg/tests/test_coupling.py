# -*- coding: utf-8 -*-
import math

import numpy as np
from django.test import SimpleTestCase

from hbc_channel import constants
from hbc_channel.coupling import CapacitiveRx, Dipole, GalvanicRx, analytic_dipole_potential, capacitive_pickup, contact_voxel, evaluate_rx, galvanic_pickup, path_loss, return_path_ratio
from hbc_channel.exceptions import ContactOffSurface, InvalidSpec, ZeroRadius
from hbc_channel.phantom import uniform_grid
from hbc_channel.solver import current_divergence, embed_dipole
from hbc_channel.tissue import label_admittivities
from .scenes import dipole_grid, solved, table


def slab_grid():
	"""
	Muscle block under air (j >= 8) with an x-directed dipole at (12, 4, 8)
	"""
	grid = uniform_grid((25, 10, 16), 0.01)
	grid.labels[:, 8:, 1:] = constants.AIR
	a, b = grid.centers((13, 4, 8)), grid.centers((11, 4, 8))
	return embed_dipole(grid, (a + b) / 2, (1.0, 0.0, 0.0), float(np.linalg.norm(a - b)))


class TestPathLoss(SimpleTestCase):
	def test_values(self):
		self.assertEqual(0.0, path_loss(1.0, 1.0))
		self.assertAlmostEqual(-20.0, path_loss(0.1j, 1.0), places=12)
		self.assertAlmostEqual(-40.0, path_loss(0.02 - 0.0j, 2.0), places=12)

	def test_floor(self):
		self.assertEqual(-300.0, path_loss(0, 1.0))
		self.assertEqual(-300.0, path_loss(1e-200, 1.0))

	def test_invalid_tx(self):
		with self.assertRaises(ValueError):
			path_loss(1.0, 0.0)


class TestReturnPath(SimpleTestCase):
	def test_default_divider(self):
		rx = CapacitiveRx((0.0, 0.0, 0.0))
		omega = 2 * math.pi * 21e6
		z_return = 1 / (1j * omega * 1e-12)
		z_load = 1 / (1 / 1e6 + 1j * omega * 10e-12)
		expected = z_load / (z_load + z_return)
		self.assertLess(abs(return_path_ratio(rx, 21e6) - expected) / abs(expected), 1e-12)

	def test_limits(self):
		self.assertAlmostEqual(1.0, return_path_ratio(CapacitiveRx((0, 0, 0), c_return=1.0), 21e6), places=6)
		self.assertLess(abs(return_path_ratio(CapacitiveRx((0, 0, 0), c_return=1e-18), 21e6)), 1e-5)

	def test_monotonic_in_return_capacitance(self):
		ratios = [abs(return_path_ratio(CapacitiveRx((0, 0, 0), c_return=c), 21e6)) for c in (1e-14, 1e-13, 1e-12, 1e-11, 1e-10)]
		self.assertEqual(ratios, sorted(ratios))
		self.assertEqual(len(set(ratios)), len(ratios))

	def test_invalid(self):
		with self.assertRaises(InvalidSpec):
			CapacitiveRx((0, 0, 0), c_return=0)
		with self.assertRaises(InvalidSpec):
			CapacitiveRx((0, 0, 0), load_r=-1)
		with self.assertRaises(InvalidSpec):
			CapacitiveRx((0, 0, 0), load_c=-1e-12)
		with self.assertRaises(InvalidSpec):
			return_path_ratio(CapacitiveRx((0, 0, 0)), 0)


class TestAnalyticDipole(SimpleTestCase):
	dipole = Dipole((0.0, 0.0, 0.0), (1e-3, 0.0, 0.0), 0.6 + 0.1j)

	def test_equatorial_plane(self):
		self.assertEqual(0, analytic_dipole_potential((0.0, 0.05, 0.02), self.dipole))

	def test_inverse_square(self):
		near = analytic_dipole_potential((0.03, 0.04, 0.0), self.dipole)
		far = analytic_dipole_potential((0.06, 0.08, 0.0), self.dipole)
		self.assertAlmostEqual(near / 4, far, delta=1e-12 * abs(near))

	def test_axis_value(self):
		value = analytic_dipole_potential((0.1, 0.0, 0.0), self.dipole)
		self.assertAlmostEqual(1e-3 / (4 * math.pi * (0.6 + 0.1j) * 0.01), value, delta=1e-15)
		self.assertAlmostEqual(-value, analytic_dipole_potential((-0.1, 0.0, 0.0), self.dipole), delta=1e-15)

	def test_zero_radius(self):
		with self.assertRaises(ZeroRadius):
			analytic_dipole_potential((0.0, 0.0, 0.0), self.dipole)



def wall_images(x0, low, high, grounded_low=False):
	"""
	Reflections of a source coordinate in two parallel walls, up to second
	order, as ``(coordinate, flip, sign)``
	"""
	low_sign = -1 if grounded_low else 1
	return [
		(x0, 1, 1),
		(2 * low - x0, -1, low_sign),
		(2 * high - x0, -1, 1),
		(2 * low - (2 * high - x0), 1, low_sign),
		(2 * high - (2 * low - x0), 1, low_sign),
	]


class TestHomogeneousDipole(SimpleTestCase):
	"""
	Solver against the closed-form dipole in a uniform muscle box

	Side and top walls carry no normal current, the floor is held at zero at
	the centre of the ground slab.
	"""
	dims = (33, 33, 33)
	center_index = (16, 16, 16)

	@classmethod
	def setUpClass(cls):
		super().setUpClass()
		cls.grid = dipole_grid(cls.dims, [(17, 16, 16), (15, 16, 16)])
		cls.system, cls.field = solved(cls.grid)
		cls.divergence = current_divergence(cls.field, cls.system)
		cls.admittivity = label_admittivities(table(), 21e6, (constants.MUSCLE,))[constants.MUSCLE]
		cls.moment = cls.divergence.dipole_current * 2 * cls.grid.resolution
		cls.center = cls.grid.centers(cls.center_index)

	def expected(self, point):
		grid = self.grid
		low = np.asarray(grid.origin, dtype=float)
		high = low + np.asarray(grid.dims) * grid.resolution
		floor = grid.centers((0, 0, 0))[2]
		xs = wall_images(self.center[0], low[0], high[0])
		ys = wall_images(self.center[1], low[1], high[1])
		zs = wall_images(self.center[2], floor, high[2], grounded_low=True)
		total = 0j
		for x, flip, x_sign in xs:
			for y, __, y_sign in ys:
				for z, __, z_sign in zs:
					unit = Dipole((x, y, z), (float(flip), 0.0, 0.0), self.admittivity)
					total += x_sign * y_sign * z_sign * analytic_dipole_potential(point, unit)
		return self.moment * total

	def test_current_balance(self):
		self.assertLess(self.divergence.balance, 1e-6)
		pos, neg = self.divergence.electrode_pos, self.divergence.electrode_neg
		self.assertLess(abs(pos + neg), 1e-5 * abs(pos))

	def test_matches_closed_form(self):
		i, j, k = self.center_index
		# radii between 4 and 8 voxels
		for di, dj in ((4, 4), (5, 4), (4, 5), (5, 5), (6, 5), (-5, 5), (5, -4), (6, 4)):
			index = (i + di, j + dj, k)
			with self.subTest(offset=(di, dj)):
				expected = self.expected(self.grid.centers(index))
				actual = self.field.at(index)
				self.assertLess(abs(actual - expected) / abs(expected), 0.05)

	def test_antisymmetric(self):
		i, j, k = self.center_index
		reference = abs(self.field.at((i + 4, j + 4, k)))
		self.assertLess(abs(self.field.at((i + 4, j + 4, k)) + self.field.at((i - 4, j + 4, k))), 1e-5 * reference)
		self.assertLess(abs(self.field.at((i, j + 5, k))), 1e-5 * reference)


class TestPickup(SimpleTestCase):
	@classmethod
	def setUpClass(cls):
		super().setUpClass()
		cls.grid = slab_grid()
		cls.system, cls.field = solved(cls.grid)
		__, cls.double = solved(cls.grid, voltage=2.0)

	def point(self, index):
		return tuple(self.grid.centers(index))

	def test_contact_voxel(self):
		self.assertEqual((12, 7, 6), contact_voxel(self.grid, self.point((12, 7, 6))))
		with self.assertRaises(ContactOffSurface):
			contact_voxel(self.grid, self.point((12, 4, 6)))
		with self.assertRaises(ContactOffSurface):
			contact_voxel(self.grid, self.point((12, 8, 6)))
		with self.assertRaises(ContactOffSurface):
			contact_voxel(self.grid, (5.0, 0.0, 0.0))

	def test_equatorial_null(self):
		null = galvanic_pickup(self.field, GalvanicRx(self.point((12, 7, 6)), self.point((12, 7, 10))))
		reference = galvanic_pickup(self.field, GalvanicRx(self.point((21, 7, 8)), self.point((23, 7, 8))))
		self.assertGreater(abs(reference), 0)
		self.assertLessEqual(abs(null), 1e-3 * abs(reference))

	def test_swap_negates(self):
		a, b = self.point((16, 7, 8)), self.point((18, 7, 9))
		forward = galvanic_pickup(self.field, GalvanicRx(a, b))
		self.assertEqual(-forward, galvanic_pickup(self.field, GalvanicRx(b, a)))

	def test_same_voxel(self):
		a = self.point((16, 7, 8))
		with self.assertRaises(ContactOffSurface):
			galvanic_pickup(self.field, GalvanicRx(a, (a[0] + 0.001, a[1], a[2])))

	def test_linear_in_excitation(self):
		rx = GalvanicRx(self.point((16, 7, 8)), self.point((18, 7, 8)))
		single = galvanic_pickup(self.field, rx)
		self.assertLess(abs(galvanic_pickup(self.double, rx) - 2 * single), 1e-6 * abs(single))

	def test_capacitive(self):
		point = self.point((16, 7, 8))
		phi = self.field.at((16, 7, 8))
		self.assertLess(abs(capacitive_pickup(self.field, CapacitiveRx(point, c_return=1.0), 21e6) - phi), 1e-6 * abs(phi))
		self.assertLess(abs(capacitive_pickup(self.field, CapacitiveRx(point, c_return=1e-18), 21e6)), 1e-5 * abs(phi))

	def test_evaluate(self):
		galvanic = evaluate_rx(self.field, GalvanicRx(self.point((16, 7, 8)), self.point((18, 7, 8))), 21e6)
		capacitive = evaluate_rx(self.field, CapacitiveRx(self.point((16, 7, 8))), 21e6)
		self.assertEqual(constants.GALVANIC, galvanic.mode)
		self.assertEqual(constants.CAPACITIVE, capacitive.mode)
		self.assertEqual(1.0, galvanic.v_tx)
		for sample in (galvanic, capacitive):
			self.assertLessEqual(sample.path_loss_db, 0)
		self.assertAlmostEqual(20 * math.log10(abs(galvanic.v_rx)), galvanic.path_loss_db, places=9)
		np.testing.assert_allclose(galvanic.rx_position, self.grid.centers((17, 7, 8)))

	def test_sign_flip_invariance(self):
		__, flipped = solved(self.grid, voltage=-1.0)
		rx = GalvanicRx(self.point((16, 7, 8)), self.point((18, 7, 8)))
		self.assertAlmostEqual(evaluate_rx(self.field, rx, 21e6).path_loss_db, evaluate_rx(flipped, rx, 21e6).path_loss_db, places=6)

	def test_unknown_receiver(self):
		with self.assertRaises(TypeError):
			evaluate_rx(self.field, object(), 21e6)
