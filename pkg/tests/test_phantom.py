# -*- coding: utf-8 -*-
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from hbc_channel import constants
from hbc_channel.exceptions import ElectrodeOutsideBody, ElectrodesOverlap, GridTooLarge, InvalidSpec, ParseError
from hbc_channel.phantom import PhantomSpec, TxSpec, build_phantom, mark_contacts, place_transmitter, read_grid, remove_transmitter, uniform_grid, voxelize
from .scenes import COARSE, SMALL_PHANTOM, small_grid, small_tx


class TestPhantomSpec(SimpleTestCase):
	def test_defaults_valid(self):
		spec = PhantomSpec()
		self.assertIs(spec, spec.validate())
		self.assertAlmostEqual(0.04, spec.base_z)
		self.assertAlmostEqual(1.44, spec.arm_axis_z)

	def test_invalid_fields(self):
		cases = [
			(dict(torso_radius=0), 'torso_radius'),
			(dict(skin_thickness=0.2), 'skin_thickness'),
			(dict(crossing_height=2.0), 'crossing_height'),
			(dict(air_margin=0.2), 'air_margin'),
			(dict(arm_length=float('nan')), 'arm_length'),
		]
		for kwargs, field in cases:
			with self.subTest(field=field):
				with self.assertRaises(InvalidSpec) as cm:
					build_phantom(replace(PhantomSpec(), **kwargs))
				self.assertEqual(field, cm.exception.field)


class TestClassify(SimpleTestCase):
	def setUp(self):
		self.spec = PhantomSpec()
		self.phantom = build_phantom(self.spec)

	def classify(self, point):
		return int(self.phantom.classify(np.array(point, dtype=float)))

	def test_torso_axis_is_muscle(self):
		self.assertEqual(constants.MUSCLE, self.classify((0.0, 0.0, self.spec.base_z + 0.9)))

	def test_skin_shell(self):
		r = self.spec.torso_radius - self.spec.skin_thickness / 2
		self.assertEqual(constants.SKIN, self.classify((0.0, r, 0.8)))
		self.assertEqual(constants.MUSCLE, self.classify((0.0, r - self.spec.skin_thickness, 0.8)))

	def test_air_and_ground(self):
		self.assertEqual(constants.AIR, self.classify((1.0, 0.0, 1.0)))
		self.assertEqual(constants.GROUND_PLANE, self.classify((0.0, 0.0, 0.0)))
		self.assertEqual(constants.AIR, self.classify((0.0, 0.0, 0.02)))

	def test_arm(self):
		self.assertEqual(constants.MUSCLE, self.classify((0.8, 0.0, self.spec.arm_axis_z)))
		self.assertEqual(constants.AIR, self.classify((0.8, 0.0, self.spec.arm_axis_z + 0.06)))

	def test_without_skin(self):
		r = self.spec.torso_radius - self.spec.skin_thickness / 2
		self.assertEqual(constants.MUSCLE, int(self.phantom.classify(np.array((0.0, r, 0.8)), skin=False)))


class TestVoxelize(SimpleTestCase):
	@classmethod
	def setUpClass(cls):
		super().setUpClass()
		cls.grid = small_grid()

	def test_label_partition(self):
		counts = self.grid.counts()
		self.assertEqual(self.grid.labels.size, sum(counts.values()))
		self.assertEqual(set(constants.LABEL_NAMES), set(counts))
		self.assertTrue(all(dim >= 8 for dim in self.grid.dims))

	def test_ground_slab(self):
		labels = self.grid.labels
		self.assertTrue(np.all(labels[:, :, 0] == constants.GROUND_PLANE))
		self.assertFalse(np.any(labels[:, :, 1:] == constants.GROUND_PLANE))
		self.assertAlmostEqual(0.0, self.grid.axis_centers(2)[0])

	def test_mirror_symmetry(self):
		labels = self.grid.labels
		np.testing.assert_array_equal(labels, labels[::-1, :, :])
		np.testing.assert_allclose(self.grid.axis_centers(0), -self.grid.axis_centers(0)[::-1], atol=1e-12)

	def test_degenerate_skin(self):
		self.assertFalse(np.any(self.grid.labels == constants.SKIN))
		self.assertEqual(1, len(self.grid.warnings))
		self.assertIn('DegenerateGeometry', self.grid.warnings[0])
		coarse = voxelize(build_phantom(SMALL_PHANTOM), SMALL_PHANTOM.torso_radius / 2)
		self.assertFalse(np.any(coarse.labels == constants.SKIN))
		self.assertTrue(coarse.warnings)

	def test_skin_resolved(self):
		spec = replace(SMALL_PHANTOM, skin_thickness=0.03)
		grid = voxelize(build_phantom(spec), 0.025)
		self.assertFalse(grid.warnings)
		self.assertTrue(np.any(grid.labels == constants.SKIN))
		self.assertTrue(np.any(grid.labels == constants.MUSCLE))

	def test_refinement_volume_scaling(self):
		fine = voxelize(build_phantom(SMALL_PHANTOM), COARSE / 2)
		ratio = fine.counts()[constants.MUSCLE] / self.grid.counts()[constants.MUSCLE]
		self.assertGreater(ratio, 8 * 0.8)
		self.assertLess(ratio, 8 * 1.2)

	def test_center_classification(self):
		phantom = build_phantom(SMALL_PHANTOM)
		index = (12, 9, 6)
		center = self.grid.centers(index)
		self.assertEqual(int(phantom.classify(center, skin=False)), self.grid.labels[index])
		self.assertEqual(index, self.grid.index_of(center))

	def test_parallel_rasterization(self):
		parallel = voxelize(build_phantom(SMALL_PHANTOM), COARSE, workers=4)
		np.testing.assert_array_equal(self.grid.labels, parallel.labels)
		self.assertEqual(self.grid.origin, parallel.origin)

	def test_grid_too_large(self):
		with self.assertRaises(GridTooLarge):
			voxelize(build_phantom(SMALL_PHANTOM), COARSE, max_cells=1000)

	def test_invalid_resolution(self):
		with self.assertRaises(InvalidSpec):
			voxelize(build_phantom(SMALL_PHANTOM), 0)

	def test_surface(self):
		surface = self.grid.surface_mask()
		body = self.grid.body_mask()
		self.assertTrue(np.all(body[surface]))
		self.assertTrue(surface.any())
		# torso axis voxel is interior
		self.assertFalse(surface[self.grid.index_of((0.0, 0.0, 0.30))])

	def test_project_to_surface(self):
		point = self.grid.project_to_surface(0.0, 0.30)
		index = self.grid.index_of(point)
		self.assertTrue(self.grid.surface_mask()[index])
		self.assertEqual(constants.AIR, self.grid.labels[index[0], index[1] + 1, index[2]])
		back = self.grid.project_to_surface(0.0, 0.30, side=-1)
		self.assertAlmostEqual(-point[1], back[1])
		self.assertIsNone(self.grid.project_to_surface(0.25, 0.30))
		self.assertIsNone(self.grid.project_to_surface(5.0, 0.30))

	def test_write_read(self):
		with tempfile.TemporaryDirectory() as tmp:
			path = self.grid.write(Path(tmp) / 'grid.bin')
			loaded = read_grid(path)
		np.testing.assert_array_equal(self.grid.labels, loaded.labels)
		self.assertEqual(self.grid.resolution, loaded.resolution)
		self.assertEqual(self.grid.origin, loaded.origin)

	def test_read_garbage(self):
		with tempfile.TemporaryDirectory() as tmp:
			path = Path(tmp) / 'grid.bin'
			path.write_bytes(b'nothing here\n')
			with self.assertRaises(ParseError):
				read_grid(path)


class TestPlaceTransmitter(SimpleTestCase):
	@classmethod
	def setUpClass(cls):
		super().setUpClass()
		cls.grid = small_grid()

	def plates(self, grid):
		pos = np.argwhere(grid.labels == constants.ELECTRODE_POS)
		neg = np.argwhere(grid.labels == constants.ELECTRODE_NEG)
		return pos, neg

	def test_vertical(self):
		grid = place_transmitter(self.grid, small_tx(constants.O1_VERTICAL))
		pos, neg = self.plates(grid)
		self.assertEqual((1, 1), (len(pos), len(neg)))
		self.assertEqual(pos[0][:2].tolist(), neg[0][:2].tolist())
		self.assertEqual(2, pos[0][2] - neg[0][2])
		self.assertEqual(2, len(grid.saved_labels))

	def test_normal(self):
		grid = place_transmitter(self.grid, small_tx(constants.O3_NORMAL))
		pos, neg = self.plates(grid)
		self.assertEqual(2, pos[0][1] - neg[0][1])
		self.assertEqual(pos[0][[0, 2]].tolist(), neg[0][[0, 2]].tolist())

	def test_idempotent_and_restorable(self):
		tx = small_tx(constants.O2_LATERAL)
		once = place_transmitter(self.grid, tx)
		twice = place_transmitter(once, tx)
		np.testing.assert_array_equal(once.labels, twice.labels)
		np.testing.assert_array_equal(self.grid.labels, remove_transmitter(twice).labels)
		self.assertIsNone(remove_transmitter(twice).tx)

	def test_overlap(self):
		with self.assertRaises(ElectrodesOverlap):
			place_transmitter(self.grid, replace(small_tx(), plate_gap=COARSE / 2))

	def test_outside_body(self):
		with self.assertRaises(ElectrodeOutsideBody):
			place_transmitter(self.grid, small_tx(center=(0.0, 0.30, 0.30)))
		with self.assertRaises(ElectrodeOutsideBody):
			place_transmitter(self.grid, small_tx(center=(0.0, 0.05, 5.0)))

	def test_invalid_axis(self):
		with self.assertRaises(InvalidSpec):
			place_transmitter(self.grid, TxSpec(axis=(1.0, 1.0, 0.0)))
		with self.assertRaises(InvalidSpec):
			TxSpec.from_preset(constants.CUSTOM)
		with self.assertRaises(InvalidSpec):
			TxSpec.from_preset('sideways')

	def test_mark_contacts(self):
		index = self.grid.index_of(self.grid.project_to_surface(0.0, 0.30))
		marked = mark_contacts(self.grid, [index])
		self.assertEqual(constants.RX_CONTACT, marked.labels[index])
		self.assertEqual(1, marked.counts()[constants.RX_CONTACT])


class TestUniformGrid(SimpleTestCase):
	def test_layout(self):
		grid = uniform_grid((8, 9, 10), 0.01)
		self.assertEqual((8, 9, 10), grid.dims)
		self.assertEqual(8 * 9, grid.counts()[constants.GROUND_PLANE])
		self.assertEqual(8 * 9 * 9, grid.counts()[constants.MUSCLE])
		self.assertAlmostEqual(0.005, grid.centers((0, 0, 0))[0])
		self.assertFalse(grid.surface_mask().any())
