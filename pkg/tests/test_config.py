# -*- coding: utf-8 -*-
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from hbc_channel import constants
from hbc_channel.config import load_config, normalize, parse_config
from hbc_channel.exceptions import ConfigError, InvalidSpec


class TestDefaults(SimpleTestCase):
	def test_values(self):
		config = parse_config({})
		self.assertEqual(21e6, config.frequency)
		self.assertEqual(0.02, config.resolution)
		self.assertEqual(constants.O1_VERTICAL, config.tx.orientation)
		self.assertEqual((0.0, 0.12, 0.80), config.tx.center)
		self.assertEqual(0.04, config.tx.plate_gap)
		self.assertEqual(1.8, config.phantom.torso_height)
		self.assertIsNone(config.table_path)
		self.assertEqual((constants.O1_VERTICAL, constants.O2_LATERAL, constants.O3_NORMAL), config.orientations)

	def test_hash(self):
		self.assertEqual(parse_config({}).hash, load_config().hash)
		self.assertEqual(64, len(parse_config({}).hash))
		changed = parse_config({'solver': {'resolution_m': 0.01}})
		self.assertNotEqual(parse_config({}).hash, changed.hash)
		self.assertEqual(parse_config({'solver': {'resolution_m': 0.02}}).hash, parse_config({}).hash)

	def test_sweep_spec(self):
		spec = parse_config({}).sweep_spec()
		self.assertEqual((0.06,), spec.track_x)
		self.assertEqual(51, len(spec.track_y))
		self.assertEqual(constants.MODES, spec.modes)
		spec = parse_config({'rx': {'modes': ['capacitive']}}).sweep_spec(constants.O2_LATERAL)
		self.assertEqual((constants.CAPACITIVE,), spec.modes)
		self.assertEqual((1.0, 0.0, 0.0), spec.tx.axis)

	def test_map_spec(self):
		spec = parse_config({'map': {'half_width_m': 0.1, 'half_height_m': 0.04, 'pitch_m': 0.02}}).map_spec()
		self.assertEqual(11, len(spec.track_x))
		self.assertEqual(5, len(spec.track_y))

	def test_custom_axis(self):
		config = parse_config({'tx': {'orientation': 'custom', 'axis': [0, 0, 2]}})
		self.assertEqual((0.0, 0.0, 1.0), config.tx.axis)
		self.assertEqual(constants.CUSTOM, config.tx.orientation)


class TestValidation(SimpleTestCase):
	def assertField(self, field, data):
		with self.assertRaises(InvalidSpec) as cm:
			parse_config(data)
		self.assertEqual(field, cm.exception.field)

	def test_unknown(self):
		self.assertField('tx.bogus', {'tx': {'bogus': 1}})
		self.assertField('bogus', {'bogus': {}})
		self.assertField('tx', {'tx': [1, 2]})

	def test_types(self):
		self.assertField('solver.max_iter', {'solver': {'max_iter': 'many'}})
		self.assertField('solver.max_iter', {'solver': {'max_iter': 10.5}})
		self.assertField('tx.voltage_v', {'tx': {'voltage_v': True}})
		self.assertField('tx.center_m', {'tx': {'center_m': [0, 0]}})
		self.assertField('tx.center_m[1]', {'tx': {'center_m': [0, 'up', 0]}})
		self.assertField('output.dump_field', {'output': {'dump_field': 'yes'}})
		self.assertField('tissue.frequency_hz', {'tissue': {'frequency_hz': 'fast'}})
		self.assertField('rx.modes', {'rx': {'modes': 'galvanic'}})

	def test_exponent_string(self):
		self.assertEqual(21e6, parse_config({'tissue': {'frequency_hz': '21e6'}}).frequency)

	def test_ranges(self):
		self.assertField('solver.resolution_m', {'solver': {'resolution_m': 0.2}})
		self.assertField('solver.resolution_m', {'solver': {'resolution_m': 0}})
		self.assertField('tissue.frequency_hz', {'tissue': {'frequency_hz': -1}})
		self.assertField('solver.tol_rel', {'solver': {'tol_rel': 0.5}})
		self.assertField('solver.max_iter', {'solver': {'max_iter': 0}})
		self.assertField('solver.preconditioner', {'solver': {'preconditioner': 'multigrid'}})
		self.assertField('rx.modes', {'rx': {'modes': ['optical']}})
		self.assertField('rx.modes', {'rx': {'modes': []}})
		self.assertField('rx.load_c_f', {'rx': {'load_c_f': -1e-12}})
		self.assertField('rx.c_return_f', {'rx': {'c_return_f': 0}})
		self.assertField('rx.contact_spacing_m', {'solver': {'resolution_m': 0.05}})
		self.assertField('sweep.orientations', {'sweep': {'orientations': ['custom']}})
		self.assertField('tx.orientation', {'tx': {'orientation': 'diagonal'}})

	def test_geometry(self):
		self.assertField('tx.plate_gap_m', {'tx': {'plate_gap_m': -1}})
		self.assertField('tx.center_m[2]', {'tx': {'center_m': [0, 0, 'inf']}})
		self.assertField('phantom.skin_thickness_m', {'phantom': {'skin_thickness_m': 0.2}})
		self.assertField('phantom.air_margin_m', {'phantom': {'air_margin_m': 0.1}})
		self.assertField('tx.axis', {'tx': {'orientation': 'custom'}})
		self.assertField('tx.axis', {'tx': {'orientation': 'custom', 'axis': [0, 0, 0]}})

	def test_table(self):
		with tempfile.TemporaryDirectory() as directory:
			with self.assertRaises(InvalidSpec) as cm:
				parse_config({'tissue': {'table': 'missing.csv'}}, base_dir=directory)
			self.assertEqual('tissue.table', cm.exception.field)

	def test_not_a_mapping(self):
		with self.assertRaises(ConfigError):
			normalize([1, 2])


class TestLoad(SimpleTestCase):
	def write(self, directory, text):
		path = Path(directory) / 'run.yaml'
		path.write_text(text, encoding='utf-8')
		return path

	def test_yaml(self):
		with tempfile.TemporaryDirectory() as directory:
			path = self.write(directory, "tissue:\n  frequency_hz: 10e6\nsolver:\n  resolution_m: 0.05\nrx:\n  contact_spacing_m: 0.05\noutput:\n  dir: results\n")
			config = load_config(path)
		self.assertEqual(10e6, config.frequency)
		self.assertEqual(0.05, config.resolution)
		self.assertEqual(Path(directory) / 'results', config.output_dir)
		self.assertEqual(path, config.source)

	def test_empty_file(self):
		with tempfile.TemporaryDirectory() as directory:
			config = load_config(self.write(directory, ""))
		self.assertEqual(parse_config({}).hash, config.hash)

	def test_relative_table(self):
		with tempfile.TemporaryDirectory() as directory:
			table = Path(directory) / 'tissues.csv'
			table.write_text("tissue,frequency_hz,sigma_s_per_m,eps_r\n", encoding='utf-8')
			config = load_config(self.write(directory, "tissue:\n  table: tissues.csv\n"))
			self.assertEqual(table, config.table_path)

	def test_hash_follows_table_contents(self):
		with tempfile.TemporaryDirectory() as directory:
			table = Path(directory) / 'tissues.csv'
			path = self.write(directory, "tissue:\n  table: tissues.csv\n")
			table.write_text("tissue,frequency_hz,sigma_s_per_m,eps_r\nmuscle,21e6,0.68,114\n", encoding='utf-8')
			first = load_config(path).hash
			self.assertEqual(first, load_config(path).hash)
			table.write_text("tissue,frequency_hz,sigma_s_per_m,eps_r\nmuscle,21e6,0.70,114\n", encoding='utf-8')
			self.assertNotEqual(first, load_config(path).hash)

	def test_errors(self):
		with tempfile.TemporaryDirectory() as directory:
			with self.assertRaises(ConfigError):
				load_config(self.write(directory, "tx: [unclosed\n"))
			with self.assertRaises(ConfigError):
				load_config(Path(directory) / 'absent.yaml')
			with self.assertRaises(ConfigError):
				load_config(self.write(directory, "- a\n- b\n"))
