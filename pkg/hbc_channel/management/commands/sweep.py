# -*- coding: utf-8 -*-
import numpy as np
import pandas as pd

from ... import constants, utils
from ...exceptions import NoConvergence
from ...scenario import find_null, orientation_study
from ._base import ChannelCommand
from .simulate import quasistatic_guard


SUMMARY_COLUMNS = ('orientation', 'mode', 'points', 'median_path_loss_db', 'null_found', 'null_offset_m', 'null_prominence_db', 'far_half_variation_db')


def far_half_variation(curve) -> float:
	"""
	Spread of path loss over the half of the track farthest from the transmitter
	"""
	order = np.argsort(np.abs(curve.distance), kind='stable')
	far = curve.path_loss_db[order[len(order) // 2:]]
	far = far[np.isfinite(far)]
	return float(far.max() - far.min()) if far.size else float('nan')


class Command(ChannelCommand):
	help = "Path loss along a vertical surface track for each transmitter orientation"

	def add_command_arguments(self, parser):
		parser.add_argument('--orientation', action='append', choices=[constants.O1_VERTICAL, constants.O2_LATERAL, constants.O3_NORMAL], help="Restrict to orientation (repeatable)")

	def run(self, **options):
		config = self.config
		quasistatic_guard(config, options['allow_nonqs'])
		presets = tuple(options['orientation'] or config.orientations)
		results = orientation_study(config.sweep_spec(), presets, threads=options['threads'])
		if not results:
			raise NoConvergence("No orientation produced a converged solution")

		curves = []
		summary = []
		for orientation in presets:
			result = results.get(orientation)
			if result is None:
				self.manifest.data['warnings'].append(f"{orientation}: skipped")
				continue
			self.record_solve(orientation, result.stats)
			for mode in constants.MODES:
				curve = result.curves.get(mode)
				if curve is None:
					continue
				curves.append(curve.to_frame())
				null = find_null(curve)
				summary.append((
					orientation,
					mode,
					len(curve),
					float(np.nanmedian(curve.path_loss_db)) if len(curve) else float('nan'),
					null.found,
					null.offset if null.found else float('nan'),
					null.prominence_db,
					far_half_variation(curve),
				))
				line = f"{orientation} {mode}: median {summary[-1][3]:.2f} dB"
				if null.found:
					line += f", null at offset {null.offset:+.3f} m ({null.prominence_db:.1f} dB deep)"
				self.stdout.write(line)

		self.artifact(utils.write_table(pd.concat(curves, ignore_index=True), self.out / 'sweep.csv'))
		self.artifact(utils.write_table(pd.DataFrame(summary, columns=SUMMARY_COLUMNS), self.out / 'sweep_summary.csv'))
		self.artifact(self.out / 'run.log')
