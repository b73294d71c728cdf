# -*- coding: utf-8 -*-
from ... import constants
from ...measure import merge_grids
from ...scenario import run_sweep
from ._base import ChannelCommand
from .simulate import quasistatic_guard


class Command(ChannelCommand):
	help = "Surface path loss maps around the transmitter for every receiver mode"

	def run(self, **options):
		config = self.config
		quasistatic_guard(config, options['allow_nonqs'])
		result = run_sweep(config.map_spec(), workers=options['threads'])
		self.record_solve(config.tx.orientation, result.stats)
		if result.skipped:
			self.manifest.data['warnings'].append(f"{len(result.skipped)} receiver points off the body surface")

		grids = [result.grids[mode] for mode in constants.MODES if mode in result.grids]
		self.artifact(merge_grids(*grids).write(self.out / 'map.csv'))
		for grid in grids:
			mode = grid.modes[0]
			self.artifact(grid.write(self.out / f'map_{mode}.csv'))
			self.stdout.write(f"{mode}: {grid.x.size}x{grid.y.size} cells written")
		self.artifact(self.out / 'run.log')
