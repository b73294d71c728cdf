# -*- coding: utf-8 -*-
from ... import constants, utils
from ...scenario import crossover_contour, read_path_loss_grid, summarize
from ._base import ChannelCommand


class Command(ChannelCommand):
	help = "Regions where the galvanic or the capacitive receiver has lower path loss"

	def add_command_arguments(self, parser):
		parser.add_argument('--cap', metavar='PATH', help="Capacitive grid (default: OUT/map_capacitive.csv)")
		parser.add_argument('--galv', metavar='PATH', help="Galvanic grid (default: OUT/map_galvanic.csv)")
		parser.add_argument('--tie-db', type=float, default=None, help="Tie tolerance in dB")

	def run(self, **options):
		cap = read_path_loss_grid(self.input_path(options['cap'], 'map_capacitive.csv'))
		galv = read_path_loss_grid(self.input_path(options['galv'], 'map_galvanic.csv'))
		region = crossover_contour(cap, galv, options['tie_db'])
		self.artifact(utils.write_table(region.to_frame(), self.out / 'regions.csv'))
		self.artifact(utils.write_table(region.crossover_frame(), self.out / 'crossover.csv'))

		summary = summarize(region)
		self.manifest.data['summary'] = summary.__dict__
		radius = 'none' if summary.galvanic_radius is None else f"{summary.galvanic_radius:.3f} m"
		self.stdout.write(f"{constants.GALVANIC} cells {summary.galvanic_cells}, core radius {radius}")
		self.stdout.write(f"{constants.CAPACITIVE} cells {summary.capacitive_cells}, ties {summary.tie_cells}")
		self.stdout.write(f"capacitive-only penalty {summary.max_capacitive_penalty_db:.2f} dB, galvanic-only penalty {summary.max_galvanic_penalty_db:.2f} dB")
