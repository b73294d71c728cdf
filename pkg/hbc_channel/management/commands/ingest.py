# -*- coding: utf-8 -*-
from pathlib import Path

from ... import constants
from ...exceptions import TooFewPoints
from ...measure import Calibration, ingest_grid
from ...scenario import saturation_floor
from ._base import ChannelCommand


class Command(ChannelCommand):
	help = "Convert a measurement campaign into a calibrated path loss grid"

	def add_command_arguments(self, parser):
		parser.add_argument('source', help="Campaign file (x_cm,y_cm,p_rx_dbm)")
		parser.add_argument('--mode', choices=constants.MODES, help="Receiver mode (default: #meta mode)")
		parser.add_argument('--attenuator-db', type=float, default=20.0)
		parser.add_argument('--buffer-gain-db', type=float, default=0.0)
		parser.add_argument('--cable-loss-db', type=float, default=0.0)
		parser.add_argument('--tx-power-dbm', type=float, default=None, help="Overrides #meta tx_power_dbm")
		parser.add_argument('--name', help="Output file name (default: measured_<mode>.csv)")

	def run(self, **options):
		cal = Calibration(
			attenuator_db=options['attenuator_db'],
			buffer_gain_db=options['buffer_gain_db'],
			tx_power_dbm=options['tx_power_dbm'],
			cable_loss_db=options['cable_loss_db'],
		)
		grid = ingest_grid(Path(options['source']), cal, options['mode'])
		mode = grid.modes[0]
		self.artifact(grid.write(self.out / (options['name'] or f'measured_{mode}.csv')))
		self.stdout.write(f"{mode}: {grid.x.size}x{grid.y.size} cells")
		if mode == constants.CAPACITIVE:
			try:
				floor = saturation_floor(grid)
			except TooFewPoints as e:
				self.stdout.write(f"saturation floor: {e}")
			else:
				self.manifest.data['saturation_floor'] = floor.__dict__
				self.stdout.write(f"saturation floor {floor.floor_db:.2f} dB (IQR {floor.iqr_db:.2f} dB, {'saturated' if floor.saturated else 'not saturated'})")
