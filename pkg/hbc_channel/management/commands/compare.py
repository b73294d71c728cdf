# -*- coding: utf-8 -*-
from ... import utils
from ...measure import compare, merge_grids
from ...scenario import read_path_loss_grid
from ._base import ChannelCommand


def load(paths):
	grids = [read_path_loss_grid(path) for path in paths]
	return grids[0] if len(grids) == 1 else merge_grids(*grids)


class Command(ChannelCommand):
	help = "Compare simulated and measured path loss grids"

	def add_command_arguments(self, parser):
		parser.add_argument('--sim', nargs='+', metavar='PATH', help="Simulated grid(s) (default: OUT/map.csv)")
		parser.add_argument('--meas', nargs='+', required=True, metavar='PATH', help="Measured grid(s)")

	def run(self, **options):
		sim = load([self.input_path(path, 'map.csv') for path in (options['sim'] or [None])])
		meas = load([self.input_path(path, '') for path in options['meas']])
		report = compare(sim, meas)
		self.artifact(utils.write_text(self.out / 'report.json', utils.pretty_json(report.to_dict())))
		self.manifest.data['report'] = report.to_dict()

		self.stdout.write(f"aligned cells {report.aligned_cells} ({report.coverage_pct:.1f}% coverage)")
		self.stdout.write(f"bias {report.bias_db:.3f} dB, RMSE {report.rmse_db:.3f} dB")
		if report.winner_agreement_pct is not None:
			self.stdout.write(f"winner agreement {report.winner_agreement_pct:.1f}%")
		if report.saturation_floor_delta_db is not None:
			self.stdout.write(f"saturation floor delta {report.saturation_floor_delta_db:+.2f} dB")
		if report.null_location_delta_m is not None:
			self.stdout.write(f"null location delta {report.null_location_delta_m:+.3f} m")
