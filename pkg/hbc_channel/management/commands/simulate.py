# -*- coding: utf-8 -*-
from ...exceptions import InvalidSpec
from ...phantom import build_phantom, place_transmitter, voxelize
from ...solver import assemble, current_divergence, label_currents, solve
from ...tissue import validate_quasistatic
from ._base import ChannelCommand


def quasistatic_guard(config, allow_nonqs: bool):
	report = validate_quasistatic(config.frequency, build_phantom(config.phantom).extent)
	if not report.quasistatic_ok and not allow_nonqs:
		raise InvalidSpec('tissue.frequency_hz', f"refusing non-quasistatic run: {report.notes} (use --allow-nonqs)")
	return report


class Command(ChannelCommand):
	help = "Build the phantom, place the transmitter and solve the potential field"

	def add_command_arguments(self, parser):
		parser.add_argument('--dump-field', action='store_true', help="Write voxel grid and complex potential dumps")

	def run(self, **options):
		config = self.config
		qs = quasistatic_guard(config, options['allow_nonqs'])
		self.manifest.data['quasistatic'] = {'ok': qs.quasistatic_ok, 'notes': qs.notes}

		grid = voxelize(build_phantom(config.phantom), config.resolution, workers=options['threads'])
		self.manifest.data['warnings'].extend(grid.warnings)
		grid = place_transmitter(grid, config.tx)
		solver = config.data['solver']
		system = assemble(grid, config.table(), config.frequency, config.tx.voltage)
		field = solve(system, solver['tol_rel'], solver['max_iter'], solver['preconditioner'])
		self.record_solve(config.tx.orientation, field.stats)
		field.require_converged()

		divergence = current_divergence(field, system)
		currents = label_currents(divergence, grid)
		self.manifest.data['grid'] = {
			'dims': list(grid.dims),
			'resolution': grid.resolution,
			'origin': list(grid.origin),
		}
		self.manifest.data['currents'] = {
			name: [value.real, value.imag] for name, value in currents.items()
		}
		self.manifest.data['current_balance'] = divergence.balance

		if options['dump_field'] or config.data['output']['dump_field']:
			self.artifact(grid.write(self.out / 'grid.bin'))
			self.artifact(field.write(self.out / 'field.bin'))
		self.artifact(self.out / 'run.log')

		self.stdout.write(f"grid {'x'.join(str(n) for n in grid.dims)} at {grid.resolution:g} m, {system.size} unknowns")
		self.stdout.write(f"solved in {field.stats.iterations} iterations, relative residual {field.stats.residual:.3e}")
		self.stdout.write(f"electrode current {abs(divergence.electrode_pos):.6e} A, balance {divergence.balance:.3e}")
