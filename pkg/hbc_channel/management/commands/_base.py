# -*- coding: utf-8 -*-
"""
Shared plumbing of the channel commands: global flags, logging, manifest and
error to exit code translation
"""
import logging
from importlib import metadata
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from ... import utils
from ...config import load_config
from ...exceptions import ChannelError, ConfigError, MissingArtifact
from ...solver import append_run_log


PACKAGE_LOGGER = 'hbc_channel'

VERBOSITY_LEVELS = {0: logging.WARNING, 1: logging.INFO}


def software_version() -> str:
	try:
		return metadata.version('hbc-channel')
	except metadata.PackageNotFoundError:
		return '0+unknown'


class Manifest:
	def __init__(self, command: str, arguments: dict, config):
		self.data = {
			'command': command,
			'arguments': arguments,
			'config_hash': config.hash,
			'config': config.data,
			'version': software_version(),
			'status': 'ok',
			'solver': [],
			'artifacts': [],
			'warnings': [],
		}

	def add_artifact(self, path, out: Path):
		path = Path(path)
		try:
			name = str(path.relative_to(out))
		except ValueError:
			name = str(path)
		self.data['artifacts'] = sorted(set(self.data['artifacts']) | {name})

	def add_solve(self, label: str, stats):
		self.data['solver'].append(dict(stats.as_dict(), label=label))

	def fail(self, error: ChannelError):
		self.data['status'] = 'failed'
		self.data['error'] = {
			'category': error.category,
			'type': error.__class__.__name__,
			'message': str(error),
		}

	def write(self, out: Path) -> Path:
		return utils.write_text(out / 'manifest.json', utils.pretty_json(self.data))


class ChannelCommand(BaseCommand):
	requires_system_checks = []
	requires_migrations_checks = False

	def add_arguments(self, parser):
		parser.add_argument('--config', metavar='PATH', help="YAML run configuration")
		parser.add_argument('--out', metavar='DIR', help="Output directory (default: output.dir from config)")
		parser.add_argument('--threads', metavar='N', type=int, default=1, help="Worker thread cap")
		parser.add_argument('--seed', metavar='N', type=int, default=None, help="Reserved, all computations are deterministic")
		parser.add_argument('--allow-nonqs', action='store_true', help="Run even when the quasistatic check fails")
		self.add_command_arguments(parser)

	def add_command_arguments(self, parser):
		pass

	def configure_logging(self, verbosity: int):
		logger = logging.getLogger(PACKAGE_LOGGER)
		handler = logging.StreamHandler(self.stderr)
		handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
		logger.addHandler(handler)
		logger.setLevel(VERBOSITY_LEVELS.get(verbosity, logging.DEBUG))
		return logger, handler

	def handle(self, *args, **options):
		logger, handler = self.configure_logging(options['verbosity'])
		try:
			try:
				self.config = load_config(options['config'])
			except ConfigError as e:
				raise CommandError(f"[{e.category}] {e}", returncode=e.returncode) from e
			self.out = Path(options['out']) if options['out'] else self.config.output_dir
			if options['threads'] < 1:
				raise CommandError("[config] --threads must be >= 1", returncode=ConfigError.returncode)
			arguments = {
				key: value for key, value in sorted(options.items())
				if key not in ('stdout', 'stderr', 'no_color', 'force_color', 'skip_checks', 'traceback', 'settings', 'pythonpath')
			}
			self.manifest = Manifest(self.name, arguments, self.config)
			try:
				self.run(**options)
			except ConfigError as e:
				raise CommandError(f"[{e.category}] {e}", returncode=e.returncode) from e
			except ChannelError as e:
				self.manifest.fail(e)
				self.manifest.write(self.out)
				raise CommandError(f"[{e.category}] {e}", returncode=e.returncode) from e
			self.manifest.write(self.out)
		finally:
			logger.removeHandler(handler)

	@property
	def name(self) -> str:
		return self.__class__.__module__.rsplit('.', 1)[-1]

	def artifact(self, path):
		self.manifest.add_artifact(path, self.out)
		return path

	def record_solve(self, label, stats):
		self.manifest.add_solve(label, stats)
		append_run_log(self.out / 'run.log', label, stats)

	def input_path(self, value, default_name: str) -> Path:
		"""
		Explicit input or an artifact of an earlier command in the output directory
		"""
		path = Path(value) if value else self.out / default_name
		if not path.is_file():
			raise MissingArtifact(f"Required input {path} does not exist")
		return path

	def run(self, **options):
		raise NotImplementedError
