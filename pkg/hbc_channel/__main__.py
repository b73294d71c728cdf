# -*- coding: utf-8 -*-
"""
``hbc-channel <command> [options]`` without a Django project
"""
import os
import sys

import django
from django.conf import settings
from django.core.management import load_command_class


COMMANDS = ('simulate', 'sweep', 'map', 'contour', 'recommend', 'ingest', 'compare')

PROG = 'hbc-channel'


def setup():
	if not settings.configured and not os.environ.get('DJANGO_SETTINGS_MODULE'):
		settings.configure(INSTALLED_APPS=['hbc_channel'], USE_TZ=True)
	django.setup()


def usage() -> str:
	lines = [f"usage: {PROG} <command> [options]", "", "commands:"]
	for name in COMMANDS:
		lines.append(f"  {name:<10} {load_command_class('hbc_channel', name).help}")
	lines.append("")
	lines.append(f"Run '{PROG} <command> --help' for command options.")
	return '\n'.join(lines)


def main(argv=None):
	argv = list(sys.argv if argv is None else argv)
	setup()
	if len(argv) < 2 or argv[1] in ('-h', '--help', 'help'):
		sys.stdout.write(usage() + '\n')
		return 0
	name = argv[1]
	if name not in COMMANDS:
		sys.stderr.write(f"{PROG}: unknown command {name!r}\n\n{usage()}\n")
		return 2
	command = load_command_class('hbc_channel', name)
	# run_from_argv expects argv[0] to be the program and argv[1] the subcommand
	command.run_from_argv([PROG] + argv[1:])
	return 0


if __name__ == '__main__':
	sys.exit(main())
