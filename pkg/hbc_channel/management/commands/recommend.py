# -*- coding: utf-8 -*-
from ...exceptions import InvalidSpec
from ...scenario import read_region_map, recommend_mode, summarize
from ._base import ChannelCommand


def parse_position(value: str):
	try:
		x, y = (float(v) for v in value.split(','))
	except ValueError:
		raise InvalidSpec('--at', f"expected x,y in metres, got {value!r}") from None
	return x, y


class Command(ChannelCommand):
	help = "Receiver mode with the lower path loss at a surface position"

	def add_command_arguments(self, parser):
		parser.add_argument('--at', required=True, metavar='X,Y', help="Surface position in metres")
		parser.add_argument('--regions', metavar='PATH', help="Region table (default: OUT/regions.csv)")

	def run(self, **options):
		position = parse_position(options['at'])
		region = read_region_map(self.input_path(options['regions'], 'regions.csv'))
		recommendation = recommend_mode(region, position)
		summary = summarize(region)
		self.manifest.data['recommendation'] = recommendation.__dict__
		self.manifest.data['summary'] = summary.__dict__
		self.stdout.write(f"{recommendation.mode} {recommendation.margin_db:.2f} dB")
		self.stdout.write(f"nearest cell ({recommendation.x:g}, {recommendation.y:g})")
