# -*- coding: utf-8 -*-
class ChannelError(RuntimeError):
	category = 'error'
	returncode = 1


class ConfigError(ChannelError):
	category = 'config'
	returncode = 2


class InvalidSpec(ConfigError):
	def __init__(self, field, message):
		super().__init__(f"{field}: {message}")
		self.field = field


class MissingTissue(ConfigError):
	pass


class NegativeConductivity(ConfigError):
	pass


class SolveError(ChannelError):
	category = 'solve'
	returncode = 3


class GridTooLarge(SolveError):
	pass


class ElectrodeOutsideBody(SolveError):
	pass


class ElectrodesOverlap(SolveError):
	pass


class NoGroundPlane(SolveError):
	pass


class NoElectrodes(SolveError):
	pass


class SingularSystem(SolveError):
	pass


class SystemTooLarge(SolveError):
	pass


class NoConvergence(SolveError):
	def __init__(self, message, field=None):
		super().__init__(message)
		self.field = field


class MismatchedInputs(SolveError):
	pass


class ContactOffSurface(SolveError):
	pass


class ZeroRadius(SolveError):
	pass


class TooFewPoints(SolveError):
	pass


class OutOfBounds(SolveError):
	pass


class IoError(ChannelError):
	category = 'io'
	returncode = 4


class MissingArtifact(ChannelError):
	category = 'missing_artifact'
	returncode = 5


class GridMismatch(ChannelError):
	category = 'grid_mismatch'
	returncode = 6


class ParseError(ChannelError):
	category = 'parse'
	returncode = 7

	def __init__(self, message, line=None):
		if line is not None:
			message = f"line {line}: {message}"
		super().__init__(message)
		self.line = line


class DuplicateCoordinate(ParseError):
	pass


class MissingTxPower(ParseError):
	pass


class NoOverlap(ChannelError):
	category = 'no_overlap'
	returncode = 8
