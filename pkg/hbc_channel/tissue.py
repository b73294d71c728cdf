# -*- coding: utf-8 -*-
"""
Tissue dielectric data and the electro-quasistatic validity check
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Tuple

import numpy as np
import pandas as pd
from scipy.constants import c as SPEED_OF_LIGHT, epsilon_0

from . import constants, utils
from .exceptions import InvalidSpec, MissingTissue, NegativeConductivity, ParseError
from .settings import HBC_QUASISTATIC_FACTOR


logger = logging.getLogger(__name__)


TABLE_COLUMNS = ('tissue', 'frequency_hz', 'sigma_s_per_m', 'eps_r')

DEFAULT_TABLE_PATH = Path(__file__).parent / 'data' / 'tissues.csv'

AIR = constants.LABEL_NAMES[constants.AIR]


@dataclass(frozen=True)
class TissueProperties:
	tissue: str
	conductivity: float
	relative_permittivity: float
	frequency: float

	def __post_init__(self):
		if not np.isfinite(self.conductivity) or self.conductivity < 0:
			raise NegativeConductivity(f"{self.tissue}: conductivity must be >= 0, got {self.conductivity}")
		if not self.relative_permittivity >= 1:
			raise InvalidSpec('eps_r', f"{self.tissue}: relative permittivity must be >= 1, got {self.relative_permittivity}")
		if not self.frequency > 0:
			raise InvalidSpec('frequency_hz', f"{self.tissue}: frequency must be > 0, got {self.frequency}")


@dataclass(frozen=True)
class ComplexAdmittivity:
	real: float
	imag: float

	@property
	def value(self) -> complex:
		return complex(self.real, self.imag)


@dataclass(frozen=True)
class QsReport:
	frequency: float
	wavelength: float
	body_extent: float
	quasistatic_ok: bool
	notes: str = ''


@dataclass(frozen=True)
class TissueTable:
	entries: Dict[Tuple[str, float], TissueProperties] = field(default_factory=dict)

	@property
	def tissues(self) -> set:
		return {tissue for tissue, __ in self.entries} | {AIR}

	def frequencies(self, tissue: str) -> list:
		return sorted(frequency for name, frequency in self.entries if name == tissue)

	def lookup(self, tissue: str, frequency: float) -> TissueProperties:
		"""
		Entry with nearest tabulated frequency; air is always available
		"""
		tissue = tissue.lower()
		frequencies = self.frequencies(tissue)
		if tissue == AIR and not frequencies:
			return TissueProperties(AIR, 0.0, 1.0, frequency)
		if not frequencies:
			raise MissingTissue(f"Tissue {tissue!r} not in table")
		nearest = min(frequencies, key=lambda f: (abs(f - frequency), f))
		return self.entries[(tissue, nearest)]

	def require(self, tissues: Iterable[str]):
		missing = sorted(set(t.lower() for t in tissues) - self.tissues)
		if missing:
			raise MissingTissue(f"Tissue table lacks {', '.join(missing)}")

	def to_frame(self) -> pd.DataFrame:
		rows = [
			(props.tissue, props.frequency, props.conductivity, props.relative_permittivity)
			for __, props in sorted(self.entries.items())
		]
		return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def load_tissue_table(source=DEFAULT_TABLE_PATH) -> TissueTable:
	"""
	Load ``tissue,frequency_hz,sigma_s_per_m,eps_r`` table
	"""
	table = utils.read_table(source, TABLE_COLUMNS)
	frequencies = utils.column_values(table, 'frequency_hz')
	sigmas = utils.column_values(table, 'sigma_s_per_m')
	eps = utils.column_values(table, 'eps_r')

	entries = {}
	for line, tissue, frequency, sigma, eps_r in zip(table.lines, table.frame['tissue'], frequencies, sigmas, eps):
		tissue = tissue.strip().lower()
		if not tissue:
			raise ParseError("Empty tissue name", line)
		if sigma < 0:
			raise NegativeConductivity(f"line {line}: {tissue} conductivity {sigma} < 0")
		try:
			props = TissueProperties(tissue, sigma, eps_r, frequency)
		except InvalidSpec as e:
			raise ParseError(str(e), line) from e
		if (tissue, frequency) in entries:
			raise ParseError(f"Duplicate entry {tissue} @ {frequency} Hz", line)
		entries[(tissue, frequency)] = props

	logger.debug("Loaded %d tissue rows", len(entries))
	return TissueTable(entries)


def write_tissue_table(table: TissueTable, path) -> Path:
	return utils.write_table(table.to_frame(), path)


def admittivity(props: TissueProperties, frequency: float) -> ComplexAdmittivity:
	"""
	sigma + j omega eps_0 eps_r
	"""
	if not frequency > 0:
		raise InvalidSpec('frequency_hz', f"frequency must be > 0, got {frequency}")
	return ComplexAdmittivity(
		float(props.conductivity),
		float(2 * np.pi * frequency * epsilon_0 * props.relative_permittivity),
	)


def label_admittivities(table: TissueTable, frequency: float, labels=constants.MATERIAL_LABELS) -> Dict[int, complex]:
	"""
	Complex admittivity of material labels at given frequency
	"""
	result = {}
	for label in labels:
		name = constants.LABEL_NAMES[label]
		if label == constants.RX_CONTACT:
			name = constants.LABEL_NAMES[constants.SKIN]
		result[label] = admittivity(table.lookup(name, frequency), frequency).value
	return result


def validate_quasistatic(frequency: float, body_extent: float) -> QsReport:
	"""
	Electrically small body check: wavelength must exceed the radius of the
	sphere enclosing the body (half its largest dimension ``body_extent``) by
	``HBC_QUASISTATIC_FACTOR``
	"""
	if not (frequency > 0 and body_extent > 0):
		raise InvalidSpec('frequency_hz', f"frequency and body extent must be > 0, got {frequency}, {body_extent}")
	wavelength = SPEED_OF_LIGHT / frequency
	limit = HBC_QUASISTATIC_FACTOR * body_extent / 2
	ok = bool(wavelength >= limit)
	if ok:
		notes = f"wavelength {wavelength:.4g} m >= {HBC_QUASISTATIC_FACTOR:g} x body radius {body_extent / 2:.4g} m"
	else:
		notes = f"wavelength {wavelength:.4g} m < {HBC_QUASISTATIC_FACTOR:g} x body radius {body_extent / 2:.4g} m, full-wave regime"
	return QsReport(frequency, wavelength, body_extent, ok, notes)
