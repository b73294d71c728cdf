#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Regenerate the synthetic measurement campaigns shipped in
``hbc_channel/data/fixtures``

The shapes follow published trends only: capacitive path loss saturating at
-52 dB away from the transmitter and galvanic pickup winning inside 5 cm.
Readings are stored as analyzer power behind the 20 dB attenuator for a
0 dBm transmitter.
"""
from pathlib import Path

import numpy as np
import pandas as pd

from hbc_channel import utils
from hbc_channel.measure import MEASUREMENT_COLUMNS


FIXTURES_DIR = Path(__file__).resolve().parent.parent / 'hbc_channel' / 'data' / 'fixtures'

ATTENUATOR_DB = 20.0

LATTICE_CM = np.arange(-30, 31, 5)


def capacitive(x, y):
	r = np.hypot(x, y)
	return np.where(r < 10, -42.0 - r, -52.0 + 0.3 * np.sin(0.7 * x + 1.3 * y))


def galvanic(x, y):
	r = np.hypot(x, y)
	with np.errstate(divide='ignore'):
		far = -47.0 - 25.7 * np.log10(r / 5)
	return np.where(r <= 5, -37.0 - 2 * r, far)


def campaign(path_loss, skip_corners=False):
	x, y = (v.reshape(-1) for v in np.meshgrid(LATTICE_CM, LATTICE_CM, indexing='ij'))
	keep = np.ones(x.size, dtype=bool)
	if skip_corners:
		keep = ~((np.abs(x) == 30) & (np.abs(y) == 30))
	x, y = x[keep], y[keep]
	p_rx = path_loss(x.astype(float), y.astype(float)) - ATTENUATOR_DB
	frame = pd.DataFrame({
		'x_cm': x,
		'y_cm': y,
		'p_rx_dbm': [f'{value:.4f}' for value in p_rx],
	}, columns=MEASUREMENT_COLUMNS)
	return frame


def main():
	utils.write_table(
		campaign(capacitive),
		FIXTURES_DIR / 'capacitive_campaign.csv',
		meta={'mode': 'capacitive', 'frequency_hz': '21000000', 'notes': 'synthetic'},
		comments=(
			"synthetic capacitive campaign: 21 MHz, 13x13 lattice, 5 cm pitch",
			"shaped after published trends (-52 dB far-region saturation); not measured data",
		),
	)
	utils.write_table(
		campaign(galvanic, skip_corners=True),
		FIXTURES_DIR / 'galvanic_campaign.csv',
		meta={'mode': 'galvanic', 'frequency_hz': '21000000', 'notes': 'synthetic'},
		comments=(
			"synthetic galvanic campaign: 21 MHz, 13x13 lattice, 5 cm pitch, corners not reachable",
			"shaped after published trends (galvanic preferred below 5 cm); not measured data",
		),
	)


if __name__ == '__main__':
	main()
