# -*- coding: utf-8 -*-
import numpy as np


AIR = 0
SKIN = 1
MUSCLE = 2
GROUND_PLANE = 3
ELECTRODE_POS = 4
ELECTRODE_NEG = 5
RX_CONTACT = 6

LABEL_NAMES = {
	AIR: 'air',
	SKIN: 'skin',
	MUSCLE: 'muscle',
	GROUND_PLANE: 'ground_plane',
	ELECTRODE_POS: 'electrode_pos',
	ELECTRODE_NEG: 'electrode_neg',
	RX_CONTACT: 'rx_contact',
}

BODY_LABELS = (SKIN, MUSCLE)
DIRICHLET_LABELS = (GROUND_PLANE, ELECTRODE_POS, ELECTRODE_NEG)

# labels whose material is looked up in the tissue table
MATERIAL_LABELS = (AIR, SKIN, MUSCLE, RX_CONTACT)

O1_VERTICAL = 'O1_vertical'
O2_LATERAL = 'O2_lateral'
O3_NORMAL = 'O3_normal'
CUSTOM = 'custom'

ORIENTATION_AXES = {
	O1_VERTICAL: np.array([0.0, 0.0, 1.0]),
	O2_LATERAL: np.array([1.0, 0.0, 0.0]),
	O3_NORMAL: np.array([0.0, 1.0, 0.0]),
}

GALVANIC = 'galvanic'
CAPACITIVE = 'capacitive'
TIE = 'tie'
NO_DATA = 'none'
MODES = (CAPACITIVE, GALVANIC)

SIMULATED = 'simulated'
MEASURED = 'measured'
