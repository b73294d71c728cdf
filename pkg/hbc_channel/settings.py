# -*- coding: utf-8 -*-
import os

from django.conf import settings as django_settings


# plain library use (scripts, notebooks) falls back to the defaults below
settings = django_settings if django_settings.configured or os.environ.get('DJANGO_SETTINGS_MODULE') else object()


HBC_MAX_GRID_CELLS = getattr(settings, "HBC_MAX_GRID_CELLS", 4_000_000)
HBC_DENSE_MAX_UNKNOWNS = getattr(settings, "HBC_DENSE_MAX_UNKNOWNS", 20_000)
HBC_SOLVER_TOLERANCE = getattr(settings, "HBC_SOLVER_TOLERANCE", 1e-8)
HBC_SOLVER_MAX_ITER = getattr(settings, "HBC_SOLVER_MAX_ITER", 5000)
HBC_SOLVER_PRECONDITIONER = getattr(settings, "HBC_SOLVER_PRECONDITIONER", 'ilu')
HBC_TIE_EPSILON_DB = getattr(settings, "HBC_TIE_EPSILON_DB", 0.5)
HBC_FAR_REGION_M = getattr(settings, "HBC_FAR_REGION_M", 0.10)
HBC_NEAR_REGION_M = getattr(settings, "HBC_NEAR_REGION_M", 0.05)
HBC_NULL_PROMINENCE_DB = getattr(settings, "HBC_NULL_PROMINENCE_DB", 10.0)
HBC_SATURATION_IQR_DB = getattr(settings, "HBC_SATURATION_IQR_DB", 3.0)
HBC_PATH_LOSS_FLOOR_DB = getattr(settings, "HBC_PATH_LOSS_FLOOR_DB", -300.0)
HBC_QUASISTATIC_FACTOR = getattr(settings, "HBC_QUASISTATIC_FACTOR", 10.0)
HBC_RETURN_CAPACITANCE_F = getattr(settings, "HBC_RETURN_CAPACITANCE_F", 1e-12)
HBC_LOAD_RESISTANCE_OHM = getattr(settings, "HBC_LOAD_RESISTANCE_OHM", 1e6)
HBC_LOAD_CAPACITANCE_F = getattr(settings, "HBC_LOAD_CAPACITANCE_F", 10e-12)
