# -*- coding: utf-8 -*-
from pathlib import Path

BASE_DIR = Path(__file__).parent

INSTALLED_APPS = ['hbc_channel']
SECRET_KEY = 'secret'
USE_TZ = True

DATABASES = {}

# smaller ceilings keep accidental huge runs out of the suite
HBC_MAX_GRID_CELLS = 2_000_000
