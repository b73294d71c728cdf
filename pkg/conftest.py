# -*- coding: utf-8 -*-
import os

import django

# mirror run_tests.py so the suite also runs under plain pytest
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'tests.settings')
django.setup()
