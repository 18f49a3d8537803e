"""
pytest setup: configure django so that the unittest-style test cases under
slicemux/tests run the same as with ./manage.py test
"""
import os

import django


def pytest_configure(config):
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'slicemux.ops.settings')
    django.setup()
