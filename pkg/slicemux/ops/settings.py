"""
Django settings for the slicemux project

Only the parts of django needed by the command line tools are configured:
the slicemux app, logging and the SLICEMUX_* simulation defaults.  There is no
database.  To customize, put a settings.py into the working directory that
does "from slicemux.ops.settings import *" and overrides what is needed.
"""
from os import environ

# not used for any cryptographic purpose here, django just insists on having
# one
SECRET_KEY = environ.get('SLICEMUX_SECRET_KEY', 'slicemux-not-a-secret')

DEBUG = False

INSTALLED_APPS = [
    'slicemux.apps.SliceMuxConfig',
]

DATABASES = {}

USE_I18N = False
USE_TZ = True
TIME_ZONE = 'UTC'

# Simulation defaults
# length of the trial phase in slots
SLICEMUX_TRIAL_LENGTH = 7200
# user-count sliding window in seconds
SLICEMUX_USER_WINDOW = 10
# records allocating more PRBs are treated as decoding errors
SLICEMUX_MAX_PRB = 110
# path to MCS -> kbps/PRB table, None for the bundled table
SLICEMUX_MCS_TABLE = None
SLICEMUX_MIMO_FACTOR = 2
# detector significance level and window size
SLICEMUX_ALPHA = 0.05
SLICEMUX_WINDOW = 100
# use the exp(quantile/2) threshold instead of exp(quantile(1 - alpha/2))
SLICEMUX_CORRECTED_THRESHOLD = False
# demand transform for provisioning: clip, zero, or none
SLICEMUX_TRANSFORM = 'clip'
# total demand estimator: joint or convolution
SLICEMUX_ESTIMATOR = 'joint'
# detector/model chain: state, users, full, or factored
SLICEMUX_CHAIN_MODE = 'state'
# residual grants: continuous or quantized
SLICEMUX_RESIDUAL = 'continuous'
# add per-slot allocation timing to summary.csv (not reproducible)
SLICEMUX_REPORT_TIMING = False

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} ({name}) '
                      'pid:{process:d}/{thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} ({name}) {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'formatter': 'verbose',
            'level': 'DEBUG',
            'class': 'logging.FileHandler',
            'filename': './debug.log',
            'encoding': 'UTF-8',
            'delay': True,
        },
        'simlog_file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': './simulation.log',
            'formatter': 'verbose',
            'encoding': 'UTF-8',
            'delay': True,
        },
    },
    'loggers': {
        'slicemux': {
            'handlers': ['console', 'file'],
            'level': environ.get('SLICEMUX_LOG_LEVEL', 'WARNING'),
            'propagate': True,
        },
        'simlog': {
            'handlers': ['simlog_file'],
            'level': 'INFO',
        },
    },
}
