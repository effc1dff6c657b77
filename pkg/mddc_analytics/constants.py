"""
Environment variables that control mddc analytics
"""

MDDC_LOG_LEVEL_ENV = 'MDDC_LOG_LEVEL'
LOG_LEVEL_DEFAULT_LEVEL = 'info'
LOG_LEVEL = 'log_level'

# worker count for Monte Carlo replications and table generation
MDDC_THREADS_ENV = 'MDDC_THREADS'
THREADS = 'threads'

MANIFEST_FILE = 'manifest.yaml'
