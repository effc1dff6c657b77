"""Provides functions for reading configuration information"""
import logging
import os

import mddc_analytics.constants as constants

def default_threads():
    """Number of workers used when neither --threads nor MDDC_THREADS is given"""
    return os.cpu_count() or 1

def get_env_config():
    ''' Reads MDDC config information from env variables'''
    config = {}

    # log level
    # override with environment variable
    config[constants.LOG_LEVEL] = os.getenv(constants.MDDC_LOG_LEVEL_ENV, \
        constants.LOG_LEVEL_DEFAULT_LEVEL)

    # threads
    # default value
    config[constants.THREADS] = default_threads()
    # override with value in env variable
    threads = os.getenv(constants.MDDC_THREADS_ENV)
    if threads is not None:
        try:
            if int(threads) < 1:
                raise ValueError(threads)
            config[constants.THREADS] = int(threads)
        except ValueError:
            logging.getLogger(__name__).warning(\
                "Ignoring invalid %s value %r", constants.MDDC_THREADS_ENV, threads)
    # log result
    logging.getLogger(__name__).debug(\
        "mddc analytics will use up to %s worker threads", config[constants.THREADS])

    return config

env_config = get_env_config()
