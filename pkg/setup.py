from setuptools import setup, find_packages

setup(name="mddc-analytics", version="0.1.0", packages=find_packages(), \
    entry_points={"console_scripts": ["mddc = mddc_analytics.cli:main"]})
