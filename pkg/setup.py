#!/usr/bin/env python

from setuptools import setup

requirements = ['numpy>=1.17', 'scipy>=1.4', 'pandas>=1.5', 'jinja2>=2.8', 'markdown>=3.0']

setup(name='hedgelab',
	version='0.1.0',
	description='Risk-aware hedging of option books with distributional reinforcement learning',
	packages=['hedgelab', 'hedgelab.policies', 'hedgelab.storage', 'hedgelab.reports'],
	package_data={'hedgelab.reports': ['templates/*.tpl']},
	scripts=["bin/hedgelab"],
    install_requires=requirements,
    extras_require={'test': ['pytest>=6', 'hypothesis>=5']},
)
