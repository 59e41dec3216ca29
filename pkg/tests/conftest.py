# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import pytest

def pytest_addoption(parser):
  parser.addoption('--runslow', action='store_true', default=False,
                   help='run agent training and full-size baseline checks')

def pytest_configure(config):
  config.addinivalue_line('markers', 'slow: long-running training or full-size simulation')

def pytest_collection_modifyitems(config, items):
  if config.getoption('--runslow'):
    return
  skip_slow = pytest.mark.skip(reason='needs --runslow')
  for item in items:
    if 'slow' in item.keywords:
      item.add_marker(skip_slow)
