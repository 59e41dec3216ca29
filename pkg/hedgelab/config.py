# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Experiment configuration: one JSON document with a fixed key schema.

Missing keys take the base-case defaults, unknown keys are rejected with their
dotted path. The resolved document is what gets written beside every output,
so any artifact can be reproduced from it alone.
"""

import io
import copy
import json
import logging

from hedgelab import digest
from hedgelab.market import MarketParams
from hedgelab.environment import EnvConfig
from hedgelab.agent import AgentConfig
from hedgelab.evaluation import ScenarioSet, EvaluationError

logger = logging.getLogger(__name__)

class ConfigError(ValueError):
  pass

DEFAULTS = {
  'seed': 1,
  'output': 'results',
  'market': MarketParams().as_dict(),
  'environment': EnvConfig().as_dict(),
  'agent': AgentConfig().as_dict(),
  'evaluation': {
    'scenarios': 5000,
    'seed': 2,
    'validation_scenarios': 200,
    'validation_seed': 3,
    'workers': 1,
    'kappas': [0.005, 0.01, 0.02],
    'baselines': ['delta_only', 'delta_gamma', 'delta_vega'],
    'histogram_bins': 50,
    'hedge_ratio': 'mean',
    'risk_limit': None,
    'risk_limit_fraction': 0.1,
  },
  'robustness': {
    'grids': {'vol_of_vol': [0.0, 0.15, 0.3, 0.45, 0.6],
              'sigma0': [0.1, 0.2, 0.3, 0.4, 0.5]},
    'objectives': ['VaR95'],
    'train': True,
    'cache': None,
  },
  'report': {
    'title': 'Hedging experiment',
    'template': 'summary.md.tpl',
    'html': True,
  },
}

# Sections whose keys are free-form (values are checked when used).
OPEN_SECTIONS = ('robustness.grids',)

def _is_number(value):
  return isinstance(value, (int, float)) and not isinstance(value, bool)

def _merge(defaults, data, path):
  if not isinstance(data, dict):
    raise ConfigError('%s must be an object' % (path or 'configuration'))
  merged = copy.deepcopy(defaults)
  for key, value in data.items():
    name = '%s.%s' % (path, key) if path else key
    if key not in defaults:
      raise ConfigError('Unknown configuration key %s' % name)
    default = defaults[key]
    if isinstance(default, dict) and name not in OPEN_SECTIONS:
      merged[key] = _merge(default, value, name)
    elif isinstance(default, dict):
      if not isinstance(value, dict):
        raise ConfigError('%s must be an object' % name)
      merged[key] = copy.deepcopy(value)
    elif _is_number(default) and not _is_number(value):
      raise ConfigError('%s must be a number, got %r' % (name, value))
    elif isinstance(default, bool) and not isinstance(value, bool):
      raise ConfigError('%s must be true or false, got %r' % (name, value))
    elif isinstance(default, list) and not isinstance(value, list):
      raise ConfigError('%s must be a list, got %r' % (name, value))
    else:
      merged[key] = copy.deepcopy(value)
  return merged

class ExperimentConfig(object):
  """A validated, fully resolved experiment description."""

  def __init__(self, data=None):
    self._data = _merge(DEFAULTS, data or {}, '')
    self._check()

  @staticmethod
  def load(filename):
    try:
      with io.open(filename, 'r', encoding='utf-8') as fp:
        data = json.load(fp)
    except IOError as e:
      raise ConfigError('Cannot read configuration %s: %s' % (filename, e))
    except ValueError as e:
      raise ConfigError('Configuration %s is not valid JSON: %s' % (filename, e))
    logger.debug('Loaded configuration from %s', filename)
    return ExperimentConfig(data)

  def _check(self):
    # Building every section once reports invariant violations with the section name.
    self.market_params()
    self.env_config()
    self.agent_config()
    evaluation = self._data['evaluation']
    if evaluation['scenarios'] < 1 or evaluation['validation_scenarios'] < 1:
      raise ConfigError('evaluation.scenarios must be positive')
    if evaluation['workers'] < 1:
      raise ConfigError('evaluation.workers must be at least 1')
    if evaluation['hedge_ratio'] not in ('mean', 'pooled'):
      raise ConfigError('evaluation.hedge_ratio must be mean or pooled')
    risk_limit = evaluation['risk_limit']
    if risk_limit is not None and risk_limit != 'auto' and not (_is_number(risk_limit) and risk_limit > 0):
      raise ConfigError('evaluation.risk_limit must be null, "auto" or a positive number')
    known = MarketParams().as_dict()
    for parameter, values in self._data['robustness']['grids'].items():
      if parameter not in known:
        raise ConfigError('Unknown configuration key robustness.grids.%s' % parameter)
      if not isinstance(values, list) or not all(_is_number(v) for v in values):
        raise ConfigError('robustness.grids.%s must be a list of numbers' % parameter)
      for value in values:
        self.market_params(**{parameter: value})

  @property
  def seed(self):
    return int(self._data['seed'])

  @property
  def output(self):
    return self._data['output']

  @property
  def evaluation(self):
    return self._data['evaluation']

  @property
  def robustness(self):
    return self._data['robustness']

  @property
  def report(self):
    return self._data['report']

  def override(self, seed=None, output=None, workers=None):
    """Copy with command-line overrides applied."""
    data = copy.deepcopy(self._data)
    if seed is not None:
      data['seed'] = seed
    if output is not None:
      data['output'] = output
    if workers is not None:
      data['evaluation']['workers'] = workers
    return ExperimentConfig(data)

  def with_section(self, section, **changes):
    data = copy.deepcopy(self._data)
    data[section].update(changes)
    return ExperimentConfig(data)

  def market_params(self, **changes):
    values = dict(self._data['market'])
    values.update(changes)
    try:
      return MarketParams(**values)
    except (ValueError, TypeError) as e:
      raise ConfigError('market: %s' % e)

  def env_config(self, **changes):
    values = dict(self._data['environment'])
    values.update(changes)
    try:
      return EnvConfig(**values)
    except (ValueError, TypeError) as e:
      raise ConfigError('environment: %s' % e)

  def agent_config(self, **changes):
    values = dict(self._data['agent'])
    values.update(changes)
    try:
      return AgentConfig(**values)
    except (ValueError, TypeError) as e:
      raise ConfigError('agent: %s' % e)

  def scenario_set(self, params=None, config=None):
    evaluation = self._data['evaluation']
    try:
      return ScenarioSet(params or self.market_params(), config or self.env_config(),
                         evaluation['scenarios'], evaluation['seed'])
    except EvaluationError as e:
      raise ConfigError('evaluation: %s' % e)

  def validation_set(self, params=None, config=None):
    evaluation = self._data['evaluation']
    return ScenarioSet(params or self.market_params(), config or self.env_config(),
                       evaluation['validation_scenarios'], evaluation['validation_seed'])

  def resolve(self):
    """The full document with every default expanded."""
    return copy.deepcopy(self._data)

  def to_text(self):
    return json.dumps(self._data, indent=2, sort_keys=True) + '\n'

  def digest(self):
    return digest(self._data)

  def training_digest(self):
    """Digest of the parts that determine a trained agent."""
    return digest({key: self._data[key] for key in ('seed', 'market', 'environment', 'agent')})

  def __eq__(self, other):
    return isinstance(other, ExperimentConfig) and self._data == other._data

  def __ne__(self, other):
    return not self == other
