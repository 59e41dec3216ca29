# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import json

import pytest

from hedgelab.config import ExperimentConfig, ConfigError, DEFAULTS

def test_defaults_are_the_base_case():
  config = ExperimentConfig()
  params = config.market_params()
  env = config.env_config()
  assert (params.sigma0, params.vol_of_vol, params.r, params.q, params.mu) == (0.3, 0.0, 0.0, 0.0, 0.0)
  assert (env.initial_spot, env.arrival_intensity, env.horizon_days) == (10.0, 1.0, 30)
  assert (env.client_maturity_days, env.hedge_maturity_days, env.kappa) == (60, 30, 0.01)
  assert config.evaluation['kappas'] == [0.005, 0.01, 0.02]
  assert config.scenario_set().count == 5000
  assert config.agent_config().objective.name == 'VaR95'

def test_unknown_keys_name_their_path():
  with pytest.raises(ConfigError) as error:
    ExperimentConfig({'market': {'sigma': 0.2}})
  assert 'market.sigma' in str(error.value)
  with pytest.raises(ConfigError) as error:
    ExperimentConfig({'robustness': {'grids': {'volatility': [0.1]}}})
  assert 'robustness.grids.volatility' in str(error.value)
  with pytest.raises(ConfigError):
    ExperimentConfig({'plots': True})

def test_type_and_invariant_errors():
  with pytest.raises(ConfigError) as error:
    ExperimentConfig({'environment': {'kappa': 'high'}})
  assert 'environment.kappa' in str(error.value)
  with pytest.raises(ConfigError) as error:
    ExperimentConfig({'market': {'rho': 2.0}})
  assert 'market' in str(error.value)
  with pytest.raises(ConfigError):
    ExperimentConfig({'agent': {'objective': 'Sharpe'}})
  with pytest.raises(ConfigError):
    ExperimentConfig({'evaluation': {'risk_limit': 'sometimes'}})
  with pytest.raises(ConfigError):
    ExperimentConfig({'report': {'html': 1}})
  with pytest.raises(ConfigError):
    ExperimentConfig({'robustness': {'grids': {'sigma0': [0.2, -0.1]}}})

def test_resolved_document_round_trips(tmp_path):
  config = ExperimentConfig({'market': {'vol_of_vol': 0.3}, 'seed': 9})
  path = tmp_path / 'config.json'
  path.write_text(config.to_text())
  loaded = ExperimentConfig.load(str(path))
  assert loaded == config
  assert loaded.digest() == config.digest()
  assert set(json.loads(config.to_text())) == set(DEFAULTS)

def test_digests():
  base = ExperimentConfig()
  assert base.digest() == ExperimentConfig().digest()
  other = base.override(seed=5)
  assert other.digest() != base.digest()
  assert other.training_digest() != base.training_digest()
  reported = base.with_section('report', title='Other')
  assert reported.digest() != base.digest()
  assert reported.training_digest() == base.training_digest()

def test_overrides():
  config = ExperimentConfig().override(seed=3, output='/tmp/x', workers=4)
  assert (config.seed, config.output, config.evaluation['workers']) == (3, '/tmp/x', 4)
  with pytest.raises(ConfigError):
    ExperimentConfig().override(workers=0)

def test_load_errors(tmp_path):
  with pytest.raises(ConfigError):
    ExperimentConfig.load(str(tmp_path / 'missing.json'))
  broken = tmp_path / 'broken.json'
  broken.write_text('{"market": ')
  with pytest.raises(ConfigError):
    ExperimentConfig.load(str(broken))
  with pytest.raises(ConfigError):
    ExperimentConfig(['not', 'an', 'object'])

def test_resolve_expands_every_default():
  resolved = ExperimentConfig({'environment': {'kappa': 0.02}}).resolve()
  assert resolved['environment']['kappa'] == 0.02
  assert resolved['environment']['horizon_days'] == 30
  assert resolved['agent']['hidden'] == [64, 64]
  resolved['seed'] = 99
  assert ExperimentConfig().seed == 1
