# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import numpy as np
import pytest

from hedgelab import stream
from hedgelab.agent import Agent, AgentConfig
from hedgelab.environment import EnvConfig, HedgingEnvironment, ActionInterval, episode
from hedgelab.market import MarketParams
from hedgelab.policies import Policy, PolicyError, create_policy, policies
from hedgelab.policies.baselines import baseline_action, DELTA_GAMMA, DELTA_VEGA, DELTA_ONLY

STOCHASTIC = MarketParams(vol_of_vol=0.3)

def test_registry():
  assert set(['delta', 'delta_only', 'delta_gamma', 'delta_vega', 'agent']) <= set(policies)
  assert create_policy('delta').kind == DELTA_ONLY
  assert create_policy({'policy': 'delta_gamma', 'risk_limit': 2}).risk_limit == 2.0
  with pytest.raises(PolicyError):
    create_policy('martingale')
  with pytest.raises(PolicyError):
    create_policy({})
  with pytest.raises(PolicyError):
    create_policy({'policy': 'agent'})

def test_default_policy_never_trades():
  interval = ActionInterval(-4.0, 2.0, -4.0, 2.0)
  assert interval.position(Policy().act(None, interval)) == 0.0

def test_baseline_targets():
  interval = ActionInterval(-20.0, 10.0, -20.0, 10.0, dollar_gamma=50.0)
  a, clipped = baseline_action(None, interval, DELTA_GAMMA)
  assert interval.position(a) == -20.0 and not clipped
  a, _ = baseline_action(None, interval, DELTA_VEGA)
  assert interval.position(a) == pytest.approx(10.0)
  a, _ = baseline_action(None, interval, DELTA_ONLY)
  assert interval.position(a) == 0.0

def test_risk_limit_suppresses_small_exposures():
  interval = ActionInterval(-20.0, 0.0, -20.0, None, dollar_gamma=3.0)
  a, _ = baseline_action(None, interval, DELTA_GAMMA, risk_limit=3.0)
  assert interval.position(a) == 0.0
  a, _ = baseline_action(None, interval, DELTA_GAMMA, risk_limit=2.9)
  assert interval.position(a) == -20.0

def test_out_of_range_target_is_clipped():
  interval = ActionInterval(0.0, 0.0, -5.0, None, dollar_gamma=10.0, gated=True)
  policy = create_policy('delta_gamma')
  assert interval.position(policy.act(None, interval)) == 0.0
  assert policy.target_clipped
  policy.act(None, ActionInterval(-10.0, 0.0, -5.0, None))
  assert not policy.target_clipped

def test_delta_vega_needs_stochastic_vol():
  with pytest.raises(PolicyError):
    episode(create_policy('delta_vega'), stream(1), EnvConfig(horizon_days=2), MarketParams())

def test_delta_gamma_neutralizes_gamma():
  _, rows = episode(create_policy('delta_gamma'), stream(2), EnvConfig(), STOCHASTIC)
  for row in rows:
    assert abs(row['gamma_post']) <= 1e-9 * (1 + abs(row['gamma_pre']))

def test_delta_vega_neutralizes_vega():
  _, rows = episode(create_policy('delta_vega'), stream(3), EnvConfig(), STOCHASTIC)
  for row in rows:
    assert abs(row['vega_post']) <= 1e-9 * (1 + abs(row['vega_pre']))

def test_learned_policy_checks_features():
  agent = Agent.create(AgentConfig(hidden=(4,)), 3, stream(4))
  policy = create_policy({'policy': 'agent', 'agent': agent, 'label': 'tiny'})
  assert policy.name == 'tiny'
  environment = HedgingEnvironment(STOCHASTIC, EnvConfig(), stream(5))
  features = environment.reset()
  with pytest.raises(PolicyError):
    policy.act(features, environment.interval)
  constant = HedgingEnvironment(MarketParams(), EnvConfig(), stream(5))
  features = constant.reset()
  assert 0.0 < policy.act(features, constant.interval) < 1.0

def test_learned_policy_from_checkpoint(tmp_path):
  agent = Agent.create(AgentConfig(hidden=(4,), objective='CVaR95'), 3, stream(6))
  path = tmp_path / 'checkpoint.json'
  path.write_text(agent.to_text())
  policy = create_policy({'policy': 'agent', 'checkpoint': str(path)})
  assert policy.describe() == {'policy': 'agent', 'checkpoint': str(path), 'objective': 'CVaR95'}
  features = np.array([1.0, 0.2, 0.1])
  assert policy.agent.act(features) == agent.act(features)
