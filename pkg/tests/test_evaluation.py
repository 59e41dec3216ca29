# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import logging

import numpy as np
import pandas as pd
import pytest

from hedgelab.environment import EnvConfig
from hedgelab.evaluation import (ScenarioSet, EvaluationError, run_scenarios, sample_metrics,
                                 hedge_ratio_stats, evaluate, comparison_table, gain_histogram,
                                 frontier, robustness_grid, calibrate_risk_limit, client_premium,
                                 metrics_frame)
from hedgelab.market import MarketParams
from hedgelab.policies import Policy, create_policy

CONSTANT = MarketParams()
STOCHASTIC = MarketParams(vol_of_vol=0.3)
SHORT = EnvConfig(horizon_days=5)

class OverreachingPolicy(Policy):
  """Always wants more hedge than the interval allows."""

  name = 'overreaching'

  def act(self, features, interval):
    self.target_clipped = True
    return 0.5

def test_sample_metrics_needs_enough_samples():
  with pytest.raises(EvaluationError):
    sample_metrics(np.zeros(99))
  metrics = sample_metrics(-np.arange(1.0, 101.0))
  assert metrics.var95 == pytest.approx(95.05)
  assert metrics.cvar95 == pytest.approx(98.0)
  assert metrics.var95 <= metrics.cvar95

def test_hedge_ratios():
  frame = pd.DataFrame({'gamma_pre': [10.0, -4.0, 0.0, 5.0],
                        'gamma_post': [0.0, -1.0, 3.0, 5.0],
                        'vega_pre': [0.0, 0.0, 0.0, 0.0],
                        'vega_post': [0.0, 0.0, 0.0, 0.0]})
  gamma, vega = hedge_ratio_stats(frame)
  assert gamma == pytest.approx((1.0 + 0.75 + 0.0) / 3)
  assert np.isnan(vega)
  pooled, _ = hedge_ratio_stats(frame, method='pooled')
  assert pooled == pytest.approx(1.0 - (0.0 + 1.0 + 0.0 + 5.0) / 19.0)
  with pytest.raises(EvaluationError):
    hedge_ratio_stats(frame, method='median')

def test_scenario_streams_are_fixed_per_index():
  scenarios = ScenarioSet(STOCHASTIC, SHORT, count=10, seed=4)
  first = scenarios.rng(3).standard_normal(4)
  np.testing.assert_array_equal(first, scenarios.rng(3).standard_normal(4))
  with pytest.raises(EvaluationError):
    ScenarioSet(STOCHASTIC, SHORT, count=0)

def test_runs_are_reproducible_and_parallel_safe():
  scenarios = ScenarioSet(STOCHASTIC, SHORT, count=12, seed=5)
  policy = create_policy('delta_gamma')
  serial = run_scenarios(policy, scenarios)
  again = run_scenarios(policy, scenarios)
  parallel = run_scenarios(policy, scenarios, workers=3)
  np.testing.assert_array_equal(serial.gains, again.gains)
  np.testing.assert_array_equal(serial.gains, parallel.gains)
  np.testing.assert_array_equal(serial.costs, parallel.costs)
  pd.testing.assert_frame_equal(serial.diagnostics, parallel.diagnostics)
  assert list(serial.diagnostics['scenario'].unique()) == list(range(12))

def test_policies_share_market_paths():
  scenarios = ScenarioSet(STOCHASTIC, SHORT, count=5, seed=6)
  delta = run_scenarios(create_policy('delta_only'), scenarios).diagnostics
  gamma = run_scenarios(create_policy('delta_gamma'), scenarios).diagnostics
  np.testing.assert_array_equal(delta['spot'].values, gamma['spot'].values)

def test_delta_only_pays_no_costs():
  report = evaluate(create_policy('delta'), ScenarioSet(STOCHASTIC, SHORT, count=100, seed=7))
  assert report.expected_cost == 0.0
  assert report.gamma_ratio == pytest.approx(0.0)
  row = metrics_frame([report]).iloc[0]
  assert row['policy'] == 'delta_only'
  assert row['VaR95'] == report.metrics.var95

def test_comparison_table_layout():
  sets = [ScenarioSet(CONSTANT, SHORT.replace(kappa=kappa), count=100, seed=8) for kappa in (0.005, 0.02)]
  baselines = {'Delta': create_policy('delta_only'), 'Delta-Gamma': create_policy('delta_gamma')}
  agents = {(0.02, 'VaR95'): create_policy('delta_gamma')}
  table = comparison_table(baselines, agents, sets)
  assert list(table['kappa']) == [0.005] * 3 + [0.02] * 3
  assert list(table['objective']) == ['MeanStd', 'VaR95', 'CVaR95'] * 2
  rl = table[table['RL'].notna()]
  assert len(rl) == 1
  assert rl.iloc[0]['RL'] == rl.iloc[0]['Delta-Gamma']
  assert np.isnan(rl.iloc[0]['RL_vega_ratio'])
  # Delta hedging never trades the option, so its risk ignores kappa.
  assert table['Delta'].iloc[0] == table['Delta'].iloc[3]

def test_gain_histogram():
  gains = np.arange(100.0)
  histogram, rug, boundary = gain_histogram(gains, bins=10)
  assert histogram['count'].sum() == 100
  assert boundary == pytest.approx(np.percentile(gains, 5))
  assert (rug['gain'] <= boundary).all()
  assert len(rug) == 5
  single, _, _ = gain_histogram(np.full(10, 2.0), bins=4)
  assert single['count'].sum() == 10
  with pytest.raises(EvaluationError):
    gain_histogram([])

def test_frontier_and_robustness_grid():
  scenarios = ScenarioSet(STOCHASTIC, SHORT, count=100, seed=9)
  delta = evaluate(create_policy('delta_only'), scenarios, 'Delta')
  gamma = evaluate(create_policy('delta_gamma'), scenarios, 'Delta-Gamma')
  points = frontier([('VaR90', gamma), ('VaR99', gamma)], {'Delta': delta})
  assert list(points['kind']) == ['agent', 'agent', 'baseline', 'baseline']
  assert points['risk'].iloc[1] >= points['risk'].iloc[0]
  with pytest.raises(EvaluationError):
    frontier([('CVaR95', gamma)], {})

  cells = [('vol_of_vol', 0.3, 'VaR95', create_policy('delta_gamma')),
           ('vol_of_vol', 0.0, 'CVaR95', create_policy('delta_only'))]
  grid = robustness_grid(cells, scenarios)
  assert list(grid.columns) == ['parameter', 'value', 'objective', 'objective_value',
                                'gamma_ratio', 'vega_ratio', 'expected_cost']
  assert grid['objective_value'].iloc[0] == pytest.approx(gamma.metrics.var95)

def test_risk_limit_calibration():
  scenarios = ScenarioSet(CONSTANT, SHORT, count=20, seed=10)
  limit = calibrate_risk_limit(scenarios)
  diagnostics = run_scenarios(create_policy('delta_only'), scenarios).diagnostics
  assert limit == pytest.approx(0.1 * diagnostics['dollar_gamma'].abs().max())
  assert limit > 0

def test_client_premium_covers_base_case():
  premium = client_premium(CONSTANT, EnvConfig(kappa=0.01))
  assert 15.0 < premium < 20.0
  assert client_premium(CONSTANT, EnvConfig(kappa=0.02)) == pytest.approx(2 * premium)

def test_clipped_targets_are_counted_and_reported(caplog):
  scenarios = ScenarioSet(STOCHASTIC, SHORT, count=100, seed=11)
  with caplog.at_level(logging.WARNING, logger='hedgelab.evaluation'):
    report = evaluate(OverreachingPolicy(), scenarios)
  assert report.run.diagnostics['target_clipped'].all()
  assert report.target_clips == len(report.run.diagnostics)
  assert report.as_row()['target_clips'] == report.target_clips
  assert 'hedge targets clipped' in caplog.text
  baseline = evaluate(create_policy('delta_only'), scenarios)
  assert baseline.target_clips == 0
