# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Policy evaluation over shared scenario sets and the report tables."""

import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pandas as pd

from hedgelab import stream
from hedgelab.environment import episode, diagnostics_frame
from hedgelab.market import MarketState, quote_option
from hedgelab.risk import Objective, STANDARD_OBJECTIVES, VAR, sample_risk, sample_var

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100

class EvaluationError(ValueError):
  pass

class ScenarioSet(object):
  """A reproducible family of episodes: scenario i always draws from stream (seed, i)."""

  def __init__(self, params, config, count=5000, seed=1):
    if count < 1:
      raise EvaluationError('A scenario set needs at least one scenario')
    self.params = params
    self.config = config
    self.count = int(count)
    self.seed = int(seed)

  def rng(self, index):
    return stream(self.seed, index)

  def replace(self, params=None, config=None, count=None, seed=None):
    return ScenarioSet(params or self.params, config or self.config,
                       self.count if count is None else count,
                       self.seed if seed is None else seed)

class ScenarioRun(object):
  """Gains, transaction costs and step diagnostics of one policy on a set."""

  def __init__(self, gains, costs, diagnostics):
    self.gains = gains
    self.costs = costs
    self.diagnostics = diagnostics

def _play(policy, scenarios, indices):
  gains = []
  costs = []
  rows = []
  for index in indices:
    gain, steps = episode(policy, scenarios.rng(index), scenarios.config, scenarios.params)
    for row in steps:
      row['scenario'] = index
    rows.extend(steps)
    gains.append(gain)
    costs.append(sum(row['cost'] for row in steps))
  return gains, costs, rows

def run_scenarios(policy, scenarios, workers=1):
  """Plays one episode per scenario; results are ordered by scenario index."""
  indices = list(range(scenarios.count))
  if workers <= 1 or scenarios.count < 2 * workers:
    gains, costs, rows = _play(policy, scenarios, indices)
  else:
    chunks = [indices[i::workers] for i in range(workers)]
    gains = [0.0] * scenarios.count
    costs = [0.0] * scenarios.count
    rows = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
      results = pool.map(_play, [policy] * workers, [scenarios] * workers, chunks)
      for chunk, (chunk_gains, chunk_costs, chunk_rows) in zip(chunks, results):
        for index, gain, cost in zip(chunk, chunk_gains, chunk_costs):
          gains[index] = gain
          costs[index] = cost
        rows.extend(chunk_rows)
    rows.sort(key=lambda row: (row['scenario'], row['day']))
  frame = diagnostics_frame(rows)
  frame.insert(0, 'scenario', [row['scenario'] for row in rows])
  return ScenarioRun(np.array(gains), np.array(costs), frame)

class Metrics(object):

  def __init__(self, mean_std, var95, cvar95):
    self.mean_std = mean_std
    self.var95 = var95
    self.cvar95 = cvar95

  def value(self, objective):
    return {'MeanStd': self.mean_std, 'VaR95': self.var95, 'CVaR95': self.cvar95}[objective.name]

  def __iter__(self):
    return iter((self.mean_std, self.var95, self.cvar95))

def sample_metrics(gains):
  """Mean-std, VaR95 and CVaR95 of the loss (negated gains)."""
  gains = np.asarray(gains, dtype=float)
  if len(gains) < MIN_SAMPLES:
    raise EvaluationError('Need at least %d samples, got %d' % (MIN_SAMPLES, len(gains)))
  return Metrics(*[sample_risk(gains, objective) for objective in STANDARD_OBJECTIVES])

def hedge_ratio_stats(diagnostics, method='mean', threshold=1e-12):
  """Gamma and vega hedge ratios, one minus post-trade over pre-trade exposure.

  'mean' averages the per-action ratios, skipping actions with no exposure;
  'pooled' takes one minus sum(sign(pre) post) / sum(|pre|)."""
  ratios = []
  for greek in ('gamma', 'vega'):
    pre = np.asarray(diagnostics[greek + '_pre'], dtype=float)
    post = np.asarray(diagnostics[greek + '_post'], dtype=float)
    live = np.abs(pre) > threshold
    if not np.any(live):
      ratios.append(float('nan'))
    elif method == 'mean':
      ratios.append(float(np.mean(1.0 - post[live] / pre[live])))
    elif method == 'pooled':
      ratios.append(float(1.0 - np.sum(np.sign(pre) * post) / np.sum(np.abs(pre))))
    else:
      raise EvaluationError('Unknown hedge ratio method %r' % method)
  return tuple(ratios)

class EvalReport(object):
  """Objective values and hedging statistics of one policy on one scenario set."""

  def __init__(self, name, run, hedge_ratio='mean'):
    self.name = name
    self.run = run
    self.gains = run.gains
    self.metrics = sample_metrics(run.gains)
    self.mean_gain = float(np.mean(run.gains))
    self.std_gain = float(np.std(run.gains, ddof=1))
    self.gamma_ratio, self.vega_ratio = hedge_ratio_stats(run.diagnostics, hedge_ratio)
    self.expected_cost = float(np.mean(run.costs))
    self.target_clips = int(run.diagnostics['target_clipped'].sum())
    if self.target_clips:
      logger.warning('[evaluate] %s: %d hedge targets clipped into the action interval',
                     name, self.target_clips)

  def objective(self, objective):
    return sample_risk(self.gains, Objective.parse(objective))

  def as_row(self):
    return {'policy': self.name, 'MeanStd': self.metrics.mean_std,
            'VaR95': self.metrics.var95, 'CVaR95': self.metrics.cvar95,
            'mean_gain': self.mean_gain, 'std_gain': self.std_gain,
            'gamma_ratio': self.gamma_ratio, 'vega_ratio': self.vega_ratio,
            'expected_cost': self.expected_cost, 'target_clips': self.target_clips}

def evaluate(policy, scenarios, name=None, workers=1, hedge_ratio='mean'):
  name = name or getattr(policy, 'name', 'policy')
  logger.info('[evaluate] %s: %d scenarios, %s', name, scenarios.count, policy.describe())
  return EvalReport(name, run_scenarios(policy, scenarios, workers), hedge_ratio)

def metrics_frame(reports):
  return pd.DataFrame([report.as_row() for report in reports])

def comparison_table(baselines, agents, scenario_sets, workers=1):
  """Objective values per (transaction cost, objective) for baselines and agents.

  baselines maps a column name to a policy; agents maps (kappa, objective
  name) to the agent policy trained for that cell. Every policy of a row group
  runs on the same scenario set."""
  rows = []
  for scenarios in scenario_sets:
    kappa = scenarios.config.kappa
    baseline_reports = dict((column, evaluate(policy, scenarios, column, workers))
                            for column, policy in baselines.items())
    for objective in STANDARD_OBJECTIVES:
      row = {'kappa': kappa, 'hedge_maturity_days': scenarios.config.hedge_maturity_days,
             'objective': objective.name}
      for column, report in baseline_reports.items():
        row[column] = report.metrics.value(objective)
      agent = agents.get((kappa, objective.name))
      if agent is not None:
        report = evaluate(agent, scenarios, 'RL', workers)
        # Without stochastic vol the agent sees no vega, so no vega ratio is reported.
        vega_ratio = float('nan') if scenarios.params.constant_vol else report.vega_ratio
        row.update({'RL': report.metrics.value(objective), 'RL_gamma_ratio': report.gamma_ratio,
                    'RL_vega_ratio': vega_ratio, 'RL_cost': report.expected_cost})
      rows.append(row)
  return pd.DataFrame(rows)

def gain_histogram(gains, bins=50, tail=0.05):
  """Bin counts of the gains and the lower-tail samples for a rug plot."""
  gains = np.asarray(gains, dtype=float)
  if len(gains) == 0:
    raise EvaluationError('No gains to bin')
  counts, edges = np.histogram(gains, bins=bins)
  histogram = pd.DataFrame({'left': edges[:-1], 'right': edges[1:], 'count': counts})
  boundary = -sample_var(-gains, 1.0 - tail)
  rug = pd.DataFrame({'gain': np.sort(gains[gains <= boundary])})
  return histogram, rug, boundary

def frontier(agent_reports, baseline_reports):
  """Risk-return points: each VaR agent at its own percentile, baselines at all of them.

  agent_reports is a list of (objective, EvalReport) with VaR objectives."""
  if not agent_reports:
    raise EvaluationError('No agents for the frontier')
  rows = []
  levels = []
  for objective, report in agent_reports:
    objective = Objective.parse(objective)
    if objective.kind != VAR:
      raise EvaluationError('Frontier agents must minimize VaR, got %s' % objective.name)
    levels.append(objective)
    rows.append({'policy': report.name, 'kind': 'agent', 'objective': objective.name,
                 'risk': report.objective(objective), 'mean_gain': report.mean_gain})
  for name, report in baseline_reports.items():
    for objective in levels:
      rows.append({'policy': name, 'kind': 'baseline', 'objective': objective.name,
                   'risk': report.objective(objective), 'mean_gain': report.mean_gain})
  frame = pd.DataFrame(rows)
  agents = frame[frame['kind'] == 'agent']
  if (agents['mean_gain'] < 0).all():
    logger.info('[frontier] every agent has a negative mean gain: hedging costs are not recovered')
  return frame

def robustness_grid(agents, scenarios, workers=1):
  """Evaluates agents trained under mis-specified parameters on the true market.

  agents is a list of (parameter, value, objective, policy)."""
  rows = []
  for parameter, value, objective, policy in agents:
    objective = Objective.parse(objective)
    report = evaluate(policy, scenarios, '%s=%g' % (parameter, value), workers)
    rows.append({'parameter': parameter, 'value': value, 'objective': objective.name,
                 'objective_value': report.objective(objective),
                 'gamma_ratio': report.gamma_ratio, 'vega_ratio': report.vega_ratio,
                 'expected_cost': report.expected_cost})
  return pd.DataFrame(rows)

def calibrate_risk_limit(scenarios, fraction=0.1, workers=1):
  """A fraction of the largest unhedged dollar gamma seen across the scenarios."""
  from hedgelab.policies import create_policy
  unlimited = scenarios.replace(config=scenarios.config.replace(gamma_limit=None))
  run = run_scenarios(create_policy('delta_only'), unlimited, workers)
  return fraction * float(np.max(np.abs(run.diagnostics['dollar_gamma'])))

def client_premium(params, config):
  """Expected premium earned over the horizon when clients pay kappa over mid."""
  market = MarketState.initial(params, config.initial_spot)
  quote = quote_option(market, params, config.initial_spot, config.client_maturity_days, True)
  option_value = quote.price_per_unit * config.units_per_contract
  return config.kappa * option_value * config.arrival_intensity * config.horizon_days
