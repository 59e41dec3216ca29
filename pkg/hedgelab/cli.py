# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Command line entry point: simulate, train, evaluate, robustness and report."""

import io
import os
import sys
import json
import logging
import argparse

import pandas as pd

from hedgelab import __version__, digest
from hedgelab.agent import Agent, AgentError, DivergenceError, LOG_COLUMNS, train
from hedgelab.config import ExperimentConfig, ConfigError
from hedgelab.environment import HedgingEnvironment, HedgingError, simulate_scenario
from hedgelab.evaluation import (EvaluationError, evaluate, run_scenarios, metrics_frame,
                                 comparison_table, gain_histogram, frontier, robustness_grid,
                                 calibrate_risk_limit, client_premium)
from hedgelab.market import MarketError
from hedgelab.neural import NetworkError
from hedgelab.policies import PolicyError, create_policy
from hedgelab.policies.learned import LearnedPolicy
from hedgelab.reports import Content, create_processor, run_chain
from hedgelab.risk import VAR, sample_risk
from hedgelab.storage import StorageError, create_storage

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

SIMULATION_COLUMNS = ['scenario', 'day', 'spot', 'vol', 'arrivals', 'net_contracts']

BASELINE_COLUMNS = {'delta_only': 'Delta', 'delta_gamma': 'Delta-Gamma', 'delta_vega': 'Delta-Vega'}

ERRORS = (ConfigError, MarketError, HedgingError, NetworkError, AgentError, DivergenceError,
          PolicyError, EvaluationError, StorageError, OSError)

class Outputs(object):
  """The output directory of one command, resolved configuration included."""

  def __init__(self, config, write_config=True):
    self.storage = create_storage(config.output)
    if write_config:
      self.storage.put(config.to_text(), 'config.json')

  def text(self, text, name):
    location = self.storage.put(text, name)
    logger.info('Wrote %s', location or name)

  def frame(self, frame, name):
    self.text(frame.to_csv(index=False, lineterminator='\n'), name)

def configured_baselines(config, params):
  names = config.evaluation['baselines']
  if params.constant_vol:
    names = [name for name in names if name != 'delta_vega']
  return names

def train_agent(config):
  """Trains the agent a configuration describes; returns it with its log rows."""
  params = config.market_params()
  env_config = config.env_config()
  agent_config = config.agent_config()
  validation = config.validation_set(params, env_config)

  def env_factory(rng):
    return HedgingEnvironment(params, env_config, rng)

  def evaluator(agent):
    run = run_scenarios(LearnedPolicy({'agent': agent}), validation)
    return sample_risk(run.gains, agent.objective)

  meta = {'config_digest': config.training_digest(), 'with_vega': env_config.with_vega(params)}
  logger.info('[train] %s, %d features, %d steps', agent_config.objective.name,
              env_config.n_features(params), agent_config.total_steps)
  return train(env_factory, agent_config, config.seed, env_config.n_features(params),
               evaluator, meta)

def cached_agent(config, cache, allow_train=True):
  """Agent for a configuration from the cache, trained and stored when missing."""
  key = config.training_digest()
  path = '%s.json' % key
  if cache.exists(path):
    agent = Agent.from_text(cache.get(path))
    if agent.meta.get('config_digest') != key:
      raise ConfigError('Cached agent %s was trained for another configuration' % path)
    logger.info('[cache] Using agent %s', path)
    return agent
  if not allow_train:
    raise ConfigError('No cached agent %s and training is disabled' % path)
  agent, _ = train_agent(config)
  cache.put(agent.to_text(), path)
  return agent

def load_checkpoint(path, params, env_config):
  policy = LearnedPolicy({'checkpoint': path})
  expected = env_config.n_features(params)
  if policy.agent.n_features != expected:
    raise ConfigError('Checkpoint %s was trained on %d features, configuration provides %d'
                      % (path, policy.agent.n_features, expected))
  with_vega = policy.agent.meta.get('with_vega')
  if with_vega is not None and bool(with_vega) != env_config.with_vega(params):
    raise ConfigError('Checkpoint %s and configuration disagree on vega features' % path)
  return policy

def tagged(frame, policy):
  frame = frame.copy()
  frame.insert(0, 'policy', policy)
  return frame

def do_simulate(config, args):
  params = config.market_params()
  env_config = config.env_config()
  scenarios = config.scenario_set(params, env_config)
  rows = []
  for index in range(scenarios.count):
    for row in simulate_scenario(params, env_config, scenarios.rng(index)):
      row['scenario'] = index
      rows.append(row)
  Outputs(config).frame(pd.DataFrame(rows, columns=SIMULATION_COLUMNS), 'paths.csv')

def do_train(config, args):
  outputs = Outputs(config)
  agent, log = train_agent(config)
  outputs.frame(pd.DataFrame(log, columns=LOG_COLUMNS), 'train_log.csv')
  outputs.text(agent.to_text(), 'checkpoint.json')

def do_evaluate(config, args):
  params = config.market_params()
  env_config = config.env_config()
  scenarios = config.scenario_set(params, env_config)
  evaluation = config.evaluation
  workers = evaluation['workers']
  method = evaluation['hedge_ratio']

  baseline_names = []
  for name in args.baseline or []:
    baseline_names.extend(configured_baselines(config, params) if name == 'all' else [name])
  agents = [load_checkpoint(path, params, env_config) for path in args.checkpoint or []]
  if not baseline_names and not agents:
    raise ConfigError('Nothing to evaluate, give --baseline or --checkpoint')

  outputs = Outputs(config)
  named = [(name, create_policy(name)) for name in baseline_names]
  for index, policy in enumerate(agents):
    named.append(('agent%d-%s' % (index, policy.objective.name), policy))

  reports = [evaluate(policy, scenarios, name, workers, method) for name, policy in named]
  outputs.frame(metrics_frame(reports), 'metrics.csv')

  histograms = []
  rugs = []
  diagnostics = []
  for report in reports:
    histogram, rug, boundary = gain_histogram(report.gains, evaluation['histogram_bins'])
    histograms.append(tagged(histogram, report.name))
    rug = tagged(rug, report.name)
    rug['boundary'] = boundary
    rugs.append(rug)
    diagnostics.append(tagged(report.run.diagnostics, report.name))
  outputs.frame(pd.concat(histograms, ignore_index=True), 'histogram.csv')
  outputs.frame(pd.concat(rugs, ignore_index=True), 'rug.csv')
  outputs.frame(pd.concat(diagnostics, ignore_index=True), 'diagnostics.csv')

  keyed = dict(((env_config.kappa, policy.objective.name), policy) for policy in agents)
  baselines = dict((BASELINE_COLUMNS.get(name, name), create_policy(name))
                   for name in configured_baselines(config, params))
  if 'all' in (args.baseline or []):
    kappas = sorted(set(evaluation['kappas']) | set([env_config.kappa]))
  elif agents:
    kappas = [env_config.kappa]
  else:
    kappas = []
  if kappas:
    sets = [scenarios.replace(config=env_config.replace(kappa=kappa)) for kappa in kappas]
    outputs.frame(comparison_table(baselines, keyed, sets, workers), 'table.csv')

  if agents:
    premium = client_premium(params, env_config)
    rows = [{'policy': report.name, 'expected_cost': report.expected_cost,
             'client_premium': premium, 'feasible': report.expected_cost < premium}
            for report in reports[len(baseline_names):]]
    outputs.frame(pd.DataFrame(rows), 'economics.csv')

  var_agents = [(policy.objective, report) for policy, report
                in zip(agents, reports[len(baseline_names):]) if policy.objective.kind == VAR]
  if len(var_agents) > 1:
    baseline_reports = dict((report.name, report) for report in reports[:len(baseline_names)])
    outputs.frame(frontier(var_agents, baseline_reports), 'frontier.csv')

  risk_limit = evaluation['risk_limit']
  if risk_limit is not None:
    if risk_limit == 'auto':
      risk_limit = calibrate_risk_limit(scenarios, evaluation['risk_limit_fraction'], workers)
    logger.info('[evaluate] dollar gamma limit %.4f', risk_limit)
    gated = scenarios.replace(config=env_config.replace(gamma_limit=risk_limit))
    limited = {'Delta-Gamma': create_policy({'policy': 'delta_gamma', 'risk_limit': risk_limit})}
    keyed = dict(((gated.config.kappa, policy.objective.name), policy) for policy in agents)
    table = comparison_table(limited, keyed, [gated], workers)
    table.insert(0, 'risk_limit', risk_limit)
    outputs.frame(table, 'risk_limit.csv')

def do_robustness(config, args):
  true_params = config.market_params()
  env_config = config.env_config()
  scenarios = config.scenario_set(true_params, env_config)
  robustness = config.robustness
  outputs = Outputs(config)
  cache = create_storage(robustness['cache'] or os.path.join(config.output, 'cache'))
  with_vega = env_config.with_vega(true_params)

  cells = []
  for parameter in sorted(robustness['grids']):
    for value in robustness['grids'][parameter]:
      for objective in robustness['objectives']:
        cell = (config.with_section('market', **{parameter: value})
                .with_section('environment', vega_features=with_vega)
                .with_section('agent', objective=objective))
        agent = cached_agent(cell, cache, robustness['train'])
        label = '%s=%g %s' % (parameter, value, objective)
        cells.append((parameter, value, objective, LearnedPolicy({'agent': agent, 'label': label})))
  outputs.frame(robustness_grid(cells, scenarios, config.evaluation['workers']), 'robustness.csv')

def do_report(config, args):
  outputs = Outputs(config, write_config=False)
  storage = outputs.storage
  tables = []
  for name in storage.list('.csv'):
    frame = pd.read_csv(io.StringIO(storage.get(name)))
    status = storage.stat(name)
    tables.append({'name': name, 'columns': list(frame.columns),
                   'size': status.size, 'digest': status.digest,
                   'rows': frame.head(args.rows).values.tolist(),
                   'truncated': max(len(frame) - args.rows, 0)})
  meta = {'title': config.report['title'], 'tables': tables}
  resolved = storage.get('config.json')
  if resolved is not None:
    resolved = json.loads(resolved)
    meta.update({'digest': digest(resolved), 'seed': resolved.get('seed')})

  chain = [create_processor({'processor': 'jinja2', 'template': config.report['template']})]
  summary = run_chain(chain, Content('report', metadata=meta), {'version': __version__})
  outputs.text(summary.get_text(), 'report.md')
  if config.report['html']:
    html = run_chain([create_processor({'processor': 'markdown'})], summary, {})
    outputs.text(html.get_text(), 'report.html')

COMMANDS = {'simulate': do_simulate, 'train': do_train, 'evaluate': do_evaluate,
            'robustness': do_robustness, 'report': do_report}

def build_parser():
  parser = argparse.ArgumentParser(prog='hedgelab',
                                   description='Option book hedging experiments')
  parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
  common = argparse.ArgumentParser(add_help=False)
  common.add_argument('--config', help='JSON experiment configuration')
  common.add_argument('--seed', type=int, help='Override the master seed')
  common.add_argument('--out', help='Output directory')
  common.add_argument('--workers', type=int, help='Worker processes for evaluation')
  common.add_argument('-v', '--verbose', action='store_true', help='Debug logging')

  commands = parser.add_subparsers(dest='command')
  commands.required = True
  commands.add_parser('simulate', parents=[common], help='Export simulated market paths and arrivals')
  commands.add_parser('train', parents=[common], help='Train an agent and write its checkpoint')
  evaluate_parser = commands.add_parser('evaluate', parents=[common],
                                        help='Evaluate baselines and agents on the test scenarios')
  evaluate_parser.add_argument('--baseline', action='append',
                               help='delta_only, delta_gamma, delta_vega or all (repeatable)')
  evaluate_parser.add_argument('--checkpoint', action='append', help='Agent checkpoint (repeatable)')
  commands.add_parser('robustness', parents=[common],
                      help='Train under mis-specified parameters, evaluate under the true ones')
  report_parser = commands.add_parser('report', parents=[common],
                                      help='Render the CSV outputs as a summary')
  report_parser.add_argument('--rows', type=int, default=50, help='Rows shown per table')
  return parser

def main(argv=None):
  parser = build_parser()
  args = parser.parse_args(argv)
  logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)

  try:
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    config = config.override(seed=args.seed, output=args.out, workers=args.workers)
    COMMANDS[args.command](config, args)
  except ERRORS as e:
    logger.error('%s', e)
    return 1
  return 0

if __name__ == '__main__':
  sys.exit(main())
