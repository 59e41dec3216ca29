# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import io

from hedgelab.agent import Agent
from hedgelab.policies import register_policy, Policy, PolicyError

class LearnedPolicy(Policy):
  """The deterministic actor of a trained agent, exploration off."""

  name = 'agent'

  def __init__(self, data):
    if 'agent' in data:
      self.agent = data['agent']
      self.source = data.get('checkpoint')
    elif 'checkpoint' in data:
      with io.open(data['checkpoint'], 'r', encoding='utf-8') as fp:
        self.agent = Agent.from_text(fp.read())
      self.source = data['checkpoint']
    else:
      raise PolicyError('Agent policy needs an agent or a checkpoint')
    if data.get('label'):
      self.name = data['label']

  @property
  def objective(self):
    return self.agent.objective

  def act(self, features, interval):
    if len(features) != self.agent.n_features:
      raise PolicyError('Agent was trained on %d features, environment provides %d'
                        % (self.agent.n_features, len(features)))
    return self.agent.act(features.values)

  def describe(self):
    return {'policy': 'agent', 'checkpoint': self.source, 'objective': self.objective.name}

register_policy('agent', LearnedPolicy)
