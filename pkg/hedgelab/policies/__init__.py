# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import logging

logger = logging.getLogger(__name__)

policies = {}

class PolicyError(ValueError):
  pass

class Policy(object):
  """Maps the state features and the day's action interval to an action in [0, 1]."""

  name = 'policy'
  # Set by act when the policy's own target fell outside the interval.
  target_clipped = False

  def act(self, features, interval):
    return interval.action(0.0)

  def describe(self):
    return {'policy': self.name}

def register_policy(name, definition):
  policies[name] = definition

from . import baselines, learned

def create_policy(data):
  """Builds a policy from a description such as {"policy": "delta_gamma"}."""
  if isinstance(data, str):
    data = {'policy': data}
  if not ("policy" in data):
    raise PolicyError('Policy type not defined')

  name = data['policy']

  if name in policies:
    return policies[name](data)

  raise PolicyError("Policy '%s' not defined, known: %s" % (name, ', '.join(sorted(policies))))
