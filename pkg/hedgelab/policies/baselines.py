# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import logging

from hedgelab.environment import risk_limit_gate
from hedgelab.policies import register_policy, Policy, PolicyError

logger = logging.getLogger(__name__)

DELTA_ONLY = 'delta_only'
DELTA_GAMMA = 'delta_gamma'
DELTA_VEGA = 'delta_vega'

KINDS = (DELTA_ONLY, DELTA_GAMMA, DELTA_VEGA)

def baseline_action(features, interval, kind, risk_limit=None):
  """Action of a rule-based hedger and whether its target had to be clipped.

  delta_only never trades the hedge option, delta_gamma neutralizes gamma and
  delta_vega neutralizes vega. With a risk limit the trade happens only when
  the dollar gamma exceeds it."""
  if kind == DELTA_ONLY:
    H = 0.0
  elif kind == DELTA_GAMMA:
    H = interval.gamma_target
  elif kind == DELTA_VEGA:
    if interval.vega_target is None:
      raise PolicyError('delta_vega hedging needs stochastic volatility')
    H = interval.vega_target
  else:
    raise PolicyError('Unknown baseline %r' % kind)

  if risk_limit is not None and not risk_limit_gate(interval.dollar_gamma, risk_limit):
    H = 0.0

  clipped = not interval.contains(H)
  if clipped:
    target = H
    H = min(max(H, interval.lo), interval.hi)
    logger.debug('%s target %g outside %r, clipped to %g', kind, target, interval, H)
  return interval.action(H), clipped

class BaselinePolicy(Policy):

  def __init__(self, data):
    kind = data['policy']
    if kind == 'delta':
      kind = DELTA_ONLY
    if kind not in KINDS:
      raise PolicyError('Unknown baseline %r' % kind)
    self.name = kind
    self.kind = kind
    self.risk_limit = data.get('risk_limit')
    if self.risk_limit is not None:
      self.risk_limit = float(self.risk_limit)

  def act(self, features, interval):
    a, self.target_clipped = baseline_action(features, interval, self.kind, self.risk_limit)
    return a

  def describe(self):
    description = {'policy': self.kind}
    if self.risk_limit is not None:
      description['risk_limit'] = self.risk_limit
    return description

for name in KINDS + ('delta',):
  register_policy(name, BaselinePolicy)
