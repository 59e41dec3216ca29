# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Risk measures of gain distributions, as losses (lower is better).

A distribution is either a set of quantile atoms at fixed midpoint levels (the
critic's representation) or a vector of simulated gains. Both use the same
estimator for percentiles: linear interpolation between order statistics
placed at known plotting positions.
"""

import re

import numpy as np

MEAN_STD = 'mean_std'
VAR = 'var'
CVAR = 'cvar'

class Objective(object):
  """A risk objective: mean plus c standard deviations, VaR or CVaR at level p."""

  def __init__(self, kind, level=None):
    if kind not in (MEAN_STD, VAR, CVAR):
      raise ValueError('Unknown objective %r' % kind)
    if level is None:
      level = 1.645 if kind == MEAN_STD else 0.95
    level = float(level)
    if kind == MEAN_STD and not level >= 0:
      raise ValueError('Standard deviation multiplier must be non-negative')
    if kind != MEAN_STD and not 0.0 < level < 1.0:
      raise ValueError('Confidence level must lie in (0, 1), got %r' % level)
    self.kind = kind
    self.level = level

  @property
  def tail(self):
    """Probability mass of the loss tail, 1 - p."""
    return 1.0 - self.level

  @property
  def name(self):
    if self.kind == MEAN_STD:
      return 'MeanStd' if self.level == 1.645 else 'MeanStd%g' % self.level
    label = 'VaR' if self.kind == VAR else 'CVaR'
    return '%s%g' % (label, round(self.level * 100, 6))

  @staticmethod
  def parse(name):
    """Objective from its report name: MeanStd, VaR95, CVaR95, VaR90, ..."""
    if isinstance(name, Objective):
      return name
    m = re.match(r'^(MeanStd|VaR|CVaR)([0-9.]*)$', name)
    if not m:
      raise ValueError('Unknown objective %r' % name)
    kind = {'MeanStd': MEAN_STD, 'VaR': VAR, 'CVaR': CVAR}[m.group(1)]
    if not m.group(2):
      return Objective(kind)
    value = float(m.group(2))
    return Objective(kind, value if kind == MEAN_STD else value / 100.0)

  def __eq__(self, other):
    return isinstance(other, Objective) and (self.kind, self.level) == (other.kind, other.level)

  def __ne__(self, other):
    return not self == other

  def __hash__(self):
    return hash((self.kind, self.level))

  def __repr__(self):
    return 'Objective(%s)' % self.name

STANDARD_OBJECTIVES = (Objective(MEAN_STD), Objective(VAR), Objective(CVAR))

def quantile_midpoints(M):
  """Quantile levels tau_j = (2j - 1) / 2M of M atoms."""
  return (2.0 * np.arange(1, M + 1) - 1.0) / (2.0 * M)

def sample_positions(n):
  """Plotting positions of n order statistics, 0 to 1."""
  if n == 1:
    return np.zeros(1)
  return np.arange(n) / float(n - 1)

def interpolation_weights(level, positions):
  """Weights on the sorted values that interpolate the level-quantile."""
  weights = np.zeros(len(positions))
  if level <= positions[0]:
    weights[0] = 1.0
  elif level >= positions[-1]:
    weights[-1] = 1.0
  else:
    k = int(np.searchsorted(positions, level, side='right')) - 1
    t = (level - positions[k]) / (positions[k + 1] - positions[k])
    weights[k] = 1.0 - t
    weights[k + 1] = t
  return weights

def interpolated_quantile(sorted_values, level, positions):
  return float(np.dot(interpolation_weights(level, positions), sorted_values))

def tail_weights(tail, M):
  """Weights averaging the lowest `tail` mass of M equally likely atoms.

  Atoms fully inside the tail weigh 1/(tail M), the boundary atom takes the
  fractional remainder."""
  mass = tail * M
  full = min(int(np.floor(mass)), M)
  weights = np.zeros(M)
  weights[:full] = 1.0
  if full < M:
    weights[full] = mass - full
  return weights / mass

def atom_weights(objective, M):
  """Linear weights on sorted atoms for VaR and CVaR objectives."""
  if objective.kind == VAR:
    return -interpolation_weights(objective.tail, quantile_midpoints(M))
  if objective.kind == CVAR:
    return -tail_weights(objective.tail, M)
  raise ValueError('Mean-std objective is not linear in the atoms')

def atom_risk(atoms, objective, gradient=False):
  """Loss functional of quantile atoms, rows of a (N, M) array or one vector.

  With gradient=True also returns df/datoms in the original atom order."""
  atoms = np.asarray(atoms, dtype=float)
  single = atoms.ndim == 1
  atoms = np.atleast_2d(atoms)
  N, M = atoms.shape

  if objective.kind == MEAN_STD:
    mean = atoms.mean(axis=1)
    centered = atoms - mean[:, None]
    std = np.sqrt((centered * centered).mean(axis=1))
    f = -mean + objective.level * std
    if gradient:
      safe = np.where(std > 0, std, 1.0)
      grad = -1.0 / M + objective.level * np.where(std[:, None] > 0, centered / (M * safe[:, None]), 0.0)
  else:
    order = np.argsort(atoms, axis=1, kind='stable')
    ordered = np.take_along_axis(atoms, order, axis=1)
    weights = atom_weights(objective, M)
    f = ordered.dot(weights)
    if gradient:
      grad = np.empty_like(atoms)
      np.put_along_axis(grad, order, np.broadcast_to(weights, atoms.shape), axis=1)

  if single:
    f = float(f[0])
    if gradient:
      grad = grad[0]
  if gradient:
    return f, grad
  return f

def sample_var(losses, level):
  losses = np.sort(np.asarray(losses, dtype=float))
  return interpolated_quantile(losses, level, sample_positions(len(losses)))

def sample_cvar(losses, level):
  """Expected loss beyond the level-percentile, boundary mass included."""
  losses = np.asarray(losses, dtype=float)
  var = sample_var(losses, level)
  return var + np.maximum(losses - var, 0.0).mean() / (1.0 - level)

def sample_risk(gains, objective):
  """Loss functional estimated from simulated gains."""
  losses = -np.asarray(gains, dtype=float)
  if objective.kind == MEAN_STD:
    return float(losses.mean() + objective.level * losses.std(ddof=1))
  if objective.kind == VAR:
    return sample_var(losses, objective.level)
  return float(sample_cvar(losses, objective.level))
