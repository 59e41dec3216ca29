# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Fully connected rectifier networks with hand-written reverse mode and Adam.

Inputs are rows: a batch is an array of shape (batch, inputs) and a single
input is a vector. Weights are stored (inputs, outputs) so a layer computes
x W + b.
"""

import logging

import numpy as np
from scipy.special import expit

logger = logging.getLogger(__name__)

IDENTITY = 'identity'
SIGMOID = 'sigmoid'

# Bounded outputs are kept strictly inside (0, 1).
_BOUND = 1e-12

class NetworkError(ValueError):
  """Shape or content mismatch between a network and its inputs."""
  pass

class NetworkSpec(object):
  """Layer widths from input to output and the output activation."""

  def __init__(self, widths, output=IDENTITY):
    widths = [int(w) for w in widths]
    if len(widths) < 3:
      raise NetworkError('A network needs at least one hidden layer: %r' % widths)
    if min(widths) < 1:
      raise NetworkError('Layer widths must be positive: %r' % widths)
    if output not in (IDENTITY, SIGMOID):
      raise NetworkError('Unknown output activation %r' % output)
    self.widths = widths
    self.output = output

  @property
  def inputs(self):
    return self.widths[0]

  @property
  def outputs(self):
    return self.widths[-1]

  def as_dict(self):
    return {'widths': list(self.widths), 'output': self.output}

  def __eq__(self, other):
    return isinstance(other, NetworkSpec) and self.as_dict() == other.as_dict()

  def __ne__(self, other):
    return not self == other

  def __repr__(self):
    return 'NetworkSpec(%s, %s)' % ('-'.join(str(w) for w in self.widths), self.output)

class NetworkParams(object):
  """Weights, biases and Adam moments of a network."""

  def __init__(self, spec, weights, biases, first=None, second=None, step=0):
    self.spec = spec
    self.weights = weights
    self.biases = biases
    self.first = first if first is not None else [np.zeros_like(a) for a in self.arrays()]
    self.second = second if second is not None else [np.zeros_like(a) for a in self.arrays()]
    self.step = step
    self._check()

  def _check(self):
    widths = self.spec.widths
    if len(self.weights) != len(widths) - 1 or len(self.biases) != len(widths) - 1:
      raise NetworkError('Layer count does not match %r' % self.spec)
    for i, (W, b) in enumerate(zip(self.weights, self.biases)):
      if W.shape != (widths[i], widths[i + 1]) or b.shape != (widths[i + 1],):
        raise NetworkError('Layer %d has shapes %s, %s for %r' % (i, W.shape, b.shape, self.spec))

  def names(self):
    names = []
    for i in range(len(self.weights)):
      names.extend(['W%d' % i, 'b%d' % i])
    return names

  def arrays(self):
    arrays = []
    for W, b in zip(self.weights, self.biases):
      arrays.extend([W, b])
    return arrays

  @staticmethod
  def from_arrays(spec, arrays, first=None, second=None, step=0):
    return NetworkParams(spec, list(arrays[0::2]), list(arrays[1::2]), first, second, step)

  def clone(self):
    return NetworkParams(self.spec, [W.copy() for W in self.weights], [b.copy() for b in self.biases],
                         [m.copy() for m in self.first], [v.copy() for v in self.second], self.step)

  def is_finite(self):
    return all(np.all(np.isfinite(a)) for a in self.arrays())

def init_params(spec, rng):
  """Fan-in scaled normal weights, zero biases."""
  weights = []
  biases = []
  for fan_in, fan_out in zip(spec.widths[:-1], spec.widths[1:]):
    weights.append(rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in))
    biases.append(np.zeros(fan_out))
  return NetworkParams(spec, weights, biases)

def forward(params, x):
  """Evaluates the network; returns the output and the cache for backward."""
  x = np.asarray(x, dtype=float)
  single = x.ndim == 1
  if single:
    x = x[None, :]
  if x.ndim != 2 or x.shape[1] != params.spec.inputs:
    raise NetworkError('Input of shape %s for %r' % (x.shape, params.spec))

  inputs = []
  activation = x
  last = len(params.weights) - 1
  for i, (W, b) in enumerate(zip(params.weights, params.biases)):
    inputs.append(activation)
    z = activation.dot(W) + b
    if i < last:
      activation = np.maximum(z, 0.0)
    elif params.spec.output == SIGMOID:
      activation = np.clip(expit(z), _BOUND, 1.0 - _BOUND)
    else:
      activation = z
  cache = (inputs, activation, single)
  if single:
    return activation[0], cache
  return activation, cache

def backward(params, cache, grad_output):
  """Reverse mode through the cached forward pass.

  Returns the parameter gradients (in `arrays()` order, summed over the batch)
  and the gradient with respect to the input."""
  inputs, output, single = cache
  grad = np.asarray(grad_output, dtype=float)
  if single:
    grad = grad[None, :]
  if grad.shape != output.shape:
    raise NetworkError('Output gradient of shape %s, expected %s' % (grad.shape, output.shape))

  if params.spec.output == SIGMOID:
    grad = grad * output * (1.0 - output)

  grads = [None] * (2 * len(params.weights))
  for i in range(len(params.weights) - 1, -1, -1):
    x = inputs[i]
    grads[2 * i] = x.T.dot(grad)
    grads[2 * i + 1] = grad.sum(axis=0)
    grad = grad.dot(params.weights[i].T)
    if i > 0:
      grad = grad * (x > 0)
  if single:
    grad = grad[0]
  return grads, grad

def optimizer_step(params, grads, learning_rate, beta1=0.9, beta2=0.999, epsilon=1e-8):
  """One bias-corrected Adam descent step.

  Returns the updated parameters and whether the step was applied; steps with
  non-finite gradients are skipped."""
  if not all(np.all(np.isfinite(g)) for g in grads):
    logger.warning('Non-finite gradient, optimizer step skipped')
    return params, False

  step = params.step + 1
  arrays = []
  first = []
  second = []
  correction1 = 1.0 - beta1 ** step
  correction2 = 1.0 - beta2 ** step
  for a, g, m, v in zip(params.arrays(), grads, params.first, params.second):
    m = beta1 * m + (1.0 - beta1) * g
    v = beta2 * v + (1.0 - beta2) * g * g
    arrays.append(a - learning_rate * (m / correction1) / (np.sqrt(v / correction2) + epsilon))
    first.append(m)
    second.append(v)
  return NetworkParams.from_arrays(params.spec, arrays, first, second, step), True

def params_to_document(params):
  """Named arrays with explicit shapes; floats survive a JSON round trip exactly."""
  def pack(array):
    return {'shape': list(array.shape), 'values': [float(x) for x in array.ravel()]}
  names = params.names()
  return {'spec': params.spec.as_dict(), 'step': params.step,
          'arrays': dict((n, pack(a)) for n, a in zip(names, params.arrays())),
          'first': dict((n, pack(a)) for n, a in zip(names, params.first)),
          'second': dict((n, pack(a)) for n, a in zip(names, params.second))}

def params_from_document(document):
  spec = NetworkSpec(document['spec']['widths'], document['spec']['output'])
  names = []
  for i in range(len(spec.widths) - 1):
    names.extend(['W%d' % i, 'b%d' % i])

  def unpack(section):
    arrays = []
    for name in names:
      if name not in section:
        raise NetworkError('Missing array %s' % name)
      entry = section[name]
      values = np.array(entry['values'], dtype=float)
      arrays.append(values.reshape(entry['shape']))
    return arrays

  return NetworkParams.from_arrays(spec, unpack(document['arrays']), unpack(document['first']),
                                   unpack(document['second']), int(document['step']))
