# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Distributional deterministic actor-critic with a quantile regression critic.

The critic maps (state, action) to M quantile atoms of the gain distribution,
trained with the quantile Huber loss against one-step Bellman targets from
slowly tracking target networks. The actor maps a state to an action in (0, 1)
and descends a risk functional of the critic's atoms.
"""

import json
import math
import logging
import threading

import numpy as np

from hedgelab import stream
from hedgelab.neural import (NetworkSpec, NetworkParams, NetworkError, SIGMOID, IDENTITY,
                             init_params, forward, backward, optimizer_step,
                             params_to_document, params_from_document)
from hedgelab.risk import Objective, atom_risk, quantile_midpoints

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 'hedgelab-checkpoint'

class AgentError(ValueError):
  """Invalid agent configuration or checkpoint."""
  pass

class DivergenceError(RuntimeError):
  """Training produced non-finite losses too often."""
  pass

class AgentConfig(object):

  def __init__(self, n_atoms=51, huber_k=1.0, gamma_discount=1.0, batch_size=64,
               actor_lr=1e-4, critic_lr=1e-3, soft_update=0.005, noise_start=0.2,
               noise_end=0.02, buffer_capacity=1000000, warmup=1000, total_steps=200000,
               objective='VaR95', reward_scale=10.0, hidden=(64, 64), log_interval=1000,
               eval_interval=10000, max_non_finite=3):
    self.n_atoms = int(n_atoms)
    self.huber_k = float(huber_k)
    self.gamma_discount = float(gamma_discount)
    self.batch_size = int(batch_size)
    self.actor_lr = float(actor_lr)
    self.critic_lr = float(critic_lr)
    self.soft_update = float(soft_update)
    self.noise_start = float(noise_start)
    self.noise_end = float(noise_end)
    self.buffer_capacity = int(buffer_capacity)
    self.warmup = int(warmup)
    self.total_steps = int(total_steps)
    self.objective = Objective.parse(objective)
    self.reward_scale = float(reward_scale)
    self.hidden = tuple(int(h) for h in hidden)
    self.log_interval = int(log_interval)
    self.eval_interval = int(eval_interval)
    self.max_non_finite = int(max_non_finite)

    if self.n_atoms < 2:
      raise AgentError('n_atoms must be at least 2')
    if not self.huber_k > 0:
      raise AgentError('huber_k must be positive')
    if not 0.0 <= self.gamma_discount <= 1.0:
      raise AgentError('gamma_discount must lie in [0, 1]')
    if not (self.actor_lr > 0 and self.critic_lr > 0 and self.reward_scale > 0):
      raise AgentError('Learning rates and reward scale must be positive')
    if not 0.0 < self.soft_update <= 1.0:
      raise AgentError('soft_update must lie in (0, 1]')
    if self.noise_start < 0 or self.noise_end < 0:
      raise AgentError('Exploration noise must be non-negative')
    if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
      raise AgentError('Buffer capacity must hold at least one batch')
    if self.total_steps < 0 or self.warmup < 0:
      raise AgentError('Step counts must be non-negative')
    if not self.hidden:
      raise AgentError('At least one hidden layer is required')

  def as_dict(self):
    return {'n_atoms': self.n_atoms, 'huber_k': self.huber_k,
            'gamma_discount': self.gamma_discount, 'batch_size': self.batch_size,
            'actor_lr': self.actor_lr, 'critic_lr': self.critic_lr,
            'soft_update': self.soft_update, 'noise_start': self.noise_start,
            'noise_end': self.noise_end, 'buffer_capacity': self.buffer_capacity,
            'warmup': self.warmup, 'total_steps': self.total_steps,
            'objective': self.objective.name, 'reward_scale': self.reward_scale,
            'hidden': list(self.hidden), 'log_interval': self.log_interval,
            'eval_interval': self.eval_interval, 'max_non_finite': self.max_non_finite}

  def replace(self, **changes):
    values = self.as_dict()
    values.update(changes)
    return AgentConfig(**values)

class QuantileDistribution(object):
  """M atoms of a distribution at the midpoint levels (2j - 1) / 2M."""

  def __init__(self, atoms):
    self.atoms = np.asarray(atoms, dtype=float)
    if self.atoms.ndim != 1 or len(self.atoms) < 2:
      raise AgentError('A quantile distribution needs at least two atoms')

  @property
  def taus(self):
    return quantile_midpoints(len(self.atoms))

  def sorted(self):
    return np.sort(self.atoms, kind='stable')

  def mean(self):
    return float(self.atoms.mean())

class Transition(object):

  def __init__(self, state, action, reward, next_state, done):
    if not math.isfinite(reward):
      raise AgentError('Non-finite reward %r' % reward)
    self.state = np.asarray(state, dtype=float)
    self.action = float(action)
    self.reward = float(reward)
    self.next_state = np.asarray(next_state, dtype=float)
    self.done = bool(done)

class Batch(object):

  def __init__(self, states, actions, rewards, next_states, dones, indices=None):
    self.states = states
    self.actions = actions
    self.rewards = rewards
    self.next_states = next_states
    self.dones = dones
    self.indices = indices

  def __len__(self):
    return len(self.rewards)

class ReplayBuffer(object):
  """Fixed-capacity ring of transitions with uniform sampling.

  Inserts and samples are serialized by a lock, so concurrent producers see a
  well-defined order."""

  def __init__(self, capacity, n_features):
    self.capacity = int(capacity)
    self.n_features = int(n_features)
    self.inserted = 0
    self._lock = threading.Lock()
    self._allocate(min(self.capacity, 1024))

  def _allocate(self, size):
    old = getattr(self, '_states', None)
    states = np.zeros((size, self.n_features))
    actions = np.zeros(size)
    rewards = np.zeros(size)
    next_states = np.zeros((size, self.n_features))
    dones = np.zeros(size, dtype=bool)
    if old is not None:
      n = len(self)
      states[:n] = self._states[:n]
      actions[:n] = self._actions[:n]
      rewards[:n] = self._rewards[:n]
      next_states[:n] = self._next_states[:n]
      dones[:n] = self._dones[:n]
    self._states, self._actions, self._rewards = states, actions, rewards
    self._next_states, self._dones = next_states, dones

  def __len__(self):
    return min(self.inserted, self.capacity)

  def add(self, transition):
    with self._lock:
      if self.inserted < self.capacity and self.inserted == len(self._rewards):
        self._allocate(min(self.capacity, 2 * len(self._rewards)))
      i = self.inserted % self.capacity
      self._states[i] = transition.state
      self._actions[i] = transition.action
      self._rewards[i] = transition.reward
      self._next_states[i] = transition.next_state
      self._dones[i] = transition.done
      self.inserted += 1

  def sample(self, rng, n):
    with self._lock:
      size = len(self)
      if size == 0:
        raise AgentError('Cannot sample from an empty replay buffer')
      indices = rng.integers(0, size, n)
      return Batch(self._states[indices], self._actions[indices], self._rewards[indices],
                   self._next_states[indices], self._dones[indices], indices)

def huber(u, k):
  a = np.abs(u)
  return np.where(a <= k, 0.5 * u * u, k * (a - 0.5 * k))

def quantile_huber(u, tau, k):
  """Asymmetrically weighted Huber loss |tau - 1{u < 0}| L_k(u)."""
  u = np.asarray(u, dtype=float)
  loss = np.abs(tau - (u < 0)) * huber(u, k)
  return float(loss) if loss.ndim == 0 else loss

def critic_loss(predicted, targets, k):
  """Expected quantile Huber loss of predicted atoms against target atoms.

  predicted is (N, M) and targets (N, M'); returns the batch-mean loss and its
  gradient with respect to the predicted atoms."""
  predicted = np.atleast_2d(np.asarray(predicted, dtype=float))
  targets = np.atleast_2d(np.asarray(targets, dtype=float))
  N, M = predicted.shape
  taus = quantile_midpoints(M)[None, :, None]
  u = targets[:, None, :] - predicted[:, :, None]
  weight = np.abs(taus - (u < 0))
  abs_u = np.abs(u)
  inside = abs_u <= k
  loss = weight * np.where(inside, 0.5 * u * u, k * (abs_u - 0.5 * k))
  dloss_du = weight * np.where(inside, u, k * np.sign(u))
  n_targets = targets.shape[1]
  total = loss.sum(axis=(1, 2)).mean() / n_targets
  grad = -dloss_du.sum(axis=2) / (n_targets * N)
  return float(total), grad

def critic_inputs(states, actions):
  return np.hstack([np.atleast_2d(states), np.reshape(actions, (-1, 1))])

def critic_gradients(critic, states, actions, targets, k):
  """Quantile Huber loss of a critic network and its parameter gradients."""
  atoms, cache = forward(critic, critic_inputs(states, actions))
  loss, grad_atoms = critic_loss(atoms, targets, k)
  grads, _ = backward(critic, cache, grad_atoms)
  return loss, grads

def bellman_targets(batch, target_actor, target_critic, gamma_discount, reward_scale=1.0):
  """One-step targets R + gamma Z'(S', pi'(S')); terminal transitions keep R alone."""
  if len(batch) == 0:
    raise AgentError('Empty batch')
  next_actions, _ = forward(target_actor, batch.next_states)
  next_atoms, _ = forward(target_critic, critic_inputs(batch.next_states, next_actions))
  rewards = (np.asarray(batch.rewards, dtype=float) / reward_scale)[:, None]
  alive = (~np.asarray(batch.dones, dtype=bool))[:, None]
  return rewards + gamma_discount * np.where(alive, next_atoms, 0.0)

def risk_functional(distribution, objective):
  """Loss functional f of a quantile distribution; lower is better."""
  atoms = distribution.atoms if isinstance(distribution, QuantileDistribution) else distribution
  return atom_risk(atoms, Objective.parse(objective))

def actor_update(states, actor, critic, objective, learning_rate):
  """Steps the actor to decrease f(Z(S, pi(S))) averaged over the batch.

  Returns the new actor, the batch-mean f before the step and whether the
  step was applied. The critic is left untouched."""
  states = np.atleast_2d(states)
  N = len(states)
  actions, actor_cache = forward(actor, states)
  atoms, critic_cache = forward(critic, critic_inputs(states, actions))
  f, grad_atoms = atom_risk(atoms, objective, gradient=True)
  _, grad_inputs = backward(critic, critic_cache, grad_atoms / N)
  grads, _ = backward(actor, actor_cache, grad_inputs[:, -1:])
  updated, applied = optimizer_step(actor, grads, learning_rate)
  return updated, float(np.mean(f)), applied

def soft_update(online, target, coefficient):
  """Moves the target parameters towards the online ones."""
  if online.spec != target.spec:
    raise NetworkError('Cannot track %r with %r' % (online.spec, target.spec))
  arrays = [coefficient * o + (1.0 - coefficient) * t for o, t in zip(online.arrays(), target.arrays())]
  return NetworkParams.from_arrays(target.spec, arrays, target.first, target.second, target.step)

def explore(action, noise_scale, rng):
  """Gaussian exploration around the actor output, clipped to [0, 1]."""
  if noise_scale == 0:
    return float(action)
  return float(min(max(action + noise_scale * rng.standard_normal(), 0.0), 1.0))

def noise_schedule(step, total, start, end):
  """Linear annealing of the exploration scale over training."""
  if total <= 1:
    return end
  fraction = min(max(step / float(total - 1), 0.0), 1.0)
  return start + (end - start) * fraction

class Agent(object):
  """Actor, critic and their target copies for one objective."""

  def __init__(self, config, n_features, actor, critic, target_actor, target_critic, meta=None):
    self.config = config
    self.n_features = n_features
    self.actor = actor
    self.critic = critic
    self.target_actor = target_actor
    self.target_critic = target_critic
    self.meta = dict(meta or {})
    self.updates = int(self.meta.get('updates', 0))

  @staticmethod
  def create(config, n_features, rng, meta=None):
    actor_spec = NetworkSpec([n_features] + list(config.hidden) + [1], SIGMOID)
    critic_spec = NetworkSpec([n_features + 1] + list(config.hidden) + [config.n_atoms], IDENTITY)
    actor = init_params(actor_spec, rng)
    critic = init_params(critic_spec, rng)
    return Agent(config, n_features, actor, critic, actor.clone(), critic.clone(), meta)

  @property
  def objective(self):
    return self.config.objective

  def act(self, features):
    """Deterministic action for a state vector."""
    values = np.asarray(features, dtype=float)
    if values.shape != (self.n_features,):
      raise AgentError('Agent expects %d features, got shape %s' % (self.n_features, values.shape))
    action, _ = forward(self.actor, values)
    return float(action[0])

  def distribution(self, features, action):
    """Critic estimate of the gain distribution, in currency."""
    atoms, _ = forward(self.critic, critic_inputs(features, action))
    return QuantileDistribution(atoms[0] * self.config.reward_scale)

  def learn(self, batch):
    """One learner step; returns the critic loss and the actor's mean f."""
    config = self.config
    targets = bellman_targets(batch, self.target_actor, self.target_critic,
                              config.gamma_discount, config.reward_scale)
    loss, grads = critic_gradients(self.critic, batch.states, batch.actions, targets, config.huber_k)
    self.critic, _ = optimizer_step(self.critic, grads, config.critic_lr)
    self.actor, f, _ = actor_update(batch.states, self.actor, self.critic, config.objective,
                                    config.actor_lr)
    self.target_actor = soft_update(self.actor, self.target_actor, config.soft_update)
    self.target_critic = soft_update(self.critic, self.target_critic, config.soft_update)
    self.updates += 1
    return loss, f * config.reward_scale

  def to_document(self):
    meta = dict(self.meta)
    meta.update({'n_features': self.n_features, 'updates': self.updates,
                 'agent': self.config.as_dict()})
    return {'format': CHECKPOINT_FORMAT, 'meta': meta,
            'actor': params_to_document(self.actor),
            'critic': params_to_document(self.critic),
            'target_actor': params_to_document(self.target_actor),
            'target_critic': params_to_document(self.target_critic)}

  def to_text(self):
    return json.dumps(self.to_document(), indent=1, sort_keys=True)

  @staticmethod
  def from_document(document):
    if document.get('format') != CHECKPOINT_FORMAT:
      raise AgentError('Not a checkpoint document')
    meta = document['meta']
    config = AgentConfig(**meta['agent'])
    networks = [params_from_document(document[name])
                for name in ('actor', 'critic', 'target_actor', 'target_critic')]
    if not all(params.is_finite() for params in networks):
      raise AgentError('Checkpoint holds non-finite network parameters')
    return Agent(config, int(meta['n_features']), *networks, meta=meta)

  @staticmethod
  def from_text(text):
    try:
      document = json.loads(text)
    except ValueError as e:
      raise AgentError('Unreadable checkpoint: %s' % e)
    return Agent.from_document(document)

LOG_COLUMNS = ['step', 'critic_loss', 'actor_f', 'eval_objective', 'noise_scale']

def train(env_factory, config, seed, n_features, evaluator=None, meta=None):
  """Trains an agent by interleaving environment steps and learner steps.

  env_factory builds an environment from a random stream, evaluator (optional)
  maps an agent to a held-out objective estimate. Returns the agent and the
  training log rows."""
  agent = Agent.create(config, n_features, stream(seed, 0), meta)
  explore_rng = stream(seed, 2)
  replay_rng = stream(seed, 3)
  buffer = ReplayBuffer(config.buffer_capacity, n_features)
  log = []
  if config.total_steps == 0:
    return agent, log

  state = {'episode': 0}

  def new_episode():
    environment = env_factory(stream(seed, 1, state['episode']))
    state['episode'] += 1
    return environment, environment.reset()

  environment, features = new_episode()

  def collect(noise):
    action = explore(agent.act(features.values), noise, explore_rng)
    outcome = environment.step(action)
    buffer.add(Transition(features.values, action, outcome.reward,
                          outcome.next_features.values, outcome.done))
    return outcome

  for _ in range(max(config.warmup, config.batch_size)):
    outcome = collect(config.noise_start)
    features = outcome.next_features
    if outcome.done:
      environment, features = new_episode()
  logger.info('[train] warmup done, %d transitions in buffer', len(buffer))

  failures = 0
  losses = []
  fs = []
  for step in range(1, config.total_steps + 1):
    noise = noise_schedule(step - 1, config.total_steps, config.noise_start, config.noise_end)
    outcome = collect(noise)
    features = outcome.next_features
    if outcome.done:
      environment, features = new_episode()

    loss, f = agent.learn(buffer.sample(replay_rng, config.batch_size))
    if not math.isfinite(loss):
      failures += 1
      logger.warning('[train] non-finite critic loss at step %d (%d of %d allowed)',
                     step, failures, config.max_non_finite)
      if failures >= config.max_non_finite:
        raise DivergenceError('Critic loss non-finite %d times, last at step %d' % (failures, step))
    else:
      losses.append(loss)
      fs.append(f)

    evaluated = float('nan')
    if evaluator is not None and config.eval_interval > 0 and (
        step % config.eval_interval == 0 or step == config.total_steps):
      evaluated = float(evaluator(agent))
      logger.info('[train] step %d held-out %s = %.4f', step, config.objective.name, evaluated)

    if step % max(config.log_interval, 1) == 0 or step == config.total_steps or math.isfinite(evaluated):
      row = {'step': step,
             'critic_loss': float(np.mean(losses)) if losses else float('nan'),
             'actor_f': float(np.mean(fs)) if fs else float('nan'),
             'eval_objective': evaluated, 'noise_scale': noise}
      log.append(row)
      logger.info('[train] step %d critic loss %.5f actor f %.4f noise %.3f',
                  step, row['critic_loss'], row['actor_f'], noise)
      losses = []
      fs = []
  return agent, log
