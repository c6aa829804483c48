from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from gesl.errors import ShapeError, CoverageError, ErgodicityError, NumericalError
from gesl.io import read_yaml, save_yaml

__all__ = [
    "TabularMDP", "TabularPolicy", "Trajectory", "ActionValueTable",
    "build_state_transition", "build_sa_transition", "bootstrap_matrix",
    "exact_q", "state_values", "bellman_apply", "stationary_distribution",
    "sample_trajectory", "ratio_matrix", "importance_ratio", "cumulative_ratio",
    "value_iteration", "load_mdp", "save_mdp",
]

# (n_states, n_actions) array of finite action values
ActionValueTable = np.ndarray

_ATOL = 1e-10


def _sample(cdf, rng):
    i = int(np.searchsorted(cdf, rng.random(), side='right'))
    return min(i, len(cdf) - 1)


def _frozen(x):
    x = np.array(x, dtype=np.float64)
    x.setflags(write=False)
    return x


class TabularMDP:
    r"""
    Finite MDP with transition kernel ``P[s, a, s']`` and expected rewards ``R[s, a]``.

    Terminal states are absorbing with zero reward; every quantity that bootstraps
    from a terminal state uses 0.

    Parameters
    ----------
    transition : array_like
        (S, A, S) transition probabilities. Each ``P[s, a]`` sums to 1.
    reward : array_like
        (S, A) expected rewards. Rewards are deterministic given (s, a).
    gamma : float
        Discount in (0, 1]. ``gamma == 1`` requires at least one terminal state.
    terminal : array_like, optional
        Boolean mask of terminal states.
    initial : array_like, optional
        Start distribution over states. Default: uniform over non-terminal states.
    pair_order : array_like, optional
        (S*A, 2) table of (state, action) giving the canonical order of
        state-action pairs. Default: state-major.
    """

    def __init__(self, transition, reward, gamma, terminal=None, initial=None, pair_order=None, name=None):
        P = np.array(transition, dtype=np.float64)
        R = np.array(reward, dtype=np.float64)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ShapeError("Transition must have shape (S, A, S), got %s" % (P.shape,))
        S, A = P.shape[:2]
        if R.shape != (S, A):
            raise ShapeError("Reward must have shape %s, got %s" % ((S, A), R.shape))
        if (P < 0).any() or not np.allclose(P.sum(-1), 1, atol=_ATOL):
            raise ValueError("Invalid transition kernel: rows must be distributions")
        if not np.isfinite(R).all():
            raise ValueError("Invalid reward: entries must be finite")
        if not 0 < gamma <= 1:
            raise ValueError("Invalid gamma: {}".format(gamma))

        terminal = np.zeros(S, dtype=bool) if terminal is None else np.array(terminal, dtype=bool)
        if terminal.shape != (S,):
            raise ShapeError("Terminal mask must have shape (%d,)" % S)
        if gamma == 1 and not terminal.any():
            raise ValueError("gamma == 1 requires terminal states")
        for s in np.flatnonzero(terminal):
            if not np.allclose(P[s, :, s], 1) or np.any(R[s] != 0):
                raise ValueError("Terminal state %d must be absorbing with zero reward" % s)

        if initial is None:
            initial = (~terminal).astype(np.float64)
        initial = np.array(initial, dtype=np.float64)
        if initial.shape != (S,) or (initial < 0).any() or initial.sum() <= 0:
            raise ValueError("Invalid initial distribution")
        initial = initial / initial.sum()

        if pair_order is None:
            pair_order = [(s, a) for s in range(S) for a in range(A)]
        pair_order = np.array(pair_order, dtype=np.int64)
        if pair_order.shape != (S * A, 2) or len({tuple(p) for p in pair_order}) != S * A:
            raise ShapeError("pair_order must list every (state, action) exactly once")

        self.P = _frozen(P)
        self.R = _frozen(R)
        self.gamma = float(gamma)
        self.terminal = terminal
        self.terminal.setflags(write=False)
        self.initial = _frozen(initial)
        self.pairs = pair_order
        self.pairs.setflags(write=False)
        self.name = name
        self._flat = pair_order[:, 0] * A + pair_order[:, 1]
        self._cdf = np.cumsum(P, axis=-1)
        self._init_cdf = np.cumsum(initial)

    @property
    def n_states(self):
        return self.P.shape[0]

    @property
    def n_actions(self):
        return self.P.shape[1]

    @property
    def n_pairs(self):
        return self.n_states * self.n_actions

    def pair_index(self, s, a):
        return int(np.flatnonzero(self._flat == s * self.n_actions + a)[0])

    def to_pairs(self, table):
        table = np.asarray(table, dtype=np.float64)
        if table.shape != (self.n_states, self.n_actions):
            raise ShapeError("Expected table of shape %s, got %s" % ((self.n_states, self.n_actions), table.shape))
        return table.reshape(-1)[self._flat]

    def from_pairs(self, vec):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.n_pairs,):
            raise ShapeError("Expected vector of length %d, got %s" % (self.n_pairs, vec.shape))
        table = np.empty(self.n_pairs)
        table[self._flat] = vec
        return table.reshape(self.n_states, self.n_actions)

    def reward_vector(self):
        return self.to_pairs(self.R)

    def with_gamma(self, gamma):
        return TabularMDP(self.P, self.R, gamma, self.terminal, self.initial, self.pairs, self.name)

    def reset(self, rng):
        return _sample(self._init_cdf, rng)

    def step(self, s, a, rng):
        s2 = _sample(self._cdf[s, a], rng)
        return self.R[s, a], s2, bool(self.terminal[s2])

    def __repr__(self):
        return "TabularMDP(name=%s, n_states=%d, n_actions=%d, gamma=%s)" % (
            self.name, self.n_states, self.n_actions, self.gamma)


class TabularPolicy:

    def __init__(self, probs):
        probs = np.array(probs, dtype=np.float64)
        if probs.ndim != 2:
            raise ShapeError("Policy must have shape (S, A), got %s" % (probs.shape,))
        if (probs < 0).any() or not np.allclose(probs.sum(-1), 1, atol=_ATOL):
            raise ValueError("Invalid policy: rows must be distributions")
        self.probs = _frozen(probs)
        self._cdf = np.cumsum(probs, axis=-1)

    @property
    def n_states(self):
        return self.probs.shape[0]

    @property
    def n_actions(self):
        return self.probs.shape[1]

    def probs_at(self, s):
        return self.probs[s]

    def sample(self, s, rng):
        return _sample(self._cdf[s], rng)

    def expected(self, q):
        """Per-state expectation of ``q`` under the policy."""
        return np.einsum('sa,sa->s', self.probs, np.asarray(q, dtype=np.float64))

    @classmethod
    def uniform(cls, n_states, n_actions):
        return cls(np.full((n_states, n_actions), 1.0 / n_actions))

    @classmethod
    def greedy(cls, q):
        q = np.asarray(q)
        probs = np.zeros_like(q, dtype=np.float64)
        probs[np.arange(q.shape[0]), q.argmax(-1)] = 1
        return cls(probs)

    @classmethod
    def epsilon_greedy(cls, q, epsilon):
        if not 0 <= epsilon <= 1:
            raise ValueError("Invalid epsilon: {}".format(epsilon))
        q = np.asarray(q)
        greedy = cls.greedy(q).probs
        return cls((1 - epsilon) * greedy + epsilon / q.shape[1])

    def __repr__(self):
        return "TabularPolicy(n_states=%d, n_actions=%d)" % self.probs.shape


@dataclass(frozen=True)
class Trajectory:
    """
    States S_0..S_T, actions A_0..A_T and rewards R_1..R_T.

    ``A_T`` is sampled at the cut so that truncated returns can bootstrap from it.
    ``terminated`` is set when S_T is terminal.
    """
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    terminated: bool = False

    def __post_init__(self):
        if len(self.states) != len(self.actions) or len(self.rewards) != len(self.states) - 1:
            raise ShapeError("Trajectory needs T+1 states and actions and T rewards")

    @property
    def horizon(self):
        return len(self.rewards)

    @property
    def steps(self) -> List[Tuple[int, int, float]]:
        return list(zip(self.states[:-1].tolist(), self.actions[:-1].tolist(), self.rewards.tolist()))


def _check_policy(mdp, policy):
    if policy.probs.shape != (mdp.n_states, mdp.n_actions):
        raise ShapeError("Policy shape %s does not match MDP %s" % (
            policy.probs.shape, (mdp.n_states, mdp.n_actions)))


def build_state_transition(mdp: TabularMDP, policy: TabularPolicy):
    _check_policy(mdp, policy)
    return np.einsum('sa,sat->st', policy.probs, mdp.P)


def build_sa_transition(mdp: TabularMDP, policy: TabularPolicy):
    r"""``P[(s,a), (s',a')] = P(s'|s,a) pi(a'|s')`` in the MDP's pair order."""
    _check_policy(mdp, policy)
    S, A = mdp.n_states, mdp.n_actions
    full = np.einsum('sat,tb->satb', mdp.P, policy.probs).reshape(S * A, S * A)
    idx = mdp._flat
    return full[np.ix_(idx, idx)]


def bootstrap_matrix(mdp: TabularMDP, policy: TabularPolicy):
    """State-action transition with columns of terminal pairs zeroed."""
    P = build_sa_transition(mdp, policy)
    P[:, mdp.terminal[mdp.pairs[:, 0]]] = 0
    return P


def _solve(M, rhs, what):
    if np.linalg.cond(M) > 1e12:
        raise NumericalError("%s: system is singular or ill-conditioned" % what)
    try:
        return np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as e:
        raise NumericalError("%s: %s" % (what, e))


def exact_q(mdp: TabularMDP, policy: TabularPolicy) -> ActionValueTable:
    P = bootstrap_matrix(mdp, policy)
    M = np.eye(mdp.n_pairs) - mdp.gamma * P
    q = _solve(M, mdp.reward_vector(), "exact_q")
    return mdp.from_pairs(q)


def state_values(mdp: TabularMDP, policy: TabularPolicy, q=None):
    q = exact_q(mdp, policy) if q is None else q
    v = policy.expected(q)
    v[mdp.terminal] = 0
    return v


def bellman_apply(mdp: TabularMDP, policy: TabularPolicy, q) -> ActionValueTable:
    P = bootstrap_matrix(mdp, policy)
    qv = mdp.to_pairs(q)
    return mdp.from_pairs(mdp.reward_vector() + mdp.gamma * P @ qv)


def stationary_distribution(mdp: TabularMDP, policy: TabularPolicy, tol=1e-10):
    r"""
    Stationary distribution over state-action pairs (pair order) of the chain
    induced by ``policy``.

    Raises
    ------
    ErgodicityError
        If the distribution is not unique or the linear solve does not satisfy
        the balance equations within ``tol``.
    """
    P = build_sa_transition(mdp, policy)
    n = P.shape[0]
    lhs = np.vstack([(np.eye(n) - P).T, np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1
    xi, _, rank, _ = np.linalg.lstsq(lhs, rhs, rcond=None)
    if rank < n:
        raise ErgodicityError("Stationary distribution under the policy is not unique")
    if np.abs(xi @ P - xi).max() > tol or xi.min() < -tol:
        raise ErgodicityError("Stationary distribution solve did not converge")
    xi = np.clip(xi, 0, None)
    return xi / xi.sum()


def ratio_matrix(pi: TabularPolicy, mu: TabularPolicy):
    """``pi / mu`` per (s, a), zero where both vanish."""
    if pi.probs.shape != mu.probs.shape:
        raise ShapeError("Target and behavior policies differ in shape")
    uncovered = (mu.probs == 0) & (pi.probs > 0)
    if uncovered.any():
        s, a = np.argwhere(uncovered)[0]
        raise CoverageError("Behavior policy never takes action %d in state %d but target does" % (a, s))
    with np.errstate(divide='ignore', invalid='ignore'):
        rho = np.where(mu.probs > 0, pi.probs / np.where(mu.probs > 0, mu.probs, 1), 0.0)
    return rho


def importance_ratio(pi, mu, s, a):
    p, m = pi.probs_at(s)[a], mu.probs_at(s)[a]
    if m == 0:
        if p > 0:
            raise CoverageError("Behavior policy never takes action %d in state %s" % (a, s))
        return 0.0
    return p / m


def cumulative_ratio(pi, mu, trajectory: Trajectory, t, k):
    """Product of ratios over steps t..k inclusive; 1 for an empty range."""
    out = 1.0
    for i in range(t, k + 1):
        out *= importance_ratio(pi, mu, trajectory.states[i], trajectory.actions[i])
    return out


def sample_trajectory(mdp: TabularMDP, policy: TabularPolicy, rng, max_horizon,
                      termination_rule: Optional[Callable[[int, int], bool]] = None,
                      start_state=None, start_action=None) -> Trajectory:
    r"""
    Roll out ``policy`` for at most ``max_horizon`` steps.

    The episode stops when a terminal state is reached, when
    ``termination_rule(state, t)`` fires, or at the horizon.
    """
    _check_policy(mdp, policy)
    s = mdp.reset(rng) if start_state is None else int(start_state)
    a = policy.sample(s, rng) if start_action is None else int(start_action)
    states, actions, rewards = [s], [a], []
    terminated = bool(mdp.terminal[s])
    t = 0
    while not terminated and t < max_horizon:
        r, s, terminated = mdp.step(s, a, rng)
        a = policy.sample(s, rng)
        t += 1
        states.append(s)
        actions.append(a)
        rewards.append(r)
        if termination_rule is not None and termination_rule(s, t):
            break
    return Trajectory(np.array(states, dtype=np.int64), np.array(actions, dtype=np.int64),
                      np.array(rewards, dtype=np.float64), terminated)


def value_iteration(mdp: TabularMDP, tol=1e-10, max_iter=100000):
    """Optimal action values and a greedy optimal policy."""
    v = np.zeros(mdp.n_states)
    for _ in range(max_iter):
        q = mdp.R + mdp.gamma * mdp.P @ v
        q[mdp.terminal] = 0
        v_new = q.max(-1)
        if np.abs(v_new - v).max() < tol:
            v = v_new
            break
        v = v_new
    else:
        raise NumericalError("value_iteration did not converge in %d iterations" % max_iter)
    q = mdp.R + mdp.gamma * mdp.P @ v
    q[mdp.terminal] = 0
    return q, TabularPolicy.greedy(q)


def load_mdp(fp) -> TabularMDP:
    r"""
    Load an MDP from YAML::

        n_states: 2
        n_actions: 2
        gamma: 0.9
        transitions: [[s, a, s', p], ...]
        rewards: [[s, a, r], ...]
        terminal: [states]          # optional
        initial: [probabilities]    # optional
    """
    d = read_yaml(fp)
    S, A = int(d['n_states']), int(d['n_actions'])
    P = np.zeros((S, A, S))
    for s, a, s2, p in d['transitions']:
        P[int(s), int(a), int(s2)] += p
    R = np.zeros((S, A))
    for s, a, r in d.get('rewards', []):
        R[int(s), int(a)] = r
    terminal = np.zeros(S, dtype=bool)
    terminal[[int(s) for s in d.get('terminal', [])]] = True
    return TabularMDP(P, R, d['gamma'], terminal, d.get('initial'), d.get('pair_order'), d.get('name'))


def save_mdp(fp, mdp: TabularMDP):
    S, A = mdp.n_states, mdp.n_actions
    d = {
        'name': mdp.name,
        'n_states': S,
        'n_actions': A,
        'gamma': mdp.gamma,
        'transitions': [[s, a, t, float(mdp.P[s, a, t])]
                        for s in range(S) for a in range(A) for t in range(S) if mdp.P[s, a, t] > 0],
        'rewards': [[s, a, float(mdp.R[s, a])] for s in range(S) for a in range(A) if mdp.R[s, a] != 0],
        'terminal': [int(s) for s in np.flatnonzero(mdp.terminal)],
        'initial': mdp.initial.tolist(),
        'pair_order': mdp.pairs.tolist(),
    }
    save_yaml(fp, d)
