from dataclasses import dataclass

import numpy as np

from gesl.errors import EnumerationBudgetError
from gesl.io import write_csv
from gesl.mdp.core import TabularMDP, TabularPolicy, Trajectory, exact_q, ratio_matrix
from gesl.returns.tabular import ReturnConfig, es_cv_return_recursive, es_lambda_return_off

__all__ = ["VarianceReport", "ExactMoments", "variance_recursive", "variance_given_next", "variance_bruteforce"]

_COMPONENTS = ('total', 'one_step', 'value_gap', 'delta', 'future', 'cross_term', 'mean')


@dataclass
class VarianceReport:
    r"""
    Exact variance of the truncated return started from (s, a) at time t of a
    horizon-``H`` episode, i.e. with ``H - t`` remaining lambda-steps.

    Every array has shape (H + 1, S, A). ``total`` equals the sum of the four
    components plus ``cross_term``, which vanishes for control variates when
    the Q-table is ``q_pi``.
    """
    total: np.ndarray
    one_step: np.ndarray
    value_gap: np.ndarray
    delta: np.ndarray
    future: np.ndarray
    cross_term: np.ndarray
    mean: np.ndarray
    control_variate: bool = True

    @property
    def horizon(self):
        return self.total.shape[0] - 1

    def components_sum(self):
        return self.one_step + self.value_gap + self.delta + self.future + self.cross_term

    def rows(self):
        H, S, A = self.total.shape
        for t in range(H):
            for s in range(S):
                for a in range(A):
                    yield [t, s, a] + [float(getattr(self, k)[t, s, a]) for k in _COMPONENTS]

    def to_csv(self, fp):
        return write_csv(fp, ['t', 'state', 'action'] + list(_COMPONENTS), self.rows())


@dataclass
class ExactMoments:
    mean: np.ndarray
    variance: np.ndarray


class _Model:

    def __init__(self, mdp, pi, mu, q, lam):
        if not 0 <= lam <= 1:
            raise ValueError("Invalid lambda: {}".format(lam))
        self.gamma, self.lam = mdp.gamma, lam
        q = np.array(q, dtype=np.float64)
        q[mdp.terminal] = 0
        q_pi = exact_q(mdp, pi)
        self.rho = ratio_matrix(pi, mu)
        self.q = q
        self.q_pi = q_pi
        self.qbar = pi.expected(q)
        self.qbar[mdp.terminal] = 0
        self.v_pi = pi.expected(q_pi)
        self.v_pi[mdp.terminal] = 0
        # joint weights of (s', a') given (s, a)
        self.w = np.einsum('sat,tb->satb', mdp.P, mu.probs)
        self.r = mdp.R


def _moments(w, x):
    """Mean and variance of x(s', a') under w[s, a, s', a'] for every (s, a)."""
    mean = np.einsum('satb,tb->sa', w, x)
    sq = np.einsum('satb,tb->sa', w, x ** 2)
    return mean, np.maximum(sq - mean ** 2, 0)


def _cov(w, x, y):
    mx = np.einsum('satb,tb->sa', w, x)
    my = np.einsum('satb,tb->sa', w, y)
    return np.einsum('satb,satb->sa', w, (x[None, None] - mx[..., None, None]) * (y[None, None] - my[..., None, None]))


def variance_recursive(mdp: TabularMDP, pi: TabularPolicy, mu: TabularPolicy, q, lam, horizon,
                       control_variate=True) -> VarianceReport:
    r"""
    Exact variance of the truncated expected-Sarsa(lambda) return by the law
    of total variance over the next pair (S', A') ~ P(.|s,a) mu(.|S').

    With control variates the return decomposes as::

        gamma Qbar' + gamma lam (v' - Qbar') + gamma lam Delta' + gamma lam rho' (G' - q')

    where ``Delta' = Qbar' - rho' Q' - v' + rho' q'``. Without control variates
    ``Delta' = rho' q' - v'``.
    """
    m = _Model(mdp, pi, mu, q, lam)
    g, lam = m.gamma, m.lam
    S, A = m.r.shape
    H = horizon
    shape = (H + 1, S, A)
    out = {k: np.zeros(shape) for k in _COMPONENTS}

    qbar_next = np.broadcast_to(m.qbar[:, None], (S, A))
    one_step_mean, one_step_var = _moments(m.w, g * qbar_next)
    gap_next = np.broadcast_to((m.v_pi - m.qbar)[:, None], (S, A))
    _, gap_var = _moments(m.w, g * lam * gap_next)
    if control_variate:
        delta_next = qbar_next - m.rho * m.q - m.v_pi[:, None] + m.rho * m.q_pi
    else:
        delta_next = m.rho * m.q_pi - m.v_pi[:, None]
    _, delta_var = _moments(m.w, g * lam * delta_next)

    # depth 0: R + gamma Qbar(S')
    mean = m.r + one_step_mean
    var = one_step_var
    t = H
    out['mean'][t], out['total'][t], out['one_step'][t] = mean, var, var
    for depth in range(1, H + 1):
        t = H - depth
        if control_variate:
            cond_mean = g * m.qbar[:, None] + g * lam * m.rho * (mean - m.q)
        else:
            cond_mean = g * (1 - lam) * m.qbar[:, None] + g * lam * m.rho * mean
        cond_var = (g * lam * m.rho) ** 2 * var
        new_mean, between = _moments(m.w, cond_mean)
        within = np.einsum('satb,tb->sa', m.w, cond_var)
        total = between + within

        y = [g * qbar_next, g * lam * gap_next, g * lam * delta_next, g * lam * m.rho * (mean - m.q_pi)]
        _, future_between = _moments(m.w, y[3])
        cross = np.zeros((S, A))
        for i in range(4):
            for j in range(i + 1, 4):
                cross += 2 * _cov(m.w, y[i], y[j])

        out['mean'][t] = m.r + new_mean
        out['total'][t] = total
        out['one_step'][t] = one_step_var
        out['value_gap'][t] = gap_var
        out['delta'][t] = delta_var
        out['future'][t] = within + future_between
        out['cross_term'][t] = cross
        mean, var = out['mean'][t], total
    return VarianceReport(control_variate=control_variate, **out)


def variance_given_next(mdp: TabularMDP, pi: TabularPolicy, mu: TabularPolicy, q, lam, horizon,
                        control_variate=True):
    r"""
    Variance of the return conditional on a fixed next pair (s', a'), shape
    (H, S, A): only the future term ``(gamma lam rho')^2 Var[G' | s', a']``
    survives. Index ``t`` conditions the step after a start at time ``t``.
    """
    report = variance_recursive(mdp, pi, mu, q, lam, horizon, control_variate)
    rho = ratio_matrix(pi, mu)
    return (mdp.gamma * lam * rho) ** 2 * report.total[1:]


def variance_bruteforce(mdp: TabularMDP, pi: TabularPolicy, mu: TabularPolicy, q, lam, horizon,
                        control_variate=True, budget=10 ** 6) -> ExactMoments:
    """
    Mean and variance of the truncated return by enumerating every path of
    the behavior chain. Exponential in ``horizon``.
    """
    S, A = mdp.n_states, mdp.n_actions
    n_paths = S * (S * A) ** horizon
    if n_paths * S * A * (horizon + 1) > budget:
        raise EnumerationBudgetError("Enumerating %d paths exceeds the budget of %d" % (n_paths, budget))
    config = ReturnConfig(lam, mdp.gamma)
    fn = es_cv_return_recursive if control_variate else es_lambda_return_off
    mean = np.zeros((horizon + 1, S, A))
    var = np.zeros((horizon + 1, S, A))

    for t in range(horizon + 1):
        depth = horizon - t
        for s in range(S):
            for a in range(A):
                if mdp.terminal[s]:
                    continue
                probs, returns = [], []
                for p, traj in _paths(mdp, mu, s, a, depth + 1):
                    probs.append(p)
                    returns.append(fn(traj, q, config, pi, mu)[0])
                probs, returns = np.array(probs), np.array(returns)
                m = probs @ returns
                mean[t, s, a] = m
                var[t, s, a] = probs @ (returns - m) ** 2
    return ExactMoments(mean, var)


def _paths(mdp, mu, s, a, n_steps):
    """Yield (probability, trajectory) for every behavior path of ``n_steps`` transitions."""

    def rec(states, actions, rewards, p):
        s, a = states[-1], actions[-1]
        if len(rewards) == n_steps or mdp.terminal[s]:
            yield p, Trajectory(np.array(states), np.array(actions), np.array(rewards, dtype=np.float64),
                                bool(mdp.terminal[s]))
            return
        for s2 in np.flatnonzero(mdp.P[s, a]):
            p2 = p * mdp.P[s, a, s2]
            last = len(rewards) + 1 == n_steps or mdp.terminal[s2]
            # the action at the cut never enters the return
            choices = [0] if last else np.flatnonzero(mu.probs[s2])
            for a2 in choices:
                pa = 1.0 if last else mu.probs[s2, a2]
                yield from rec(states + [int(s2)], actions + [int(a2)], rewards + [mdp.R[s, a]], p2 * pa)

    yield from rec([s], [a], [], 1.0)
