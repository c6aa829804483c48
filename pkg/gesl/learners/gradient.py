import torch

from gesl.learners.base import Learner, StepSizes, RunRecord, register_learner
from gesl.train.trainer import PolicyEvaluationTrainer

__all__ = ["GradientExpectedSarsa", "NaiveExpectedSarsa", "ges_step", "naive_step", "run_ges", "run_naive"]


@register_learner('ges')
class GradientExpectedSarsa(Learner):
    r"""
    Gradient Expected-Sarsa(lambda): stochastic descent-ascent on

        Psi(theta, omega) = theta^T A^T omega + b^T omega - 0.5 omega^T M omega

    with the single-sample estimates ``A_t = e_t (gamma E phi' - phi)^T``,
    ``b_t = R e_t`` and ``M_t = phi phi^T``. Both players move simultaneously::

        theta <- theta - alpha_t A_t^T omega
        omega <- omega + beta_t (A_t theta + b_t - M_t omega)
    """
    uses_omega = True

    def direction(self, transition):
        phi, ephi, rho = self.features(transition)
        e = self.state.trace.step(rho, phi, self.lam, self.gamma)
        with torch.no_grad():
            theta, omega = self.theta, self.omega
            d = self.gamma * ephi - phi
            delta = transition.reward + d @ theta
            self.theta.grad = d * (e @ omega)
            self.omega.grad = phi * (phi @ omega) - e * delta


@register_learner('naive')
class NaiveExpectedSarsa(Learner):
    r"""
    Semi-gradient Expected-Sarsa(lambda): ``theta <- theta + alpha delta_t e_t``.
    May diverge off-policy.
    """

    def direction(self, transition):
        phi, ephi, rho = self.features(transition)
        e = self.state.trace.step(rho, phi, self.lam, self.gamma)
        with torch.no_grad():
            delta = transition.reward + (self.gamma * ephi - phi) @ self.theta
            self.theta.grad = -delta * e


def ges_step(learner: GradientExpectedSarsa, transition):
    return learner.step(transition)


def naive_step(learner: NaiveExpectedSarsa, transition):
    return learner.step(transition)


def _run(cls, env, pi, mu, feature_map, lam, step_sizes, n_episodes, rng, episode_length=100,
         gamma=None, theta0=None, omega0=None, metrics=None, keep_iterates=False, verbose=False,
         divergence_threshold=1e8):
    gamma = env.gamma if gamma is None else gamma
    learner = cls(feature_map, pi, mu, lam, gamma, step_sizes, theta0, omega0,
                  divergence_threshold=divergence_threshold, keep_iterates=keep_iterates)
    trainer = PolicyEvaluationTrainer(learner, metrics, verbose=verbose)
    return trainer.fit(env, rng, n_episodes, episode_length)


def run_ges(env, pi, mu, feature_map, lam, step_sizes: StepSizes, n_episodes, rng, **kwargs) -> RunRecord:
    """Run Gradient Expected-Sarsa(lambda) for ``n_episodes`` behavior episodes."""
    return _run(GradientExpectedSarsa, env, pi, mu, feature_map, lam, step_sizes, n_episodes, rng, **kwargs)


def run_naive(env, pi, mu, feature_map, lam, step_sizes: StepSizes, n_episodes, rng, **kwargs) -> RunRecord:
    return _run(NaiveExpectedSarsa, env, pi, mu, feature_map, lam, step_sizes, n_episodes, rng, **kwargs)
