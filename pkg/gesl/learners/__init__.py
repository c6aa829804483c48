from gesl.learners.base import StepSizes, LearnerState, RunRecord, EpisodeStats, Learner, register_learner, get_learner, LEARNERS
from gesl.learners.gradient import GradientExpectedSarsa, NaiveExpectedSarsa, ges_step, naive_step, run_ges, run_naive
from gesl.learners.tabular import TabularRunResult, tabular_escv_learn, tabular_es_learn
from gesl.learners.control import (
    epsilon_schedule, ControlResult, q_learning_control, LinearGreedyPolicy, sarsa_control_fa, rollout_lengths,
)
