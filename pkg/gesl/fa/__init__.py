from gesl.fa.tiles import TileCodingConfig, tile_code, n_tiles
from gesl.fa.features import FeatureMap, TabularFeatures, TileFeatures, load_features, save_features
from gesl.fa.model import (
    LinearModel, compute_model, mspbe_quadratic, mspbe_projected, psd_solve, saddle_point, projection_matrix,
    td_fixed_point,
)
from gesl.fa.trace import Transition, EligibilityTrace, trace_step, sample_estimates, estimate_model
