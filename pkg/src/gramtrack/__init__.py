"""gramtrack: diversity-maximizing template memory for template-matching
trackers.

The long-term memory keeps the templates whose Gram determinant (the
squared volume they span in feature space) is maximal, guarded by a
similarity lower bound against drift; a short-term FIFO bridges abrupt
appearance changes; modulation and a short/long-term switch combine the
per-template activation maps into one prediction per frame.
"""

from .boxes import BoundingBox, center_distance, iou
from .config import TrackerConfig
from .errors import (ConfigError, DegenerateInputError, DimensionError,
                     ExperimentError, FormatError, GramtrackError,
                     IngestionError, NumericConsistencyError, ParameterError)
from .features import (ActivationMap, apply_mask, as_feature_tensor,
                       batch_cross_correlate, cross_correlate, inner_product,
                       l2_normalize, tapered_cosine_window,
                       tapered_cosine_window_1d)
from .fts import read_feature_file, write_feature_file
from .gram import (build_gram, determinant, normalized_determinant,
                   parallelotope_volume, substitute_and_det)
from .inference import (FramePrediction, best_prediction, modulate,
                        shift_nonnegative, st_lt_switch, track_step)
from .matcher import (NccEncoder, PrecomputedEncoder, TrackState,
                      crop_and_resize, locate_peak, track_init)
from .memory import (Decision, DecisionKind, LongTermMemory, LowerBoundConfig,
                     ShortTermMemory, Template, load_memory_snapshot,
                     lower_bound_check, save_memory_snapshot, should_consider)

__version__ = "0.1.0"
