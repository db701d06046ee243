"""
Encoder, density, attention and head layers, and the model that chains them.
"""

from src.models.attention import (
    FusedRepresentation,
    MutualAttention,
    fuse,
    mutual_attention,
    mutual_matrix,
    pooled_attention,
)
from src.models.conqar import ConQARModel, Encoded, ForwardResult, forward, representation_length
from src.models.density import (
    DensityMatrix,
    PositionDistribution,
    PositionTable,
    density_matrix,
    trace_loss,
    unit_states,
)
from src.models.encoder import (
    ConvFilterBank,
    EmbeddingTable,
    FeatureMap,
    embed,
    feature_map,
    load_word2vec,
    split_filters,
)
from src.models.head import DenseStack, LossWeights, predict, rating_loss, total_loss
from src.models.params import ParameterStore
