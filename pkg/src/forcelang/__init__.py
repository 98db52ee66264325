"""Bidirectional translation between 3-axis force profiles and
(modifier, direction) phrases through a shared 16-dim latent space."""

from .core import (
    DIRECTIONS,
    EMBED_DIM,
    FEATURE_DIM,
    GRID_N,
    HORIZON_S,
    LATENT_DIM,
    MODIFIERS,
    PHRASE_VEC_DIM,
    VOCAB_VERSION,
    ForceProfile,
    ImpulseFeature,
    Phrase,
    all_phrases,
    direction_unit_vector,
    expand_direction,
    phrase_to_text,
)
from .errors import (
    CheckpointError,
    DatasetError,
    EmbeddingLookupError,
    ForcelangError,
    InputError,
    TableFormatError,
    VocabularyError,
)
from .lang import (
    DEFAULT_SIGMA,
    HashingProvider,
    TableProvider,
    cosine_similarity,
    decode_binary,
    encode_binary,
    hashing_provider,
    nearest_mvv,
    required_table_texts,
    table_provider,
)
from .signal import (
    NormalizationParams,
    denormalize,
    final_impulse,
    fit_normalizer,
    impulse_to_force,
    integrate_impulse,
    normalize,
    resample,
)
from .data import (
    GeneratorConfig,
    PairedSample,
    generate_corpus,
    read_dataset,
    split_holdout_token,
    split_random,
    write_dataset,
)
from .models import (
    TrainConfig,
    VARIANTS,
    load_checkpoint,
    profile_feature,
    save_checkpoint,
    train,
    translate_text,
)
from .evaluate import (
    METRICS,
    emit_report,
    fd_acc,
    fp_acc,
    phrase_sim,
    run_in_distribution,
    run_ood_directions,
    run_ood_modifiers,
    score_samples,
    word_sim,
)

__version__ = "0.1.0"
