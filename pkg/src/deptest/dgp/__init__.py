"""Data-generating processes: parametric models, image samplers and corpora."""
from .corpus import (
    LabeledSample,
    build_corpus,
    corpus_specs,
    experiment2_specs,
    noise_class_counts,
    read_manifest,
    write_manifest,
)
from .images import ImageMask, draw_from_image, gen_from_image, infinity_mask, pi_mask, read_pgm, write_pgm
from .models import (
    EXTRA_MODELS,
    IMAGE_MODELS,
    NOISE_CLASSES,
    TRAINING_MODELS,
    VARIANTS,
    Draw,
    GenSpec,
    ModelId,
    draw_model,
    gen_independent,
    gen_model,
)

__all__ = [
    "Draw",
    "EXTRA_MODELS",
    "GenSpec",
    "IMAGE_MODELS",
    "ImageMask",
    "LabeledSample",
    "ModelId",
    "NOISE_CLASSES",
    "TRAINING_MODELS",
    "VARIANTS",
    "build_corpus",
    "corpus_specs",
    "draw_from_image",
    "draw_model",
    "experiment2_specs",
    "gen_from_image",
    "gen_independent",
    "gen_model",
    "infinity_mask",
    "noise_class_counts",
    "pi_mask",
    "read_manifest",
    "read_pgm",
    "write_manifest",
    "write_pgm",
]
