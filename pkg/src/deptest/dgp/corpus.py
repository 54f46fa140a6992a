"""Labelled training and testing corpora."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ..errors import InvalidInputError, SchemaError
from ..parallel import pmap
from ..sample import BivariateSample
from ..seeding import derive_seed
from .models import (
    EXTRA_MODELS,
    IMAGE_MODELS,
    TRAINING_MODELS,
    VARIANTS,
    GenSpec,
    ModelId,
    gen_model,
)

NOISE_SHARES = (0.6, 0.2, 0.2)


@dataclass(frozen=True, eq=False)
class LabeledSample:
    spec: GenSpec
    sample: BivariateSample
    label: int


def noise_class_counts(per_model: int) -> tuple[int, int, int]:
    """Per-model counts for noise classes L1, L2, L3 in the 3:1:1 proportion.

    L2 and L3 get ``round(0.2 * per_model)`` each and L1 takes the rest, so
    the three always add up to ``per_model``.
    """
    if per_model < 1:
        raise InvalidInputError(f"per_model must be >= 1, got {per_model}")
    k = int(round(NOISE_SHARES[1] * per_model))
    return per_model - 2 * k, k, k


def corpus_specs(sizes: Sequence[int], per_model: int, role: str, seed: int) -> list[tuple[GenSpec, int]]:
    """Generation specs and labels, dependent block first then independent, per size."""
    if not sizes:
        raise InvalidInputError("at least one sample size is required")
    counts = noise_class_counts(per_model)
    out: list[tuple[GenSpec, int]] = []
    for n in sizes:
        for model in TRAINING_MODELS:
            idx = 0
            for cls, cnt in zip(("L1", "L2", "L3"), counts):
                for _ in range(cnt):
                    s = derive_seed(seed, f"corpus/{role}/{n}/{model.value}/{idx}")
                    out.append((GenSpec(model, n, role, noise_class=cls, seed=s), 1))
                    idx += 1
        for idx in range(per_model * len(TRAINING_MODELS)):
            s = derive_seed(seed, f"corpus/{role}/{n}/independent/{idx}")
            out.append((GenSpec(ModelId.INDEPENDENT, n, role, seed=s), 0))
    return out


def build_corpus(
    sizes: Sequence[int], per_model: int, role: str, seed: int, threads: int = 1
) -> list[LabeledSample]:
    """Balanced corpus: ``20 * per_model`` dependent and as many independent samples per size."""
    specs = corpus_specs(sizes, per_model, role, seed)
    samples = pmap(lambda sl: gen_model(sl[0]), specs, threads)
    return [LabeledSample(sp, s, lab) for (sp, lab), s in zip(specs, samples)]


def experiment2_specs(n: int, reps: int, seed: int) -> list[GenSpec]:
    """``reps`` specs for each of the extra models and images under both variants."""
    out = []
    for model in EXTRA_MODELS + IMAGE_MODELS:
        for var in VARIANTS:
            for r in range(reps):
                s = derive_seed(seed, f"exp2/{n}/{model.value}/{var}/{r}")
                out.append(GenSpec(model, n, "test", variant=var, seed=s))
    return out


def manifest_entries(corpus: Sequence[LabeledSample]) -> list[dict]:
    return [dict(item.spec.to_dict(), label=item.label) for item in corpus]


def write_manifest(corpus: Sequence[LabeledSample], path) -> None:
    Path(path).write_text(json.dumps(manifest_entries(corpus), indent=1) + "\n", encoding="utf-8")


def read_manifest(path) -> list[tuple[GenSpec, int]]:
    """Specs and labels from a manifest; samples are regenerated from their seeds."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: cannot read corpus manifest ({exc})") from None
    if not isinstance(raw, list):
        raise SchemaError(f"{path}: manifest must be a JSON array")
    out = []
    for i, entry in enumerate(raw):
        try:
            label = int(entry["label"])
            spec = GenSpec.from_dict(entry)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: entry {i}: bad field ({exc})") from None
        if label not in (0, 1):
            raise SchemaError(f"{path}: entry {i}: label must be 0 or 1")
        out.append((spec, label))
    return out
