"""Network graphs for the three architectures, forward/backward passes and model files.

A network has one or two input branches (``image``: 25x25x1 copula histogram,
``indicators``: the 20-vector) and a head. With two branches the head starts
with a ``concat`` layer joining the branch outputs (image first).
"""
from __future__ import annotations

import base64
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError, SchemaError
from ..features import GRID_SIZE, N_INDICATORS, FeatureSet, indicator_ordering_hash
from ..seeding import child_rng, derive_seed
from . import layers as L
from .layers import LayerSpec

BCE_CLAMP = 1e-7
MODEL_SCHEMA = "deptest.model/1"


class Architecture(str, enum.Enum):
    ALL_MLP = "all-mlp"
    ALL_CNN = "all-cnn"
    ALL_CNN_MLP = "all-cnn-mlp"

    @classmethod
    def parse(cls, tag) -> "Architecture":
        if isinstance(tag, Architecture):
            return tag
        key = str(tag).strip().lower().replace("_", "-")
        aliases = {"allmlp": "all-mlp", "allcnn": "all-cnn", "allcnnmlp": "all-cnn-mlp"}
        key = aliases.get(key, key)
        for a in cls:
            if a.value == key:
                return a
        raise InvalidInputError(f"unknown architecture {tag!r}")


INPUT_SHAPES = {"image": (GRID_SIZE, GRID_SIZE, 1), "indicators": (N_INDICATORS,)}


def _image_branch(rate: float) -> list[LayerSpec]:
    return [L.conv(32), L.RELU, L.conv(32), L.RELU, L.MAXPOOL, L.dropout(rate), L.FLATTEN]


def architecture_layers(tag: Architecture, rate: float = 0.2) -> tuple[dict[str, list[LayerSpec]], list[LayerSpec]]:
    """Branches and head of each architecture."""
    tag = Architecture.parse(tag)
    if tag is Architecture.ALL_MLP:
        branch = [L.dense(32), L.RELU, L.dropout(rate), L.dense(32), L.RELU, L.dropout(rate)]
        return {"indicators": branch}, [L.dense(1), L.SIGMOID]
    head_cnn = [L.dense(256), L.RELU, L.dropout(rate), L.dense(128), L.RELU, L.dropout(rate)]
    if tag is Architecture.ALL_CNN:
        return {"image": _image_branch(rate)}, head_cnn + [L.dense(1), L.SIGMOID]
    branches = {"image": _image_branch(rate), "indicators": [L.dense(32), L.RELU]}
    head = [LayerSpec("concat")] + head_cnn + [L.dense(32), L.RELU, L.dropout(rate), L.dense(1), L.SIGMOID]
    return branches, head


@dataclass(eq=False)
class NetworkModel:
    """Layer graph plus weights.

    ``params`` holds one ``[W, b]`` pair per trainable layer, keyed by the
    layer path (``"image/0"``, ``"head/3"``, ...). ``input_shift`` and
    ``input_scale`` standardize the indicator input and are fixed at
    training time (not trainable).
    """

    tag: str
    branches: dict[str, list[LayerSpec]]
    head: list[LayerSpec]
    params: dict[str, list[np.ndarray]] = field(default_factory=dict)
    input_shift: np.ndarray | None = None
    input_scale: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(self.branches)

    def layer_paths(self):
        for name, layers in self.branches.items():
            for i, spec in enumerate(layers):
                yield f"{name}/{i}", spec
        for i, spec in enumerate(self.head):
            yield f"head/{i}", spec

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Per-sample input shape of every layer, keyed by path."""
        out = {}
        ends = []
        for name, layers in self.branches.items():
            custom = self.meta.get("input_shapes", {})
            shape = tuple(custom[name]) if name in custom else INPUT_SHAPES[name]
            for i, spec in enumerate(layers):
                out[f"{name}/{i}"] = shape
                shape = L.output_shape(spec, shape)
            ends.append(shape)
        if len(ends) > 1:
            if any(len(s) != 1 for s in ends):
                raise InvalidInputError("branches must end in vectors before concat")
            shape = (sum(s[0] for s in ends),)
        else:
            shape = ends[0]
        for i, spec in enumerate(self.head):
            out[f"head/{i}"] = shape
            shape = L.output_shape(spec, shape)
        if shape != (1,):
            raise InvalidInputError(f"network must end in a single unit, got {shape}")
        return out

    def n_parameters(self) -> int:
        return int(sum(a.size for pair in self.params.values() for a in pair))

    def flatten_width(self) -> int | None:
        """Width of the image embedding, if the network has an image branch."""
        if "image" not in self.branches:
            return None
        layers = self.branches["image"]
        idx = max(i for i, s in enumerate(layers) if s.kind == "flatten_colmajor")
        shape = self.shapes()[f"image/{idx}"]
        return int(np.prod(shape))

    def copy(self) -> "NetworkModel":
        return NetworkModel(
            self.tag,
            self.branches,
            self.head,
            {k: [a.copy() for a in v] for k, v in self.params.items()},
            None if self.input_shift is None else self.input_shift.copy(),
            None if self.input_scale is None else self.input_scale.copy(),
            dict(self.meta),
        )


def init_params(model: NetworkModel, seed: int) -> NetworkModel:
    """Glorot-uniform weights and zero biases; each layer has its own seeded stream."""
    shapes = model.shapes()
    params = {}
    for path, spec in model.layer_paths():
        if spec.trainable:
            w_shape, b_shape = L.param_shapes(spec, shapes[path])
            rng = child_rng(seed, f"init/{path}")
            params[path] = [L.glorot_uniform(rng, w_shape), np.zeros(b_shape)]
    model.params = params
    return model


def build_architecture(tag, seed: int = 0, dropout_rate: float = 0.2) -> NetworkModel:
    """Initialized network for ``tag`` (``all-mlp``, ``all-cnn`` or ``all-cnn-mlp``)."""
    tag = Architecture.parse(tag)
    branches, head = architecture_layers(tag, dropout_rate)
    model = NetworkModel(tag.value, branches, head, meta={"init_seed": int(seed)})
    return init_params(model, seed)


def build_custom(
    branches: dict[str, list[LayerSpec]],
    head: list[LayerSpec],
    input_shapes: dict[str, tuple[int, ...]],
    seed: int = 0,
) -> NetworkModel:
    """Small networks for tests and toy problems."""
    model = NetworkModel("custom", branches, head, meta={"input_shapes": {k: list(v) for k, v in input_shapes.items()}})
    return init_params(model, seed)


# --- inputs -------------------------------------------------------------------


def model_inputs(model: NetworkModel, fs: FeatureSet) -> dict[str, np.ndarray]:
    """Network inputs from a feature set (images unflattened column-major)."""
    out = {}
    if "image" in model.branches:
        # each row is column-major: entry a + GRID_SIZE * b holds bin (a, b)
        imgs = fs.images.reshape(len(fs), GRID_SIZE, GRID_SIZE).transpose(0, 2, 1)
        out["image"] = imgs[..., None]
    if "indicators" in model.branches:
        out["indicators"] = fs.indicators
    return out


def _prepared(model: NetworkModel, inputs: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out = {}
    for name in model.branches:
        if name not in inputs:
            raise InvalidInputError(f"missing network input {name!r}")
        x = np.asarray(inputs[name], dtype=np.float64)
        if name == "indicators" and model.input_shift is not None:
            x = (x - model.input_shift) / model.input_scale
        out[name] = x
    sizes = {v.shape[0] for v in out.values()}
    if len(sizes) != 1:
        raise InvalidInputError("network inputs disagree on batch size")
    return out


# --- forward / backward --------------------------------------------------------


def _run_layers(model, prefix, layers, x, train, seed, caches):
    for i, spec in enumerate(layers):
        path = f"{prefix}/{i}"
        k = spec.kind
        if k == "dense":
            W, b = model.params[path]
            x, c = L.dense_forward(x, W, b)
        elif k == "conv2d_same_3x3":
            W, b = model.params[path]
            x, c = L.conv_forward(x, W, b)
        elif k == "relu":
            c = x > 0
            x = x * c
        elif k == "sigmoid":
            x = L.sigmoid(x)
            c = x
        elif k == "maxpool_3x3_stride3":
            x, c = L.maxpool_forward(x)
        elif k == "flatten_colmajor":
            x, c = L.flatten_forward(x)
        elif k == "dropout":
            if train and spec.rate > 0:
                c = L.dropout_mask(child_rng(seed, f"dropout/{path}"), x.shape, spec.rate)
                x = x * c
            else:
                c = None
        else:  # concat is handled by the caller
            c = None
        caches.append((path, spec, c))
    return x


def _forward(model: NetworkModel, inputs: dict[str, np.ndarray], train: bool, seed: int):
    caches: list = []
    outs = []
    for name, layers in model.branches.items():
        outs.append(_run_layers(model, name, layers, inputs[name], train, seed, caches))
    x = np.concatenate(outs, axis=1) if len(outs) > 1 else outs[0]
    widths = [o.shape[1] for o in outs] if len(outs) > 1 else None
    x = _run_layers(model, "head", model.head, x, train, seed, caches)
    return x[:, 0], caches, widths


def forward(model: NetworkModel, inputs: dict[str, np.ndarray], mode: str = "infer", seed: int = 0) -> np.ndarray:
    """Scores in (0, 1). Dropout is active only when ``mode == "train"``."""
    if mode not in ("train", "infer"):
        raise InvalidInputError(f"mode must be 'train' or 'infer', got {mode!r}")
    scores, _, _ = _forward(model, _prepared(model, inputs), mode == "train", seed)
    return scores


def predict(model: NetworkModel, fs: FeatureSet, batch_size: int = 512) -> np.ndarray:
    """Inference scores for a whole feature set, in fixed-size batches."""
    inputs = model_inputs(model, fs)
    out = np.empty(len(fs))
    for start in range(0, len(fs), batch_size):
        sl = slice(start, start + batch_size)
        out[sl] = forward(model, {k: v[sl] for k, v in inputs.items()})
    return out


def bce(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy with scores clamped to ``[1e-7, 1 - 1e-7]``."""
    p = np.clip(scores, BCE_CLAMP, 1.0 - BCE_CLAMP)
    y = np.asarray(labels, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log1p(-p)))


def _backward_layers(model, entries, g, grads):
    for path, spec, c in reversed(entries):
        k = spec.kind
        if k == "dense":
            g, pg = L.dense_backward(g, c, model.params[path][0])
            grads[path] = pg
        elif k == "conv2d_same_3x3":
            g, pg = L.conv_backward(g, c, model.params[path][0])
            grads[path] = pg
        elif k == "relu":
            g = g * c
        elif k == "sigmoid":
            g = g * c * (1.0 - c)
        elif k == "maxpool_3x3_stride3":
            g = L.maxpool_backward(g, c)
        elif k == "flatten_colmajor":
            g = L.flatten_backward(g, c)
        elif k == "dropout":
            if c is not None:
                g = g * c
    return g


def loss_and_grads(
    model: NetworkModel, inputs: dict[str, np.ndarray], labels: np.ndarray, seed: int = 0, train: bool = True
) -> tuple[float, dict[str, list[np.ndarray]]]:
    """Mean clamped BCE and its gradient for every trainable array.

    The gradient is zero for samples whose score lies outside the clamp
    interval, matching the clamped loss exactly.
    """
    x = _prepared(model, inputs)
    scores, caches, widths = _forward(model, x, train, seed)
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != scores.shape or not np.all((y == 0) | (y == 1)):
        raise InvalidInputError("labels must be a 0/1 vector matching the batch")
    loss = bce(scores, y)
    inside = (scores > BCE_CLAMP) & (scores < 1.0 - BCE_CLAMP)
    g = np.where(inside, (scores - y) / (scores * (1.0 - scores)), 0.0) / y.size
    g = g[:, None]
    grads: dict[str, list[np.ndarray]] = {}
    head_entries = [e for e in caches if e[0].startswith("head/")]
    g = _backward_layers(model, head_entries, g, grads)
    names = list(model.branches)
    if widths is None:
        parts = [g]
    else:
        parts = np.split(g, np.cumsum(widths)[:-1], axis=1)
    for name, gp in zip(names, parts):
        entries = [e for e in caches if e[0].startswith(f"{name}/")]
        _backward_layers(model, entries, gp, grads)
    return loss, grads


# --- model files ----------------------------------------------------------------


def _encode(a: np.ndarray) -> dict:
    return {
        "shape": list(a.shape),
        "data": base64.b64encode(np.ascontiguousarray(a, dtype="<f8").tobytes()).decode("ascii"),
    }


def _decode(d: dict, where: str) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in d["shape"])
        raw = base64.b64decode(d["data"], validate=True)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: malformed weight blob ({exc})") from None
    if len(raw) != 8 * int(np.prod(shape)):
        raise SchemaError(f"{where}: weight blob size does not match its shape {list(shape)}")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def model_to_dict(model: NetworkModel) -> dict:
    doc = {
        "schema": MODEL_SCHEMA,
        "architecture_tag": model.tag,
        "indicator_hash": indicator_ordering_hash(),
        "branches": {k: [s.to_dict() for s in v] for k, v in model.branches.items()},
        "head": [s.to_dict() for s in model.head],
        "weights": {k: [_encode(a) for a in v] for k, v in model.params.items()},
        "meta": model.meta,
    }
    if model.input_shift is not None:
        doc["input_shift"] = _encode(model.input_shift)
        doc["input_scale"] = _encode(model.input_scale)
    return doc


def _require(doc: dict, key: str, source: str):
    if key not in doc:
        raise SchemaError(f"{source}: missing field {key!r}")
    return doc[key]


def model_from_dict(doc: dict, source: str = "<model>") -> NetworkModel:
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: model file must hold a JSON object")
    if _require(doc, "schema", source) != MODEL_SCHEMA:
        raise SchemaError(f"{source}: field 'schema' must be {MODEL_SCHEMA!r}")
    if _require(doc, "indicator_hash", source) != indicator_ordering_hash():
        raise SchemaError(f"{source}: field 'indicator_hash' does not match this version's indicator ordering")
    tag = _require(doc, "architecture_tag", source)
    try:
        branches = {k: [LayerSpec.from_dict(s) for s in v] for k, v in _require(doc, "branches", source).items()}
        head = [LayerSpec.from_dict(s) for s in _require(doc, "head", source)]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"{source}: field 'branches'/'head' is malformed ({exc})") from None
    weights = _require(doc, "weights", source)
    params = {k: [_decode(a, f"{source}: weights[{k!r}]") for a in v] for k, v in weights.items()}
    model = NetworkModel(str(tag), branches, head, params, meta=dict(doc.get("meta", {})))
    if "input_shift" in doc:
        model.input_shift = _decode(doc["input_shift"], f"{source}: input_shift")
        model.input_scale = _decode(_require(doc, "input_scale", source), f"{source}: input_scale")
    try:
        shapes = model.shapes()
    except InvalidInputError as exc:
        raise SchemaError(f"{source}: field 'branches' does not form a valid network ({exc})") from None
    for path, spec in model.layer_paths():
        if spec.trainable:
            if path not in params:
                raise SchemaError(f"{source}: field 'weights' lacks layer {path!r}")
            want = L.param_shapes(spec, shapes[path])
            got = [a.shape for a in params[path]]
            if got != want:
                raise SchemaError(f"{source}: weights[{path!r}] has shapes {got}, expected {want}")
    return model


def save_model(model: NetworkModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n", encoding="utf-8")


def load_model(path) -> NetworkModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return model_from_dict(doc, str(path))


def model_hash(model: NetworkModel) -> str:
    """Digest of the architecture, weights and input standardization."""
    import hashlib

    h = hashlib.sha256(json.dumps(model_to_dict(model), sort_keys=True).encode("utf-8"))
    return h.hexdigest()[:16]


def batch_seed(seed: int, epoch: int, batch: int) -> int:
    return derive_seed(seed, f"train/{epoch}/{batch}")
