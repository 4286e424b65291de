"""Model parameters: initialization, flattening, cloning, checkpoints.

One parameter bundle covers the LSTM encoder (gate weights stored stacked,
column blocks [input | forget | output | candidate]), the graph layer
(per-relation weight vector plus bias) and the regression head. A version
counter ticks on every optimizer update so stale forward traces are caught.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, SchemaError

INPUT_DIM = 5
DEFAULT_HIDDEN = 32

MODE_LSTM = "lstm"  # graph layer bypassed: aggregated embedding = embedding
MODE_STATIC = "static"
MODE_TEMPORAL = "temporal"
MODES = (MODE_LSTM, MODE_STATIC, MODE_TEMPORAL)

ACT_IDENTITY = "identity"
ACT_LEAKY = "leaky_relu"
ACTIVATIONS = (ACT_IDENTITY, ACT_LEAKY)

_GATES = ("input", "forget", "output", "candidate")

_CHECKPOINT_VERSION = 1


@dataclass
class ModelParams:
    hidden: int
    n_relations: int
    mode: str
    activation: str
    leaky_slope: float
    rng_seed: int
    w_all: np.ndarray  # (D+U, 4U) float64
    b_all: np.ndarray  # (4U,) float64
    graph_w: np.ndarray  # (K,) float64
    graph_b: np.ndarray  # (1,) float64
    head_w: np.ndarray  # (U,) float64
    head_b: np.ndarray  # (1,) float64
    version: int = 0

    def gate_weight(self, gate: str) -> np.ndarray:
        """Weight matrix of one gate in (U, D+U) layout."""
        u = self.hidden
        block = _GATES.index(gate)
        return self.w_all[:, block * u : (block + 1) * u].T

    def gate_bias(self, gate: str) -> np.ndarray:
        u = self.hidden
        block = _GATES.index(gate)
        return self.b_all[block * u : (block + 1) * u]

    def arrays(self) -> tuple[np.ndarray, ...]:
        """Parameter arrays in the fixed flattening order."""
        return (self.w_all, self.b_all, self.graph_w, self.graph_b, self.head_w, self.head_b)


@dataclass
class Gradients:
    """Loss gradients mirroring ModelParams' arrays."""

    w_all: np.ndarray
    b_all: np.ndarray
    graph_w: np.ndarray
    graph_b: np.ndarray
    head_w: np.ndarray
    head_b: np.ndarray

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.w_all, self.b_all, self.graph_w, self.graph_b, self.head_w, self.head_b)


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(
    n_relations: int,
    hidden: int = DEFAULT_HIDDEN,
    seed: int = 0,
    mode: str = MODE_TEMPORAL,
    activation: str = ACT_LEAKY,
    leaky_slope: float = 0.01,
) -> ModelParams:
    """Seeded parameter initialization.

    Weights are uniform Glorot per matrix; biases zero except the forget
    gate's, which starts at 1. The draw order (gate matrices input, forget,
    output, candidate; then graph weights; then head weights) is fixed, so
    identical (K, U, seed) always yields bit-identical parameters.
    """
    if n_relations < 1 or hidden < 1:
        raise ConfigurationError(f"need n_relations >= 1 and hidden >= 1, got {n_relations}, {hidden}")
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")
    if activation not in ACTIVATIONS:
        raise ConfigurationError(f"unknown activation {activation!r}; expected one of {ACTIVATIONS}")
    rng = np.random.default_rng(seed)
    d, u, k = INPUT_DIM, hidden, n_relations
    w_all = np.empty((d + u, 4 * u), dtype=np.float64)
    for block in range(4):
        gate = _glorot(rng, fan_in=d + u, fan_out=u, shape=(u, d + u))
        w_all[:, block * u : (block + 1) * u] = gate.T
    b_all = np.zeros(4 * u, dtype=np.float64)
    b_all[u : 2 * u] = 1.0
    graph_w = _glorot(rng, fan_in=k, fan_out=1, shape=k)
    head_w = _glorot(rng, fan_in=u, fan_out=1, shape=u)
    return ModelParams(
        hidden=u,
        n_relations=k,
        mode=mode,
        activation=activation,
        leaky_slope=leaky_slope,
        rng_seed=int(seed),
        w_all=w_all,
        b_all=b_all,
        graph_w=graph_w,
        graph_b=np.zeros(1, dtype=np.float64),
        head_w=head_w,
        head_b=np.zeros(1, dtype=np.float64),
    )


def clone_params(params: ModelParams) -> ModelParams:
    return copy.deepcopy(params)


def flatten(arrays) -> np.ndarray:
    return np.concatenate([np.asarray(a, dtype=np.float64).ravel() for a in arrays])


def unflatten_params(template: ModelParams, vec: np.ndarray) -> ModelParams:
    """Rebuild parameters from a flat vector in the fixed order."""
    out = clone_params(template)
    offset = 0
    for arr in out.arrays():
        n = arr.size
        arr[...] = vec[offset : offset + n].reshape(arr.shape)
        offset += n
    if offset != vec.size:
        raise ConfigurationError(f"flat vector has {vec.size} entries, expected {offset}")
    return out


def save_checkpoint(params: ModelParams, path) -> None:
    """Write a bit-exact, versioned checkpoint (npz with a JSON metadata entry)."""
    meta = {
        "checkpoint_version": _CHECKPOINT_VERSION,
        "hidden": params.hidden,
        "n_relations": params.n_relations,
        "mode": params.mode,
        "activation": params.activation,
        "leaky_slope": params.leaky_slope,
        "rng_seed": params.rng_seed,
        "version": params.version,
    }
    np.savez(
        path,
        meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8),
        w_all=params.w_all,
        b_all=params.b_all,
        graph_w=params.graph_w,
        graph_b=params.graph_b,
        head_w=params.head_w,
        head_b=params.head_b,
    )


def load_checkpoint(path) -> ModelParams:
    with np.load(path) as data:
        try:
            meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"corrupt checkpoint metadata: {exc}") from None
        if meta.get("checkpoint_version") != _CHECKPOINT_VERSION:
            raise SchemaError(
                f"unsupported checkpoint version {meta.get('checkpoint_version')!r}"
            )
        return ModelParams(
            hidden=int(meta["hidden"]),
            n_relations=int(meta["n_relations"]),
            mode=str(meta["mode"]),
            activation=str(meta["activation"]),
            leaky_slope=float(meta["leaky_slope"]),
            rng_seed=int(meta["rng_seed"]),
            w_all=data["w_all"].copy(),
            b_all=data["b_all"].copy(),
            graph_w=data["graph_w"].copy(),
            graph_b=data["graph_b"].copy(),
            head_w=data["head_w"].copy(),
            head_b=data["head_b"].copy(),
            version=int(meta["version"]),
        )
