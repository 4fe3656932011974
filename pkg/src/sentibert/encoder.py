"""Stacked Transformer encoder: scaled dot-product multi-head attention,
post-norm residuals, and a position-wise ReLU feed-forward block.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor import (
    NEG_INF_MASK,
    Tensor,
    add,
    add_bias,
    concat_cols,
    dropout,
    layer_norm,
    matmul,
    parameter,
    relu,
    scale,
    softmax_rows,
    transpose,
)

LAYER_NORM_EPS = 1e-5


@dataclass
class EncoderConfig:
    num_layers: int = 2
    num_heads: int = 2
    d_model: int = 64
    d_ff: int = 256
    max_len: int = 64
    dropout_rate: float = 0.1

    def __post_init__(self):
        if self.num_layers < 0:  # 0 layers = identity stack, allowed for probing
            raise ConfigError(f"num_layers must be nonnegative, got {self.num_layers}")
        for name in ("num_heads", "d_model", "d_ff", "max_len"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.d_model % self.num_heads != 0:
            raise ConfigError(f"d_model ({self.d_model}) must be divisible by num_heads ({self.num_heads})")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @property
    def d_k(self) -> int:
        return self.d_model // self.num_heads

    def to_dict(self) -> dict:
        return {
            "num_layers": self.num_layers,
            "num_heads": self.num_heads,
            "d_model": self.d_model,
            "d_ff": self.d_ff,
            "max_len": self.max_len,
            "dropout_rate": self.dropout_rate,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EncoderConfig":
        return cls(**{k: raw[k] for k in cls().to_dict()})


@dataclass
class EncoderLayerParams:
    wq: list[Tensor] = field(default_factory=list)  # per head, [d_model x d_k]
    wk: list[Tensor] = field(default_factory=list)
    wv: list[Tensor] = field(default_factory=list)
    wo: Tensor = None  # [d_model x d_model]
    w1: Tensor = None  # [d_model x d_ff]
    b1: Tensor = None  # [d_ff]
    w2: Tensor = None  # [d_ff x d_model]
    b2: Tensor = None  # [d_model]
    ln1_gamma: Tensor = None
    ln1_beta: Tensor = None
    ln2_gamma: Tensor = None
    ln2_beta: Tensor = None

    def named(self, prefix: str) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for head, (q, k, v) in enumerate(zip(self.wq, self.wk, self.wv)):
            out[f"{prefix}.head{head}.wq"] = q
            out[f"{prefix}.head{head}.wk"] = k
            out[f"{prefix}.head{head}.wv"] = v
        out[f"{prefix}.wo"] = self.wo
        out[f"{prefix}.ffn.w1"] = self.w1
        out[f"{prefix}.ffn.b1"] = self.b1
        out[f"{prefix}.ffn.w2"] = self.w2
        out[f"{prefix}.ffn.b2"] = self.b2
        out[f"{prefix}.ln1.gamma"] = self.ln1_gamma
        out[f"{prefix}.ln1.beta"] = self.ln1_beta
        out[f"{prefix}.ln2.gamma"] = self.ln2_gamma
        out[f"{prefix}.ln2.beta"] = self.ln2_beta
        return out


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> Tensor:
    return parameter(rng.normal(0.0, np.sqrt(2.0 / (fan_in + fan_out)), (fan_in, fan_out)))


def init_layer_params(config: EncoderConfig, rng: np.random.Generator) -> EncoderLayerParams:
    """Xavier-scaled projections (a fixed 0.02 starves narrow desk-scale
    widths); biases zero; layer-norm at identity."""
    d, dk, dff = config.d_model, config.d_k, config.d_ff
    return EncoderLayerParams(
        wq=[_xavier(rng, d, dk) for _ in range(config.num_heads)],
        wk=[_xavier(rng, d, dk) for _ in range(config.num_heads)],
        wv=[_xavier(rng, d, dk) for _ in range(config.num_heads)],
        wo=_xavier(rng, d, d),
        w1=_xavier(rng, d, dff),
        b1=parameter(np.zeros(dff)),
        w2=_xavier(rng, dff, d),
        b2=parameter(np.zeros(d)),
        ln1_gamma=parameter(np.ones(d)),
        ln1_beta=parameter(np.zeros(d)),
        ln2_gamma=parameter(np.ones(d)),
        ln2_beta=parameter(np.zeros(d)),
    )


def _mask_bias(mask, rows: int) -> Tensor:
    """Constant [rows x n] tensor adding -1e9 at masked key slots."""
    m = np.asarray(mask, dtype=np.float64)
    if m.ndim != 1:
        raise ShapeError(f"attention mask must be 1-D, got shape {m.shape}")
    bias = np.where(m > 0, 0.0, NEG_INF_MASK)
    return Tensor(np.broadcast_to(bias, (rows, m.shape[0])).copy())


def attention(q: Tensor, k: Tensor, v: Tensor, mask) -> Tensor:
    """softmax(Q K^T / sqrt(d_k)) V with additive -1e9 masking of padded keys."""
    if q.data.shape[1] != k.data.shape[1]:
        raise ShapeError(f"attention: query/key widths differ: {q.data.shape} vs {k.data.shape}")
    if k.data.shape[0] != v.data.shape[0]:
        raise ShapeError(f"attention: key/value row counts differ: {k.data.shape} vs {v.data.shape}")
    if len(mask) != k.data.shape[0]:
        raise ShapeError(f"attention: mask length {len(mask)} != key count {k.data.shape[0]}")
    d_k = q.data.shape[1]
    scores = scale(matmul(q, transpose(k)), 1.0 / np.sqrt(d_k))
    scores = add(scores, _mask_bias(mask, q.data.shape[0]))
    return matmul(softmax_rows(scores), v)


def multi_head(x: Tensor, params: EncoderLayerParams, mask) -> Tensor:
    """Per-head attention on learned projections, concatenated, projected by W^O."""
    if x.data.shape[1] != params.wo.data.shape[0]:
        raise ShapeError(f"multi_head: input width {x.data.shape[1]} != d_model {params.wo.data.shape[0]}")
    heads = [
        attention(matmul(x, wq), matmul(x, wk), matmul(x, wv), mask)
        for wq, wk, wv in zip(params.wq, params.wk, params.wv)
    ]
    return matmul(concat_cols(heads), params.wo)


def feed_forward(x: Tensor, params: EncoderLayerParams) -> Tensor:
    """max(0, x W_1 + b_1) W_2 + b_2."""
    hidden = relu(add_bias(matmul(x, params.w1), params.b1))
    return add_bias(matmul(hidden, params.w2), params.b2)


def encoder_layer(
    x: Tensor,
    params: EncoderLayerParams,
    mask,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> Tensor:
    """Post-norm block: LayerNorm(x + attn), then LayerNorm(y + FFN(y))."""
    if training and dropout_rate > 0.0 and rng is None:
        raise ConfigError("encoder_layer: training with dropout needs an rng")
    attn = dropout(multi_head(x, params, mask), dropout_rate, rng, training)
    y = layer_norm(add(x, attn), params.ln1_gamma, params.ln1_beta, LAYER_NORM_EPS)
    ffn = dropout(feed_forward(y, params), dropout_rate, rng, training)
    return layer_norm(add(y, ffn), params.ln2_gamma, params.ln2_beta, LAYER_NORM_EPS)


def encode(
    x: Tensor,
    config: EncoderConfig,
    layers: list[EncoderLayerParams],
    mask,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Apply the layer stack sequentially; empty stack is the identity."""
    if len(layers) != config.num_layers:
        raise ConfigError(f"encode: got {len(layers)} layer params for num_layers={config.num_layers}")
    hidden = x
    for params in layers:
        hidden = encoder_layer(hidden, params, mask, config.dropout_rate, rng, training)
    return hidden
