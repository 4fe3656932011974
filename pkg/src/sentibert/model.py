"""Full model assembly: embeddings, encoder stack, and the task heads.

Forward helpers trim each sequence to its real (unpadded) length before
embedding: pads are always a suffix and masked attention slots carry
exactly zero weight in float64, so hidden states at real positions agree
with the full-width computation to within a few ULPs (row reductions
associate differently for different row lengths), far inside every stated
tolerance. Each code path is individually deterministic.
"""

import copy
from dataclasses import dataclass, field

import numpy as np

from .data import LABELS
from .embedding import INIT_STD, EmbeddingTables, _init_tables, embed
from .encoder import EncoderConfig, EncoderLayerParams, encode, init_layer_params
from .errors import ConfigError
from .tensor import Tensor, add_bias, gather_rows, matmul, parameter, transpose
from .tokenizer import EncodedSequence, Vocab

NUM_SENTIMENTS = len(LABELS)


@dataclass
class SentimentModel:
    """Every learnable weight plus the vocabulary and shape configuration."""

    vocab: Vocab
    config: EncoderConfig
    tables: EmbeddingTables
    layers: list[EncoderLayerParams]
    cls_w: Tensor  # [d_model x 3]
    cls_b: Tensor  # [3]
    nsp_w: Tensor  # [d_model x 2]
    nsp_b: Tensor  # [2]
    seed: int = 0
    labels: tuple[str, ...] = field(default=LABELS)

    @classmethod
    def init(cls, vocab: Vocab, config: EncoderConfig, seed: int) -> "SentimentModel":
        """Random initialization, deterministic per seed."""
        rng = np.random.default_rng(seed)
        d = config.d_model
        return cls(
            vocab=vocab,
            config=config,
            tables=_init_tables(len(vocab), d, config.max_len, rng),
            layers=[init_layer_params(config, rng) for _ in range(config.num_layers)],
            cls_w=parameter(rng.normal(0.0, INIT_STD, (d, NUM_SENTIMENTS))),
            cls_b=parameter(np.zeros(NUM_SENTIMENTS)),
            nsp_w=parameter(rng.normal(0.0, INIT_STD, (d, 2))),
            nsp_b=parameter(np.zeros(2)),
            seed=seed,
        )

    def named_parameters(self) -> dict[str, Tensor]:
        out = {
            "embeddings.token": self.tables.token,
            "embeddings.segment": self.tables.segment,
            "embeddings.position": self.tables.position,
        }
        for i, layer in enumerate(self.layers):
            out.update(layer.named(f"encoder.{i}"))
        out["classifier.weight"] = self.cls_w
        out["classifier.bias"] = self.cls_b
        out["nsp.weight"] = self.nsp_w
        out["nsp.bias"] = self.nsp_b
        return out

    def encoder_parameters(self) -> dict[str, Tensor]:
        """Embeddings + encoder stack, without the task heads."""
        return {
            name: t
            for name, t in self.named_parameters().items()
            if not name.startswith(("classifier.", "nsp."))
        }

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.named_parameters().items()}

    def load_snapshot(self, arrays: dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        missing = sorted(set(params) ^ set(arrays))
        if missing:
            raise ConfigError(f"snapshot does not match model parameters: {missing}")
        for name, t in params.items():
            if arrays[name].shape != t.data.shape:
                raise ConfigError(
                    f"snapshot tensor {name!r} has shape {arrays[name].shape}, expected {t.data.shape}"
                )
            t.data = np.ascontiguousarray(arrays[name], dtype=np.float64)
            t.grad = None

    def clone(self) -> "SentimentModel":
        clone = SentimentModel.init(self.vocab, copy.deepcopy(self.config), self.seed)
        clone.load_snapshot(self.snapshot())
        return clone

    # -- forward helpers ----------------------------------------------------

    def hidden_states(
        self,
        seq: EncodedSequence,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """Encoder output for the real (unpadded) prefix of the sequence."""
        real = seq.real_length()
        trimmed = EncodedSequence(
            token_ids=seq.token_ids[:real],
            segment_ids=seq.segment_ids[:real],
            positions=seq.positions[:real],
            attention_mask=seq.attention_mask[:real],
        )
        x = embed(trimmed, self.tables)
        return encode(x, self.config, self.layers, trimmed.attention_mask, training, rng)

    def class_logits(
        self,
        seq: EncodedSequence,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """Sentiment logits [1 x 3] from the [CLS] hidden state."""
        hidden = self.hidden_states(seq, training, rng)
        cls_row = gather_rows(hidden, [0])
        return add_bias(matmul(cls_row, self.cls_w), self.cls_b)

    def nsp_logits(self, hidden: Tensor) -> Tensor:
        """Next-sentence logits [1 x 2] from the [CLS] hidden state."""
        cls_row = gather_rows(hidden, [0])
        return add_bias(matmul(cls_row, self.nsp_w), self.nsp_b)

    def mlm_logits(self, hidden: Tensor, positions: list[int]) -> Tensor:
        """Masked-token logits [n x V] via the transposed token table (tied weights)."""
        selected = gather_rows(hidden, positions)
        return matmul(selected, transpose(self.tables.token))
