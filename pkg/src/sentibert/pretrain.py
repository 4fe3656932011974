"""Toy-scale pretraining objectives: masked-token prediction and
next-sentence prediction with tied MLM output weights.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, SamplingError
from .model import SentimentModel
from .optim import OptimizerConfig, make_optimizer
from .tensor import Graph, Tensor, add, concat_rows, cross_entropy
from .tokenizer import (
    CLS_ID,
    MASK_ID,
    NUM_SPECIALS,
    PAD_ID,
    SEP_ID,
    EncodedSequence,
    Vocab,
    encode_pair,
)

SENTINEL = -1  # mlm target at positions not selected for prediction


@dataclass
class MaskedBatch:
    sequences: list[EncodedSequence]
    mlm_targets: list[list[int]]  # per sequence, SENTINEL where unselected
    nsp_labels: list[int]  # 1 = genuinely consecutive


def mask_tokens(
    seq: EncodedSequence, p: float, rng: np.random.Generator, vocab_size: int
) -> tuple[EncodedSequence, list[int]]:
    """Select eligible positions independently with probability p; replace
    80% with [MASK], 10% with a random non-special token, 10% unchanged.

    [CLS], [SEP], and [PAD] positions are never eligible.
    """
    if not 0.0 <= p < 1.0:
        raise ContractError(f"mask probability must be in [0, 1), got {p}")
    new_ids = list(seq.token_ids)
    targets = [SENTINEL] * len(new_ids)
    for i, token_id in enumerate(seq.token_ids):
        if token_id in (PAD_ID, CLS_ID, SEP_ID):
            continue
        if rng.random() >= p:
            continue
        targets[i] = token_id
        roll = rng.random()
        if roll < 0.8:
            new_ids[i] = MASK_ID
        elif roll < 0.9:
            if vocab_size <= NUM_SPECIALS:
                raise ConfigError("random-token replacement needs a non-special vocab entry")
            new_ids[i] = int(rng.integers(NUM_SPECIALS, vocab_size))
        # else: keep the original token
    masked = EncodedSequence(
        token_ids=new_ids,
        segment_ids=list(seq.segment_ids),
        positions=list(seq.positions),
        attention_mask=list(seq.attention_mask),
    )
    return masked, targets


def nsp_pairs(
    corpus: list[list[str]], rng: np.random.Generator
) -> list[tuple[str, str, int]]:
    """For each adjacent sentence pair: emit the true successor with
    probability 0.5 (label 1), else a sentence from a different document (label 0).
    """
    for doc_index, doc in enumerate(corpus):
        if len(doc) < 2:
            raise ConfigError(f"document {doc_index} has {len(doc)} sentence(s); need at least 2")
    pairs: list[tuple[str, str, int]] = []
    for doc_index, doc in enumerate(corpus):
        for first, successor in zip(doc, doc[1:]):
            if rng.random() < 0.5:
                pairs.append((first, successor, 1))
            else:
                others = [i for i in range(len(corpus)) if i != doc_index]
                if not others:
                    raise SamplingError(
                        "cannot sample a non-successor: corpus has a single document"
                    )
                other_doc = corpus[others[int(rng.integers(len(others)))]]
                pairs.append((first, other_doc[int(rng.integers(len(other_doc)))], 0))
    return pairs


def build_masked_batch(
    pairs: list[tuple[str, str, int]],
    vocab: Vocab,
    max_len: int,
    p: float,
    rng: np.random.Generator,
) -> MaskedBatch:
    sequences, targets, labels = [], [], []
    for first, second, label in pairs:
        seq = encode_pair(first, second, vocab, max_len)
        masked, mlm_targets = mask_tokens(seq, p, rng, len(vocab))
        sequences.append(masked)
        targets.append(mlm_targets)
        labels.append(label)
    return MaskedBatch(sequences=sequences, mlm_targets=targets, nsp_labels=labels)


def _batch_losses(
    batch: MaskedBatch,
    model: SentimentModel,
    training: bool,
    rng: np.random.Generator | None,
) -> tuple[Tensor | None, Tensor, list[np.ndarray], list[list[int]]]:
    """Forward the batch; returns (mlm_loss or None, nsp_loss, mlm logits, targets)."""
    mlm_logit_parts: list[Tensor] = []
    mlm_target_parts: list[list[int]] = []
    cls_logit_parts: list[Tensor] = []
    for seq, targets in zip(batch.sequences, batch.mlm_targets):
        hidden = model.hidden_states(seq, training=training, rng=rng)
        selected = [i for i, t in enumerate(targets) if t != SENTINEL]
        if selected:
            mlm_logit_parts.append(model.mlm_logits(hidden, selected))
            mlm_target_parts.append([targets[i] for i in selected])
        cls_logit_parts.append(model.nsp_logits(hidden))
    nsp_loss = cross_entropy(concat_rows(cls_logit_parts), batch.nsp_labels)
    if not mlm_logit_parts:
        return None, nsp_loss, [], []
    flat_targets = [t for part in mlm_target_parts for t in part]
    mlm_loss = cross_entropy(concat_rows(mlm_logit_parts), flat_targets)
    raw_logits = [p.data for p in mlm_logit_parts]
    return mlm_loss, nsp_loss, raw_logits, mlm_target_parts


def pretrain_step(
    batch: MaskedBatch,
    model: SentimentModel,
    optimizer,
    rng: np.random.Generator | None = None,
) -> dict[str, float]:
    """One combined MLM+NSP optimization step; returns both loss values.

    A batch with zero selected positions trains NSP only and reports mlm_loss 0.
    """
    if not batch.sequences:
        raise ContractError("pretrain_step: empty batch")
    with Graph() as graph:
        mlm_loss, nsp_loss, _, _ = _batch_losses(batch, model, training=True, rng=rng)
        total = nsp_loss if mlm_loss is None else add(mlm_loss, nsp_loss)
        graph.backward(total)
    optimizer.step()
    return {
        "mlm_loss": 0.0 if mlm_loss is None else mlm_loss.item(),
        "nsp_loss": nsp_loss.item(),
    }


def eval_losses(batch: MaskedBatch, model: SentimentModel) -> dict[str, float]:
    """Eval-mode MLM/NSP losses and masked-token top-1 accuracy on a fixed batch."""
    mlm_loss, nsp_loss, raw_logits, target_parts = _batch_losses(
        batch, model, training=False, rng=None
    )
    hits = total = 0
    for logits, targets in zip(raw_logits, target_parts):
        preds = logits.argmax(axis=1)
        hits += int((preds == np.asarray(targets)).sum())
        total += len(targets)
    return {
        "mlm_loss": 0.0 if mlm_loss is None else mlm_loss.item(),
        "nsp_loss": nsp_loss.item(),
        "mlm_accuracy": hits / total if total else 0.0,
    }


@dataclass
class PretrainConfig:
    epochs: int = 5
    batch_size: int = 8
    mask_probability: float = 0.15
    seed: int = 0
    optimizer: OptimizerConfig | None = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.optimizer is None:
            self.optimizer = OptimizerConfig()


def run_pretraining(
    corpus: list[list[str]], model: SentimentModel, config: PretrainConfig
) -> list[dict[str, float]]:
    """Epochs of MLM+NSP training over the corpus's sentence pairs.

    Per-epoch records carry the mean step losses plus eval-mode loss and
    masked-token accuracy on a fixed masking of the whole pair set.
    """
    rng = np.random.default_rng(config.seed)
    eval_rng = np.random.default_rng(config.seed + 1)
    pairs = nsp_pairs(corpus, rng)
    eval_batch = build_masked_batch(
        pairs, model.vocab, model.config.max_len, config.mask_probability, eval_rng
    )
    optimizer = make_optimizer(
        {**model.encoder_parameters(), "nsp.weight": model.nsp_w, "nsp.bias": model.nsp_b},
        config.optimizer,
    )
    history: list[dict[str, float]] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(pairs))
        step_losses = []
        for start in range(0, len(pairs), config.batch_size):
            chunk = [pairs[i] for i in order[start : start + config.batch_size]]
            batch = build_masked_batch(
                chunk, model.vocab, model.config.max_len, config.mask_probability, rng
            )
            losses = pretrain_step(batch, model, optimizer, rng=rng)
            step_losses.append(losses["mlm_loss"] + losses["nsp_loss"])
        held = eval_losses(eval_batch, model)
        history.append(
            {
                "epoch": epoch,
                "train_loss": float(np.mean(step_losses)),
                "train_acc": held["mlm_accuracy"],
                "val_loss": held["mlm_loss"] + held["nsp_loss"],
                "val_acc": held["mlm_accuracy"],
            }
        )
    return history
