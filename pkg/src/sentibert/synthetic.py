"""Template-generated review corpus for desk-scale experiments.

Sentences are built from class-specific adjective lexicons slotted into
shared hotel-review templates, so the classes are separable but share all
of their structural vocabulary. Generation is deterministic per seed.
"""

import numpy as np

from .data import NUM_CLASSES, LabeledExample
from .errors import ConfigError

NEGATIVE_WORDS = (
    "terrible", "awful", "filthy", "rude", "noisy", "broken",
    "dreadful", "miserable", "disappointing", "horrible",
)
NEUTRAL_WORDS = (
    "average", "ordinary", "standard", "plain", "acceptable",
    "unremarkable", "typical", "modest", "basic", "adequate",
)
POSITIVE_WORDS = (
    "excellent", "wonderful", "spotless", "friendly", "quiet",
    "comfortable", "delightful", "charming", "superb", "lovely",
)
LEXICON = (NEGATIVE_WORDS, NEUTRAL_WORDS, POSITIVE_WORDS)

NOUNS = (
    "room", "staff", "service", "breakfast", "location",
    "bed", "bathroom", "lobby", "wifi", "pool",
)

TEMPLATES = (
    "the {noun} was {adj}",
    "{adj} {noun} overall",
    "we found the {noun} {adj}",
    "the {noun} felt {adj} and the {noun2} was {adj2}",
    "{noun} and {noun2} were both {adj}",
    "a {adj} {noun} with a {adj2} {noun2}",
    "our stay had a {adj} {noun}",
    "guests called the {noun} {adj}",
)


def make_sentence(label: int, rng: np.random.Generator) -> str:
    words = LEXICON[label]
    template = TEMPLATES[int(rng.integers(len(TEMPLATES)))]
    noun, noun2 = rng.choice(len(NOUNS), size=2, replace=False)
    return template.format(
        adj=words[int(rng.integers(len(words)))],
        adj2=words[int(rng.integers(len(words)))],
        noun=NOUNS[int(noun)],
        noun2=NOUNS[int(noun2)],
    )


def generate_dataset(counts: tuple[int, int, int], seed: int) -> list[LabeledExample]:
    """counts[c] examples of class c, shuffled; deterministic per seed."""
    if len(counts) != NUM_CLASSES or any(n < 0 for n in counts):
        raise ConfigError(f"counts must be {NUM_CLASSES} nonnegative ints, got {counts}")
    rng = np.random.default_rng(seed)
    examples = [
        LabeledExample(make_sentence(label, rng), label)
        for label in range(NUM_CLASSES)
        for _ in range(counts[label])
    ]
    rng.shuffle(examples)
    return examples


def generate_split(
    n_train: int = 600, n_test: int = 200, seed: int = 13
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Balanced train/test corpora from disjoint rng streams of one seed."""
    per_train = n_train // NUM_CLASSES
    per_test = n_test // NUM_CLASSES
    train = generate_dataset((n_train - 2 * per_train, per_train, per_train), seed)
    test = generate_dataset((n_test - 2 * per_test, per_test, per_test), seed + 1)
    return train, test


def generate_imbalanced(
    majority_count: int, ratio: float, minority_label: int, seed: int
) -> list[LabeledExample]:
    """Two majority classes of majority_count and one minority class of
    round(ratio * majority_count) examples (at least 1)."""
    if not 0.0 < ratio <= 1.0:
        raise ConfigError(f"ratio must be in (0, 1], got {ratio}")
    if not 0 <= minority_label < NUM_CLASSES:
        raise ConfigError(f"minority_label must be in 0..{NUM_CLASSES - 1}, got {minority_label}")
    counts = [majority_count] * NUM_CLASSES
    counts[minority_label] = max(1, int(round(ratio * majority_count)))
    return generate_dataset(tuple(counts), seed)


def generate_documents(
    n_docs: int, sentences_per_doc: int, seed: int
) -> list[list[str]]:
    """Pretraining documents; sentence labels vary freely within a document."""
    if sentences_per_doc < 2:
        raise ConfigError("documents need at least 2 sentences for pair sampling")
    rng = np.random.default_rng(seed)
    return [
        [make_sentence(int(rng.integers(NUM_CLASSES)), rng) for _ in range(sentences_per_doc)]
        for _ in range(n_docs)
    ]
