"""Linear-chain CRF: scoring, inference, training, and persistence.

The score of a tag sequence y for a sentence with attributes attrs(i) is

    start[y_1] + sum_i sum_{a in attrs(i)} W_e[a, y_i]
               + sum_{i>=2} W_t[y_{i-1}, y_i] + end[y_T]

All inference runs in log space with max-subtraction log-sum-exp, so finite
weights can never overflow.  Training is maximum likelihood with an L2
penalty, optimized by mini-batch AdaGrad; everything is deterministic given
the seed.
"""

import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Dataset, Sentence, TagSet, Token
from .eval import score_entities
from .features import (DEFAULT_TEMPLATE, EncodedSentence, FeatureIndex,
                       TemplateConfig, encode_dataset)

MODEL_HEADER = "MIXNER-CRF v1"
_SECTIONS = ("tags", "attributes", "start", "end", "transitions", "emissions")
_ADAGRAD_EPS = 1e-8


@dataclass(eq=False)
class CrfModel:
    """Weight blocks plus the tag set and attribute index they are tied to.

    emissions has one row per attribute and one column per tag; transitions
    is indexed [previous, current].
    """

    emissions: np.ndarray
    transitions: np.ndarray
    start: np.ndarray
    end: np.ndarray
    tagset: TagSet
    index: FeatureIndex

    def __post_init__(self):
        a, k = self.emissions.shape
        if (self.transitions.shape != (k, k) or self.start.shape != (k,)
                or self.end.shape != (k,)):
            raise ValueError("inconsistent weight shapes")
        if a != self.index.num_attributes or k != len(self.tagset):
            raise ValueError("weights do not match the index/tag set")

    @classmethod
    def zeros(cls, index: FeatureIndex, tagset: TagSet) -> "CrfModel":
        k = len(tagset)
        return cls(np.zeros((index.num_attributes, k)), np.zeros((k, k)),
                   np.zeros(k), np.zeros(k), tagset, index)

    @property
    def num_tags(self) -> int:
        return len(self.tagset)

    def blocks(self) -> tuple[np.ndarray, ...]:
        return (self.emissions, self.transitions, self.start, self.end)


@dataclass(eq=False)
class Gradient:
    """Per-block gradients, same shapes as the model weights."""

    emissions: np.ndarray
    transitions: np.ndarray
    start: np.ndarray
    end: np.ndarray

    def blocks(self) -> tuple[np.ndarray, ...]:
        return (self.emissions, self.transitions, self.start, self.end)

    @classmethod
    def zeros_like(cls, model: CrfModel) -> "Gradient":
        return cls(*(np.zeros_like(b) for b in model.blocks()))

    def ravel(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.blocks()])


def _logsumexp(a: np.ndarray, axis: int | None = None):
    m = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return out.item()
    return np.squeeze(out, axis=axis)


def _emission_scores(model: CrfModel, enc: EncodedSentence) -> np.ndarray:
    """Per-position emission score rows: em[t, k] = sum of W_e over attrs."""
    em = np.zeros((enc.length, model.num_tags))
    for t, ids in enumerate(enc.attr_ids):
        if ids:
            em[t] = model.emissions[list(ids)].sum(axis=0)
    return em


def sequence_score(model: CrfModel, enc: EncodedSentence,
                   tags: tuple[int, ...] | list[int]) -> float:
    """Unnormalized log score of one tag sequence."""
    if len(tags) != enc.length:
        raise ValueError("tag sequence length does not match the sentence")
    em = _emission_scores(model, enc)
    # Accumulation order mirrors viterbi exactly, so the decoder's returned
    # score is bitwise equal to rescoring its returned sequence.
    score = float(model.start[tags[0]] + em[0, tags[0]])
    for t in range(1, enc.length):
        score = score + float(model.transitions[tags[t - 1], tags[t]])
        score = score + float(em[t, tags[t]])
    return score + float(model.end[tags[-1]])


def log_partition(model: CrfModel, enc: EncodedSentence) -> float:
    """log Z by the forward recursion."""
    em = _emission_scores(model, enc)
    alpha = model.start + em[0]
    for t in range(1, enc.length):
        alpha = _logsumexp(alpha[:, None] + model.transitions, axis=0) + em[t]
    return _logsumexp(alpha + model.end)


def _forward_backward(model: CrfModel, enc: EncodedSentence):
    em = _emission_scores(model, enc)
    t_len, k = em.shape
    alpha = np.empty((t_len, k))
    beta = np.empty((t_len, k))
    alpha[0] = model.start + em[0]
    for t in range(1, t_len):
        alpha[t] = _logsumexp(alpha[t - 1][:, None] + model.transitions, axis=0) + em[t]
    beta[t_len - 1] = model.end
    for t in range(t_len - 2, -1, -1):
        beta[t] = _logsumexp(model.transitions + (em[t + 1] + beta[t + 1])[None, :], axis=1)
    log_z = _logsumexp(alpha[t_len - 1] + model.end)
    return alpha, beta, em, log_z


def marginals(model: CrfModel, enc: EncodedSentence) -> tuple[np.ndarray, np.ndarray]:
    """Posterior tag distributions.

    Returns (node, edge): node[t, k] = P(y_t = k) with shape (T, K), and
    edge[t, j, k] = P(y_t = j, y_{t+1} = k) with shape (T-1, K, K).
    """
    alpha, beta, em, log_z = _forward_backward(model, enc)
    node = np.exp(alpha + beta - log_z)
    t_len, k = em.shape
    edge = np.empty((t_len - 1, k, k))
    for t in range(1, t_len):
        edge[t - 1] = np.exp(alpha[t - 1][:, None] + model.transitions
                             + (em[t] + beta[t])[None, :] - log_z)
    return node, edge


def nll_and_gradient(model: CrfModel, batch: list[EncodedSentence],
                     l2: float = 0.0) -> tuple[float, Gradient]:
    """Regularized negative log likelihood of a batch and its exact gradient.

    loss = sum_s (log Z_s - score(y_gold_s)) + (l2 / 2) * ||w||^2 over every
    weight block; the gradient is expected minus empirical feature counts
    plus l2 * w, accumulated sentence by sentence in batch order.
    """
    if not batch:
        raise ValueError("empty batch")
    grad = Gradient.zeros_like(model)
    loss = 0.0
    for enc in batch:
        alpha, beta, em, log_z = _forward_backward(model, enc)
        loss += log_z - sequence_score(model, enc, enc.tag_ids)
        node = np.exp(alpha + beta - log_z)
        gold = enc.tag_ids
        for t, ids in enumerate(enc.attr_ids):
            if ids:
                idx = list(ids)
                np.add.at(grad.emissions, idx, node[t])
                np.add.at(grad.emissions, (idx, gold[t]), -1.0)
        for t in range(1, enc.length):
            grad.transitions += np.exp(alpha[t - 1][:, None] + model.transitions
                                       + (em[t] + beta[t])[None, :] - log_z)
            grad.transitions[gold[t - 1], gold[t]] -= 1.0
        grad.start += node[0]
        grad.start[gold[0]] -= 1.0
        grad.end += node[-1]
        grad.end[gold[-1]] -= 1.0
    if l2:
        loss += 0.5 * l2 * sum(float(np.sum(w * w)) for w in model.blocks())
        for g, w in zip(grad.blocks(), model.blocks()):
            g += l2 * w
    return loss, grad


def viterbi(model: CrfModel, enc: EncodedSentence) -> tuple[list[int], float]:
    """Best tag sequence and its score; ties go to the lower tag id at each
    backtracking step (np.argmax already picks the first maximum)."""
    em = _emission_scores(model, enc)
    t_len, k = em.shape
    back = np.zeros((t_len, k), dtype=np.intp)
    delta = model.start + em[0]
    for t in range(1, t_len):
        cand = delta[:, None] + model.transitions
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(k)] + em[t]
    final = delta + model.end
    last = int(np.argmax(final))
    path = [last]
    for t in range(t_len - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    return path, float(final[last])


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 64
    patience: int = 4
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 42
    min_delta: float = 1e-4

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.patience < 0 or self.learning_rate <= 0:
            raise ValueError("patience must be >= 0 and learning_rate > 0")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_nll: float
    dev_f1: float
    seconds: float


@dataclass
class TrainHistory:
    records: list[EpochRecord]
    best_epoch: int


def _dev_f1(model: CrfModel, dev: Dataset, dev_encoded: list[EncodedSentence]) -> float:
    pred_sentences = []
    for s, enc in zip(dev.sentences, dev_encoded):
        path, _ = viterbi(model, enc)
        toks = tuple(Token(tok.surface, model.tagset.tags[k])
                     for tok, k in zip(s.tokens, path))
        pred_sentences.append(Sentence(toks, id=s.id))
    return score_entities(dev, Dataset(tuple(pred_sentences))).weighted_f1


def train(encoded_train: list[EncodedSentence], dev: Dataset, cfg: TrainConfig,
          template: TemplateConfig, index: FeatureIndex,
          tagset: TagSet) -> tuple[CrfModel, TrainHistory]:
    """Fit a CRF by mini-batch AdaGrad with early stopping on dev entity F1.

    Weights start at zero.  After every epoch the dev set is decoded and
    scored; when weighted F1 fails to improve by more than min_delta for more
    than `patience` consecutive epochs, training stops.  The returned model
    carries the weights of the best epoch (first occurrence on ties), and the
    whole procedure is reproducible bit for bit from the seed.
    """
    if not encoded_train:
        raise ValueError("empty training set")
    for si, s in enumerate(dev.sentences):
        for tok in s.tokens:
            if tok.tag not in index.tag_to_id:
                raise ValueError(f"dev sentence {si}: tag {tok.tag!r} "
                                 "is not in the training tag set")

    model = CrfModel.zeros(index, tagset)
    accum = Gradient.zeros_like(model)
    rng = random.Random(cfg.seed)
    order = list(range(len(encoded_train)))
    dev_encoded = encode_dataset(dev, index, template)

    records: list[EpochRecord] = []
    best_f1 = -1.0
    best_epoch = 0
    best_weights = tuple(b.copy() for b in model.blocks())
    stop_ref = -1.0
    bad_epochs = 0

    for epoch in range(1, cfg.epochs + 1):
        started = time.monotonic()
        rng.shuffle(order)
        epoch_loss = 0.0
        for lo in range(0, len(order), cfg.batch_size):
            batch = [encoded_train[i] for i in order[lo:lo + cfg.batch_size]]
            loss, grad = nll_and_gradient(model, batch, cfg.l2)
            epoch_loss += loss
            scale = 1.0 / len(batch)
            for w, g, acc in zip(model.blocks(), grad.blocks(), accum.blocks()):
                g *= scale
                acc += g * g
                w -= cfg.learning_rate * g / (np.sqrt(acc) + _ADAGRAD_EPS)
        f1 = _dev_f1(model, dev, dev_encoded)
        records.append(EpochRecord(epoch, epoch_loss, f1, time.monotonic() - started))
        if f1 > best_f1:
            best_f1 = f1
            best_epoch = epoch
            best_weights = tuple(b.copy() for b in model.blocks())
        if f1 > stop_ref + cfg.min_delta:
            stop_ref = f1
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > cfg.patience:
                break

    for w, best in zip(model.blocks(), best_weights):
        w[...] = best
    return model, TrainHistory(records, best_epoch)


def save_model(model: CrfModel, path: str | Path) -> None:
    """Write the model as versioned UTF-8 text; floats keep full precision."""
    lines = [MODEL_HEADER, "[tags]"]
    lines.extend(model.tagset.tags)
    lines.append("[attributes]")
    lines.extend(model.index.attributes())
    lines.append("[start]")
    lines.extend(repr(float(x)) for x in model.start)
    lines.append("[end]")
    lines.extend(repr(float(x)) for x in model.end)
    lines.append("[transitions]")
    lines.extend(" ".join(repr(float(x)) for x in row) for row in model.transitions)
    lines.append("[emissions]")
    lines.extend(" ".join(repr(float(x)) for x in row) for row in model.emissions)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _take_section(lines: list[str], pos: int, name: str) -> tuple[list[str], int]:
    if pos >= len(lines) or lines[pos] != f"[{name}]":
        raise ValueError(f"truncated or malformed model file: expected [{name}]")
    pos += 1
    items = []
    while pos < len(lines) and not lines[pos].startswith("["):
        items.append(lines[pos])
        pos += 1
    return items, pos


def _parse_floats(rows: list[str], width: int, section: str) -> np.ndarray:
    try:
        mat = [[float(x) for x in row.split()] for row in rows]
    except ValueError:
        raise ValueError(f"malformed number in [{section}]") from None
    if any(len(r) != width for r in mat):
        raise ValueError(f"truncated model file: bad row width in [{section}]")
    return np.array(mat, dtype=np.float64)


def load_model(path: str | Path) -> CrfModel:
    """Inverse of save_model; weights round trip bit for bit."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MODEL_HEADER:
        raise ValueError(f"unsupported version: expected {MODEL_HEADER!r} header")
    pos = 1
    sections = {}
    for name in _SECTIONS:
        sections[name], pos = _take_section(lines, pos, name)
    tagset = TagSet(tuple(sections["tags"]))
    k = len(tagset)
    attributes = sections["attributes"]
    index = FeatureIndex(attribute_to_id={a: i for i, a in enumerate(attributes)},
                         tag_to_id={t: i for i, t in enumerate(tagset.tags)},
                         frozen=True)
    if len(index.attribute_to_id) != len(attributes):
        raise ValueError("duplicate attribute in [attributes]")
    if len(sections["start"]) != k or len(sections["end"]) != k:
        raise ValueError("truncated model file: bad length in [start] or [end]")
    if len(sections["transitions"]) != k:
        raise ValueError("truncated model file: bad row count in [transitions]")
    if len(sections["emissions"]) != len(attributes):
        raise ValueError("truncated model file: bad row count in [emissions]")
    start = _parse_floats(sections["start"], 1, "start").reshape(-1)
    end = _parse_floats(sections["end"], 1, "end").reshape(-1)
    transitions = _parse_floats(sections["transitions"], k, "transitions")
    emissions = (_parse_floats(sections["emissions"], k, "emissions")
                 if attributes else np.zeros((0, k)))
    return CrfModel(emissions, transitions, start, end, tagset, index)
