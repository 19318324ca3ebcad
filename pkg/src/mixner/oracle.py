"""Brute-force reference implementations used to verify the fast paths.

Everything here is deliberately naive: scores are recomputed term by term in
plain Python, the partition sum enumerates all K^T sequences, and gradients
come from central finite differences.  Slow, obvious, and independent of the
dynamic programs in crf.py.
"""

import itertools
import json
import math
import random
from dataclasses import dataclass

import numpy as np

from .corpus import TagSet
from .crf import CrfModel, Gradient, nll_and_gradient
from .features import EncodedSentence, FeatureIndex

MAX_SEQUENCES = 4096

# Valid tag inventories for 1..4 tags ("O" first, rest sorted, I- closed).
_TINY_TAGS = ("O", "B-X", "B-Y", "I-X")


@dataclass
class TinyInstance:
    """A model and a single encoded sentence, small enough to enumerate."""

    model: CrfModel
    sentence: EncodedSentence


def _check_size(inst: TinyInstance) -> tuple[int, int]:
    t_len = inst.sentence.length
    k = inst.model.num_tags
    if k ** t_len > MAX_SEQUENCES:
        raise ValueError(f"instance too large to enumerate: "
                         f"{k}^{t_len} > {MAX_SEQUENCES} sequences")
    return t_len, k


def naive_sequence_score(model: CrfModel, enc: EncodedSentence, tags) -> float:
    """Term-by-term recomputation of the sequence score, no vectorization."""
    score = float(model.start[tags[0]])
    for t, k in enumerate(tags):
        for a in enc.attr_ids[t]:
            score += float(model.emissions[a, k])
        if t > 0:
            score += float(model.transitions[tags[t - 1], k])
    score += float(model.end[tags[-1]])
    return score


def enumerate_logZ(inst: TinyInstance) -> float:
    """log of the exact sum of exp(score) over every tag sequence."""
    t_len, k = _check_size(inst)
    scores = [naive_sequence_score(inst.model, inst.sentence, y)
              for y in itertools.product(range(k), repeat=t_len)]
    m = max(scores)
    return m + math.log(sum(math.exp(s - m) for s in scores))


def enumerate_best(inst: TinyInstance) -> tuple[list[int], float]:
    """Exact argmax sequence, breaking ties exactly like crf.viterbi.

    Backtracking from the end with first-maximum argmax returns the optimal
    sequence whose reversed tag tuple is smallest, so that is the key here.
    """
    t_len, k = _check_size(inst)
    best = None
    best_score = -math.inf
    for y in itertools.product(range(k), repeat=t_len):
        s = naive_sequence_score(inst.model, inst.sentence, y)
        if s > best_score or (s == best_score and y[::-1] < best[::-1]):
            best, best_score = y, s
    return list(best), best_score


def enumerate_marginals(inst: TinyInstance) -> tuple[np.ndarray, np.ndarray]:
    """Node and edge posteriors by summing probability over all sequences."""
    t_len, k = _check_size(inst)
    log_z = enumerate_logZ(inst)
    node = np.zeros((t_len, k))
    edge = np.zeros((t_len - 1, k, k))
    for y in itertools.product(range(k), repeat=t_len):
        p = math.exp(naive_sequence_score(inst.model, inst.sentence, y) - log_z)
        for t, tag in enumerate(y):
            node[t, tag] += p
            if t > 0:
                edge[t - 1, y[t - 1], tag] += p
    return node, edge


def fd_gradient(model: CrfModel, batch: list[EncodedSentence], l2: float = 0.0,
                h: float = 1e-5) -> Gradient:
    """Central finite differences of the regularized NLL, one coordinate at
    a time: (f(w + h) - f(w - h)) / (2h)."""
    out = Gradient.zeros_like(model)
    for block, target in zip(model.blocks(), out.blocks()):
        flat = block.reshape(-1)
        flat_out = target.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            f_plus = nll_and_gradient(model, batch, l2)[0]
            flat[j] = orig - h
            f_minus = nll_and_gradient(model, batch, l2)[0]
            flat[j] = orig
            flat_out[j] = (f_plus - f_minus) / (2.0 * h)
    return out


def random_instance(rng: random.Random, max_len: int = 6, max_tags: int = 4,
                    max_vocab: int = 5, weight_range: float = 2.0) -> TinyInstance:
    """A seeded tiny instance: short sentence, few tags, uniform weights."""
    k = rng.randint(1, max_tags)
    t_len = rng.randint(1, max_len)
    vocab = rng.randint(1, max_vocab)
    tagset = TagSet(_TINY_TAGS[:k])
    index = FeatureIndex(attribute_to_id={f"a{j}": j for j in range(vocab)},
                         tag_to_id={t: i for i, t in enumerate(tagset.tags)},
                         frozen=True)

    def uniform():
        return rng.uniform(-weight_range, weight_range)

    model = CrfModel(
        np.array([[uniform() for _ in range(k)] for _ in range(vocab)]),
        np.array([[uniform() for _ in range(k)] for _ in range(k)]),
        np.array([uniform() for _ in range(k)]),
        np.array([uniform() for _ in range(k)]),
        tagset, index)
    attr_ids = tuple(tuple(rng.sample(range(vocab), rng.randint(0, min(3, vocab))))
                     for _ in range(t_len))
    gold = tuple(rng.randrange(k) for _ in range(t_len))
    return TinyInstance(model, EncodedSentence(attr_ids, gold))


def serialize_instance(inst: TinyInstance) -> str:
    """JSON dump of a failing instance so it can be reproduced exactly."""
    return json.dumps({
        "tags": list(inst.model.tagset.tags),
        "attributes": inst.model.index.attributes(),
        "attr_ids": [list(ids) for ids in inst.sentence.attr_ids],
        "gold": list(inst.sentence.tag_ids),
        "emissions": inst.model.emissions.tolist(),
        "transitions": inst.model.transitions.tolist(),
        "start": inst.model.start.tolist(),
        "end": inst.model.end.tolist(),
    })


def gradient_error(analytic: Gradient, numeric: Gradient) -> float:
    """Error between gradients: ||a - n|| / max(||a||, ||n||, 1).

    Relative for gradients of norm >= 1, absolute below.  The floor keeps
    near-zero gradients (single-tag instances have a constant loss) from
    turning float cancellation noise into a large ratio.
    """
    a = analytic.ravel()
    n = numeric.ravel()
    denom = max(float(np.linalg.norm(a)), float(np.linalg.norm(n)), 1.0)
    return float(np.linalg.norm(a - n)) / denom


@dataclass
class CheckResult:
    name: str
    passed: int
    failed: int
    detail: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0


def run_verification(trials: int, seed: int, tol: float = 1e-9,
                     grad_tol: float = 1e-4, h: float = 1e-5) -> list[CheckResult]:
    """Compare the fast implementations against the oracles on random tiny
    instances; returns one result per check (logZ, viterbi, marginals,
    gradient), keeping the first failing instance for reproduction."""
    from . import crf

    results = {name: CheckResult(name, 0, 0) for name in
               ("logZ", "viterbi", "marginals", "gradient")}

    def record(name: str, ok: bool, inst: TinyInstance, message: str):
        r = results[name]
        if ok:
            r.passed += 1
        else:
            r.failed += 1
            if r.detail is None:
                r.detail = f"{message}\ninstance: {serialize_instance(inst)}"

    rng = random.Random(seed)
    l2_cycle = (0.0, 1e-4, 1e-2)
    for trial in range(trials):
        inst = random_instance(rng)
        model, enc = inst.model, inst.sentence

        diff = abs(crf.log_partition(model, enc) - enumerate_logZ(inst))
        record("logZ", diff <= tol, inst, f"trial {trial}: logZ differs by {diff:.3e}")

        path, score = crf.viterbi(model, enc)
        ref_path, ref_score = enumerate_best(inst)
        ok = abs(score - ref_score) <= tol and path == ref_path
        record("viterbi", ok, inst,
               f"trial {trial}: viterbi {path} ({score!r}) vs {ref_path} ({ref_score!r})")

        node, edge = crf.marginals(model, enc)
        ref_node, ref_edge = enumerate_marginals(inst)
        diff = max(float(np.max(np.abs(node - ref_node))),
                   float(np.max(np.abs(edge - ref_edge))) if edge.size else 0.0)
        record("marginals", diff <= tol, inst,
               f"trial {trial}: marginal differs by {diff:.3e}")

        l2 = l2_cycle[trial % len(l2_cycle)]
        analytic = nll_and_gradient(model, [enc], l2)[1]
        err = gradient_error(analytic, fd_gradient(model, [enc], l2, h))
        record("gradient", err <= grad_tol, inst,
               f"trial {trial}: gradient relative error {err:.3e} (l2={l2})")

    return list(results.values())
