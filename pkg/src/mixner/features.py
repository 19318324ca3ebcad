"""First-order feature templates and the attribute/tag index.

Every position gets a bias plus the current, previous, and next surface
forms; tag context is handled entirely by the transition weights of the
model, never by the attributes.
"""

from collections import Counter
from dataclasses import dataclass, field

from .corpus import Dataset, Sentence, TagSet

BOS = "<BOS>"
EOS = "<EOS>"


@dataclass(frozen=True)
class TemplateConfig:
    """Optional extras on top of the fixed default template."""

    lowercase: bool = False
    affixes: bool = False
    max_affix: int = 3


DEFAULT_TEMPLATE = TemplateConfig()


def extract_attributes(sentence: Sentence, i: int,
                       template: TemplateConfig = DEFAULT_TEMPLATE) -> list[str]:
    """Attribute strings for position i; exactly 4 under the default template."""
    if not 0 <= i < len(sentence.tokens):
        raise IndexError(f"position {i} out of range for sentence of "
                         f"length {len(sentence.tokens)}")
    w = sentence.tokens[i].surface
    prev = sentence.tokens[i - 1].surface if i > 0 else BOS
    nxt = sentence.tokens[i + 1].surface if i + 1 < len(sentence.tokens) else EOS
    attrs = ["b", f"w0={w}", f"w-1={prev}", f"w+1={nxt}"]
    if template.lowercase:
        attrs.append(f"w0.lower={w.lower()}")
        if prev != BOS:
            attrs.append(f"w-1.lower={prev.lower()}")
        if nxt != EOS:
            attrs.append(f"w+1.lower={nxt.lower()}")
    if template.affixes:
        for n in range(1, min(template.max_affix, len(w)) + 1):
            attrs.append(f"p{n}={w[:n]}")
            attrs.append(f"s{n}={w[-n:]}")
    return attrs


@dataclass
class FeatureIndex:
    """Bidirectional numbering of attributes and tags.

    Attribute ids are dense and allocated in first-seen order while the index
    is unfrozen; once frozen, unknown attributes simply look up as None.
    """

    attribute_to_id: dict[str, int] = field(default_factory=dict)
    tag_to_id: dict[str, int] = field(default_factory=dict)
    frozen: bool = False

    def add_attribute(self, attribute: str) -> int:
        if self.frozen:
            raise ValueError("cannot add attributes to a frozen index")
        return self.attribute_to_id.setdefault(attribute, len(self.attribute_to_id))

    def attribute_id(self, attribute: str) -> int | None:
        return self.attribute_to_id.get(attribute)

    def freeze(self) -> None:
        self.frozen = True

    @property
    def num_attributes(self) -> int:
        return len(self.attribute_to_id)

    @property
    def num_tags(self) -> int:
        return len(self.tag_to_id)

    def attributes(self) -> list[str]:
        """Attribute strings ordered by id."""
        return sorted(self.attribute_to_id, key=self.attribute_to_id.get)


@dataclass(frozen=True)
class EncodedSentence:
    """A sentence reduced to attribute ids per position plus gold tag ids."""

    attr_ids: tuple[tuple[int, ...], ...]
    tag_ids: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "attr_ids",
                           tuple(tuple(ids) for ids in self.attr_ids))
        object.__setattr__(self, "tag_ids", tuple(self.tag_ids))
        if len(self.attr_ids) != len(self.tag_ids) or not self.tag_ids:
            raise ValueError("attr_ids and tag_ids must be non-empty and aligned")

    @property
    def length(self) -> int:
        return len(self.tag_ids)


def build_index(train: Dataset, tagset: TagSet,
                template: TemplateConfig = DEFAULT_TEMPLATE,
                min_count: int = 1) -> FeatureIndex:
    """Count attributes over the training data and keep those seen enough.

    Ids follow first occurrence order, so the index is a deterministic
    function of the data and the template.
    """
    if not train.sentences:
        raise ValueError("empty training set")
    counts: Counter[str] = Counter()
    for s in train.sentences:
        for i in range(len(s.tokens)):
            counts.update(extract_attributes(s, i, template))
    index = FeatureIndex(tag_to_id={t: k for k, t in enumerate(tagset.tags)})
    for attribute, n in counts.items():
        if n >= min_count:
            index.add_attribute(attribute)
    index.freeze()
    return index


def encode_dataset(ds: Dataset, index: FeatureIndex,
                   template: TemplateConfig = DEFAULT_TEMPLATE) -> list[EncodedSentence]:
    """Map every sentence to attribute ids, silently dropping unknown attributes."""
    if not index.frozen:
        raise ValueError("the index must be frozen before encoding")
    encoded = []
    for si, s in enumerate(ds.sentences):
        attr_ids = []
        tag_ids = []
        for i, tok in enumerate(s.tokens):
            ids = [index.attribute_to_id[a]
                   for a in extract_attributes(s, i, template)
                   if a in index.attribute_to_id]
            attr_ids.append(tuple(ids))
            tid = index.tag_to_id.get(tok.tag)
            if tid is None:
                raise ValueError(f"sentence {si}, position {i}: "
                                 f"tag {tok.tag!r} is not in the tag set")
            tag_ids.append(tid)
        encoded.append(EncodedSentence(tuple(attr_ids), tuple(tag_ids)))
    return encoded
