"""CoNLL-U reading/writing and the dependency tree data model.

Node 0 is the dummy root; words are numbered 1..n.  Multiword token lines
and (in lenient mode) empty nodes are carried through untouched so that a
file can be read and written back byte for byte.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Iterator, Sequence, Union

__all__ = [
    "ConlluError",
    "TreeError",
    "Token",
    "MultiwordToken",
    "Sentence",
    "Arc",
    "GoldTree",
    "read_conllu",
    "write_conllu",
    "loads",
    "dumps",
    "is_nonprojective",
]

UNSET = "_"


class ConlluError(ValueError):
    """Malformed CoNLL-U input.  ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TreeError(ValueError):
    """An arc set that is not a well-formed dependency tree."""


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str = UNSET
    upos: str = UNSET
    xpos: str = UNSET
    feats: str = UNSET
    head: int | None = None
    deprel: str | None = None
    deps: str = UNSET
    misc: str = UNSET

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"token id must be >= 1, got {self.id}")
        if not self.form:
            raise ValueError(f"token {self.id} has an empty form")
        if self.head is not None and self.head < 0:
            raise ValueError(f"token {self.id} has negative head {self.head}")

    def columns(self) -> list[str]:
        return [
            str(self.id),
            self.form,
            self.lemma,
            self.upos,
            self.xpos,
            self.feats,
            UNSET if self.head is None else str(self.head),
            UNSET if self.deprel is None else self.deprel,
            self.deps,
            self.misc,
        ]


@dataclass(frozen=True)
class MultiwordToken:
    """A surface token spanning words ``start..end`` (the ``3-4`` lines)."""

    start: int
    end: int
    surface: str
    misc: str = UNSET

    def line(self) -> str:
        return "\t".join(
            [f"{self.start}-{self.end}", self.surface] + [UNSET] * 7 + [self.misc]
        )


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()
    mwt_ranges: tuple[MultiwordToken, ...] = ()
    # lenient mode only: (id of the word the empty node follows, raw line)
    empty_nodes: tuple[tuple[int, str], ...] = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "comments", tuple(self.comments))
        object.__setattr__(self, "mwt_ranges", tuple(self.mwt_ranges))
        object.__setattr__(self, "empty_nodes", tuple(self.empty_nodes))
        for expected, tok in enumerate(self.tokens, start=1):
            if tok.id != expected:
                raise ValueError(f"token ids must be 1..n in order; found {tok.id} at position {expected}")
        n = len(self.tokens)
        last_end = 0
        for mwt in self.mwt_ranges:
            if not (1 <= mwt.start < mwt.end <= n) or mwt.start <= last_end:
                raise ValueError(f"bad multiword range {mwt.start}-{mwt.end}")
            last_end = mwt.end
        for tok in self.tokens:
            if tok.head is not None and tok.head > n:
                raise ValueError(f"head {tok.head} of token {tok.id} out of range 0..{n}")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def heads(self) -> list[int | None]:
        return [t.head for t in self.tokens]

    @property
    def deprels(self) -> list[str | None]:
        return [t.deprel for t in self.tokens]

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def is_parsed(self) -> bool:
        return all(t.head is not None and t.deprel is not None for t in self.tokens)

    def with_parse(self, heads: Sequence[int], deprels: Sequence[str]) -> "Sentence":
        """Copy of the sentence with HEAD and DEPREL replaced; every other column is kept."""
        if len(heads) != self.n or len(deprels) != self.n:
            raise ValueError("heads/deprels length does not match sentence length")
        tokens = tuple(
            replace(tok, head=int(h), deprel=d) for tok, h, d in zip(self.tokens, heads, deprels)
        )
        return replace(self, tokens=tokens)

    def lines(self) -> Iterator[str]:
        yield from self.comments
        mwts = {m.start: m for m in self.mwt_ranges}
        empties: dict[int, list[str]] = {}
        for after, raw in self.empty_nodes:
            empties.setdefault(after, []).append(raw)
        yield from empties.get(0, [])
        for tok in self.tokens:
            if tok.id in mwts:
                yield mwts[tok.id].line()
            yield "\t".join(tok.columns())
            yield from empties.get(tok.id, [])


@dataclass(frozen=True)
class Arc:
    head: int
    label: str
    dep: int

    def __post_init__(self):
        if self.head == self.dep:
            raise TreeError(f"self-loop on node {self.dep}")
        if self.dep < 1 or self.head < 0:
            raise TreeError(f"bad arc {self.head}->{self.dep}")


@dataclass(frozen=True)
class GoldTree:
    """A labeled dependency tree over nodes 0..n, node 0 being the dummy root.

    Construction validates single-headedness, coverage of 1..n and
    acyclicity (which, with every word headed, implies connectivity).
    """

    n: int
    arcs: tuple[Arc, ...]

    def __post_init__(self):
        arcs = tuple(sorted(self.arcs, key=lambda a: a.dep))
        object.__setattr__(self, "arcs", arcs)
        if self.n < 1:
            raise TreeError("a tree needs at least one word")
        seen = [False] * (self.n + 1)
        for a in arcs:
            if a.dep > self.n or a.head > self.n:
                raise TreeError(f"arc {a.head}->{a.dep} out of range 0..{self.n}")
            if seen[a.dep]:
                raise TreeError(f"node {a.dep} has more than one head")
            seen[a.dep] = True
        if len(arcs) != self.n:
            missing = [i for i in range(1, self.n + 1) if not seen[i]]
            raise TreeError(f"nodes without a head: {missing}")
        _check_acyclic([0] + [a.head for a in arcs])

    @classmethod
    def from_heads(cls, heads: Sequence[int], labels: Sequence[str] | None = None) -> "GoldTree":
        """Build from 1-based head list ``heads[k]`` = head of word k+1."""
        if labels is None:
            labels = ["dep"] * len(heads)
        return cls(len(heads), tuple(Arc(int(h), lab, d) for d, (h, lab) in enumerate(zip(heads, labels), 1)))

    @classmethod
    def from_sentence(cls, sentence: Sentence) -> "GoldTree":
        if not sentence.is_parsed:
            unset = [t.id for t in sentence.tokens if t.head is None or t.deprel is None]
            raise TreeError(f"tokens without head/deprel: {unset}")
        return cls.from_heads(sentence.heads, sentence.deprels)  # type: ignore[arg-type]

    @property
    def heads(self) -> list[int]:
        """Head of every node, index 0 holding -1 for the root."""
        return [-1] + [a.head for a in self.arcs]

    @property
    def labels(self) -> list[str | None]:
        return [None] + [a.label for a in self.arcs]

    def arc_for(self, dep: int) -> Arc:
        return self.arcs[dep - 1]


def _check_acyclic(heads: Sequence[int]) -> None:
    # heads[0] is ignored; 0 = visiting, 1 = done
    state = [-1] * len(heads)
    state[0] = 1
    for start in range(1, len(heads)):
        path = []
        node = start
        while state[node] == -1:
            state[node] = 0
            path.append(node)
            node = heads[node]
        if state[node] == 0:
            raise TreeError(f"cycle through node {node}")
        for p in path:
            state[p] = 1


def is_nonprojective(tree: GoldTree) -> bool:
    """True iff two arcs of the tree cross when drawn above the sentence."""
    spans = sorted((min(a.head, a.dep), max(a.head, a.dep)) for a in tree.arcs)
    # sorted by left end: arc k crosses an earlier arc iff it starts strictly
    # inside it and ends strictly outside
    for k, (lk, rk) in enumerate(spans):
        for li, ri in spans[:k]:
            if li < lk < ri < rk:
                return True
    return False


# --- reading -----------------------------------------------------------------

Source = Union[str, bytes, IO[str], IO[bytes]]


def _text_lines(source: Source) -> Iterable[str]:
    if isinstance(source, bytes):
        return source.decode("utf-8").split("\n")
    if isinstance(source, str):
        return source.split("\n")
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.split("\n")


def _parse_int(value: str, what: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConlluError(f"non-integer {what} {value!r}", lineno) from None


def read_conllu(source: Source, strict: bool = True) -> list[Sentence]:
    """Parse CoNLL-U text into sentences.

    ``source`` may be a text or binary stream, or the file contents as
    ``str``/``bytes``.  In strict mode empty nodes (ids like ``5.1``) and
    fully annotated sentences that are not single-rooted trees are
    rejected; lenient mode passes empty nodes through and accepts any head
    assignment within range.
    """
    sentences: list[Sentence] = []
    block: list[tuple[int, str]] = []
    for lineno, raw in enumerate(_text_lines(source), start=1):
        line = raw.rstrip()
        if line:
            block.append((lineno, line))
        elif block:
            sentences.append(_parse_block(block, strict))
            block = []
    if block:
        sentences.append(_parse_block(block, strict))
    return sentences


def _parse_block(block: list[tuple[int, str]], strict: bool) -> Sentence:
    comments: list[str] = []
    tokens: list[Token] = []
    mwts: list[MultiwordToken] = []
    empties: list[tuple[int, str]] = []
    head_lines: list[int] = []
    for lineno, line in block:
        if line.startswith("#"):
            if tokens or mwts or empties:
                raise ConlluError("comment line inside a sentence body", lineno)
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"expected 10 tab-separated columns, found {len(cols)}", lineno)
        tid = cols[0]
        if "-" in tid:
            lo, _, hi = tid.partition("-")
            start, end = _parse_int(lo, "range start", lineno), _parse_int(hi, "range end", lineno)
            if start != len(tokens) + 1 or end <= start:
                raise ConlluError(f"multiword range {tid} out of place", lineno)
            if mwts and start <= mwts[-1].end:
                raise ConlluError(f"multiword range {tid} overlaps the previous one", lineno)
            mwts.append(MultiwordToken(start, end, cols[1], cols[9]))
            continue
        if "." in tid:
            if strict:
                raise ConlluError(f"empty node {tid} not allowed in strict mode", lineno)
            empties.append((len(tokens), line))
            continue
        wid = _parse_int(tid, "word id", lineno)
        if wid != len(tokens) + 1:
            raise ConlluError(f"word id {wid} is not contiguous (expected {len(tokens) + 1})", lineno)
        if not cols[1]:
            raise ConlluError("empty FORM", lineno)
        head = None if cols[6] == UNSET else _parse_int(cols[6], "head", lineno)
        if head is not None and head < 0:
            raise ConlluError(f"negative head {head}", lineno)
        deprel = None if cols[7] == UNSET else cols[7]
        tokens.append(Token(wid, cols[1], cols[2], cols[3], cols[4], cols[5], head, deprel, cols[8], cols[9]))
        head_lines.append(lineno)
    if not tokens:
        raise ConlluError("sentence without word lines", block[0][0])
    n = len(tokens)
    for tok, lineno in zip(tokens, head_lines):
        if tok.head is not None and tok.head > n:
            raise ConlluError(f"head {tok.head} out of range 0..{n}", lineno)
    for m in mwts:
        if m.end > n:
            raise ConlluError(f"multiword range {m.start}-{m.end} exceeds sentence length {n}", block[0][0])
    sentence = Sentence(tuple(tokens), tuple(comments), tuple(mwts), tuple(empties))
    if strict and sentence.is_parsed:
        try:
            GoldTree.from_sentence(sentence)
        except TreeError as exc:
            raise ConlluError(f"not a dependency tree: {exc}", block[0][0]) from None
        roots = sum(1 for t in tokens if t.head == 0)
        if roots != 1:
            raise ConlluError(f"expected exactly one root word, found {roots}", block[0][0])
    return sentence


def loads(text: str, strict: bool = True) -> list[Sentence]:
    return read_conllu(text, strict=strict)


# --- writing -----------------------------------------------------------------


def write_conllu(sentences: Iterable[Sentence], sink: IO, require_parse: bool = True) -> None:
    """Write sentences to a text or binary stream, one blank line after each.

    With ``require_parse`` every word must carry a head and a deprel.
    """
    binary = not isinstance(sink, io.TextIOBase) and "b" in getattr(sink, "mode", "b")
    for sentence in sentences:
        if require_parse and not sentence.is_parsed:
            missing = [t.id for t in sentence.tokens if t.head is None or t.deprel is None]
            raise ConlluError(f"cannot write unparsed words {missing}")
        chunk = "\n".join(sentence.lines()) + "\n\n"
        sink.write(chunk.encode("utf-8") if binary else chunk)


def dumps(sentences: Iterable[Sentence], require_parse: bool = True) -> str:
    buf = io.StringIO()
    write_conllu(sentences, buf, require_parse=require_parse)
    return buf.getvalue()
