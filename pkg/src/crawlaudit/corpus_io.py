"""Corpus readers, sentence splitting and deduplication.

Monolingual corpora are plain UTF-8 text with one sentence per line,
optionally gzip-compressed (detected by a .gz extension). Parallel corpora
are two-column TSV. Invalid UTF-8 is a hard error with a byte offset:
an audit must not silently rewrite its evidence.
"""

from __future__ import annotations

import gzip
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator


class CorpusFormatError(ValueError):
    """Raised for undecodable bytes or malformed records."""


@dataclass(frozen=True)
class SentenceItem:
    """One audit unit of a monolingual corpus."""

    id: str
    lang: str
    text: str
    source_uri: str | None = None


@dataclass(frozen=True)
class SentencePair:
    """One audit unit of a parallel corpus."""

    id: str
    src_lang: str
    tgt_lang: str
    src_text: str
    tgt_text: str


@dataclass(frozen=True)
class CorpusDescriptor:
    dataset: str
    lang: str
    total_sentences: int
    kind: str  # "mono" | "parallel"


def _open_binary(path: str | Path) -> IO[bytes]:
    path = Path(path)
    if not path.exists():
        raise CorpusFormatError(f"corpus file not found: {path}")
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _decoded_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (line_index, text) pairs, raising on invalid UTF-8.

    The error names the absolute byte offset in the (decompressed) stream.
    """
    offset = 0
    with _open_binary(path) as fh:
        for idx, raw in enumerate(fh):
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise CorpusFormatError(
                    f"{path}: invalid UTF-8 at byte {offset + e.start} (line {idx + 1})"
                ) from None
            yield idx, text.rstrip("\r\n")
            offset += len(raw)


class MonolingualReader:
    """Iterator over SentenceItem with a skipped-empty-line counter."""

    def __init__(self, path: str | Path, lang: str, corpus_id: str | None = None):
        if not lang:
            raise ValueError("lang must be non-empty")
        self.path = path
        self.lang = lang
        self.corpus_id = corpus_id
        self.skipped_empty = 0

    def __iter__(self) -> Iterator[SentenceItem]:
        prefix = f"{self.corpus_id}:" if self.corpus_id else ""
        for idx, text in _decoded_lines(self.path):
            if not text.strip():
                self.skipped_empty += 1
                continue
            yield SentenceItem(id=f"{prefix}{idx}", lang=self.lang, text=text)


class ParallelReader:
    """Iterator over SentencePair from a two-column TSV."""

    def __init__(self, path: str | Path, src_lang: str, tgt_lang: str,
                 fmt: str = "tsv2", corpus_id: str | None = None):
        if fmt != "tsv2":
            raise ValueError(f"unsupported parallel format: {fmt}")
        if not src_lang or not tgt_lang:
            raise ValueError("src_lang and tgt_lang must be non-empty")
        self.path = path
        self.src_lang = src_lang
        self.tgt_lang = tgt_lang
        self.corpus_id = corpus_id
        self.warnings: list[str] = []
        if src_lang == tgt_lang:
            self.warnings.append(f"identical language pair: {src_lang}")
        self.skipped_empty = 0

    def __iter__(self) -> Iterator[SentencePair]:
        prefix = f"{self.corpus_id}:" if self.corpus_id else ""
        for idx, text in _decoded_lines(self.path):
            if not text.strip():
                self.skipped_empty += 1
                continue
            cols = text.split("\t")
            if len(cols) != 2:
                raise CorpusFormatError(
                    f"{self.path}: expected 2 tab-separated columns, got "
                    f"{len(cols)} on line {idx + 1}"
                )
            yield SentencePair(id=f"{prefix}{idx}", src_lang=self.src_lang,
                               tgt_lang=self.tgt_lang, src_text=cols[0],
                               tgt_text=cols[1])


def read_monolingual(path: str | Path, lang: str,
                     corpus_id: str | None = None) -> MonolingualReader:
    return MonolingualReader(path, lang, corpus_id)


def read_parallel(path: str | Path, src_lang: str, tgt_lang: str,
                  fmt: str = "tsv2", corpus_id: str | None = None) -> ParallelReader:
    return ParallelReader(path, src_lang, tgt_lang, fmt, corpus_id)


# Terminal punctuation marks that end a sentence when followed by whitespace.
_TERMINAL_SPLIT = re.compile(r"(?<=[.!?։。؟।])\s+")


def split_sentences(document: str) -> list[str]:
    """Split a document into sentences.

    Splits on newlines first, then after terminal punctuation followed by
    whitespace. Never yields empty strings and never drops non-whitespace
    characters.
    """
    out: list[str] = []
    for line in document.split("\n"):
        for part in _TERMINAL_SPLIT.split(line):
            part = part.strip()
            if part:
                out.append(part)
    return out


_WS_RUN = re.compile(r"\s+")


def dedup_key(text: str) -> str:
    """Trim and collapse internal whitespace; no case folding."""
    return _WS_RUN.sub(" ", text.strip())


class Deduplicator:
    """Keep the first occurrence per dedup key; counts removals."""

    def __init__(self, items: Iterable):
        self._items = items
        self.removed = 0

    def __iter__(self):
        seen: set[str] = set()
        for item in self._items:
            key = dedup_key(getattr(item, "text", item))
            if key in seen:
                self.removed += 1
                continue
            seen.add(key)
            yield item


def deduplicate(items: Iterable) -> Deduplicator:
    return Deduplicator(items)


def item_to_record(item: SentenceItem | SentencePair, corpus: str = "") -> dict:
    """Serialize an audit unit to the annotation JSONL schema."""
    if isinstance(item, SentencePair):
        return {"id": item.id, "corpus": corpus,
                "lang": f"{item.src_lang}-{item.tgt_lang}",
                "src": item.src_text, "tgt": item.tgt_text}
    return {"id": item.id, "corpus": corpus, "lang": item.lang,
            "src": item.text}


def write_jsonl(records: Iterable[dict], fh) -> int:
    n = 0
    for rec in records:
        fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
        n += 1
    return n
