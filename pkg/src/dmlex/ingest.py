"""Europarl-style corpus ingestion: parsing, markup stripping, tokenization."""

import logging
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

# Punctuation characters split into standalone tokens.
PUNCTUATION = set(".,;:!?\"'()[]-—…«»")

CHAPTER_PREFIX = "<CHAPTER"
SPEAKER_PREFIX = "<SPEAKER"
PARAGRAPH_MARK = "<P>"


class DecodeError(ValueError):
    """Input bytes are not valid UTF-8."""

    def __init__(self, byte_offset, message=None):
        self.byte_offset = byte_offset
        super().__init__(message or f"invalid UTF-8 at byte offset {byte_offset}")


@dataclass
class RawDocument:
    """Structured raw file: chapters -> speaker turns -> paragraphs -> lines."""

    file_id: str
    chapters: list  # list[list[list[list[str]]]]


@dataclass
class Document:
    """Tokenized, lowercased document keeping paragraph anchors."""

    file_id: str
    language: str
    paragraphs: list  # list of paragraphs; paragraph = list of token lists


@dataclass
class ParagraphPair:
    src_paragraph: list
    tgt_paragraph: list
    pair_index: int


def decode_utf8(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(exc.start) from exc


def parse_europarl_file(raw: str, file_id: str = "") -> RawDocument:
    """Group content lines under <CHAPTER>/<SPEAKER>/<P> markers.

    Content appearing before any marker is accepted under an implicit
    chapter/speaker/paragraph.
    """
    chapters = []
    current_chapter = None
    current_speaker = None
    current_paragraph = None

    def open_chapter():
        nonlocal current_chapter, current_speaker, current_paragraph
        current_chapter = []
        chapters.append(current_chapter)
        current_speaker = None
        current_paragraph = None

    def open_speaker():
        nonlocal current_speaker, current_paragraph
        if current_chapter is None:
            open_chapter()
        current_speaker = []
        current_chapter.append(current_speaker)
        current_paragraph = None

    def open_paragraph():
        nonlocal current_paragraph
        if current_speaker is None:
            open_speaker()
        current_paragraph = []
        current_speaker.append(current_paragraph)

    for line in raw.splitlines():
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith(CHAPTER_PREFIX):
            open_chapter()
        elif line.startswith(SPEAKER_PREFIX):
            open_speaker()
        elif line.startswith(PARAGRAPH_MARK):
            open_paragraph()
        else:
            if current_paragraph is None:
                open_paragraph()
            current_paragraph.append(line)

    return RawDocument(file_id=file_id, chapters=chapters)


def strip_markup(doc: RawDocument) -> list:
    """Flatten chapter/speaker nesting to a document-ordered paragraph list."""
    paragraphs = []
    for chapter in doc.chapters:
        for speaker in chapter:
            for paragraph in speaker:
                if paragraph:
                    paragraphs.append(list(paragraph))
    return paragraphs


def _is_letter(ch: str) -> bool:
    return ch.isalpha()


def tokenize(sentence: str) -> list:
    """Split a line into tokens on whitespace and the fixed punctuation set.

    Apostrophes and hyphens flanked by letters stay inside the word
    (aujourd'hui, well-known). No character other than whitespace is lost.
    """
    tokens = []
    current = []

    def flush():
        if current:
            tokens.append("".join(current))
            current.clear()

    n = len(sentence)
    for idx, ch in enumerate(sentence):
        if ch.isspace():
            flush()
        elif ch in PUNCTUATION:
            if ch in "'-" and 0 < idx < n - 1 and _is_letter(sentence[idx - 1]) and _is_letter(sentence[idx + 1]):
                current.append(ch)
            else:
                flush()
                tokens.append(ch)
        else:
            current.append(ch)
    flush()
    return tokens


def normalize_case(tokens: list) -> list:
    return [tok.lower() for tok in tokens]


def build_document(raw: RawDocument, language: str) -> Document:
    """strip_markup + tokenize + lowercase, dropping empty sentences/paragraphs."""
    paragraphs = []
    for para_lines in strip_markup(raw):
        sentences = []
        for line in para_lines:
            tokens = normalize_case(tokenize(line))
            if tokens:
                sentences.append(tokens)
        if sentences:
            paragraphs.append(sentences)
    return Document(file_id=raw.file_id, language=language, paragraphs=paragraphs)


def pair_documents(src: Document, tgt: Document) -> list:
    """Pair paragraphs positionally; on count mismatch collapse each document
    into one synthetic paragraph (the corpus collapse rule)."""
    if not src.paragraphs or not tgt.paragraphs:
        log.warning(
            "empty document side for %s (%s: %d paragraphs, %s: %d paragraphs)",
            src.file_id, src.language, len(src.paragraphs), tgt.language, len(tgt.paragraphs),
        )
        return []
    if len(src.paragraphs) == len(tgt.paragraphs):
        return [
            ParagraphPair(src_paragraph=s, tgt_paragraph=t, pair_index=k)
            for k, (s, t) in enumerate(zip(src.paragraphs, tgt.paragraphs))
        ]
    src_all = [sent for para in src.paragraphs for sent in para]
    tgt_all = [sent for para in tgt.paragraphs for sent in para]
    return [ParagraphPair(src_paragraph=src_all, tgt_paragraph=tgt_all, pair_index=0)]


def load_document(path, language: str, file_id: str | None = None) -> Document:
    with open(path, "rb") as fh:
        text = decode_utf8(fh.read())
    if file_id is None:
        import os

        file_id = os.path.basename(str(path))
    return build_document(parse_europarl_file(text, file_id=file_id), language)


def write_tokenized_document(doc: Document, path) -> None:
    """One sentence per line, tokens space-separated, blank line between paragraphs."""
    with open(path, "w", encoding="utf-8") as fh:
        for k, paragraph in enumerate(doc.paragraphs):
            if k:
                fh.write("\n")
            for sentence in paragraph:
                fh.write(" ".join(sentence) + "\n")


def read_tokenized_document(path, language: str, file_id: str | None = None) -> Document:
    if file_id is None:
        import os

        file_id = os.path.basename(str(path))
    paragraphs = []
    current = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                if current:
                    paragraphs.append(current)
                    current = []
            else:
                current.append(line.split())
    if current:
        paragraphs.append(current)
    return Document(file_id=file_id, language=language, paragraphs=paragraphs)
