"""Targeted four-stage web data engine: topics, search, parse, Q&A.

Every stage result is memoized in an append-only journal keyed by
(stage, key), so re-running a completed stage with the same inputs and the
same cached client responses appends nothing and changes nothing.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from html.parser import HTMLParser
from typing import Callable

from .clients import ChatClient, ClientError, PageClient, SearchClient

MIN_CONTEXT_WORDS = 50

TOPIC_PROMPT = (
    "List the major subfields of {field} and, for each subfield, around 20 "
    "specific topics suitable for encyclopedia lookups. Reply with a single "
    "JSON object mapping each subfield name to an array of topic strings."
)

QA_PROMPT = (
    "You are writing one visual question-answer pair about a figure.\n"
    "Figure caption: {caption}\n"
    "Surrounding text: {context}\n"
    "Write a question a student could answer by looking at the figure and "
    "reading the caption, then the answer. Reply with a JSON object with "
    'keys "Question" and "Answer".'
)


class EngineParseError(ValueError):
    """Raised when a client reply cannot be decoded; carries the raw payload."""

    def __init__(self, message: str, payload: str):
        super().__init__(f"{message}; raw payload: {payload!r}")
        self.payload = payload


# ---------------------------------------------------------------------------
# stage 1: topics


def _extract_json(text: str):
    start = text.find("{")
    if start < 0:
        raise ValueError("no JSON object found")
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return json.loads(text[start : i + 1])
    raise ValueError("unbalanced JSON object")


def engine_topics(field: str, client: ChatClient) -> dict[str, list[str]]:
    """Ask the chat client for subfield -> topic lists and validate the reply.

    A blank field yields an empty map without a client call. Duplicate
    topics in a subfield are dropped, keeping first occurrences.
    """
    if not field.strip():
        return {}
    raw = client.complete(TOPIC_PROMPT.format(field=field))
    try:
        payload = _extract_json(raw)
    except (ValueError, json.JSONDecodeError) as err:
        raise EngineParseError(f"topic reply is not a JSON object ({err})", raw) from err
    if not isinstance(payload, dict):
        raise EngineParseError("topic reply must be a JSON object", raw)
    out: dict[str, list[str]] = {}
    for subfield, topics in payload.items():
        if not isinstance(subfield, str) or not isinstance(topics, list):
            raise EngineParseError("topic reply must map subfield -> list of topics", raw)
        seen: list[str] = []
        for topic in topics:
            if not isinstance(topic, str):
                raise EngineParseError("topics must be strings", raw)
            if topic not in seen:
                seen.append(topic)
        out[subfield] = seen
    return out


# ---------------------------------------------------------------------------
# stage 2: search


def engine_search(topic: str, client: SearchClient, k: int = 10, retries: int = 2) -> list[str]:
    """Up to k https links for a topic, deduplicated, retrying transient failures."""
    attempt = 0
    while True:
        try:
            results = client.search(topic, k)
            break
        except ClientError:
            attempt += 1
            if attempt > retries:
                raise
    urls: list[str] = []
    for url in results:
        if not url.startswith("https://"):
            continue
        if url not in urls:
            urls.append(url)
        if len(urls) == k:
            break
    return urls


# ---------------------------------------------------------------------------
# stage 3: parsing


@dataclass(frozen=True)
class ImageRef:
    url: str
    caption: str


@dataclass(frozen=True)
class ParsedBlock:
    section: str
    text: str
    images: tuple[ImageRef, ...]


class _PageParser(HTMLParser):
    """Lenient extraction of (section heading, paragraph text, figure+caption)."""

    HEADINGS = {"h1", "h2", "h3", "h4"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.sections: list[dict] = [{"section": "", "text": [], "images": []}]
        self._capture: list[str] | None = None
        self._in_figure = False
        self._figure_url: str | None = None
        self._figcaption: list[str] | None = None

    def handle_starttag(self, tag, attrs):
        attrs = dict(attrs)
        if tag in self.HEADINGS:
            self.sections.append({"section": "", "text": [], "images": []})
            self._capture = []
        elif tag == "p":
            self._capture = []
        elif tag == "figure":
            self._in_figure = True
            self._figure_url = None
            self._figcaption = None
        elif tag == "img":
            src = attrs.get("src", "")
            if self._in_figure:
                self._figure_url = src
            elif src:
                self.sections[-1]["images"].append(ImageRef(url=src, caption=attrs.get("alt", "")))
        elif tag == "figcaption":
            self._figcaption = []

    def handle_endtag(self, tag):
        if tag in self.HEADINGS and self._capture is not None:
            self.sections[-1]["section"] = "".join(self._capture).strip()
            self._capture = None
        elif tag == "p" and self._capture is not None:
            text = "".join(self._capture).strip()
            if text:
                self.sections[-1]["text"].append(text)
            self._capture = None
        elif tag == "figcaption" and self._figcaption is not None:
            caption = "".join(self._figcaption)
            if self._in_figure and self._figure_url:
                self.sections[-1]["images"].append(ImageRef(url=self._figure_url, caption=caption))
                self._figure_url = None
            self._figcaption = None
        elif tag == "figure":
            if self._figure_url:  # figure without caption
                self.sections[-1]["images"].append(ImageRef(url=self._figure_url, caption=""))
            self._in_figure = False
            self._figure_url = None

    def handle_data(self, data):
        if self._figcaption is not None:
            self._figcaption.append(data)
        elif self._capture is not None:
            self._capture.append(data)

    def close(self):
        super().close()
        # flush anything a truncated document left open
        if self._figcaption is not None:
            self.handle_endtag("figcaption")
        if self._in_figure:
            self.handle_endtag("figure")
        if self._capture is not None:
            self.handle_endtag("p")


def engine_parse(html: str) -> list[ParsedBlock]:
    """Figure/caption pairs grouped with their nearest section text.

    Lenient: malformed markup never raises, sections without images are
    dropped, and captions are preserved exactly as written.
    """
    parser = _PageParser()
    parser.feed(html)
    parser.close()
    blocks = []
    for sec in parser.sections:
        if not sec["images"]:
            continue
        blocks.append(
            ParsedBlock(
                section=sec["section"],
                text=" ".join(sec["text"]),
                images=tuple(sec["images"]),
            )
        )
    return blocks


# ---------------------------------------------------------------------------
# stage 4: Q&A generation


@dataclass(frozen=True)
class EngineTuple:
    field: str
    subfield: str
    topic: str
    source_url: str
    image_url: str
    caption: str
    context: str


@dataclass(frozen=True)
class EngineItem:
    id: str
    field: str
    subfield: str
    topic: str
    source_url: str
    image_url: str
    caption: str
    context: str
    question: str
    answer: str

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "field": self.field,
            "subfield": self.subfield,
            "topic": self.topic,
            "source_url": self.source_url,
            "image_url": self.image_url,
            "caption": self.caption,
            "context": self.context,
            "Question": self.question,
            "Answer": self.answer,
        }

    @classmethod
    def from_record(cls, raw: dict) -> "EngineItem":
        return cls(
            id=str(raw["id"]),
            field=raw.get("field", ""),
            subfield=raw.get("subfield", ""),
            topic=raw.get("topic", ""),
            source_url=raw.get("source_url", ""),
            image_url=raw.get("image_url", ""),
            caption=raw.get("caption", ""),
            context=raw.get("context", ""),
            question=raw["Question"],
            answer=raw["Answer"],
        )


@dataclass(frozen=True)
class EngineRejection:
    reason: str
    tuple: EngineTuple


def engine_generate_qa(
    item: EngineTuple, client: ChatClient, min_words: int = MIN_CONTEXT_WORDS
) -> EngineItem | EngineRejection:
    """Filter thin contexts, then ask the chat client for a Q&A pair.

    Contexts under `min_words` words are rejected with reason
    "short-context"; client refusals and undecodable replies reject rather
    than raise so a batch run can keep going.
    """
    if len(item.context.split()) < min_words:
        return EngineRejection(reason="short-context", tuple=item)
    try:
        raw = client.complete(QA_PROMPT.format(caption=item.caption, context=item.context))
        payload = _extract_json(raw)
        question = str(payload["Question"])
        answer = str(payload["Answer"])
    except ClientError:
        return EngineRejection(reason="client-refusal", tuple=item)
    except (ValueError, KeyError, json.JSONDecodeError):
        return EngineRejection(reason="undecodable-reply", tuple=item)
    item_id = item.image_url.rsplit("/", 1)[-1] or item.topic
    return EngineItem(
        id=item_id,
        field=item.field,
        subfield=item.subfield,
        topic=item.topic,
        source_url=item.source_url,
        image_url=item.image_url,
        caption=item.caption,
        context=item.context,
        question=question,
        answer=answer,
    )


# ---------------------------------------------------------------------------
# resumable pipeline


class EngineJournal:
    """Append-only (stage, key) -> payload memo backing pipeline resumption."""

    def __init__(self, path: str | os.PathLike):
        self.path = str(path)
        self._entries: dict[tuple[str, str], object] = {}
        self.appends = 0
        if os.path.exists(self.path):
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    raw = json.loads(line)
                    self._entries[(raw["stage"], raw["key"])] = raw["payload"]

    def __len__(self) -> int:
        return len(self._entries)

    def memo(self, stage: str, key: str, compute: Callable[[], object]) -> object:
        slot = (stage, key)
        if slot in self._entries:
            return self._entries[slot]
        payload = compute()
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"stage": stage, "key": key, "payload": payload}) + "\n")
        self._entries[slot] = payload
        self.appends += 1
        return payload


class DataEngine:
    """End-to-end run over one field, memoized stage by stage."""

    def __init__(
        self,
        chat: ChatClient,
        search: SearchClient,
        pages: PageClient,
        journal: EngineJournal,
        links_per_topic: int = 10,
        min_words: int = MIN_CONTEXT_WORDS,
    ):
        self.chat = chat
        self.search = search
        self.pages = pages
        self.journal = journal
        self.links_per_topic = links_per_topic
        self.min_words = min_words
        self.rejections: list[EngineRejection] = []

    def run_field(self, field: str) -> list[EngineItem]:
        topics_map = self.journal.memo("topics", field, lambda: engine_topics(field, self.chat))
        items: list[EngineItem] = []
        for subfield, topics in topics_map.items():
            for topic in topics:
                urls = self.journal.memo(
                    "search",
                    topic,
                    lambda t=topic: engine_search(t, self.search, k=self.links_per_topic),
                )
                for url in urls:
                    blocks = self.journal.memo("parse", url, lambda u=url: self._parse_url(u))
                    for block in blocks:
                        for image in block["images"]:
                            tup = EngineTuple(
                                field=field,
                                subfield=subfield,
                                topic=topic,
                                source_url=url,
                                image_url=image["url"],
                                caption=image["caption"],
                                context=block["text"],
                            )
                            payload = self.journal.memo(
                                "qa", image["url"], lambda t=tup: self._generate(t)
                            )
                            if payload.get("rejected"):
                                continue
                            items.append(EngineItem.from_record(payload["item"]))
        return items

    def _parse_url(self, url: str) -> list[dict]:
        blocks = engine_parse(self.pages.fetch(url))
        return [
            {
                "section": b.section,
                "text": b.text,
                "images": [asdict(img) for img in b.images],
            }
            for b in blocks
        ]

    def _generate(self, tup: EngineTuple) -> dict:
        result = engine_generate_qa(tup, self.chat, min_words=self.min_words)
        if isinstance(result, EngineRejection):
            self.rejections.append(result)
            return {"rejected": True, "reason": result.reason}
        return {"rejected": False, "item": result.to_record()}
