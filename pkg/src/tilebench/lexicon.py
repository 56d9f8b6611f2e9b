"""Word graph used for move generation.

Words are stored in a minimized DAWG (directed acyclic word graph) built
incrementally from a sorted word list (Daciuk et al.). After the build the
graph is flattened into numpy arrays:

``child[node, letter]``
    target node or -1; letters are 0..25 for A..Z. Node 0 is the root.
``terminal[node]``
    True when the path from the root to ``node`` spells a word.
``edge_mask[node]``
    26-bit set of outgoing letters, used by the move generator to
    intersect with cross-check sets in one operation.

Bidirectional extension is answered from the same graph: ``hooks_after``
walks the prefix and reads the terminal children, ``hooks_before`` tries
each leading letter. Blank tiles are a move-generation concern; the graph
holds A-Z only.

Serialized lexicons are a small header (magic, version, payload length,
SHA-256) followed by a zlib-compressed payload of the edge lists.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import struct
import zlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import LexiconError

MAGIC = b"TBLX"
VERSION = 1
MIN_LEN = 2
MAX_LEN = 15
_HEADER = struct.Struct("<4sHHQ32s")
_ALPHA = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
_FULL_MASK = (1 << 26) - 1


@dataclass(frozen=True)
class BuildReport:
    accepted: int
    rejected_length: int
    duplicates: int


class _Node:
    __slots__ = ("final", "edges", "uid")
    _counter = 0

    def __init__(self):
        self.final = False
        self.edges: dict[str, _Node] = {}
        _Node._counter += 1
        self.uid = _Node._counter

    def key(self):
        return (self.final, tuple((ch, n.uid) for ch, n in sorted(self.edges.items())))


def _build_graph(words: list[str]) -> _Node:
    root = _Node()
    registry: dict = {}
    unchecked: list[tuple[_Node, str, _Node]] = []
    prev = ""

    def minimize(down_to: int) -> None:
        for i in range(len(unchecked) - 1, down_to - 1, -1):
            parent, ch, child = unchecked[i]
            k = child.key()
            if k in registry:
                parent.edges[ch] = registry[k]
            else:
                registry[k] = child
            unchecked.pop()

    for word in words:
        common = 0
        for a, b in zip(word, prev):
            if a != b:
                break
            common += 1
        minimize(common)
        node = unchecked[-1][2] if unchecked else root
        for ch in word[common:]:
            nxt = _Node()
            node.edges[ch] = nxt
            unchecked.append((node, ch, nxt))
            node = nxt
        node.final = True
        prev = word
    minimize(0)
    return root


def _flatten(root: _Node) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Renumber reachable nodes breadth-first; return (terminal, offsets, letters, targets)."""
    index = {root.uid: 0}
    order = [root]
    i = 0
    while i < len(order):
        for _, n in sorted(order[i].edges.items()):
            if n.uid not in index:
                index[n.uid] = len(order)
                order.append(n)
        i += 1
    terminal = np.array([n.final for n in order], dtype=np.uint8)
    offsets = np.zeros(len(order) + 1, dtype=np.uint32)
    letters: list[int] = []
    targets: list[int] = []
    for k, n in enumerate(order):
        for ch, m in sorted(n.edges.items()):
            letters.append(ord(ch) - 65)
            targets.append(index[m.uid])
        offsets[k + 1] = len(letters)
    return (terminal, offsets, np.array(letters, dtype=np.uint8),
            np.array(targets, dtype=np.uint32))


class Lexicon:
    """Immutable word graph; see the module docstring for the array layout."""

    def __init__(self, terminal, offsets, letters, targets, word_count: int,
                 report: BuildReport | None = None):
        self._terminal_u8 = np.ascontiguousarray(terminal, dtype=np.uint8)
        self._offsets = np.ascontiguousarray(offsets, dtype=np.uint32)
        self._letters = np.ascontiguousarray(letters, dtype=np.uint8)
        self._targets = np.ascontiguousarray(targets, dtype=np.uint32)
        self.word_count = int(word_count)
        self.report = report
        n = len(self._terminal_u8)
        self.terminal = self._terminal_u8.astype(np.bool_)
        self.child = np.full((n, 26), -1, dtype=np.int32)
        src = np.repeat(np.arange(n), np.diff(self._offsets.astype(np.int64)))
        self.child[src, self._letters] = self._targets.astype(np.int32)
        self.edge_mask = ((self.child >= 0) * (1 << np.arange(26))).sum(axis=1).astype(np.int32)
        for arr in (self.terminal, self.child, self.edge_mask):
            arr.setflags(write=False)

    @property
    def node_count(self) -> int:
        return len(self.terminal)

    @property
    def edge_count(self) -> int:
        return len(self._letters)

    def _walk(self, s: str, node: int = 0) -> int:
        child = self.child
        for ch in s:
            k = ord(ch) - 65
            if not 0 <= k < 26:
                return -1
            node = child[node, k]
            if node < 0:
                return -1
        return int(node)

    def contains(self, word: str) -> bool:
        node = self._walk(word.upper())
        return node > 0 and bool(self.terminal[node])

    __contains__ = contains

    def is_prefix(self, s: str) -> bool:
        return self._walk(s.upper()) >= 0

    def hooks_after(self, s: str) -> set[str]:
        """Letters L such that ``s + L`` is a word."""
        node = self._walk(s.upper())
        if node < 0:
            return set()
        kids = self.child[node]
        return {_ALPHA[k] for k in range(26) if kids[k] >= 0 and self.terminal[kids[k]]}

    def extensions(self, s: str) -> set[str]:
        """Letters L such that ``s + L`` is a prefix of some word."""
        node = self._walk(s.upper())
        if node < 0:
            return set()
        return {_ALPHA[k] for k in range(26) if self.child[node, k] >= 0}

    def hooks_before(self, s: str) -> set[str]:
        """Letters L such that ``L + s`` is a word."""
        s = s.upper()
        out = set()
        for k in range(26):
            node = self.child[0, k]
            if node >= 0:
                end = self._walk(s, node)
                if end >= 0 and self.terminal[end]:
                    out.add(_ALPHA[k])
        return out

    def words(self) -> Iterator[str]:
        """All words in alphabetical order."""
        stack = [(0, "")]
        while stack:
            node, prefix = stack.pop()
            if self.terminal[node] and prefix:
                yield prefix
            for k in range(25, -1, -1):
                nxt = self.child[node, k]
                if nxt >= 0:
                    stack.append((int(nxt), prefix + _ALPHA[k]))

    def __len__(self) -> int:
        return self.word_count

    def __repr__(self) -> str:
        return f"Lexicon(words={self.word_count}, nodes={self.node_count})"


def build_lexicon(words: Iterable[str]) -> Lexicon:
    """Build a lexicon from raw words (case-insensitive, A-Z only).

    Words shorter than 2 or longer than 15 letters are dropped and counted in
    ``lexicon.report``.
    """
    cleaned: set[str] = set()
    total = 0
    rejected = 0
    for raw in words:
        w = raw.strip().upper()
        if not w:
            continue
        total += 1
        if not (w.isascii() and w.isalpha()):
            raise LexiconError("non_alphabetic", f"word {raw.strip()!r} has characters outside A-Z")
        if not MIN_LEN <= len(w) <= MAX_LEN:
            rejected += 1
            continue
        cleaned.add(w)
    if not cleaned:
        raise LexiconError("empty_lexicon", "no usable words in input")
    ordered = sorted(cleaned)
    report = BuildReport(len(ordered), rejected, total - rejected - len(ordered))
    terminal, offsets, letters, targets = _flatten(_build_graph(ordered))
    return Lexicon(terminal, offsets, letters, targets, len(ordered), report)


def read_wordlist(path: str | Path) -> list[str]:
    """Read a plain one-word-per-line list; ``.gz`` files are decompressed."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt", encoding="ascii", errors="strict") as fh:
        return [line.strip() for line in fh if line.strip() and not line.startswith("#")]


def save_lexicon(lex: Lexicon, path: str | Path) -> None:
    buf = io.BytesIO()
    buf.write(struct.pack("<III", lex.node_count, lex.edge_count, lex.word_count))
    buf.write(lex._terminal_u8.tobytes())
    buf.write(lex._offsets.tobytes())
    buf.write(lex._letters.tobytes())
    buf.write(lex._targets.tobytes())
    payload = zlib.compress(buf.getvalue(), 6)
    header = _HEADER.pack(MAGIC, VERSION, 0, len(payload), hashlib.sha256(payload).digest())
    Path(path).write_bytes(header + payload)


def load_lexicon(path: str | Path) -> Lexicon:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise LexiconError("corrupt_lexicon", "file shorter than header")
    magic, version, _, length, digest = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise LexiconError("corrupt_lexicon", "bad magic bytes")
    if version != VERSION:
        raise LexiconError("format_version_mismatch", f"lexicon version {version}, expected {VERSION}")
    payload = data[_HEADER.size:]
    if len(payload) != length or hashlib.sha256(payload).digest() != digest:
        raise LexiconError("corrupt_lexicon", "checksum mismatch")
    raw = zlib.decompress(payload)
    n_nodes, n_edges, n_words = struct.unpack_from("<III", raw)
    pos = 12
    terminal = np.frombuffer(raw, np.uint8, n_nodes, pos)
    pos += n_nodes
    offsets = np.frombuffer(raw, np.uint32, n_nodes + 1, pos)
    pos += 4 * (n_nodes + 1)
    letters = np.frombuffer(raw, np.uint8, n_edges, pos)
    pos += n_edges
    targets = np.frombuffer(raw, np.uint32, n_edges, pos)
    return Lexicon(terminal, offsets, letters, targets, n_words)


def bundled_wordlist_path() -> Path:
    return Path(str(resources.files("tilebench.data").joinpath("enable.txt.gz")))


def load_any(path: str | Path) -> Lexicon:
    """Load a serialized lexicon, or build one from a word list.

    ``"enable"`` names the bundled ENABLE word list.
    """
    if str(path) == "enable":
        path = bundled_wordlist_path()
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return load_lexicon(path)
    return build_lexicon(read_wordlist(path))
