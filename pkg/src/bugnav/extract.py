"""Pull structured facts out of a repository snapshot.

Dependencies from Maven and Gradle build files, permissions from the
Android manifest, widget names and ids from layout XML, and token
streams from Java sources. Extractors never raise on malformed input;
they log a warning and return what they could read.
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from bugnav.corpus.models import IssueDocument, RepoSnapshot
from bugnav.textprep import split_camel, stem

log = logging.getLogger(__name__)

# quoted coordinate: implementation 'group:artifact:version'
_GRADLE_COORD_RE = re.compile(r"""['"]([\w.-]+):([\w.-]+):[^'"]+['"]""")
# map style: group: 'x', name: 'y'
_GRADLE_MAP_RE = re.compile(
    r"""group\s*:\s*['"]([\w.-]+)['"]\s*,\s*name\s*:\s*['"]([\w.-]+)['"]"""
)
_ANDROID_PERMISSION_PREFIX = "android.permission."


@dataclass(frozen=True)
class DependencyId:
    group: str
    artifact: str

    @property
    def canonical(self) -> str:
        return f"{self.group}:{self.artifact}"


@dataclass
class CodeToken:
    kind: str
    text: Optional[str] = None


@dataclass
class CodeTokenStream:
    tokens: List[CodeToken] = field(default_factory=list)

    def kinds(self) -> Tuple[str, ...]:
        """Token kinds only; identifiers abstracted away."""
        return tuple(t.kind for t in self.tokens)

    def texts(self) -> Tuple[Optional[str], ...]:
        return tuple(t.text for t in self.tokens)

    def exact(self) -> Tuple[Tuple[str, Optional[str]], ...]:
        """Kinds plus identifier spellings, for exact-match comparison."""
        return tuple((t.kind, t.text) for t in self.tokens)

    def __len__(self):
        return len(self.tokens)


@dataclass
class RepoContext:
    """Everything the similarity analyses want to know about one repo."""

    project: str
    dependencies: Set[DependencyId] = field(default_factory=set)
    permissions: Set[str] = field(default_factory=set)
    ui_elements: Set[str] = field(default_factory=set)
    code_files: Dict[str, CodeTokenStream] = field(default_factory=dict)
    is_android: bool = False


def _basename(path: str) -> str:
    return path.rsplit("/", 1)[-1]


def _is_layout_path(path: str) -> bool:
    parts = path.split("/")
    return (
        path.endswith(".xml")
        and len(parts) >= 2
        and parts[-2].startswith("layout")
        and "res" in parts[:-1]
    )


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_xml(path: str, text: str) -> Optional[ET.Element]:
    try:
        return ET.fromstring(text)
    except ET.ParseError as exc:
        log.warning("skipping unparseable xml %s: %s", path, exc)
        return None


def extract_dependencies(snapshot: RepoSnapshot) -> Set[DependencyId]:
    """Declared dependencies from every pom.xml and build.gradle found."""
    deps: Set[DependencyId] = set()
    for path, text in snapshot.files.items():
        name = _basename(path)
        if name == "pom.xml":
            root = _parse_xml(path, text)
            if root is None:
                continue
            for elem in root.iter():
                if _localname(elem.tag) != "dependency":
                    continue
                group = artifact = None
                for child in elem:
                    if _localname(child.tag) == "groupId":
                        group = (child.text or "").strip()
                    elif _localname(child.tag) == "artifactId":
                        artifact = (child.text or "").strip()
                if group and artifact:
                    deps.add(DependencyId(group.lower(), artifact.lower()))
        elif name in ("build.gradle", "build.gradle.kts"):
            for line in text.splitlines():
                m = _GRADLE_COORD_RE.search(line)
                if m:
                    deps.add(DependencyId(m.group(1).lower(), m.group(2).lower()))
                    continue
                m = _GRADLE_MAP_RE.search(line)
                if m:
                    deps.add(DependencyId(m.group(1).lower(), m.group(2).lower()))
    return deps


def _named_attr(elem: ET.Element, leaf: str) -> Optional[str]:
    for key, value in elem.attrib.items():
        if key == leaf or key.endswith("}" + leaf) or key == f"android:{leaf}":
            return value
    return None


def extract_permissions(snapshot: RepoSnapshot) -> Set[str]:
    """uses-permission values, lowercased, platform prefix stripped."""
    perms: Set[str] = set()
    for path, text in snapshot.files.items():
        if _basename(path) != "AndroidManifest.xml":
            continue
        root = _parse_xml(path, text)
        if root is None:
            continue
        for elem in root.iter():
            if _localname(elem.tag) != "uses-permission":
                continue
            value = _named_attr(elem, "name")
            if not value:
                continue
            value = value.strip()
            if value.startswith(_ANDROID_PERMISSION_PREFIX):
                value = value[len(_ANDROID_PERMISSION_PREFIX):]
            perms.add(value.lower())
    return perms


def extract_ui_elements(snapshot: RepoSnapshot) -> Set[str]:
    """Widget tag names and android:id leaf names from layout files."""
    ui: Set[str] = set()
    for path, text in snapshot.files.items():
        if not _is_layout_path(path):
            continue
        root = _parse_xml(path, text)
        if root is None:
            continue
        for elem in root.iter():
            tag = _localname(elem.tag)
            ui.add(tag.rsplit(".", 1)[-1].lower())
            ident = _named_attr(elem, "id")
            if ident and "/" in ident:
                ui.add(ident.rsplit("/", 1)[-1].lower())
    return ui


def is_android(snapshot: RepoSnapshot) -> bool:
    return any(_basename(p) == "AndroidManifest.xml" for p in snapshot.files)


# ---------------------------------------------------------------------------
# Java-family lexer

_JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null
    var record yield sealed permits""".split()
)

# longest first so >>= wins over >> wins over >
_OPERATORS = [
    (">>>=", "urshift_eq"), ("<<=", "lshift_eq"), (">>=", "rshift_eq"),
    (">>>", "urshift"), ("...", "ellipsis"), ("==", "eq_eq"), ("!=", "ne"),
    ("<=", "le"), (">=", "ge"), ("&&", "and_and"), ("||", "or_or"),
    ("++", "inc"), ("--", "dec"), ("+=", "plus_eq"), ("-=", "minus_eq"),
    ("*=", "star_eq"), ("/=", "slash_eq"), ("%=", "percent_eq"),
    ("&=", "amp_eq"), ("|=", "pipe_eq"), ("^=", "caret_eq"), ("<<", "lshift"),
    (">>", "rshift"), ("::", "colcol"), ("->", "arrow"), ("{", "lbrace"),
    ("}", "rbrace"), ("(", "lparen"), (")", "rparen"), ("[", "lbracket"),
    ("]", "rbracket"), (";", "semi"), (",", "comma"), (".", "dot"),
    ("=", "eq"), ("<", "lt"), (">", "gt"), ("+", "plus"), ("-", "minus"),
    ("*", "star"), ("/", "slash"), ("%", "percent"), ("!", "not"),
    ("&", "amp"), ("|", "pipe"), ("^", "caret"), ("~", "tilde"),
    ("?", "question"), (":", "colon"), ("@", "at"),
]

_IDENT_START = re.compile(r"[A-Za-z_$]")
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUM_RE = re.compile(r"(?:0[xXbB][0-9a-fA-F_]+|\d[\d_]*(?:\.\d[\d_]*)?(?:[eE][+-]?\d+)?)[fFdDlL]?")


def tokenize_code(source: str) -> CodeTokenStream:
    """Lex Java-family source into a token stream.

    Comments disappear entirely; string and char literals collapse to a
    bare kind with their contents excluded, so similarity does not hinge
    on message wording.
    """
    tokens: List[CodeToken] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if source.startswith("//", i):
            nl = source.find("\n", i)
            i = n if nl == -1 else nl + 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            i = n if end == -1 else end + 2
            continue
        if ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                j += 2 if source[j] == "\\" else 1
            tokens.append(CodeToken("str"))
            i = j + 1
            continue
        if ch == "'":
            j = i + 1
            while j < n and source[j] != "'":
                j += 2 if source[j] == "\\" else 1
            tokens.append(CodeToken("chr"))
            i = j + 1
            continue
        m = _NUM_RE.match(source, i)
        if m and ch.isdigit():
            tokens.append(CodeToken("num"))
            i = m.end()
            continue
        if _IDENT_START.match(ch):
            m = _IDENT_RE.match(source, i)
            word = m.group()
            if word in _JAVA_KEYWORDS:
                tokens.append(CodeToken(f"kw_{word}"))
            else:
                tokens.append(CodeToken("ident", word))
            i = m.end()
            continue
        for op, kind in _OPERATORS:
            if source.startswith(op, i):
                tokens.append(CodeToken(kind))
                i += len(op)
                break
        else:
            # something outside the language; skip it quietly
            i += 1
    return CodeTokenStream(tokens=tokens)


# ---------------------------------------------------------------------------
# mentions

def _stemmed_words(text: str) -> List[str]:
    """Flatten text into stemmed lowercase subtokens, camelCase split."""
    out: List[str] = []
    for word in re.findall(r"[A-Za-z0-9]+", text):
        for part in split_camel(word):
            out.append(stem(part))
    return out


def _entry_tokens(match_text: str) -> List[str]:
    out: List[str] = []
    for piece in re.split(r"[-_.\s]+", match_text):
        if not piece:
            continue
        for part in split_camel(piece):
            out.append(stem(part))
    return out


def _contains_subsequence(haystack: List[str], needle: List[str]) -> bool:
    if not needle:
        return False
    size = len(needle)
    for start in range(len(haystack) - size + 1):
        if haystack[start : start + size] == needle:
            return True
    return False


def extract_mentions(issue: IssueDocument, vocabulary) -> Set[str]:
    """Which vocabulary entries does the issue text mention?

    `vocabulary` maps a canonical entry to the text to match on (for a
    dependency that is its artifact name); a plain set matches entries
    on themselves. Matching is stemmed and camelCase-insensitive, so
    body text "SnowballStemmer" finds artifact "snowball-stemmer".
    """
    if not isinstance(vocabulary, Mapping):
        vocabulary = {entry: entry for entry in vocabulary}
    text_tokens: List[str] = []
    for text in issue.thread_texts():
        text_tokens.extend(_stemmed_words(text))
    found: Set[str] = set()
    for canonical, match_text in vocabulary.items():
        if _contains_subsequence(text_tokens, _entry_tokens(match_text)):
            found.add(canonical)
    return found


def build_repo_context(snapshot: RepoSnapshot) -> RepoContext:
    """Run every extractor over a snapshot and bundle the results."""
    code: Dict[str, CodeTokenStream] = {}
    for path in sorted(snapshot.files):
        if path.endswith(".java"):
            code[path] = tokenize_code(snapshot.files[path])
    return RepoContext(
        project=snapshot.project,
        dependencies=extract_dependencies(snapshot),
        permissions=extract_permissions(snapshot),
        ui_elements=extract_ui_elements(snapshot),
        code_files=code,
        is_android=is_android(snapshot),
    )
