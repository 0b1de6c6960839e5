"""Line-oriented scenario files.

Grammar (one item per line, UTF-8)::

    file    := { blank | comment | header | entry }
    comment := ws "#" anything
    header  := ws "[" name "]" ws
    entry   := ws key ws "=" ws json-value ws
    name    := key := [A-Za-z_][A-Za-z0-9_]*

Values are JSON: numbers, quoted strings (DSL expressions), booleans and
(nested) lists. Every entry remembers its line number and the byte offset of
its key so later validation errors can point back into the file.
"""

import json
import re
from dataclasses import dataclass, field

from utils.errors import ScenarioError

_HEADER = re.compile(r"^\s*\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]\s*$")
_ENTRY = re.compile(r"^(\s*)([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


@dataclass(frozen=True)
class Entry:
    key: str
    value: object
    line: int
    offset: int


@dataclass
class ScenarioDocument:
    sections: dict = field(default_factory=dict)
    header_lines: dict = field(default_factory=dict)

    def has(self, section, key=None):
        if key is None:
            return section in self.sections
        return key in self.sections.get(section, {})

    def entry(self, section, key):
        return self.sections[section][key]

    def get(self, section, key, default=None):
        e = self.sections.get(section, {}).get(key)
        return default if e is None else e.value

    def keys(self, section):
        return list(self.sections.get(section, {}))

    def error(self, message, section, key=None):
        """ScenarioError located at ``section.key`` (or the section header)."""
        if key is not None and self.has(section, key):
            e = self.entry(section, key)
            return ScenarioError(f"[{section}] {key}: {message}", e.line, e.offset)
        line, offset = self.header_lines.get(section, (None, None))
        return ScenarioError(f"[{section}]: {message}", line, offset)


def _byte_len(text):
    return len(text.encode("utf-8"))


def parse_scenario(text):
    """Parse scenario text into a ScenarioDocument (syntax only, no schema)."""
    doc = ScenarioDocument()
    current = None
    line_start = 0
    for lineno, raw in enumerate(text.splitlines(keepends=True), start=1):
        line = raw.rstrip("\r\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            pass
        elif (m := _HEADER.match(line)) is not None:
            current = m.group(1)
            if current in doc.sections:
                raise ScenarioError(f"duplicate section [{current}]", lineno, line_start)
            doc.sections[current] = {}
            doc.header_lines[current] = (lineno, line_start + _byte_len(line[: line.index("[")]))
        elif (m := _ENTRY.match(line)) is not None:
            key = m.group(2)
            key_offset = line_start + _byte_len(m.group(1))
            if current is None:
                raise ScenarioError(f"entry {key!r} before any [section]", lineno, key_offset)
            if key in doc.sections[current]:
                raise ScenarioError(f"duplicate key {key!r} in [{current}]", lineno, key_offset)
            value_offset = line_start + _byte_len(line[: m.start(3)])
            if not m.group(3):
                raise ScenarioError(f"missing value for {key!r}", lineno, value_offset)
            try:
                value = json.loads(m.group(3))
            except json.JSONDecodeError as err:
                pos = value_offset + _byte_len(m.group(3)[: err.pos])
                raise ScenarioError(f"bad value for {key!r}: {err.msg}", lineno, pos) from None
            doc.sections[current][key] = Entry(key, value, lineno, key_offset)
        else:
            indent = len(line) - len(line.lstrip())
            raise ScenarioError(
                "expected '[section]', 'key = value' or '# comment'",
                lineno,
                line_start + _byte_len(line[:indent]),
            )
        line_start += _byte_len(raw)
    return doc


def load_scenario_file(file_path):
    """Read and parse a scenario file; the raw bytes are returned for hashing."""
    with open(file_path, "rb") as f:
        data = f.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as err:
        line = data[: err.start].count(b"\n") + 1
        raise ScenarioError(f"scenario file is not UTF-8: {err.reason}", line, err.start) from None
    return parse_scenario(text), data
