"""Strict reader for the fixed CSV dialect: comma separator, ``\\n`` line
endings, no quoting. Anything else is rejected with its line number."""

from pathlib import Path
from typing import Iterator, Sequence

from .errors import DataFormatError


def read_lines(path) -> list[str]:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise DataFormatError("file not found", path) from None
    except OSError as exc:
        raise DataFormatError(f"cannot read file: {exc.strerror}", path) from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def read_rows(path, header: Sequence[str], optional: Sequence[str] = ()) -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_number, fields)`` for every data row after the header.

    The header must equal ``header`` optionally followed by a prefix of
    ``optional``; every row must have as many fields as the header.
    """
    lines = read_lines(path)
    if not lines:
        raise DataFormatError("missing header", path, 1)
    got = lines[0].split(",")
    allowed = [list(header) + list(optional[:k]) for k in range(len(optional) + 1)]
    if got not in allowed:
        raise DataFormatError(f"expected header {','.join(header)!r}, got {lines[0]!r}", path, 1)
    width = len(got)
    for lineno, line in enumerate(lines[1:], start=2):
        if '"' in line or "'" in line:
            raise DataFormatError("quoted fields are not allowed", path, lineno)
        if "\r" in line:
            raise DataFormatError("carriage return in line; use \\n line endings", path, lineno)
        fields = line.split(",")
        if len(fields) != width:
            raise DataFormatError(f"expected {width} fields, got {len(fields)}", path, lineno)
        yield lineno, fields
