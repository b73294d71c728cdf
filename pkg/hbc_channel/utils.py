# -*- coding: utf-8 -*-
import hashlib
import io
import json
import logging
from collections import namedtuple
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import IoError, ParseError


logger = logging.getLogger(__name__)


Table = namedtuple('Table', ['frame', 'lines', 'meta'])
"""
Parsed text table: string-typed frame, source line number of every row and
the ``#meta key=value`` header block
"""


META_PREFIX = '#meta'


def read_text(source) -> str:
	"""
	Read whole text from path or file object
	"""
	if hasattr(source, 'read'):
		return source.read()
	try:
		return Path(source).read_text(encoding='utf-8')
	except OSError as e:
		raise IoError(f"Cannot read {source}: {e}") from e


def read_table(source, columns) -> Table:
	"""
	Read comma separated table with ``#`` comments and ``#meta`` header lines
	"""
	text = read_text(source)
	meta = {}
	data_lines = []
	for number, line in enumerate(text.splitlines(), 1):
		stripped = line.strip()
		if stripped.startswith(META_PREFIX):
			key, sep, value = stripped[len(META_PREFIX):].strip().partition('=')
			if not sep or not key.strip():
				raise ParseError(f"Malformed meta line {stripped!r}", number)
			meta[key.strip()] = value.strip()
		elif stripped and not stripped.startswith('#'):
			data_lines.append(number)

	if not data_lines:
		raise ParseError("Missing header row")

	try:
		frame = pd.read_csv(
			io.StringIO(text),
			comment='#',
			dtype=str,
			skipinitialspace=True,
			keep_default_na=False,
			na_filter=False,
		)
	except pd.errors.ParserError as e:
		raise ParseError(str(e)) from e

	header = [str(column).strip() for column in frame.columns]
	if header != list(columns):
		raise ParseError(f"Expected columns {','.join(columns)}, got {','.join(header)}", data_lines[0])
	frame.columns = header
	return Table(frame, data_lines[1:], meta)


def column_values(table: Table, column: str) -> np.ndarray:
	"""
	Convert string column to float array, reporting line of first bad value
	"""
	values = []
	for line, raw in zip(table.lines, table.frame[column]):
		try:
			values.append(float(raw))
		except (TypeError, ValueError):
			raise ParseError(f"{column}: invalid number {raw!r}", line) from None
	return np.array(values, dtype=float)


def write_table(frame: pd.DataFrame, path, meta=None, comments=()) -> Path:
	"""
	Write frame as comma separated table with optional comments and meta block

	Floats are written in shortest round-trip form, missing values as ``NaN``.
	"""
	path = Path(path)
	buf = io.StringIO()
	for comment in comments:
		buf.write(f'# {comment}\n')
	for key, value in (meta or {}).items():
		buf.write(f'{META_PREFIX} {key}={value}\n')
	frame.to_csv(buf, index=False, lineterminator='\n', na_rep='NaN')
	return write_text(path, buf.getvalue())


def canonical_json(value) -> str:
	return json.dumps(value, sort_keys=True, separators=(',', ':'), default=_json_default)


def config_hash(value) -> str:
	return hashlib.sha256(canonical_json(value).encode('utf-8')).hexdigest()


def file_digest(path) -> str:
	try:
		return hashlib.sha256(Path(path).read_bytes()).hexdigest()
	except OSError as e:
		raise IoError(f"Cannot read {path}: {e}") from e


def _json_default(value):
	if isinstance(value, np.ndarray):
		return value.tolist()
	if isinstance(value, np.generic):
		return value.item()
	if isinstance(value, Path):
		return str(value)
	raise TypeError(f"Not serializable: {value!r}")


def write_text(path, text: str) -> Path:
	path = Path(path)
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(text, encoding='utf-8')
	except OSError as e:
		raise IoError(f"Cannot write {path}: {e}") from e
	logger.info("Written %s", path)
	return path


def pretty_json(value) -> str:
	return json.dumps(value, indent=2, sort_keys=True, default=_json_default) + '\n'
