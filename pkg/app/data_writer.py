#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Data Writer Module for the Ising toolkit
Writes CSV tables with a JSON metadata header, JSON reports and pairing text
"""

import json
import os
import sys
from datetime import datetime, timezone
from typing import Any, Dict, Optional, TextIO

import pandas as pd

from . import __version__
from .rng import ALGORITHM
from .utils.logger import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.12g"


def build_metadata(params: Dict[str, Any], seed: int, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Deterministic header record: params, seed, version and generator"""
    metadata = {"params": params, "seed": int(seed), "version": __version__, "rng": ALGORITHM}
    if extra:
        metadata["results"] = extra
    return metadata


def _to_jsonable(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    if hasattr(value, "item"):
        return value.item()
    return str(value)


class DataWriter:
    """
    Abstract base class for data writers
    """

    def __init__(self, output_path: Optional[str] = None):
        self.output_path = str(output_path) if output_path else None

    def _open(self) -> TextIO:
        if self.output_path is None:
            return sys.stdout
        directory = os.path.dirname(self.output_path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        return open(self.output_path, "w", encoding="utf-8", newline="")

    def _close(self, handle: TextIO):
        if handle is not sys.stdout:
            handle.close()
            logger.info(f"Wrote {self.output_path}")

    def write(self, payload: Any, metadata: Dict[str, Any]) -> bool:
        raise NotImplementedError


class CsvDataWriter(DataWriter):
    """
    CSV with two `#` header lines: a sorted-key JSON metadata record, then the timestamp
    """

    def write(self, payload: pd.DataFrame, metadata: Dict[str, Any]) -> bool:
        handle = self._open()
        try:
            handle.write("# " + json.dumps(metadata, sort_keys=True, default=_to_jsonable) + "\n")
            stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
            handle.write("# " + json.dumps({"timestamp": stamp}) + "\n")
            payload.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        finally:
            self._close(handle)
        return True


class JsonDataWriter(DataWriter):
    """JSON report with the metadata under `metadata`"""

    def write(self, payload: Dict[str, Any], metadata: Dict[str, Any]) -> bool:
        handle = self._open()
        try:
            json.dump({"metadata": metadata, "report": payload}, handle, indent=2, sort_keys=True,
                      default=_to_jsonable)
            handle.write("\n")
        finally:
            self._close(handle)
        return True


class TextDataWriter(DataWriter):
    """Plain text (pairing or planted-sample format); metadata is not written"""

    def write(self, payload: str, metadata: Dict[str, Any]) -> bool:
        handle = self._open()
        try:
            handle.write(payload)
        finally:
            self._close(handle)
        return True


def create_data_writer(output_type: str, output_path: Optional[str] = None) -> DataWriter:
    """
    Factory function to create appropriate data writer

    Args:
        output_type: 'csv', 'json' or 'text'
        output_path: File path; stdout when None

    Returns:
        DataWriter instance
    """
    writers = {"csv": CsvDataWriter, "json": JsonDataWriter, "text": TextDataWriter}
    if output_type.lower() not in writers:
        raise ValueError(f"Unsupported output type: {output_type}")
    return writers[output_type.lower()](output_path)


def read_csv_body(path: str) -> pd.DataFrame:
    """Read a CSV written by CsvDataWriter, skipping the metadata lines"""
    return pd.read_csv(path, comment="#")
