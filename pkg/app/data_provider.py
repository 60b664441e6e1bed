#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Data Provider Module for the Ising toolkit
Reads experiment inputs: key = value config files, pairing files and planted-sample files
"""

import os
from typing import Any, Dict

from .exceptions import InvalidInputError
from .graph import Pairing
from .planted import PlantedSample
from .utils.logger import get_logger

logger = get_logger(__name__)


class DataProvider:
    """
    Abstract base class for data providers
    """

    def __init__(self, file_path: str):
        self.file_path = str(file_path)
        self._text = self._load_file()

    def _load_file(self) -> str:
        """Load the file contents"""
        try:
            with open(self.file_path, encoding="utf-8") as handle:
                text = handle.read()
            logger.debug(f"Successfully loaded file: {self.file_path}")
            return text
        except FileNotFoundError:
            logger.error(f"File not found: {self.file_path}")
            raise

    def load(self) -> Any:
        raise NotImplementedError


class ConfigFileProvider(DataProvider):
    """
    Config file: `key = value` lines, `#` comments and blank lines ignored.
    Keys may use - or _; values stay strings for the schema to coerce.
    """

    def load(self) -> Dict[str, str]:
        values: Dict[str, str] = {}
        for number, raw in enumerate(self._text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{self.file_path}:{number}: expected key = value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise InvalidInputError(f"{self.file_path}:{number}: empty key")
            values[key.replace("-", "_")] = value
        logger.info(f"Loaded {len(values)} settings from {self.file_path}")
        return values


class PairingFileProvider(DataProvider):
    """Pairing text: header `n d`, then `c mate(c)` per edge"""

    def load(self) -> Pairing:
        return Pairing.from_text(self._text)


class PlantedSampleFileProvider(DataProvider):
    """Pairing text followed by one spin line"""

    def load(self) -> PlantedSample:
        return PlantedSample.from_text(self._text)


def create_data_provider(source_type: str, file_path: str) -> DataProvider:
    """
    Factory function to create appropriate data provider

    Args:
        source_type: 'config', 'pairing' or 'planted'
        file_path: Path of the input file

    Returns:
        DataProvider instance
    """
    if not os.path.exists(file_path):
        raise InvalidInputError(f"input file not found: {file_path}")
    providers = {
        "config": ConfigFileProvider,
        "pairing": PairingFileProvider,
        "planted": PlantedSampleFileProvider,
    }
    if source_type.lower() not in providers:
        raise InvalidInputError(f"Unsupported source type: {source_type}")
    return providers[source_type.lower()](file_path)
