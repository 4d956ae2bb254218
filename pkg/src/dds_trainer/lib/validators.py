# SPDX-FileCopyrightText: 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>
# SPDX-License-Identifier: MPL-2.0

from __future__ import annotations

__copyright__ = "(C) 2026 Hidayat Trimarsanto <trimarsanto@gmail.com>"
__author__ = "trimarsanto@gmail.com"
__license__ = "MPL-2.0"

import math
from dataclasses import dataclass
from typing import Any, Union

from dds_trainer.lib.exceptions import ConfigError

_MISSING = object()


@dataclass
class Validator:
    """Declarative validator for one config key.

    Encapsulates the rules (type, range, choices, list items) and the
    transformation of the raw YAML value into a typed Python value.
    ``validate`` returns ``(True, "")`` or ``(False, message)`` and never
    raises; ``transform`` is only called on validated values.
    """

    type: type[Any] | tuple[type[Any], ...] = str
    required: bool = False
    default: Any = None
    nullable: bool = False
    min_value: float | None = None
    max_value: float | None = None
    min_exclusive: bool = False
    max_exclusive: bool = False
    choices: tuple[Any, ...] | None = None
    list_item_type: type[Any] | None = None
    min_length: int | None = None
    list_item_choices: tuple[Any, ...] | None = None

    @property
    def types(self) -> tuple[type[Any], ...]:
        return self.type if isinstance(self.type, tuple) else (self.type,)

    def validate(self, value: Any) -> tuple[bool, str]:
        if value is None:
            if self.nullable:
                return (True, "")
            return (False, "This field must not be null.")

        for expected in self.types:
            ok, err = self._validate_as(expected, value)
            if ok:
                return (True, "")
        return (False, err)

    def _validate_as(self, expected: type[Any], value: Any) -> tuple[bool, str]:
        # Boolean validation (early return, YAML booleans are ints in Python)
        if expected is bool:
            if not isinstance(value, bool):
                return (False, "This field must be a boolean value.")
            return (True, "")

        if expected is int:
            if isinstance(value, bool) or not isinstance(value, int):
                return (False, "This field must be a valid int.")
            return self._check_range(value)

        if expected is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return (False, "This field must be a valid float.")
            if not math.isfinite(value):
                return (False, "This field must be finite.")
            return self._check_range(value)

        if expected is list:
            if not isinstance(value, list):
                return (False, "This field must be a list value.")
            if self.min_length is not None and len(value) < self.min_length:
                return (False, f"List must hold at least {self.min_length} items.")
            for idx, item in enumerate(value):
                ok, err = self._validate_item(item)
                if not ok:
                    return (False, f"Invalid list item [{idx}] {item!r}: {err}")
            return (True, "")

        if expected is str:
            if not isinstance(value, str):
                return (False, "This field must be a string.")
            if self.choices is not None and value not in self.choices:
                return (False, f"Value must be one of {', '.join(map(str, self.choices))}.")
            return (True, "")

        if not isinstance(value, expected):
            return (False, f"This field must be a {expected.__name__}.")
        return (True, "")

    def _validate_item(self, item: Any) -> tuple[bool, str]:
        item_type = self.list_item_type
        if item_type is None:
            return (True, "")
        if item_type is float:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                return (False, "Each item must be a valid float value.")
            if not math.isfinite(item):
                return (False, "Each item must be finite.")
        elif item_type is int:
            if isinstance(item, bool) or not isinstance(item, int):
                return (False, "Each item must be a valid int value.")
        elif item_type is list:
            if not isinstance(item, list):
                return (False, "Each item must be a list.")
        elif not isinstance(item, item_type):
            return (False, f"Each item must be a valid {item_type.__name__} value.")
        if self.list_item_choices is not None and item not in self.list_item_choices:
            return (False, f"Item must be one of {', '.join(map(str, self.list_item_choices))}.")
        if item_type in (int, float):
            return self._check_range(item)
        return (True, "")

    def _check_range(self, value: float) -> tuple[bool, str]:
        if self.choices is not None and value not in self.choices:
            return (False, f"Value must be one of {', '.join(map(str, self.choices))}.")
        if self.min_value is not None:
            if self.min_exclusive and not value > self.min_value:
                return (False, f"Value must be greater than {self.min_value}.")
            if value < self.min_value:
                return (False, f"Value must be at least {self.min_value}.")
        if self.max_value is not None:
            if self.max_exclusive and not value < self.max_value:
                return (False, f"Value must be less than {self.max_value}.")
            if value > self.max_value:
                return (False, f"Value must be at most {self.max_value}.")
        return (True, "")

    def transform(self, value: Any) -> Any:
        if value is None:
            return None
        if isinstance(value, list):
            if self.list_item_type is float:
                return [float(x) for x in value]
            return list(value)
        if float in self.types and int not in self.types and not isinstance(value, bool):
            return float(value)
        return value


Schema = dict[str, Union[Validator, "Schema", bool]]

# a section schema holding OPTIONAL: True may be left out entirely; it then
# validates to None instead of a mapping of defaults
OPTIONAL = "__optional__"


def validate_mapping(data: Any, schema: Schema, path: str = "") -> dict[str, Any]:
    """Validate a nested mapping against ``schema`` and fill in defaults.

    Unknown keys, missing required keys and invalid values raise
    ConfigError carrying the dotted key path of the offending entry.
    """

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("This section must be a mapping.", path=path or "<root>")

    for key in data:
        if key == OPTIONAL:
            raise ConfigError("Unknown key.", path=_join(path, key))
        if not isinstance(key, str):
            raise ConfigError(f"Mapping keys must be strings; got {key!r}.", path=path or "<root>")
        if key not in schema:
            raise ConfigError("Unknown key.", path=_join(path, key))

    result: dict[str, Any] = {}
    for key, rule in schema.items():
        if key == OPTIONAL:
            continue
        key_path = _join(path, key)
        value = data.get(key, _MISSING)
        if isinstance(rule, dict):
            if (value is _MISSING or value is None) and rule.get(OPTIONAL):
                result[key] = None
            else:
                result[key] = validate_mapping(
                    None if value is _MISSING else value, rule, key_path
                )
            continue
        if value is _MISSING:
            if rule.required:
                raise ConfigError("Missing required key.", path=key_path)
            result[key] = rule.default
            continue
        ok, err = rule.validate(value)
        if not ok:
            raise ConfigError(err, path=key_path)
        result[key] = rule.transform(value)
    return result


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


# EOF
