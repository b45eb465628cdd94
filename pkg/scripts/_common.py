"""Dataclass configs exposed as command-line flags, plus result writing."""

from __future__ import annotations

import argparse
import dataclasses
import json
from pathlib import Path
from typing import get_type_hints

from singularpaths.cli import dumps


def parse_config(cls, description: str, argv=None):
    """Build ``cls`` from flags named after its fields (``--field-name``)."""
    parser = argparse.ArgumentParser(description=description)
    hints = get_type_hints(cls)
    for f in dataclasses.fields(cls):
        flag = "--" + f.name.replace("_", "-")
        kind = hints[f.name]
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        if kind is bool:
            parser.add_argument(flag, action=argparse.BooleanOptionalAction, default=default)
        elif isinstance(default, (list, tuple)):
            item = type(default[0]) if default else float
            parser.add_argument(flag, type=lambda s, item=item: [item(x) for x in s.split(",")], default=default,
                                help="comma separated")
        else:
            parser.add_argument(flag, type=kind, default=default)
    parser.add_argument("--config", default=None, help="JSON file with field overrides")
    ns = parser.parse_args(argv)
    values = {f.name: getattr(ns, f.name) for f in dataclasses.fields(cls)}
    if ns.config:
        values.update(json.loads(Path(ns.config).read_text()))
    return cls(**values)


def write_results(out: str | Path, config, payload: dict) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    dest = out / "results.json"
    dest.write_text(dumps({"config": dataclasses.asdict(config), **payload}) + "\n")
    return dest
