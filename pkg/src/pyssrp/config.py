"""
Run parameters, declared once as parameter dicts and shared by the solver and
the command line.
"""
import argparse
from dataclasses import dataclass, fields, replace
from typing import Any, Iterable, Mapping, Optional

from pymodaq_utils.logger import set_logger, get_module_name

from pyssrp.errors import ConfigError

logger = set_logger(get_module_name(__file__))

MAX_SEED = 2 ** 64

params = [
    {'title': 'Seed:', 'name': 'seed', 'type': 'int', 'value': 0, 'min': 0,
     'tip': 'Seeds every random choice of a run'},
    {'title': 'Sampling constant:', 'name': 'c', 'type': 'float', 'value': 3.0, 'min': 3.0,
     'tip': 'Constant C of the pivot and detour sampling probabilities'},
    {'title': 'Replacement paths backend:', 'name': 'rp_backend', 'type': 'list', 'value': 'sampled',
     'limits': ['exact', 'sampled']},
    {'title': 'Debug checks:', 'name': 'debug_checks', 'type': 'bool', 'value': False,
     'tip': 'Check the weight requirement of every weight function at every recursion node'},
]

_TYPES = {'int': int, 'float': float, 'str': str}


def get_param(name: str) -> dict:
    for param in params:
        if param['name'] == name:
            return param
    raise KeyError(name)


@dataclass(frozen=True)
class RunConfig:
    """Validated solver settings; defaults come from ``params``."""
    seed: int = get_param('seed')['value']
    c: float = get_param('c')['value']
    rp_backend: str = get_param('rp_backend')['value']
    debug_checks: bool = get_param('debug_checks')['value']

    def __post_init__(self):
        if not 0 <= self.seed < MAX_SEED:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.c < get_param('c')['min']:
            raise ConfigError(f"sampling constant must be at least {get_param('c')['min']}, got {self.c}")
        if self.rp_backend not in get_param('rp_backend')['limits']:
            raise ConfigError(f"unknown replacement paths backend {self.rp_backend!r}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> 'RunConfig':
        names = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in values.items() if key in names and value is not None})

    def with_changes(self, **changes) -> 'RunConfig':
        return replace(self, **changes)


def add_arguments(parser: argparse.ArgumentParser, names: Optional[Iterable[str]] = None) -> None:
    """Add one ``--flag`` per parameter dict to an argparse parser."""
    for param in params:
        if names is not None and param['name'] not in names:
            continue
        flag = '--' + param['name'].replace('_', '-')
        kwargs = {'dest': param['name'], 'help': param.get('tip', param['title'].rstrip(':'))}
        if param['type'] == 'bool':
            parser.add_argument(flag, action='store_true', **kwargs)
        elif param['type'] == 'list':
            parser.add_argument(flag, choices=param['limits'], default=param['value'], **kwargs)
        else:
            parser.add_argument(flag, type=_TYPES[param['type']], default=param['value'], **kwargs)
