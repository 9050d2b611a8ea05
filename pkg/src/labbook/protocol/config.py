"""Server configuration resolution.

Sources, strongest first: environment variables (LABBOOK_*), config
file (plain ``key=value`` lines, ``#`` comments), command-line flags,
built-in defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidInput

DEFAULT_TOOL_PORT = 7341
DEFAULT_HTTP_PORT = 7342
DEFAULT_HOST = "127.0.0.1"
DEFAULT_AUTHOR = "operator"

# config-file/flag key -> environment variable name
_ENV_KEYS = {
    "repo_root": "LABBOOK_REPO_ROOT",
    "port": "LABBOOK_PORT",
    "http_port": "LABBOOK_HTTP_PORT",
    "author": "LABBOOK_AUTHOR",
    "host": "LABBOOK_HOST",
}


@dataclass(frozen=True)
class Config:
    repo_root: str
    port: int = DEFAULT_TOOL_PORT
    http_port: int = DEFAULT_HTTP_PORT
    host: str = DEFAULT_HOST
    author: str = DEFAULT_AUTHOR


def parse_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise InvalidInput(f"{path}:{lineno}: expected key=value, got {line!r}")
            key = key.strip()
            if key not in _ENV_KEYS:
                raise InvalidInput(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = value.strip()
    return values


def _as_port(value, source: str) -> int:
    try:
        port = int(value)
    except (TypeError, ValueError):
        raise InvalidInput(f"{source} is not an integer port: {value!r}") from None
    if not 0 < port <= 65535:
        raise InvalidInput(f"{source} out of range: {port}")
    return port


def resolve_config(flags: dict, config_path: str | None = None, env=None) -> Config:
    """Merge defaults, flags, config file and environment into a Config."""
    import os

    env = os.environ if env is None else env
    merged: dict = {}
    merged.update({k: v for k, v in flags.items() if v is not None})
    if config_path is not None:
        merged.update(parse_config_file(config_path))
    for key, env_key in _ENV_KEYS.items():
        if env_key in env:
            merged[key] = env[env_key]

    repo_root = merged.get("repo_root")
    if not repo_root:
        raise InvalidInput("no repository path configured (flag, config file or LABBOOK_REPO_ROOT)")
    port = _as_port(merged.get("port", DEFAULT_TOOL_PORT), "port")
    http_port = _as_port(merged.get("http_port", DEFAULT_HTTP_PORT), "http_port")
    if port == http_port:
        raise InvalidInput(f"tool port and http port must differ (both {port})")
    author = str(merged.get("author", DEFAULT_AUTHOR))
    if not author:
        raise InvalidInput("author must not be empty")
    return Config(
        repo_root=str(repo_root),
        port=port,
        http_port=http_port,
        host=str(merged.get("host", DEFAULT_HOST)),
        author=author,
    )
