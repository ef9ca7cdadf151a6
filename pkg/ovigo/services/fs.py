from __future__ import annotations

import os
from pathlib import Path
from typing import Protocol


class FileSystem(Protocol):
    def expanduser(self, path: str) -> str: ...

    def exists(self, path: str) -> bool: ...

    def read_text(self, path: str, encoding: str = "utf-8") -> str: ...

    def read_bytes(self, path: str) -> bytes: ...

    def write_text(self, path: str, text: str, encoding: str = "utf-8") -> None: ...

    def write_bytes(self, path: str, data: bytes) -> None: ...

    def makedirs(self, path: str) -> None: ...


class OsFileSystem:
    def expanduser(self, path: str) -> str:
        return str(Path(path).expanduser())

    def exists(self, path: str) -> bool:
        return Path(path).exists()

    def read_text(self, path: str, encoding: str = "utf-8") -> str:
        return Path(path).read_text(encoding=encoding)

    def read_bytes(self, path: str) -> bytes:
        return Path(path).read_bytes()

    def write_text(self, path: str, text: str, encoding: str = "utf-8") -> None:
        self.makedirs(os.path.dirname(path))
        Path(path).write_text(text, encoding=encoding)

    def write_bytes(self, path: str, data: bytes) -> None:
        self.makedirs(os.path.dirname(path))
        Path(path).write_bytes(data)

    def makedirs(self, path: str) -> None:
        if path:
            Path(path).mkdir(parents=True, exist_ok=True)


def resolve(base_dir: str, path: str) -> str:
    """Resolve *path* relative to *base_dir* unless it is already absolute."""
    if os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


DEFAULT_FS: FileSystem = OsFileSystem()
