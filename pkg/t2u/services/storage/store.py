import json
import logging
import os
from abc import ABC, abstractmethod
from typing import Any, Literal, Mapping, Sequence, TypeAlias

Store_Type: TypeAlias = Literal["disk"]

logger = logging.getLogger(__name__)


class I_Storage(ABC):
    @abstractmethod
    def write(self, path: str, content: Sequence[str] | str):
        pass

    @abstractmethod
    def reads(self, path: str) -> str:
        """
        Reads all content of file as a single string stream.
        """
        pass

    @abstractmethod
    def read(self, path: str) -> Sequence[str]:
        """
        Reads all content of a file and returns one line per element.
        """
        pass

    @abstractmethod
    def file_exists(self, path: str) -> bool:
        pass

    @abstractmethod
    def location(self, path: str) -> str:
        """
        Where a relative path ends up in the underlying store.
        """
        pass


class DiskStorage(I_Storage):
    root_path: str = "."

    def __init__(self, root_path: str = "."):
        self.root_path = root_path + ("/" if not root_path.endswith("/") else "")

        if not os.path.exists(self.root_path):
            logger.info(f"[DISK-STORAGE]: Creating output path {self.root_path}")
            os.makedirs(self.root_path)

        logger.debug(f'Using Disk Storage. Saving files in path "{self.root_path}"')

    def write(self, path: str, content: Sequence[str] | str):
        if not isinstance(content, str) and isinstance(content, Sequence):
            content = "\n".join(content)

        full_path = self.location(path)
        directory = os.path.dirname(full_path)

        if directory and not os.path.exists(directory):
            os.makedirs(directory)

        # newline="" keeps LF endings on every platform
        with open(full_path, "w", encoding="utf-8", newline="") as out_file:
            out_file.write(content)

    def read(self, path: str) -> Sequence[str]:
        with open(self.location(path), "r", encoding="utf-8") as input:
            return [row.rstrip("\n") for row in input]

    def reads(self, path: str) -> str:
        with open(self.location(path), "r", encoding="utf-8") as input:
            return input.read()

    def file_exists(self, path: str) -> bool:
        return os.path.exists(self.location(path))

    def location(self, path: str) -> str:
        return self.root_path + path


class StorageService:
    store_env: Store_Type
    store: I_Storage

    def __init__(self, store_env: Store_Type):
        self.store_env = store_env

    @abstractmethod
    def create_storage(self) -> I_Storage:
        pass

    def write(self, path: str, content: Sequence[str] | str):
        self.store.write(path, content)

    def reads(self, path: str) -> str:
        return self.store.reads(path)

    def read(self, path: str) -> Sequence[str]:
        return self.store.read(path)

    def read_json(self, path: str) -> Mapping[str, Any]:
        data: Mapping[str, Any] = json.loads(self.reads(path))
        return data

    def file_exists(self, path: str) -> bool:
        return self.store.file_exists(path)

    def location(self, path: str) -> str:
        return self.store.location(path)


class DiskStorageService(StorageService):
    root_path: str = "."

    def __init__(self, root_path: str = "."):
        super().__init__("disk")
        self.root_path = root_path
        self.store = self.create_storage()

    def create_storage(self) -> I_Storage:
        return DiskStorage(self.root_path)
