from services.storage.store import DiskStorageService


def test_disk_storage_creates_root_and_writes_lf(tmp_path):
    root = tmp_path / "out"
    storage = DiskStorageService(str(root))

    storage.write("nested/lines.txt", ["a", "b"])

    assert root.is_dir()
    assert (root / "nested" / "lines.txt").read_bytes() == b"a\nb"
    assert storage.read("nested/lines.txt") == ["a", "b"]
    assert storage.file_exists("nested/lines.txt")
    assert not storage.file_exists("missing.txt")


def test_disk_storage_json_and_location(tmp_path):
    storage = DiskStorageService(str(tmp_path))
    storage.write("summary.json", '{"seed": 3}\n')

    assert storage.read_json("summary.json") == {"seed": 3}
    assert storage.reads("summary.json") == '{"seed": 3}\n'
    assert storage.location("summary.json") == f"{tmp_path}/summary.json"
