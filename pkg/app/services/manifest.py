from datetime import datetime, timezone
from pathlib import Path

from app.errors import IoError
from app.utils.hashing import file_digest
from app.utils.logger import logger

SCALE_NOTE = (
    "absolute powers are in watts at factor-level accuracy; "
    "detector solid angle and distance normalization are not calibrated"
)


def manifest_lines(out_dir: Path, files: list[Path]) -> list[str]:
    """`path size sha256` per file, paths relative to the output directory."""
    lines = []
    for path in files:
        try:
            size = path.stat().st_size
        except OSError as e:
            raise IoError(f"Cannot stat {path}", reason=str(e))
        lines.append(f"{path.relative_to(out_dir).as_posix()} {size} {file_digest(path)}")
    return lines


def write_manifest(out_dir: Path, scenario_id: str, files: list[Path]) -> Path:
    path = out_dir / f"{scenario_id}_manifest.txt"
    created = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    header = [f"# scenario = {scenario_id}", f"# created = {created}", f"# note = {SCALE_NOTE}"]
    try:
        path.write_text("\n".join(header + manifest_lines(out_dir, files)) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"Cannot write manifest {path}", reason=str(e))
    logger.info(f"Manifest written: {path} ({len(files)} files)")
    return path


def read_manifest(path: Path) -> list[tuple[str, int, str]]:
    entries = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        name, size, digest = line.rsplit(" ", 2)
        entries.append((name, int(size), digest))
    return entries
