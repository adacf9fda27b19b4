"""
Dataset manifest: a JSON list of ``{name, path, format, width, height, frames, gop}``.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from ctxcodec.exceptions import ConfigurationError
from ctxcodec.video.frames import FrameSequence
from ctxcodec.video.gop import DEFAULT_GOP_IMAGES, DEFAULT_GOP_YUV
from ctxcodec.video.images import load_image_sequence
from ctxcodec.video.yuv import load_yuv420

FORMATS = ("yuv420", "images")


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    path: Path
    format: str
    width: Optional[int] = None
    height: Optional[int] = None
    frames: int = 0
    gop: int = 0
    pattern: str = "*.png"

    def load(self) -> FrameSequence:
        """Read the sequence this entry points at."""
        if self.format == "yuv420":
            return load_yuv420(self.path, self.width, self.height, max_frames=self.frames)
        seq = load_image_sequence(self.path, self.pattern)
        if self.frames and len(seq) > self.frames:
            seq = FrameSequence(frames=seq.frames[: self.frames], frame_rate=seq.frame_rate)
        return seq


def load_manifest(path: Union[str, Path]) -> List[ManifestEntry]:
    """
    Parse a manifest file. Relative entry paths resolve against the manifest's directory.

    Raises:
        ConfigurationError: If the file or an entry is invalid
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read manifest {path}: {e}") from e
    if not isinstance(raw, list):
        raise ConfigurationError(f"manifest {path} must hold a JSON list")

    entries = []
    for index, item in enumerate(raw):
        if not isinstance(item, dict) or "name" not in item or "path" not in item:
            raise ConfigurationError(f"manifest entry {index} needs 'name' and 'path'")
        fmt = item.get("format", "yuv420")
        if fmt not in FORMATS:
            raise ConfigurationError(f"manifest entry {item['name']!r}: unknown format {fmt!r}")
        if fmt == "yuv420" and not (item.get("width") and item.get("height")):
            raise ConfigurationError(f"manifest entry {item['name']!r}: yuv420 needs width and height")
        entry_path = Path(item["path"])
        if not entry_path.is_absolute():
            entry_path = path.parent / entry_path
        default_gop = DEFAULT_GOP_YUV if fmt == "yuv420" else DEFAULT_GOP_IMAGES
        entries.append(
            ManifestEntry(
                name=item["name"],
                path=entry_path,
                format=fmt,
                width=item.get("width"),
                height=item.get("height"),
                frames=int(item.get("frames", 0)),
                gop=int(item.get("gop") or default_gop),
                pattern=item.get("pattern", "*.png"),
            )
        )
    return entries
