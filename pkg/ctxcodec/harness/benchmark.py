"""
Benchmark orchestration: encode every manifest sequence with every trained
lambda model, measure rate and quality, and emit RD curves.

The RD table has one row per (codec, sequence, lambda) with columns
``codec,sequence,lambda,bpp,psnr,msssim``; ``msssim`` is empty for frames
below the MS-SSIM minimum side.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from ctxcodec.exceptions import ArgumentError, ConfigurationError, MalformedInputError
from ctxcodec.harness.bdrate import RDCurve, RDPoint
from ctxcodec.harness.metrics import MS_SSIM_MIN_SIDE, ms_ssim, sequence_psnr
from ctxcodec.video.frames import FrameSequence
from ctxcodec.video.gop import DEFAULT_GOP_IMAGES, DEFAULT_GOP_YUV
from ctxcodec.video.manifest import ManifestEntry

logger = logging.getLogger(__name__)

RD_COLUMNS = ["codec", "sequence", "lambda", "bpp", "psnr", "msssim"]
METRICS = ("psnr", "msssim")


@dataclass
class RDRow:
    codec: str
    sequence: str
    lam: float
    bpp: float
    psnr: float
    msssim: Optional[float] = None

    def as_record(self) -> dict:
        return {
            "codec": self.codec,
            "sequence": self.sequence,
            "lambda": self.lam,
            "bpp": self.bpp,
            "psnr": self.psnr,
            "msssim": self.msssim,
        }


@dataclass
class BenchmarkReport:
    """Rows of one benchmark run plus the curves built from them."""

    rows: List[RDRow] = field(default_factory=list)

    def curves(self, metric: str = "psnr") -> Dict[Tuple[str, str], RDCurve]:
        """One curve per ``(codec, sequence)``, keyed the same way."""
        if metric not in METRICS:
            raise ArgumentError(f"unknown metric '{metric}', expected one of {METRICS}")
        grouped: Dict[Tuple[str, str], List[RDPoint]] = {}
        for row in self.rows:
            quality = row.psnr if metric == "psnr" else row.msssim
            if quality is None:
                continue
            grouped.setdefault((row.codec, row.sequence), []).append(RDPoint(row.bpp, quality))
        return {key: RDCurve(points, codec=key[0], sequence=key[1]) for key, points in grouped.items()}

    def to_dict(self) -> dict:
        curves = self.curves("psnr")
        return {
            "rows": [row.as_record() for row in self.rows],
            "curves": [
                {"codec": c.codec, "sequence": c.sequence, "points": [asdict(p) for p in c.points]}
                for c in curves.values()
            ],
        }


def evaluate_reconstruction(
    recon: FrameSequence, reference: FrameSequence, metrics: Sequence[str] = METRICS
) -> Dict[str, Optional[float]]:
    """
    Quality of ``recon`` against ``reference``, frame-averaged.

    MS-SSIM is reported as ``None`` when a side is below the 5-scale minimum.

    Raises:
        ArgumentError: On an unknown metric name or mismatched sequences
    """
    unknown = [m for m in metrics if m not in METRICS]
    if unknown:
        raise ArgumentError(f"unknown metric(s) {unknown}, expected a subset of {METRICS}")
    if len(recon) != len(reference):
        raise ArgumentError(f"reconstruction has {len(recon)} frames, reference {len(reference)}")
    result: Dict[str, Optional[float]] = {}
    if "psnr" in metrics:
        result["psnr"] = sequence_psnr(recon.frames, reference.frames)
    if "msssim" in metrics:
        if min(reference.height, reference.width) < MS_SSIM_MIN_SIDE:
            result["msssim"] = None
        else:
            result["msssim"] = ms_ssim(recon.frames, reference.frames)
    return result


def _resolve_checkpoints(codecs: Dict[str, Dict[float, Union[str, Path]]]) -> None:
    for label, by_lambda in codecs.items():
        missing = [lam for lam, path in by_lambda.items() if not Path(path).is_file()]
        if missing:
            raise ConfigurationError(f"codec '{label}' has no checkpoint for lambda {sorted(missing)}")


def _default_gop(entry: ManifestEntry) -> int:
    if entry.gop:
        return entry.gop
    return DEFAULT_GOP_YUV if entry.format == "yuv420" else DEFAULT_GOP_IMAGES


def _run_one(
    label: str, lam: float, checkpoint: Path, entry: ManifestEntry, seq: FrameSequence, device: str, intra_id
) -> RDRow:
    from ctxcodec.codec import ContextualVideoCodec  # deferred: codec -> training -> harness cycle

    codec = ContextualVideoCodec.from_checkpoint(checkpoint, device=device, intra_id=intra_id)
    container, _ = codec.encode_sequence(seq, _default_gop(entry))
    # Measure the decoder output, not the encoder-side reconstruction.
    decoded = codec.decode_sequence(container)
    quality = evaluate_reconstruction(FrameSequence([f.cpu() for f in decoded]), seq)
    bpp = 8 * len(container.to_bytes()) / (len(seq) * seq.width * seq.height)
    logger.info("%s lambda=%g %s: %.4f bpp, %.2f dB", label, lam, entry.name, bpp, quality["psnr"])
    return RDRow(label, entry.name, lam, bpp, quality["psnr"], quality["msssim"])


def run_benchmark(
    entries: Iterable[ManifestEntry],
    codecs: Dict[str, Dict[float, Union[str, Path]]],
    output_dir: Optional[Union[str, Path]] = None,
    device: str = "cpu",
    intra_id: Optional[int] = None,
    workers: int = 1,
) -> BenchmarkReport:
    """
    Encode and decode every sequence with every (codec, lambda) checkpoint.

    Args:
        entries: Manifest entries
        codecs: ``{label: {lambda: checkpoint path}}``; one label per ablation
            configuration
        output_dir: If set, ``rd.csv`` and ``report.json`` are written there
        device: Torch device
        intra_id: Intra plug; defaults to what each checkpoint provides
        workers: Concurrent (sequence, lambda) jobs

    Raises:
        ConfigurationError: If a checkpoint file is missing (names the lambda)
    """
    _resolve_checkpoints(codecs)
    entries = list(entries)
    sequences = {entry.name: entry.load() for entry in entries}
    jobs = [
        (label, float(lam), Path(path), entry)
        for label, by_lambda in codecs.items()
        for lam, path in sorted(by_lambda.items())
        for entry in entries
    ]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(
            pool.map(
                lambda job: _run_one(*job, sequences[job[3].name], device, intra_id),
                jobs,
            )
        )
    report = BenchmarkReport(rows)
    if output_dir is not None:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        write_rd_csv(rows, output_dir / "rd.csv")
        (output_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
    return report


def write_rd_csv(rows: Sequence[RDRow], path: Union[str, Path]) -> None:
    frame = pd.DataFrame([row.as_record() for row in rows], columns=RD_COLUMNS)
    frame.to_csv(path, index=False)


def load_rd_csv(path: Union[str, Path]) -> List[RDRow]:
    """
    Read an RD table.

    Raises:
        MalformedInputError: If the file cannot be parsed or lacks a column
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError, pd.errors.ParserError) as e:
        raise MalformedInputError(f"cannot read RD table {path}: {e}") from e
    missing = [c for c in RD_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedInputError(f"RD table {path} lacks column(s) {missing}")
    rows = []
    for record in frame.to_dict("records"):
        msssim = record["msssim"]
        rows.append(
            RDRow(
                codec=str(record["codec"]),
                sequence=str(record["sequence"]),
                lam=float(record["lambda"]),
                bpp=float(record["bpp"]),
                psnr=float(record["psnr"]),
                msssim=None if msssim is None or (isinstance(msssim, float) and math.isnan(msssim)) else float(msssim),
            )
        )
    return rows


def curves_from_csv(path: Union[str, Path], metric: str = "psnr") -> Dict[Tuple[str, str], RDCurve]:
    return BenchmarkReport(load_rd_csv(path)).curves(metric)
