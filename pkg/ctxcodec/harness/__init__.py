"""
Evaluation harness: quality metrics, BD-rate, the residue-vs-conditional
entropy demonstrator and benchmark orchestration.
"""

from ctxcodec.harness.bdrate import RDCurve, RDPoint, bd_rate
from ctxcodec.harness.benchmark import (
    BenchmarkReport,
    RDRow,
    curves_from_csv,
    evaluate_reconstruction,
    load_rd_csv,
    run_benchmark,
    write_rd_csv,
)
from ctxcodec.harness.entropy_demo import EntropyDemoReport, JointPmf, entropy_demo, entropy_gap
from ctxcodec.harness.metrics import ms_ssim, ms_ssim_batch, psnr, sequence_psnr

__all__ = [
    "BenchmarkReport",
    "EntropyDemoReport",
    "JointPmf",
    "RDCurve",
    "RDPoint",
    "RDRow",
    "bd_rate",
    "curves_from_csv",
    "entropy_demo",
    "entropy_gap",
    "evaluate_reconstruction",
    "load_rd_csv",
    "ms_ssim",
    "ms_ssim_batch",
    "psnr",
    "run_benchmark",
    "sequence_psnr",
    "write_rd_csv",
]
