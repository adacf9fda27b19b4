"""
Training data: (reference, current) frame pairs from clips.
"""

import logging
from typing import List, Sequence, Tuple

import torch
from torch.utils.data import DataLoader, Dataset

from ctxcodec.exceptions import ArgumentError, EmptyInputError
from ctxcodec.video.frames import FrameSequence

logger = logging.getLogger(__name__)


class ClipDataset(Dataset):
    """
    Consecutive frame pairs with random square crops and horizontal flips.

    The reference is the previous original frame.

    Args:
        clips: Frame sequences of at least two frames
        crop_size: Side of the square crops
        flip: Randomly mirror pairs horizontally
    """

    def __init__(self, clips: Sequence[FrameSequence], crop_size: int = 256, flip: bool = True):
        self.clips = list(clips)
        self.crop_size = crop_size
        self.flip = flip
        self.pairs: List[Tuple[int, int]] = []
        for c, clip in enumerate(self.clips):
            if len(clip) < 2:
                raise ArgumentError(f"clip {c} has {len(clip)} frame(s), pairs need at least 2")
            if clip.height < crop_size or clip.width < crop_size:
                raise ArgumentError(
                    f"clip {c} ({clip.width}x{clip.height}) is smaller than the {crop_size} crop"
                )
            self.pairs += [(c, t) for t in range(1, len(clip))]
        if not self.pairs:
            raise EmptyInputError("no training clips")
        logger.info("%d frame pairs from %d clip(s)", len(self.pairs), len(self.clips))

    def __len__(self) -> int:
        return len(self.pairs)

    def __getitem__(self, index: int) -> Tuple[torch.Tensor, torch.Tensor]:
        c, t = self.pairs[index]
        clip = self.clips[c]
        ref, cur = clip[t - 1], clip[t]
        size = self.crop_size
        top = int(torch.randint(0, clip.height - size + 1, (1,)))
        left = int(torch.randint(0, clip.width - size + 1, (1,)))
        ref = ref[:, top : top + size, left : left + size]
        cur = cur[:, top : top + size, left : left + size]
        if self.flip and bool(torch.rand(1) < 0.5):
            ref, cur = ref.flip(-1), cur.flip(-1)
        return ref, cur


def make_loader(dataset: Dataset, batch_size: int = 4, workers: int = 0, seed: int = 0) -> DataLoader:
    generator = torch.Generator().manual_seed(seed)
    return DataLoader(
        dataset,
        batch_size=batch_size,
        shuffle=True,
        num_workers=workers,
        drop_last=len(dataset) >= batch_size,
        generator=generator,
    )


def endless(loader: DataLoader):
    while True:
        yield from loader
