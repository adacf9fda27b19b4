"""
Base interface for intra (I-frame) codecs.

The P-frame pipeline only needs to turn an I frame into bytes and back; any
image codec that implements this interface can be plugged in and is
identified in the container by its one-byte id.
"""

from abc import ABC, abstractmethod

import torch


class IntraCodec(ABC):
    """
    Abstract base class for intra codecs.

    Subclasses set ``codec_id`` (unique, 0..255) and ``name``.
    """

    codec_id: int = -1
    name: str = ""

    @abstractmethod
    def encode(self, frame: torch.Tensor) -> bytes:
        """
        Encode one frame.

        Args:
            frame: ``[3, H, W]`` float tensor in [0, 1]

        Returns:
            Payload bytes
        """
        pass

    @abstractmethod
    def decode(self, payload: bytes) -> torch.Tensor:
        """
        Decode a payload produced by :meth:`encode`.

        Returns:
            ``[3, H, W]`` float tensor in [0, 1]
        """
        pass

    def encode_with_reconstruction(self, frame: torch.Tensor):
        """Payload and the decoder-side reconstruction of ``frame``."""
        payload = self.encode(frame)
        return payload, self.decode(payload)
