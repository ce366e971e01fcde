"""Frame-level feature backbones.

Every backbone maps 16 kHz mono samples to a (n_frames, dim) float32 matrix
at 50 Hz (one frame per 20 ms, frame i centered at (i + 0.5) / 50 s).

Two kinds are supported:

* ``fbank64``: a deterministic numpy log-filterbank, always available. Used
  by the test suite and wherever byte-stable hermetic extraction matters.
* ``hf:<model_id>``: hidden states of a frozen transformer speech model
  (requires the ``hf`` extra). The final hidden layer is used unless an
  integer layer index is requested.
"""

from __future__ import annotations

import numpy as np

from .errors import BadAudio

FRAME_RATE = 50
HOP = 320  # samples per 20 ms frame at 16 kHz
FBANK_DIM = 64
_FFT = 512


def _fbank64(samples: np.ndarray) -> np.ndarray:
    n_frames = len(samples) // HOP
    if n_frames == 0:
        return np.zeros((0, FBANK_DIM), dtype=np.float32)
    window = np.hanning(HOP)
    frames = samples[: n_frames * HOP].reshape(n_frames, HOP) * window
    spectrum = np.abs(np.fft.rfft(frames, n=_FFT, axis=1)) ** 2  # (n, 257)
    bands = np.array_split(spectrum[:, 1:], FBANK_DIM, axis=1)
    energy = np.stack([b.mean(axis=1) for b in bands], axis=1)
    return np.log(energy + 1e-10).astype(np.float32)


class FbankBackbone:
    backbone_id = "fbank64"
    dim = FBANK_DIM

    def frames(self, samples: np.ndarray) -> np.ndarray:
        return _fbank64(np.asarray(samples, dtype=np.float32))


class HuggingFaceBackbone:
    """Frozen transformer model; final (or indexed) hidden layer at 50 Hz."""

    def __init__(self, model_id: str, layer: str | int = "last"):
        try:
            import torch
            from transformers import AutoModel
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise BadAudio(
                "hf backbones need the 'hf' extra (torch + transformers)"
            ) from exc
        self._torch = torch
        self.model = AutoModel.from_pretrained(model_id)
        self.model.eval()
        self.layer = layer
        self.backbone_id = model_id.replace("/", "__")
        self.dim = int(self.model.config.hidden_size)

    def frames(self, samples: np.ndarray) -> np.ndarray:  # pragma: no cover
        torch = self._torch
        with torch.no_grad():
            inputs = torch.from_numpy(np.asarray(samples, dtype=np.float32))[None, :]
            out = self.model(inputs, output_hidden_states=True)
        states = out.hidden_states
        layer = -1 if self.layer == "last" else int(self.layer)
        return states[layer][0].cpu().numpy().astype(np.float32)


def make_backbone(spec: str, layer: str | int = "last"):
    if spec == "fbank64":
        return FbankBackbone()
    if spec.startswith("hf:"):
        return HuggingFaceBackbone(spec[3:], layer)
    raise BadAudio(f"unknown backbone {spec!r} (expected 'fbank64' or 'hf:<model_id>')")
