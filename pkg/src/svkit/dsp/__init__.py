from .audio import CANONICAL_RATE, AudioSignal, load_wav, require_sample_rate, write_wav
from .features import (
    DEFAULT_N_FFT,
    N_COEFFS,
    N_FRAMES,
    FeatureCube,
    FeatureMap,
    FilterBank,
    build_feature_cube,
    frame_signal,
    hz_to_mel,
    mel_filterbank,
    mel_to_hz,
    mfec,
    read_feature_file,
    replicate_for_eval,
    signal_to_feature_map,
    write_feature_file,
)
from .vad import VadConfig, detect_voice

__all__ = [
    "AudioSignal",
    "CANONICAL_RATE",
    "DEFAULT_N_FFT",
    "FeatureCube",
    "FeatureMap",
    "FilterBank",
    "N_COEFFS",
    "N_FRAMES",
    "VadConfig",
    "build_feature_cube",
    "detect_voice",
    "frame_signal",
    "hz_to_mel",
    "load_wav",
    "mel_filterbank",
    "mel_to_hz",
    "mfec",
    "read_feature_file",
    "replicate_for_eval",
    "require_sample_rate",
    "signal_to_feature_map",
    "write_feature_file",
    "write_wav",
]
