"""Aperture rendering GAN: renderer, metrics, synthetic data and training.

Arrays are float32 NCHW numpy arrays with images in [-1, 1].
"""

from ._argan import (
    AppError,
    CheckpointError,
    ConfigError,
    DataError,
    MetricError,
    Model,
    ObjectiveError,
    RenderError,
    ad,
    aperture_weights,
    center_focus_prior,
    config_keys,
    default_config,
    dsd,
    feature_distance,
    kid,
    make_synthetic_dataset,
    render,
    sample_dof_scale,
    side,
    ssim,
    train,
)


def config_text(**overrides):
    """Default config text with keys replaced by `overrides`."""
    lines = []
    for line in default_config().splitlines():
        key = line.split("=", 1)[0].strip() if "=" in line else None
        if key in overrides:
            value = overrides.pop(key)
            if isinstance(value, bool):
                value = "true" if value else "false"
            line = f"{key} = {value}"
        lines.append(line)
    if overrides:
        raise ConfigError("unknown config keys: " + ", ".join(sorted(overrides)))
    return "\n".join(lines) + "\n"


__all__ = [name for name in dir() if not name.startswith("_")]
