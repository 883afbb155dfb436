# SPDX-License-Identifier: Apache-2.0

"""Constants and defaults for the occlusion models."""

# Number of drop types in the raindrop model
DROP_TYPE_COUNT = 4

# Default drop types as (shape t, mean radius s in px, drops per megapixel p)
DEFAULT_DROP_TYPES = (
    (0.15, 6.0, 500.0),
    (0.25, 9.0, 300.0),
    (0.10, 12.0, 150.0),
    (0.30, 16.0, 80.0),
)

# Per-drop radius spread around the mean size s
DROP_SIZE_SPREAD = 0.25

# Amplitude of the periodic shape noise n(phi) and its harmonics
SHAPE_NOISE_WEIGHT = 0.1
SHAPE_NOISE_HARMONICS = (3, 4, 5)
SHAPE_NOISE_AMPLITUDE = 0.6

# Water thickness bounds (rho)
DEFAULT_THICKNESS_RANGE = (0.6, 1.2)

# Redraws before a mask-rejected drop is abandoned
MAX_PLACEMENT_TRIES = 100

# Displacement rasters: offsets in [-16, 16] px, PGM encoding (v - 32768) / 2048
DISPLACEMENT_LIMIT = 16.0
DISPLACEMENT_ZERO = 32768
DISPLACEMENT_SCALE = 2048.0
DISPLACEMENT_SIZE = 65

# Non-refractive gaussian drop variant
GAUSSIAN_DROP_COLOR = (0.62, 0.64, 0.68)

# Dirt
DIRT_SOIL_TONE = (0.42, 0.33, 0.22)
DIRT_CENTER_BRIGHTNESS = 0.3
DIRT_EDGE_BRIGHTNESS = 1.0
DIRT_BLOB_SHAPE = 0.25

# Fog
DEFAULT_ATMOSPHERIC_LIGHT = (0.9, 0.9, 0.92)
VISIBILITY_CONTRAST = 0.05

# Parameter bounds used by the estimators
PARAM_BOUNDS = {
    "sigma": (0.0, 12.0),
    "alpha": (0.0, 1.0),
    "beta": (0.0, 100.0),
    "blob_frequency": (0.0, 1500.0),
    "blob_size": (2.0, 32.0),
    "t": (0.0, 0.5),
    "s": (2.0, 24.0),
    "p": (0.0, 1500.0),
}

# Central-difference steps (absolute unless listed as relative)
FD_STEPS = {
    "sigma": 0.05,
    "alpha": 0.005,
    "beta": 0.005,
}
RELATIVE_FD_STEPS = {"beta"}
MIN_RELATIVE_FD_STEP = 1e-4

# Adam step size as a fraction of the parameter's bound width
LEARNING_RATE_FRACTION = {
    "sigma": 0.04,
    "alpha": 0.06,
    "beta": 0.04,
}
