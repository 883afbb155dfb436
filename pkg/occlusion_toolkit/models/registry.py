# SPDX-License-Identifier: Apache-2.0

"""Occlusion model contract and registry.

An :class:`OcclusionModel` wraps one renderer and knows how to split its
parameter record into the differentiable block w_d and the
non-differentiable block w_nd, as flat float vectors with bounds.
"""

from dataclasses import replace
from typing import Dict, Mapping, Optional, Sequence, Tuple, Type

import numpy as np

from ..core.exceptions import DimensionError, ParameterError
from ..core.rng import RngStream
from ..guidance.maps import BinaryMask
from ..imaging.image import DepthMap, Image
from .compose import compose
from .composite import fence_overlay, render_composite
from .constants import (
    DROP_TYPE_COUNT,
    FD_STEPS,
    LEARNING_RATE_FRACTION,
    MIN_RELATIVE_FD_STEP,
    PARAM_BOUNDS,
    RELATIVE_FD_STEPS,
)
from .dirt import render_dirt
from .displacement import DisplacementField
from .fog import render_fog
from .params import (
    CompositeParams,
    DirtParams,
    DropType,
    FogParams,
    Overlay,
    RaindropParams,
    RaindropVariant,
)
from .raindrop import render_raindrops

Bounds = Tuple[float, float]


def bound_key(name: str) -> str:
    """Bounds family of a parameter name (``p2`` -> ``p``)."""
    return name.rstrip("0123456789")


class OcclusionModel:
    """Base class for the registered occlusion models."""

    name: str = ""
    all_diff_names: Tuple[str, ...] = ()
    all_nd_names: Tuple[str, ...] = ()
    requires_depth: bool = False

    def __init__(
        self,
        nd_free: Optional[Sequence[str]] = None,
        bounds: Optional[Mapping[str, Bounds]] = None,
        diff_free: Optional[Sequence[str]] = None,
    ):
        self.diff_names = self._free_subset(self.all_diff_names, diff_free, "differentiable")
        self.nd_names = self._free_subset(self.all_nd_names, nd_free, "non-differentiable")
        self._bounds: Dict[str, Bounds] = dict(PARAM_BOUNDS)
        for key, (lo, hi) in (bounds or {}).items():
            if not lo < hi:
                raise ParameterError(f"Bounds for {key} must satisfy lo < hi")
            self._bounds[key] = (float(lo), float(hi))

    def _free_subset(
        self, names: Tuple[str, ...], free: Optional[Sequence[str]], kind: str
    ) -> Tuple[str, ...]:
        if free is None:
            return tuple(names)
        unknown = set(free) - set(names)
        if unknown:
            raise ParameterError(f"Unknown {kind} parameters for {self.name}: {sorted(unknown)}")
        return tuple(n for n in names if n in set(free))

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(diff_free={list(self.diff_names)}, "
            f"nd_free={list(self.nd_names)})"
        )

    # Parameter records

    def default_params(self):
        raise NotImplementedError

    def to_dict(self, params) -> Dict[str, float]:
        raise NotImplementedError

    def from_dict(self, values: Mapping[str, float], base=None):
        raise NotImplementedError

    def validate(self, params) -> None:
        """Raise ParameterError when a free parameter leaves its bounds."""
        values = self.to_dict(params)
        for name in self.diff_names + self.nd_names:
            lo, hi = self.bounds(name)
            if not lo <= values[name] <= hi:
                raise ParameterError(
                    f"{self.name}.{name}={values[name]} outside bounds [{lo}, {hi}]"
                )

    # Vector views

    def bounds(self, name: str) -> Bounds:
        if name in self._bounds:
            return self._bounds[name]
        return self._bounds[bound_key(name)]

    def bounds_array(self, names: Sequence[str]) -> np.ndarray:
        return np.array([self.bounds(n) for n in names], dtype=np.float64).reshape(-1, 2)

    @property
    def diff_bounds(self) -> np.ndarray:
        return self.bounds_array(self.diff_names)

    @property
    def nd_bounds(self) -> np.ndarray:
        return self.bounds_array(self.nd_names)

    def diff_vector(self, params) -> np.ndarray:
        values = self.to_dict(params)
        return np.array([values[n] for n in self.diff_names], dtype=np.float64)

    def nd_vector(self, params) -> np.ndarray:
        values = self.to_dict(params)
        return np.array([values[n] for n in self.nd_names], dtype=np.float64)

    def with_diff(self, params, vector: Sequence[float]):
        return self.from_dict(dict(zip(self.diff_names, map(float, vector))), params)

    def with_nd(self, params, vector: Sequence[float]):
        return self.from_dict(dict(zip(self.nd_names, map(float, vector))), params)

    def fd_steps(self, params) -> np.ndarray:
        """Central-difference step per differentiable parameter."""
        values = self.to_dict(params)
        steps = []
        for name in self.diff_names:
            step = FD_STEPS[name]
            if name in RELATIVE_FD_STEPS:
                step = max(step * abs(values[name]), MIN_RELATIVE_FD_STEP)
            steps.append(step)
        return np.array(steps, dtype=np.float64)

    def learning_rates(self) -> np.ndarray:
        """Adam step scale per differentiable parameter."""
        return np.array(
            [
                LEARNING_RATE_FRACTION[n] * (self.bounds(n)[1] - self.bounds(n)[0])
                for n in self.diff_names
            ],
            dtype=np.float64,
        )

    # Rendering

    def render(
        self,
        scene: Image,
        params,
        rng: Optional[RngStream] = None,
        mask: Optional[BinaryMask] = None,
        depth: Optional[DepthMap] = None,
    ) -> Overlay:
        raise NotImplementedError

    def apply(
        self,
        scene: Image,
        params,
        rng: Optional[RngStream] = None,
        mask: Optional[BinaryMask] = None,
        depth: Optional[DepthMap] = None,
    ) -> Image:
        """Render and compose in one call."""
        return compose(scene, self.render(scene, params, rng, mask, depth))


class RaindropModel(OcclusionModel):
    name = "raindrop"
    all_diff_names = ("sigma",)
    all_nd_names = tuple(
        f"{family}{i}" for family in ("t", "s", "p") for i in range(DROP_TYPE_COUNT)
    )

    def __init__(
        self,
        nd_free: Optional[Sequence[str]] = None,
        bounds: Optional[Mapping[str, Bounds]] = None,
        diff_free: Optional[Sequence[str]] = None,
        variant: RaindropVariant = RaindropVariant.FULL,
        field: Optional[DisplacementField] = None,
    ):
        super().__init__(nd_free, bounds, diff_free)
        self.variant = RaindropVariant(variant)
        self.field = field

    def default_params(self) -> RaindropParams:
        return RaindropParams(variant=self.variant)

    def to_dict(self, params: RaindropParams) -> Dict[str, float]:
        values = {"sigma": params.sigma}
        for i, drop_type in enumerate(params.drop_types):
            values[f"t{i}"] = drop_type.shape
            values[f"s{i}"] = drop_type.size
            values[f"p{i}"] = drop_type.frequency
        return values

    def from_dict(
        self, values: Mapping[str, float], base: Optional[RaindropParams] = None
    ) -> RaindropParams:
        base = base or self.default_params()
        current = self.to_dict(base)
        unknown = set(values) - set(current)
        if unknown:
            raise ParameterError(f"Unknown raindrop parameters: {sorted(unknown)}")
        merged = {**current, **values}
        drop_types = tuple(
            DropType(merged[f"t{i}"], merged[f"s{i}"], merged[f"p{i}"])
            for i in range(DROP_TYPE_COUNT)
        )
        return replace(base, sigma=merged["sigma"], drop_types=drop_types)

    def render(self, scene, params, rng=None, mask=None, depth=None) -> Overlay:
        return render_raindrops(scene, params, rng, mask, self.field)


class DirtModel(OcclusionModel):
    name = "dirt"
    all_diff_names = ("sigma", "alpha")
    all_nd_names = ("blob_frequency", "blob_size")

    def default_params(self) -> DirtParams:
        return DirtParams()

    def to_dict(self, params: DirtParams) -> Dict[str, float]:
        return {
            "sigma": params.sigma,
            "alpha": params.alpha,
            "blob_frequency": params.blob_frequency,
            "blob_size": params.blob_size,
        }

    def from_dict(
        self, values: Mapping[str, float], base: Optional[DirtParams] = None
    ) -> DirtParams:
        base = base or self.default_params()
        unknown = set(values) - set(self.to_dict(base))
        if unknown:
            raise ParameterError(f"Unknown dirt parameters: {sorted(unknown)}")
        return replace(base, **{k: float(v) for k, v in values.items()})

    def render(self, scene, params, rng=None, mask=None, depth=None) -> Overlay:
        return render_dirt(scene, params, rng, mask)


class FogModel(OcclusionModel):
    name = "fog"
    all_diff_names = ("beta",)
    requires_depth = True

    def default_params(self) -> FogParams:
        return FogParams()

    def to_dict(self, params: FogParams) -> Dict[str, float]:
        return {"beta": params.beta}

    def from_dict(
        self, values: Mapping[str, float], base: Optional[FogParams] = None
    ) -> FogParams:
        base = base or self.default_params()
        unknown = set(values) - {"beta"}
        if unknown:
            raise ParameterError(f"Unknown fog parameters: {sorted(unknown)}")
        return replace(base, **{k: float(v) for k, v in values.items()})

    def render(self, scene, params, rng=None, mask=None, depth=None) -> Overlay:
        if depth is None:
            raise DimensionError("The fog model needs a depth map")
        return render_fog(scene, depth, params, mask)


class CompositeModel(OcclusionModel):
    """Thin occluder with known transparency; nothing is estimated."""

    name = "composite"

    def default_params(self) -> CompositeParams:
        return fence_overlay(32, 32)

    def to_dict(self, params: CompositeParams) -> Dict[str, float]:
        return {}

    def from_dict(
        self, values: Mapping[str, float], base: Optional[CompositeParams] = None
    ) -> CompositeParams:
        if values:
            raise ParameterError(f"Unknown composite parameters: {sorted(values)}")
        return base or self.default_params()

    def render(self, scene, params, rng=None, mask=None, depth=None) -> Overlay:
        return render_composite(scene, params, rng, mask)


MODELS: Dict[str, Type[OcclusionModel]] = {
    RaindropModel.name: RaindropModel,
    DirtModel.name: DirtModel,
    FogModel.name: FogModel,
    CompositeModel.name: CompositeModel,
}


def get_model(name: str, **kwargs) -> OcclusionModel:
    """Instantiate a registered model by name."""
    try:
        model_type = MODELS[name]
    except KeyError:
        raise ParameterError(
            f"Unknown model '{name}', expected one of {sorted(MODELS)}"
        ) from None
    return model_type(**kwargs)

