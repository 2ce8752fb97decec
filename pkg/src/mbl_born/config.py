"""Run configuration: a strict JSON schema validated before any compute.

Every section has defaults, so ``{}`` is a valid config. Unknown keys are
rejected at every level. ``to_train_config`` maps the schema onto the
library's ``TrainConfig``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .born import Partition
from .objectives import DEFAULT_BANDWIDTHS, KernelSpec
from .spin import ChainSpec
from .trainer import DriveConfig, TrainConfig

U64 = Field(default=0, ge=0, lt=2**64)


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ChainSection(Strict):
    L_v: int = Field(6, ge=1)
    L_h: int = Field(2, ge=0)
    J_xy: float = 1.0
    J_zz: float = 1.0
    boundary: Literal["open", "periodic"] = "open"
    hidden_layout: Literal["ends", "tail"] = "ends"
    hidden_sites: Optional[list[int]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.L_v + self.L_h < 2:
            raise ValueError("chain needs at least two sites")
        if self.hidden_sites is not None:
            L = self.L_v + self.L_h
            if len(self.hidden_sites) != self.L_h or len(set(self.hidden_sites)) != self.L_h:
                raise ValueError("hidden_sites must list L_h distinct sites")
            if any(not 0 <= s < L for s in self.hidden_sites):
                raise ValueError("hidden_sites entries must lie in 0..L-1")
        return self


class DriveSection(Strict):
    D: float = Field(1e-3, ge=0)
    intervals: int = Field(50, ge=1)
    noise: Literal["literal", "white"] = "literal"


class TrainSection(Strict):
    M: int = Field(100, ge=1)
    N: int = Field(500, ge=1)
    h_d: float = Field(8.0, ge=0)
    T: float = Field(10.0, ge=0)
    initial_state: Literal["plus", "neel"] = "plus"
    variant: Literal["basic", "hidden", "rdbm"] = "hidden"
    bandwidths: list[float] = Field(default_factory=lambda: list(DEFAULT_BANDWIDTHS), min_length=1)
    metric: Literal["index", "hamming"] = "index"
    chunk_size: int = Field(25, ge=1)
    drive: DriveSection = DriveSection()
    track_diagnostics: bool = True
    checkpoint_stride: int = Field(0, ge=0)

    @field_validator("bandwidths")
    @classmethod
    def _positive(cls, v):
        if any(not b > 0 for b in v):
            raise ValueError("bandwidths must be positive")
        return v


class DatasetSection(Strict):
    kind: Literal["digit", "parity", "quantum", "csv"] = "digit"
    digits: list[int] = Field(default_factory=lambda: [0], min_length=1)
    h_d: float = Field(8.0, ge=0)
    T: Optional[float] = Field(None, ge=0)
    path: Optional[str] = None
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if any(not 0 <= d <= 9 for d in self.digits):
            raise ValueError("digits must be in 0..9")
        if self.kind == "csv" and not self.path:
            raise ValueError("dataset kind 'csv' needs a path")
        return self


class CompareSection(Strict):
    realizations: int = Field(10, ge=1)
    variants: list[Literal["basic", "rdbm", "hidden"]] = Field(
        default_factory=lambda: ["basic", "rdbm", "hidden"], min_length=1
    )


class SweepSection(Strict):
    h_values: list[float] = Field(default_factory=lambda: [0.5, 8.0], min_length=1)
    realizations: int = Field(5, ge=1)

    @field_validator("h_values")
    @classmethod
    def _nonneg(cls, v):
        if any(not h >= 0 for h in v):
            raise ValueError("disorder strengths must be >= 0")
        return v


class LevelsSection(Strict):
    L: int = Field(12, ge=2)
    h_values: list[float] = Field(default_factory=lambda: [0.5, 8.0], min_length=1)
    realizations: int = Field(200, ge=1)
    fraction: float = Field(0.5, gt=0, le=1)
    bins: int = Field(20, ge=1)


class ScalingSection(Strict):
    Ls: list[int] = Field(default_factory=lambda: [8, 10, 12], min_length=1)
    h_values: list[float] = Field(default_factory=lambda: [0.5, 8.0], min_length=1)
    realizations: int = Field(100, ge=1)
    fraction: float = Field(0.1, gt=0, le=1)

    @field_validator("Ls")
    @classmethod
    def _even(cls, v):
        if any(L % 2 or L < 6 for L in v):
            raise ValueError("scaling sizes must be even and >= 6")
        return v


class DiagnoseSection(Strict):
    levels: Optional[LevelsSection] = LevelsSection()
    scaling: Optional[ScalingSection] = ScalingSection()


class RecognizeSection(Strict):
    run_dir: Optional[str] = None
    mask: Union[str, list[int]] = "bottom:4"
    clean: Literal["target", "final"] = "target"


class GenDataSection(Strict):
    images: Optional[str] = None
    labels: Optional[str] = None

    @model_validator(mode="after")
    def _pair(self):
        if (self.images is None) != (self.labels is None):
            raise ValueError("images and labels must be given together")
        return self


class RunConfig(Strict):
    experiment: Optional[
        Literal["train", "compare-models", "phase-sweep", "diagnose", "recognize", "gen-data"]
    ] = None
    seed: int = U64
    out: Optional[str] = None
    chain: ChainSection = ChainSection()
    train: TrainSection = TrainSection()
    dataset: DatasetSection = DatasetSection()
    compare: CompareSection = CompareSection()
    sweep: SweepSection = SweepSection()
    diagnose: DiagnoseSection = DiagnoseSection()
    recognize: RecognizeSection = RecognizeSection()
    gen_data: GenDataSection = GenDataSection()

    @model_validator(mode="after")
    def _variant(self):
        if self.train.variant == "basic" and self.chain.L_h:
            raise ValueError("variant 'basic' needs L_h = 0")
        return self

    def dump(self) -> dict:
        return self.model_dump(mode="json")


def load_config(path) -> RunConfig:
    """Parse and validate a JSON config file (raises ``pydantic.ValidationError``)."""
    text = Path(path).read_text()
    return RunConfig.model_validate(json.loads(text))


def partition_of(chain: ChainSection, L_h: int | None = None) -> Partition:
    L_h = chain.L_h if L_h is None else L_h
    if chain.hidden_sites is not None and L_h == chain.L_h:
        return Partition.from_hidden(chain.L_v + L_h, chain.hidden_sites)
    if chain.hidden_layout == "tail":
        return Partition.contiguous(chain.L_v, L_h)
    return Partition.ends(chain.L_v, L_h)


def to_train_config(
    cfg: RunConfig,
    *,
    seed: int | None = None,
    variant: str | None = None,
    h_d: float | None = None,
) -> TrainConfig:
    """Library config for one training run; the basic and driven variants drop hidden units."""
    t = cfg.train
    variant = variant or t.variant
    L_h = cfg.chain.L_h if variant == "hidden" else 0
    part = partition_of(cfg.chain, L_h)
    chain = ChainSpec(part.L, cfg.chain.J_xy, cfg.chain.J_zz, cfg.chain.boundary)
    drive = DriveConfig(t.drive.D, t.drive.intervals, t.drive.noise) if variant == "rdbm" else None
    return TrainConfig(
        chain=chain,
        partition=part,
        M=t.M,
        N=t.N,
        h_d=t.h_d if h_d is None else h_d,
        T=t.T,
        initial_state=t.initial_state,
        kernel=KernelSpec(tuple(t.bandwidths)),
        metric=t.metric,
        seed=cfg.seed if seed is None else seed,
        variant=variant,
        drive=drive,
        chunk_size=t.chunk_size,
        track_diagnostics=t.track_diagnostics,
    )
