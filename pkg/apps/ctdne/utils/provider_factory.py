#!/usr/bin/env python3
"""
Provider Factory for ctdne

Factory for creating embedding providers from a resolved run configuration.
"""

import logging
from itertools import product
from typing import List, Optional

from apps.ctdne.errors import ConfigError
from apps.ctdne.models import BiasKind, RunConfig
from apps.ctdne.utils.providers import EmbeddingProvider
from apps.ctdne.utils.provider_implementations import (
    SnapshotProviderImpl,
    StaticWalkProviderImpl,
    TemporalWalkProviderImpl,
)

logger = logging.getLogger(__name__)

BIAS_ORDER = (BiasKind.UNIFORM, BiasKind.LINEAR, BiasKind.EXPONENTIAL)


def variant_name(fs: BiasKind, fg: BiasKind) -> str:
    """Result label of a CTDNE variant, e.g. ctdne-exp-unif"""
    return f"ctdne-{BiasKind(fs).value}-{BiasKind(fg).value}"


class CTDNEProviderFactory:
    """
    Factory for creating embedding provider instances.

    Variants:
    - ctdne: temporal walks with the configured F_s / F_Γ
    - ctdne-<fs>-<fg>: temporal walks with explicit distributions
    - static: time-ignoring walks
    - dtdne: snapshot baseline
    """

    @staticmethod
    def create_temporal_provider(
        cfg: RunConfig, fs: Optional[BiasKind] = None, fg: Optional[BiasKind] = None
    ) -> EmbeddingProvider:
        """Temporal walk provider (defaults to cfg.fs / cfg.fg)"""
        fs = BiasKind(fs or cfg.fs)
        fg = BiasKind(fg or cfg.fg)
        return TemporalWalkProviderImpl(
            fs,
            fg,
            cfg.walk_budget,
            cfg.train_config(),
            options=cfg.sampling_options(),
            threads=cfg.threads,
            name=variant_name(fs, fg),
        )

    @staticmethod
    def create_static_provider(cfg: RunConfig) -> EmbeddingProvider:
        """Static walk baseline provider"""
        return StaticWalkProviderImpl(cfg.walk_budget, cfg.train_config(), threads=cfg.threads)

    @staticmethod
    def create_snapshot_provider(cfg: RunConfig) -> EmbeddingProvider:
        """Snapshot baseline provider"""
        return SnapshotProviderImpl(cfg.snapshot_config(), cfg.snapshot_budget, cfg.train_config(), threads=cfg.threads)

    @classmethod
    def create(cls, cfg: RunConfig, variant: str) -> EmbeddingProvider:
        """Provider for a variant name"""
        if variant == "ctdne":
            return cls.create_temporal_provider(cfg)
        if variant == "static":
            return cls.create_static_provider(cfg)
        if variant == "dtdne":
            return cls.create_snapshot_provider(cfg)
        parts = variant.split("-")
        if len(parts) == 3 and parts[0] == "ctdne":
            try:
                return cls.create_temporal_provider(cfg, BiasKind(parts[1]), BiasKind(parts[2]))
            except ValueError:
                pass
        raise ConfigError(f"unknown variant {variant!r}")

    @classmethod
    def create_all_variants(cls, cfg: RunConfig) -> List[EmbeddingProvider]:
        """The nine F_s x F_Γ temporal variants"""
        return [cls.create_temporal_provider(cfg, fs, fg) for fs, fg in product(BIAS_ORDER, BIAS_ORDER)]
