#!/usr/bin/env python3
"""
Validation schemas for run configurations and manifests using Marshmallow.
"""

from typing import Any, Dict

from marshmallow import Schema, fields, validate, validates_schema, ValidationError

from apps.ctdne.errors import ConfigError
from apps.ctdne.models import BiasKind, Favor, InactivePolicy, NegativeScope, RunConfig, SnapshotMode

_DEFAULTS = RunConfig()

BIAS_CHOICES = [kind.value for kind in BiasKind]
FAVOR_CHOICES = [favor.value for favor in Favor]
POSITIVE = validate.Range(min=0, min_inclusive=False)


class RunConfigSchema(Schema):
    """Schema for a fully merged run configuration"""
    input = fields.Str(load_default=_DEFAULTS.input)
    directed = fields.Bool(load_default=_DEFAULTS.directed)
    unit_scale = fields.Float(validate=POSITIVE, load_default=_DEFAULTS.unit_scale)
    fs = fields.Str(validate=validate.OneOf(BIAS_CHOICES), load_default=_DEFAULTS.fs.value)
    fg = fields.Str(validate=validate.OneOf(BIAS_CHOICES), load_default=_DEFAULTS.fg.value)
    omega = fields.Int(
        validate=validate.Range(min=2),
        load_default=_DEFAULTS.omega,
        error_messages={"invalid": "omega must be an integer"}
    )
    walk_length = fields.Int(validate=validate.Range(min=2), load_default=_DEFAULTS.walk_length)
    beta = fields.Int(validate=validate.Range(min=1), allow_none=True, load_default=None)
    walks_per_node = fields.Int(validate=validate.Range(min=1), allow_none=True, load_default=None)
    relax = fields.Bool(load_default=_DEFAULTS.relax)
    dimension = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.dimension)
    negatives = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.negatives)
    lr = fields.Float(validate=POSITIVE, load_default=_DEFAULTS.lr)
    lr_min = fields.Float(validate=POSITIVE, load_default=_DEFAULTS.lr_min)
    online_lr = fields.Float(validate=POSITIVE, allow_none=True, load_default=None)
    epochs = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.epochs)
    shrink_window = fields.Bool(load_default=_DEFAULTS.shrink_window)
    seed = fields.Int(validate=validate.Range(min=0), load_default=_DEFAULTS.seed)
    seeds = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.seeds)
    out = fields.Str(validate=validate.Length(min=1), load_default=_DEFAULTS.out)
    snapshots = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.snapshots)
    inactive_policy = fields.Str(
        validate=validate.OneOf([p.value for p in InactivePolicy]),
        load_default=_DEFAULTS.inactive_policy.value
    )
    snapshot_mode = fields.Str(
        validate=validate.OneOf([m.value for m in SnapshotMode]),
        load_default=_DEFAULTS.snapshot_mode.value
    )
    walks_per_edge = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.walks_per_edge)
    warmup = fields.Float(validate=validate.Range(min=0.0, max=1.0), load_default=_DEFAULTS.warmup)
    batch_edges = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.batch_edges)
    threads = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.threads)
    sgd_workers = fields.Int(validate=validate.Range(min=1), load_default=_DEFAULTS.sgd_workers)
    exp_scale = fields.Float(validate=POSITIVE, allow_none=True, load_default=None)
    exp_favor = fields.Str(validate=validate.OneOf(FAVOR_CHOICES), load_default=_DEFAULTS.exp_favor.value)
    linear_favor = fields.Str(validate=validate.OneOf(FAVOR_CHOICES), load_default=_DEFAULTS.linear_favor.value)
    split_fraction = fields.Float(
        validate=validate.Range(min=0.0, max=1.0, min_inclusive=False, max_inclusive=False),
        load_default=_DEFAULTS.split_fraction
    )
    negative_scope = fields.Str(
        validate=validate.OneOf([s.value for s in NegativeScope]),
        load_default=_DEFAULTS.negative_scope.value
    )
    variant = fields.Str(validate=validate.Length(min=1), load_default=_DEFAULTS.variant)
    all_variants = fields.Bool(load_default=_DEFAULTS.all_variants)
    opt = fields.Bool(load_default=_DEFAULTS.opt)
    export_walks = fields.Bool(load_default=_DEFAULTS.export_walks)

    @validates_schema
    def validate_relations(self, data, **kwargs):
        """Cross-field constraints"""
        if data.get("beta") is not None and data.get("walks_per_node") is not None:
            raise ValidationError("give either beta or walks_per_node (R), not both", "beta")
        if data["walk_length"] < data["omega"]:
            raise ValidationError(
                f"walk length ({data['walk_length']}) must be >= omega ({data['omega']})", "walk_length"
            )
        if data["lr_min"] > data["lr"]:
            raise ValidationError(f"lr_min ({data['lr_min']}) must be <= lr ({data['lr']})", "lr_min")
        if data["dimension"] % data["snapshots"] != 0:
            raise ValidationError(
                f"number of snapshots ({data['snapshots']}) must divide the dimension ({data['dimension']})",
                "snapshots",
            )


class ManifestSchema(Schema):
    """Schema for a run manifest written by the CLI"""
    command = fields.Str(
        required=True,
        validate=validate.OneOf(["train", "stream", "eval", "snapshots", "stats"]),
        error_messages={"required": "Manifest command is required"}
    )
    config = fields.Dict(keys=fields.Str(), required=True, error_messages={"required": "Manifest config is required"})
    derived = fields.Dict(keys=fields.Str(), load_default=dict)
    timings = fields.Dict(keys=fields.Str(), values=fields.Float(), load_default=dict)
    version = fields.Str(load_default="")


def validate_run_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a merged configuration mapping into a RunConfig"""
    schema = RunConfigSchema()
    try:
        return RunConfig.from_dict(schema.load(data))
    except ValidationError as err:
        raise ConfigError(f"Validation error: {err.messages}")


def validate_manifest(data: Dict[str, Any]) -> Dict[str, Any]:
    """Validate a manifest document"""
    schema = ManifestSchema()
    try:
        return schema.load(data)
    except ValidationError as err:
        raise ConfigError(f"Validation error: {err.messages}")
