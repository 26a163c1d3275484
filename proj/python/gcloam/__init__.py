"""LiDAR odometry and mapping with consistency-graph correspondence filtering."""

from ._core import (
    AteAlignment,
    AteReport,
    Correspondence,
    FeatureKind,
    FeatureSet,
    GcloamError,
    KdTree,
    OdometryFrame,
    PoseSE3,
    Scan,
    SelectionParams,
    SensorConfig,
    Trajectory,
    TrajectoryFormat,
    VoteTable,
    ate_rmse,
    compose,
    consistency_score,
    decode_kitti_scan,
    estimate_relative,
    read_kitti_scan,
    read_trajectory,
    run_pipeline,
    select_features,
    vote_and_filter,
    write_trajectory,
)

__all__ = [
    "AteAlignment",
    "AteReport",
    "Correspondence",
    "FeatureKind",
    "FeatureSet",
    "GcloamError",
    "KdTree",
    "OdometryFrame",
    "PoseSE3",
    "Scan",
    "SelectionParams",
    "SensorConfig",
    "Trajectory",
    "TrajectoryFormat",
    "VoteTable",
    "ate_rmse",
    "compose",
    "consistency_score",
    "decode_kitti_scan",
    "estimate_relative",
    "read_kitti_scan",
    "read_trajectory",
    "run_pipeline",
    "select_features",
    "vote_and_filter",
    "write_trajectory",
]
