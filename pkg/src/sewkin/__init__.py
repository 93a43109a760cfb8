"""SEW redundancy parameterization and 7R inverse kinematics."""
