"""drivelab: a desk-scale closed-loop supervised fine-tuning laboratory.

A 2D kinematic driving simulator with synthetic experts, two small trainable
policy families, expert-guided rollout collection, fine-tuning on the
collected rollouts, and a closed-loop evaluation harness.
"""

from drivelab.kernels import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
