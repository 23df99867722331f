"""Uno rules engine, MCTS-averaged double Q-learning, baselines, and game service."""

__version__ = "0.1.0"
