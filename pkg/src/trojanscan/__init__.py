"""trojanscan: backdoor detection for image classifiers via
universal-perturbation fingerprints of their decision boundaries."""

__version__ = "0.1.0"
