"""Command-line front end: configs, sweeps, figure datasets and validation."""
