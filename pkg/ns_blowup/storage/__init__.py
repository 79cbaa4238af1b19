"""Field files, CSV tables and trajectory directories."""
