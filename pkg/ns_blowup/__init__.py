"""NS Blowup - spectral analysis of Navier-Stokes blowup criteria on the periodic torus."""

__version__ = "0.1.0"
