"""Spectral building blocks: transforms, Littlewood-Paley blocks, paraproducts, heat and Leray operators."""
