"""Typecheckers, translations and a cut-elimination engine for HGV, HGVpi and CP."""
