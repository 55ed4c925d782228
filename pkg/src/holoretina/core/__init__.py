"""Numerical core: fields, propagation, hologram design, eye model, gratings, layout."""
