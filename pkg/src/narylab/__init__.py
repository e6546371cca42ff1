"""NaryLab package."""
