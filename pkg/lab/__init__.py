"""Top-level package of the Muskat norm-inflation laboratory."""
