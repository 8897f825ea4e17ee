"""Collaborative AI drummer.

Plays one measure of drum accompaniment at a time against a click track,
conditioned on the last three measures of the duet and a quantized
skin-conductance level from the human player, and streams a confidence
value back out for the performer-facing display.
"""

__version__ = "0.1.0"
