"""sepforge: realistic two-speaker mixture forging and separation benchmark.

The package simulates a full-duplex play/record rig (loudspeakers + mic with
host-timing jitter), forges paired realistic/synthetic mixture corpora, trains
a bidirectional-GRU attractor separator on spectrogram masks, and scores
separation with scale-invariant SDR.
"""

__version__ = "0.1.0"
