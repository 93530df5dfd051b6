"""Verifiability layer for a legacy plaintext-vote store: tracker
commitments over threshold ElGamal, a verifiable re-encryption mix-net,
and a quorum-replicated append-only bulletin board."""

__version__ = "0.1.0"
