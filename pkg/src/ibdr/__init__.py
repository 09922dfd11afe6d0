"""Interleaved bidirected Dyck reachability."""
