"""Stateful model checking of actor systems for linearizability."""

__version__ = "0.1.0"
