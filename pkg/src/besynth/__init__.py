"""Best-effort synthesis of LTLf goals in nondeterministic planning domains."""

__version__ = "0.1.0"
