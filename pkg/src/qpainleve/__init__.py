"""q-deformed conformal blocks, q-Painleve VI tau functions and checks of their identities."""

__version__ = "0.1.0"
