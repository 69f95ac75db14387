"""Workbench for finite semantics of dependent type theories: presheaves
over finite categories, representable maps with comprehension, type
structures, a small logical-framework kernel with a shipped signature
corpus, models with their internal languages, and the lifting calculus
of free theory extensions."""

__version__ = "0.1.0"
