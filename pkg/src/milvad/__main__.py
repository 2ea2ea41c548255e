"""Module entry point so ``python -m milvad`` matches the console script."""

from .cli import main

main()
