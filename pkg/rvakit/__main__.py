"Entry point for python -m rvakit"
import sys
from .cli import main

sys.exit(main())
