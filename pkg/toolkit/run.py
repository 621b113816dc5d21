"""
Hurwitz lattice toolkit - entry point
"""

import logging
import sys

from dotenv import load_dotenv

from cli import main

# Configure logging; stdout carries the reports
logging.basicConfig(
    level=logging.INFO,
    stream=sys.stderr,
    format='%(asctime)s %(levelname)s %(name)s: %(message)s',
)

if __name__ == '__main__':
    load_dotenv()
    sys.exit(main())
