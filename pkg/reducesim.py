import asyncio
import sys

from plugins.commands import dispatch


if __name__ == "__main__":
    sys.exit(asyncio.run(dispatch(sys.argv[1:])))
