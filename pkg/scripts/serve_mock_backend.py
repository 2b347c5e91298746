#!/usr/bin/env python3
"""Host the deterministic mock inverter over the TCP wire protocol.

Stands in for a real model server so the remote path can be exercised:

    python3 scripts/serve_mock_backend.py --port 9300 &
    artistream stream --input demo/steady.wav --backend remote:127.0.0.1:9300 --no-shm
"""

import argparse
import time

from artistream.inversion import InversionServer, mock_handler


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=9300)
    args = parser.parse_args()

    server = InversionServer(mock_handler, host=args.host, port=args.port).start()
    host, port = server.address
    print(f"mock inverter listening on {host}:{port}")
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
